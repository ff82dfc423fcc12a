//! `evgen`: convert frame sequences to DVS event streams.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod events;
mod failure;
mod lab;
mod params;
mod synth;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::{CmdResult, Failure};

#[derive(Parser, Debug)]
#[command(name = "evgen", version, about = "Synthetic DVS events from intensity frames")]
struct Cli {
    /// Worker threads for the data-parallel core (output does not depend on it).
    #[arg(long, global = true, env = "EVGEN_THREADS", value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a frame sequence to events.
    Synth(Box<synth::SynthArgs>),
    /// Convert an event file between text and binary.
    Convert(events::ConvertArgs),
    /// Build fixed-count voxel grids from an event file.
    Voxelize(events::VoxelizeArgs),
    /// Render fixed-duration event histograms as PNG.
    Render(events::RenderArgs),
    /// Single-pixel photoreceptor experiments.
    #[command(subcommand)]
    Lab(lab::LabCommand),
    /// List the shipped presets, or print one.
    Presets { name: Option<String> },
}

fn init_threads(threads: Option<usize>) -> CmdResult {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(Failure::usage("--threads must be >= 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(e.into()))?;
    #[cfg(not(feature = "parallel"))]
    log::debug!("built without `parallel`; ignoring --threads {n}");
    Ok(())
}

fn presets(name: Option<String>) -> CmdResult {
    match name {
        None => {
            for (n, _) in evgen::config::PRESETS {
                println!("{n}");
            }
            Ok(())
        }
        Some(n) => {
            let text = evgen::config::preset_text(&n).ok_or_else(|| Failure::usage(format!("unknown preset `{n}`")))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Synth(a) => synth::run(*a),
        Command::Convert(a) => events::convert(a),
        Command::Voxelize(a) => events::voxelize(a),
        Command::Render(a) => events::render(a),
        Command::Lab(c) => lab::run(c),
        Command::Presets { name } => presets(name),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
