use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use evgen::frame::{rescale, ImageDirSource, LinearInterpolator, RawGraySource, Upsampler};
use evgen::io::{render_event_frame, BinaryEventWriter, TextEventWriter};
use evgen::{Emulator, Event, ExecMode, LumaFrame, Polarity, RunConfig};

use crate::events::save_event_png;
use crate::failure::{classify_lib, Classify, CmdResult, Failure};
use crate::params::ParamFlags;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventFormat {
    Text,
    Binary,
    Both,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Directory of numbered PGM/PNG frames, or a raw 8-bit grayscale file.
    /// Defaults to the input recorded in a manifest passed via --config.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Frame width of a raw input stream.
    #[arg(long)]
    pub width: Option<usize>,
    /// Frame height of a raw input stream.
    #[arg(long)]
    pub height: Option<usize>,
    /// Start from a shipped preset (see `evgen presets`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Config file (`key = value`) or a run manifest (`.json`); flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long = "out_dir", value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = EventFormat::Text)]
    pub format: EventFormat,
    /// Number of preview event frames to render from t = 0.
    #[arg(long, default_value_t = 0)]
    pub preview: usize,
    /// Preview window length, seconds.
    #[arg(long = "preview_window", default_value_t = 0.02)]
    pub preview_window: f64,
    #[command(flatten)]
    pub params: ParamFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Images,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDesc {
    pub path: PathBuf,
    pub kind: InputKind,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub frames: u64,
}

/// Written next to every synth output; `--config manifest.json` replays the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub input: InputDesc,
    pub seed: u64,
    pub upsample_ratio: u32,
    pub sensor_width: usize,
    pub sensor_height: usize,
    pub format: EventFormat,
    pub duration_s: f64,
    pub wall_clock_s: f64,
    pub event_count: u64,
    pub on_count: u64,
    pub off_count: u64,
    pub outputs: Vec<String>,
}

fn resolve_config(args: &SynthArgs) -> CmdResult<(RunConfig, Option<InputDesc>)> {
    let mut cfg = match &args.preset {
        Some(p) => RunConfig::from_preset(p).map_err(|e| classify_lib(e, "--preset"))?,
        None => RunConfig::default(),
    };
    let mut recorded = None;
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).input(&format!("reading {}", path.display()))?;
        if path.extension().is_some_and(|e| e == "json") {
            let m: RunManifest = serde_json::from_str(&text).usage(&format!("parsing manifest {}", path.display()))?;
            if args.preset.is_some() {
                warn!("manifest config replaces --preset");
            }
            cfg = m.config;
            recorded = Some(m.input);
        } else {
            cfg.apply_text(&text)
                .map_err(|e| classify_lib(e, &format!("in {}", path.display())))?;
        }
    }
    args.params.apply(&mut cfg)?;
    cfg.model.validate().map_err(|e| classify_lib(e, "model config"))?;
    Ok((cfg, recorded))
}

fn describe_input(args: &SynthArgs, recorded: Option<InputDesc>) -> CmdResult<InputDesc> {
    let Some(path) = args.input.clone() else {
        return recorded.ok_or_else(|| Failure::usage("--input is required"));
    };
    let kind = if path.is_dir() {
        InputKind::Images
    } else {
        InputKind::Raw
    };
    let (width, height) = match kind {
        InputKind::Images => (None, None),
        InputKind::Raw => match (args.width, args.height) {
            (Some(w), Some(h)) => (Some(w), Some(h)),
            _ if !path.exists() => {
                return Err(Failure::Input(anyhow::anyhow!(
                    "input {} does not exist",
                    path.display()
                )));
            }
            _ => return Err(Failure::usage("a raw input file needs --width and --height")),
        },
    };
    Ok(InputDesc {
        path: fs::canonicalize(&path).unwrap_or(path),
        kind,
        width,
        height,
        frames: 0,
    })
}

type FrameStream = Box<dyn Iterator<Item = evgen::Result<LumaFrame>>>;

fn open_source(input: &InputDesc) -> CmdResult<FrameStream> {
    let ctx = format!("opening {}", input.path.display());
    match input.kind {
        InputKind::Images => {
            let src = ImageDirSource::open(&input.path).map_err(|e| classify_lib(e, &ctx))?;
            info!("{} frames in {}", src.frame_count(), input.path.display());
            Ok(Box::new(src))
        }
        InputKind::Raw => {
            let file = File::open(&input.path).input(&ctx)?;
            let (w, h) = (input.width.unwrap_or(0), input.height.unwrap_or(0));
            let src = RawGraySource::new(std::io::BufReader::new(file), w, h).map_err(|e| classify_lib(e, &ctx))?;
            Ok(Box::new(src))
        }
    }
}

enum Sink {
    Text(TextEventWriter<BufWriter<File>>),
    Binary(BinaryEventWriter<BufWriter<File>>),
}

fn create(path: &Path) -> CmdResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .internal(&format!("creating {}", path.display()))
}

#[derive(Default)]
struct Tally {
    on: u64,
    off: u64,
}

impl Tally {
    fn add(&mut self, events: &[Event]) {
        for e in events {
            match e.polarity {
                Polarity::On => self.on += 1,
                Polarity::Off => self.off += 1,
            }
        }
    }
}

pub fn run(args: SynthArgs) -> CmdResult {
    let started = Instant::now();
    let (cfg, recorded) = resolve_config(&args)?;
    let mut input = describe_input(&args, recorded)?;
    let pipe = &cfg.pipeline;
    let fps = pipe
        .input_fps
        .ok_or_else(|| Failure::usage("--input_fps is required"))?;
    let ratio = pipe.resolve_ratio().map_err(|e| classify_lib(e, "upsampling"))?;
    if !(args.preview_window > 0.0) {
        return Err(Failure::usage("--preview_window must be positive"));
    }
    let out_size = match (pipe.dvs_w, pipe.dvs_h) {
        (Some(w), Some(h)) => Some((w, h)),
        (None, None) => None,
        _ => return Err(Failure::usage("--dvs_w and --dvs_h must be given together")),
    };
    info!("upsampling {fps} fps input by {ratio}");

    let mut source = open_source(&input)?;
    if let Some((w, h)) = out_size {
        source = Box::new(source.map(move |r| r.and_then(|f| rescale(&f, h, w))));
    }
    let interp = LinearInterpolator;
    let mut frames = Upsampler::new(source, fps, ratio, &interp).map_err(|e| classify_lib(e, "upsampling"))?;
    let read_err = |e: evgen::Error| Failure::Input(anyhow::Error::new(e).context("reading input frames"));
    let first = frames
        .next()
        .ok_or_else(|| Failure::Input(anyhow::anyhow!("input has no frames")))?
        .map_err(read_err)?;
    let (width, height) = (first.width, first.height);
    let mut emu = Emulator::with_mode(&first, cfg.model.clone(), ExecMode::Parallel)
        .map_err(|e| classify_lib(e, "initializing sensor"))?;

    fs::create_dir_all(&args.out_dir).internal(&format!("creating {}", args.out_dir.display()))?;
    let (w16, h16) = match (u16::try_from(width), u16::try_from(height)) {
        (Ok(w), Ok(h)) => (w, h),
        _ => {
            return Err(Failure::usage(format!(
                "sensor {width}x{height} too large for the event format"
            )))
        }
    };
    let mut outputs = Vec::new();
    let mut sinks = Vec::new();
    if matches!(args.format, EventFormat::Text | EventFormat::Both) {
        outputs.push("events.txt".to_owned());
        sinks.push(Sink::Text(TextEventWriter::new(create(
            &args.out_dir.join("events.txt"),
        )?)));
    }
    if matches!(args.format, EventFormat::Binary | EventFormat::Both) {
        outputs.push("events.evb".to_owned());
        let w = BinaryEventWriter::new(create(&args.out_dir.join("events.evb"))?, w16, h16)
            .internal("writing binary header")?;
        sinks.push(Sink::Binary(w));
    }

    let preview_end_us = (args.preview as f64 * args.preview_window * 1e6).round() as u64;
    let mut preview_events = Vec::new();
    let mut tally = Tally::default();
    let mut t_end = first.timestamp;
    let mut steps = 1u64;
    for frame in frames {
        let frame = frame.map_err(read_err)?;
        if (frame.width, frame.height) != (width, height) {
            return Err(Failure::Input(anyhow::anyhow!(
                "frame {steps} is {}x{}, expected {width}x{height}",
                frame.width,
                frame.height
            )));
        }
        let events = emu.step(&frame).internal("emulator step")?;
        t_end = frame.timestamp;
        steps += 1;
        tally.add(&events);
        for s in &mut sinks {
            match s {
                Sink::Text(w) => w.write(&events),
                Sink::Binary(w) => w.write(&events),
            }
            .internal("writing events")?;
        }
        if args.preview > 0 {
            preview_events.extend(events.iter().filter(|e| e.t < preview_end_us));
        }
        if steps % 1000 == 0 {
            debug!("{steps} frames, {} events, t = {t_end:.3} s", tally.on + tally.off);
        }
    }
    for s in sinks {
        match s {
            Sink::Text(w) => w.finish().map(drop),
            Sink::Binary(w) => w.finish().map(drop),
        }
        .internal("finishing event file")?;
    }
    if steps < 2 {
        warn!("only one frame after upsampling; no events generated");
    }

    for k in 0..args.preview {
        let f = render_event_frame(
            &preview_events,
            k as f64 * args.preview_window,
            args.preview_window,
            height,
            width,
        );
        let name = format!("preview_{k:04}.png");
        save_event_png(&f, &args.out_dir.join(&name))?;
        outputs.push(name);
    }

    input.frames = (steps - 1) / ratio as u64 + 1;
    let count = tally.on + tally.off;
    let duration = t_end - first.timestamp;
    let manifest = RunManifest {
        tool: "evgen".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.model.seed,
        config: cfg,
        input,
        upsample_ratio: ratio,
        sensor_width: width,
        sensor_height: height,
        format: args.format,
        duration_s: duration,
        wall_clock_s: started.elapsed().as_secs_f64(),
        event_count: count,
        on_count: tally.on,
        off_count: tally.off,
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).internal("serializing manifest")?;
    fs::write(args.out_dir.join("manifest.json"), json + "\n").internal("writing manifest")?;

    let rate = if duration > 0.0 { count as f64 / duration } else { 0.0 };
    let ratio_on_off = if tally.off > 0 {
        tally.on as f64 / tally.off as f64
    } else {
        f64::INFINITY
    };
    println!("events       {count} (on {}, off {})", tally.on, tally.off);
    println!("sensor       {width}x{height}");
    println!("upsample     {ratio}");
    println!("duration_s   {duration:.6}");
    println!("rate_hz      {rate:.1}");
    println!("on_off_ratio {ratio_on_off:.4}");
    info!("done in {:.2} s", manifest.wall_clock_s);
    Ok(())
}
