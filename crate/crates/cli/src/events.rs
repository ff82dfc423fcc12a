use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use log::info;

use evgen::io::{
    build_voxel_grid, read_events_binary, read_events_text, render_windows, write_events_binary, write_events_text,
    write_voxel_grid, EventFrame, EVENT_MAGIC,
};
use evgen::Event;

use crate::failure::{classify_lib, Classify, CmdResult, Failure};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Text,
    Binary,
}

/// Sensor size from flags, then the file header, then the largest coordinate.
#[derive(Args, Debug, Clone, Copy)]
pub struct SizeArgs {
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
}

pub struct EventFile {
    pub size: Option<(usize, usize)>,
    pub events: Vec<Event>,
}

impl EventFile {
    fn dims(&self, flags: SizeArgs) -> CmdResult<(usize, usize)> {
        let inferred = || {
            let w = self.events.iter().map(|e| e.x as usize + 1).max().unwrap_or(1);
            let h = self.events.iter().map(|e| e.y as usize + 1).max().unwrap_or(1);
            (w, h)
        };
        let (hw, hh) = self.size.unwrap_or_else(inferred);
        let (w, h) = (flags.width.unwrap_or(hw), flags.height.unwrap_or(hh));
        if w == 0 || h == 0 {
            return Err(Failure::usage("sensor size must be non-zero"));
        }
        if let Some(e) = self.events.iter().find(|e| e.x as usize >= w || e.y as usize >= h) {
            return Err(Failure::usage(format!(
                "event at ({}, {}) lies outside a {w}x{h} sensor",
                e.x, e.y
            )));
        }
        Ok((w, h))
    }
}

/// Reads a text or binary event file, detected by the binary magic.
pub fn read_event_file(path: &Path) -> CmdResult<EventFile> {
    let ctx = format!("reading {}", path.display());
    let mut f = File::open(path).input(&ctx)?;
    let mut magic = [0u8; 4];
    let n = f.read(&mut magic).input(&ctx)?;
    drop(f);
    let reader = BufReader::new(File::open(path).input(&ctx)?);
    if n == 4 && magic == EVENT_MAGIC {
        let (header, events) = read_events_binary(reader).map_err(|e| classify_input(e, &ctx))?;
        Ok(EventFile {
            size: Some((header.width as usize, header.height as usize)),
            events,
        })
    } else {
        let events = read_events_text(reader).map_err(|e| classify_input(e, &ctx))?;
        Ok(EventFile { size: None, events })
    }
}

fn classify_input(e: evgen::Error, ctx: &str) -> Failure {
    Failure::Input(anyhow::Error::new(e).context(ctx.to_owned()))
}

pub fn save_event_png(frame: &EventFrame, path: &Path) -> CmdResult {
    let img = image::GrayImage::from_raw(frame.width as u32, frame.height as u32, frame.to_gray8(32))
        .ok_or_else(|| Failure::Internal(anyhow::anyhow!("event frame buffer has the wrong size")))?;
    img.save(path).internal(&format!("writing {}", path.display()))
}

fn make_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).internal(&format!("creating {}", dir.display()))
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub output: PathBuf,
    /// Output encoding; defaults to text for `.txt` outputs, binary otherwise.
    #[arg(long, value_enum)]
    pub to: Option<Encoding>,
    #[command(flatten)]
    pub size: SizeArgs,
}

pub fn convert(args: ConvertArgs) -> CmdResult {
    let file = read_event_file(&args.input)?;
    let to = args
        .to
        .unwrap_or(if args.output.extension().is_some_and(|e| e == "txt") {
            Encoding::Text
        } else {
            Encoding::Binary
        });
    let out = File::create(&args.output)
        .map(BufWriter::new)
        .internal(&format!("creating {}", args.output.display()))?;
    match to {
        Encoding::Text => write_events_text(&file.events, out),
        Encoding::Binary => {
            let (w, h) = file.dims(args.size)?;
            let (Ok(w), Ok(h)) = (u16::try_from(w), u16::try_from(h)) else {
                return Err(Failure::usage(format!(
                    "sensor {w}x{h} too large for the binary format"
                )));
            };
            write_events_binary(&file.events, w, h, out)
        }
    }
    .internal("writing events")?;
    info!("wrote {} events to {}", file.events.len(), args.output.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct VoxelizeArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long = "out_dir", value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Events per grid.
    #[arg(long, default_value_t = 25_000)]
    pub n: usize,
    /// Time slices per grid.
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    #[command(flatten)]
    pub size: SizeArgs,
}

pub fn voxelize(args: VoxelizeArgs) -> CmdResult {
    if args.n == 0 || args.d == 0 {
        return Err(Failure::usage("--n and --d must be >= 1"));
    }
    let file = read_event_file(&args.input)?;
    let (w, h) = file.dims(args.size)?;
    let windows = file.events.len() / args.n;
    if windows == 0 {
        return Err(Failure::Input(anyhow::anyhow!(
            "{} events is fewer than one window of {}",
            file.events.len(),
            args.n
        )));
    }
    make_dir(&args.out_dir)?;
    for (k, chunk) in file.events.chunks_exact(args.n).enumerate() {
        let grid = build_voxel_grid(chunk, h, w, args.d, args.n).map_err(|e| classify_lib(e, "building voxel grid"))?;
        let path = args.out_dir.join(format!("voxel_{k:05}.vxg"));
        let out = File::create(&path)
            .map(BufWriter::new)
            .internal(&format!("creating {}", path.display()))?;
        write_voxel_grid(&grid, out).internal("writing voxel grid")?;
    }
    let dropped = file.events.len() % args.n;
    if dropped > 0 {
        info!("dropped {dropped} trailing events that do not fill a window");
    }
    println!("grids {windows} ({}x{}x{}, {} events each)", args.d, h, w, args.n);
    Ok(())
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long = "out_dir", value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Window length, seconds.
    #[arg(long, default_value_t = 0.02)]
    pub window: f64,
    /// Render at most this many windows.
    #[arg(long)]
    pub limit: Option<usize>,
    #[command(flatten)]
    pub size: SizeArgs,
}

pub fn render(args: RenderArgs) -> CmdResult {
    if !(args.window > 0.0 && args.window.is_finite()) {
        return Err(Failure::usage("--window must be positive"));
    }
    let file = read_event_file(&args.input)?;
    let (w, h) = file.dims(args.size)?;
    make_dir(&args.out_dir)?;
    let mut frames = render_windows(&file.events, args.window, h, w);
    if let Some(n) = args.limit {
        frames.truncate(n);
    }
    for (k, f) in frames.iter().enumerate() {
        save_event_png(f, &args.out_dir.join(format!("frame_{k:05}.png")))?;
    }
    println!("frames {} ({w}x{h}, {} ms windows)", frames.len(), args.window * 1e3);
    Ok(())
}
