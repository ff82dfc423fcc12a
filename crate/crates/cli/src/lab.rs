use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};

use evgen::lab::{
    log_space, loglog_slope, measure_motion_blur, GratingExperiment, LatencyExperiment, LatencyPoint, MovingBarScene,
    PhotoreceptorParams,
};
use evgen::par::map_range;
use evgen::{ExecMode, ModelConfig, Polarity};

use crate::failure::{classify_lib, Classify, CmdResult, Failure};

#[derive(Subcommand, Debug)]
pub enum LabCommand {
    /// Events per edge for a square grating at two brightness levels.
    Grating(GratingArgs),
    /// Median latency and jitter of the first OFF event over an intensity sweep.
    Latency(LatencyArgs),
    /// Motion blur of a moving bar for several lowpass cutoffs.
    Blur(BlurArgs),
}

/// Photoreceptor overrides; unset values keep the built-in defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct PhotoreceptorFlags {
    #[arg(long = "tau_ref")]
    pub tau_ref: Option<f64>,
    #[arg(long = "i_ref")]
    pub i_ref: Option<f64>,
    /// Dark current, in units of `i_ref`.
    #[arg(long = "i_dark")]
    pub i_dark: Option<f64>,
    #[arg(long = "shot_noise_scale")]
    pub shot_noise_scale: Option<f64>,
    /// Event threshold, log units.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Integration step, seconds.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "tau_min")]
    pub tau_min: Option<f64>,
}

impl PhotoreceptorFlags {
    fn resolve(&self, base: PhotoreceptorParams) -> CmdResult<PhotoreceptorParams> {
        let p = PhotoreceptorParams {
            tau_ref: self.tau_ref.unwrap_or(base.tau_ref),
            i_ref: self.i_ref.unwrap_or(base.i_ref),
            i_dark: self.i_dark.unwrap_or(base.i_dark),
            shot_noise_scale: self.shot_noise_scale.unwrap_or(base.shot_noise_scale),
            theta: self.theta.unwrap_or(base.theta),
            dt: self.dt.unwrap_or(base.dt),
            tau_min: self.tau_min.unwrap_or(base.tau_min),
        };
        p.validate().map_err(|e| classify_lib(e, "photoreceptor parameters"))?;
        Ok(p)
    }
}

#[derive(Args, Debug)]
pub struct GratingArgs {
    #[arg(long = "out_dir", value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Photocurrent of the gray strips for the bright condition.
    #[arg(long, default_value_t = 1.0)]
    pub gray: f64,
    /// The dark condition divides `gray` by this.
    #[arg(long = "dark_factor", default_value_t = 10.0)]
    pub dark_factor: f64,
    #[arg(long, default_value_t = 2.0)]
    pub contrast: f64,
    /// Seconds per strip.
    #[arg(long = "half_period", default_value_t = 5e-3)]
    pub half_period: f64,
    #[arg(long, default_value_t = 10)]
    pub cycles: usize,
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[command(flatten)]
    pub pr: PhotoreceptorFlags,
}

#[derive(Args, Debug)]
pub struct LatencyArgs {
    #[arg(long = "out_dir", value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Log-spaced intensities in the sweep.
    #[arg(long, default_value_t = 8)]
    pub points: usize,
    #[arg(long = "i_min", default_value_t = 0.1)]
    pub i_min: f64,
    #[arg(long = "i_max", default_value_t = 100.0)]
    pub i_max: f64,
    #[arg(long, default_value_t = 100)]
    pub seeds: u64,
    /// Photocurrent after the step as a fraction of before.
    #[arg(long = "off_ratio", default_value_t = 0.5)]
    pub off_ratio: f64,
    #[command(flatten)]
    pub pr: PhotoreceptorFlags,
}

#[derive(Args, Debug)]
pub struct BlurArgs {
    #[arg(long = "out_dir", value_name = "DIR")]
    pub out_dir: PathBuf,
    /// Lowpass cutoffs to compare; 0 disables the filter.
    #[arg(long, value_delimiter = ',', default_value = "10,30,100,0")]
    pub cutoffs: Vec<f64>,
    /// Bar speed, pixels per second.
    #[arg(long, default_value_t = 420.0)]
    pub speed: f64,
    /// Event threshold, log units.
    #[arg(long, default_value_t = 0.2)]
    pub theta: f64,
}

pub fn run(cmd: LabCommand) -> CmdResult {
    match cmd {
        LabCommand::Grating(a) => grating(a),
        LabCommand::Latency(a) => latency(a),
        LabCommand::Blur(a) => blur(a),
    }
}

struct Csv {
    out: BufWriter<File>,
    path: PathBuf,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &str) -> CmdResult<Self> {
        fs::create_dir_all(dir).internal(&format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        let out = File::create(&path).internal(&format!("creating {}", path.display()))?;
        let mut csv = Self {
            out: BufWriter::new(out),
            path,
        };
        csv.row(header)?;
        Ok(csv)
    }

    fn row(&mut self, line: &str) -> CmdResult {
        writeln!(self.out, "{line}").internal(&format!("writing {}", self.path.display()))
    }

    fn finish(mut self) -> CmdResult {
        self.out.flush().internal(&format!("writing {}", self.path.display()))
    }
}

fn grating(a: GratingArgs) -> CmdResult {
    if !(a.dark_factor > 0.0) || a.seeds == 0 {
        return Err(Failure::usage("--dark_factor must be positive and --seeds >= 1"));
    }
    let params = a.pr.resolve(PhotoreceptorParams::default())?;
    let bright = GratingExperiment {
        gray: a.gray,
        contrast: a.contrast,
        half_period: a.half_period,
        cycles: a.cycles,
    };
    let dark = GratingExperiment {
        gray: a.gray / a.dark_factor,
        ..bright
    };
    let mut trace = Csv::create(&a.out_dir, "grating_trace.csv", "condition,t_s,current,v_p,events")?;
    let mut summary = Csv::create(
        &a.out_dir,
        "grating_summary.csv",
        "condition,gray,edges,events_per_edge,on_per_rising_edge,off_per_falling_edge,seeds,mean_events_per_edge",
    )?;
    for (name, exp) in [("bright", bright), ("dark", dark)] {
        let (tr, g) = exp.run(&params, 0).map_err(|e| classify_lib(e, name))?;
        let stim = exp.stimulus(params.dt).map_err(|e| classify_lib(e, name))?;
        let mut signed = vec![0i64; tr.v_p.len()];
        for e in &tr.events {
            let i = ((e.t / tr.dt).round() as usize).saturating_sub(1).min(signed.len() - 1);
            signed[i] += e.polarity.sign() as i64;
        }
        for (i, v) in tr.v_p.iter().enumerate() {
            trace.row(&format!(
                "{name},{:.6e},{},{v},{}",
                tr.time(i),
                stim.samples[i],
                signed[i]
            ))?;
        }
        let mean = exp
            .mean_events_per_edge(&params, a.seeds, ExecMode::Parallel)
            .map_err(|e| classify_lib(e, name))?;
        summary.row(&format!(
            "{name},{},{},{},{},{},{},{mean}",
            g.gray, g.edges, g.events_per_edge, g.on_per_rising_edge, g.off_per_falling_edge, a.seeds
        ))?;
        println!("{name:<7} gray {:<8} {mean:.2} events/edge", g.gray);
    }
    trace.finish()?;
    summary.finish()
}

fn latency(a: LatencyArgs) -> CmdResult {
    // A small dark current keeps the sweep photon-limited down to `i_min`.
    let params = a.pr.resolve(PhotoreceptorParams {
        i_dark: 1e-4,
        ..Default::default()
    })?;
    if !(a.i_min > 0.0 && a.i_max > a.i_min) {
        return Err(Failure::usage("need 0 < --i_min < --i_max"));
    }
    let exp = LatencyExperiment {
        seeds: a.seeds,
        off_ratio: a.off_ratio,
        ..Default::default()
    };
    let intensities = log_space(a.i_min, a.i_max, a.points);
    exp.validate(&intensities, &params)
        .map_err(|e| classify_lib(e, "latency sweep"))?;

    let mut trace = Csv::create(&a.out_dir, "latency_trace.csv", "intensity,seed,latency_s")?;
    let mut summary = Csv::create(&a.out_dir, "latency_summary.csv", "intensity,median_s,jitter_s,misses")?;
    let mut points = Vec::with_capacity(intensities.len());
    for &i in &intensities {
        let runs = exp.runs(i, &params, ExecMode::Parallel);
        for (seed, r) in runs.iter().enumerate() {
            let v = r.map(|t| t.to_string()).unwrap_or_default();
            trace.row(&format!("{i},{seed},{v}"))?;
        }
        let p = LatencyPoint::from_runs(i, &runs);
        summary.row(&format!("{},{},{},{}", p.intensity, p.median, p.jitter, p.misses))?;
        points.push(p);
    }
    trace.finish()?;
    summary.finish()?;
    println!("points {}  log-log slope {:.3}", points.len(), loglog_slope(&points));
    Ok(())
}

fn blur(a: BlurArgs) -> CmdResult {
    if a.cutoffs.is_empty() || a.cutoffs.iter().any(|c| !(*c >= 0.0)) {
        return Err(Failure::usage("--cutoffs must be a non-empty list of values >= 0"));
    }
    if !(a.speed > 0.0) {
        return Err(Failure::usage("--speed must be positive"));
    }
    let scene = MovingBarScene {
        speed: a.speed,
        ..Default::default()
    };
    let configs: Vec<ModelConfig> = a
        .cutoffs
        .iter()
        .map(|&c| ModelConfig {
            cutoff_hz: c,
            ..ModelConfig::ideal(a.theta)
        })
        .collect();
    for c in &configs {
        c.validate().map_err(|e| classify_lib(e, "model config"))?;
    }
    let runs = map_range(configs.len(), ExecMode::Sequential, |i| {
        scene.simulate(&configs[i], ExecMode::Parallel)
    });

    let mut trace = Csv::create(&a.out_dir, "blur_trace.csv", "cutoff_hz,t_s,x,y,x_compensated")?;
    let mut summary = Csv::create(&a.out_dir, "blur_summary.csv", "cutoff_hz,blur_px,blur_ms,events")?;
    for (cutoff, run) in a.cutoffs.iter().zip(runs) {
        let events = run.internal("simulating moving bar")?;
        for e in events.iter().filter(|e| e.polarity == Polarity::On) {
            let t = e.t as f64 * 1e-6;
            let xc = e.x as f64 + 0.5 - a.speed * t;
            trace.row(&format!("{cutoff},{t},{},{},{xc}", e.x, e.y))?;
        }
        let b = measure_motion_blur(&events, scene.speed).map_err(|e| Failure::Internal(e.into()))?;
        summary.row(&format!("{cutoff},{},{},{}", b.pixels, b.ms, b.events))?;
        println!("cutoff {cutoff:>6} Hz  blur {:.2} px ({:.2} ms)", b.pixels, b.ms);
    }
    trace.finish()?;
    summary.finish()
}
