//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::io::Cursor;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use evgen::frame::{compute_upsample_ratio, LumaFrame, LumaSequence};
use evgen::io::{build_voxel_grid, read_events_binary, read_events_text, write_events_binary, write_events_text};
use evgen::lab::{
    log_space, loglog_slope, measure_motion_blur, GratingExperiment, LatencyExperiment, MovingBarScene,
    PhotoreceptorParams,
};
use evgen::model::{
    lin_log, sample_thresholds, synthesize_with, Emulator, Event, ModelConfig, Polarity, PreparedFrame,
};
use evgen::ExecMode;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_events(n: usize, w: u16, h: u16, seed: u64) -> Vec<Event> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut t = 0u64;
    (0..n)
        .map(|_| {
            t += rng.random_range(0..50);
            let p = if rng.random::<bool>() {
                Polarity::On
            } else {
                Polarity::Off
            };
            Event::new(t, rng.random_range(0..w), rng.random_range(0..h), p)
        })
        .collect()
}

fn upsample_ratio() -> Outcome {
    let u = compute_upsample_ratio(60.0, 1e-3, None).unwrap();
    outcome(u == 17, format!("U = {u} (want 17)"))
}

fn reconstruction_oracle() -> Outcome {
    let (w, h, frames, theta) = (128usize, 128usize, 100usize, 0.2);
    let mut rng = StdRng::seed_from_u64(2024);
    let step = Normal::new(0.0, 6.0).unwrap();
    let mut luma: Vec<f64> = (0..w * h).map(|_| rng.random_range(5.0..250.0)).collect();
    let initial = luma.clone();
    let mut seq = Vec::with_capacity(frames);
    for k in 0..frames {
        if k > 0 {
            for y in luma.iter_mut() {
                *y = (*y + step.sample(&mut rng)).clamp(0.0, 255.0);
            }
        }
        seq.push(LumaFrame::new(w, h, luma.clone(), k as f64 * 1e-3).unwrap());
    }
    let cfg = ModelConfig::ideal(theta);
    let mut emu = Emulator::new(&seq[0], cfg.clone()).unwrap();
    let mut net = vec![(0i64, 0i64); w * h];
    for f in &seq[1..] {
        for e in emu.step(f).unwrap() {
            let c = &mut net[e.y as usize * w + e.x as usize];
            match e.polarity {
                Polarity::On => c.0 += 1,
                Polarity::Off => c.1 += 1,
            }
        }
    }
    let (mut worst_residual, mut worst_ledger) = (0f64, 0f64);
    for i in 0..w * h {
        let l_mem = emu.state().pixels[i].l_mem;
        let final_log = lin_log(luma[i], cfg.linlog_knee);
        worst_residual = worst_residual.max((final_log - l_mem).abs());
        let ledger = lin_log(initial[i], cfg.linlog_knee) + net[i].0 as f64 * theta - net[i].1 as f64 * theta;
        worst_ledger = worst_ledger.max((ledger - l_mem).abs());
    }
    outcome(
        worst_residual < theta && worst_ledger <= 1e-9,
        format!("max |L_final - L_mem| = {worst_residual:.6} (< {theta}); max ledger error = {worst_ledger:.1e}"),
    )
}

fn run_in_pool(threads: usize, seq: &LumaSequence, cfg: &ModelConfig) -> (Vec<u8>, Vec<u8>) {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let events = synthesize_with(seq, cfg, ExecMode::Parallel).unwrap();
        let mut bin = Cursor::new(Vec::new());
        write_events_binary(&events, 96, 64, &mut bin).unwrap();
        let mut text = Vec::new();
        write_events_text(&events, &mut text).unwrap();
        (bin.into_inner(), text)
    })
}

fn determinism() -> Outcome {
    let (w, h) = (96usize, 64usize);
    let frames: Vec<LumaFrame> = (0..60)
        .map(|k| {
            let t = k as f64 * 1e-3;
            let data = (0..w * h)
                .map(|i| {
                    let (x, y) = ((i % w) as f64, (i / w) as f64);
                    127.0 + 120.0 * ((x - 200.0 * t) * 0.2).sin() * (y * 0.1).cos()
                })
                .collect();
            LumaFrame::new(w, h, data, t).unwrap()
        })
        .collect();
    let seq = LumaSequence::new(frames, 1000.0, 1).unwrap();
    let mut cfg = evgen::RunConfig::from_preset("mvsec_day").unwrap().model;
    cfg.seed = 7;
    cfg.shot_rate_hz = 50.0;
    let one = run_in_pool(1, &seq, &cfg);
    let eight = run_in_pool(8, &seq, &cfg);
    let n = (one.0.len() - 16) / 13;
    outcome(
        one == eight && n > 0,
        format!(
            "{n} events; binary and text outputs identical at 1 and 8 threads: {}",
            one == eight
        ),
    )
}

/// Static frame fed for `steps` intervals of `dt`; returns (ON, OFF) counts.
fn run_static(cfg: &ModelConfig, w: usize, h: usize, luma: f64, dt: f64, steps: usize) -> (u64, u64) {
    let frame = LumaFrame::constant(w, h, luma, 0.0);
    let prepared = PreparedFrame::new(&frame, cfg);
    let mut emu = Emulator::new(&frame, cfg.clone()).unwrap();
    let (mut on, mut off) = (0u64, 0u64);
    for k in 1..=steps {
        for e in emu.step_prepared(&prepared, k as f64 * dt).unwrap() {
            match e.polarity {
                Polarity::On => on += 1,
                Polarity::Off => off += 1,
            }
        }
    }
    (on, off)
}

fn shot_noise_calibration() -> Outcome {
    let cfg = ModelConfig {
        shot_rate_hz: 1.0,
        shot_bright_factor: 0.25,
        seed: 5,
        ..ModelConfig::ideal(0.2)
    };
    let (pixels, seconds, dt) = (10_000usize, 100.0, 1e-3);
    let (on, off) = run_static(&cfg, 100, 100, 127.5, dt, (seconds / dt) as usize);
    let rate = (on + off) as f64 / (pixels as f64 * seconds);
    let rel = (rate - 0.625).abs() / 0.625;
    outcome(
        rel <= 0.03,
        format!(
            "{rate:.4} Hz/pixel vs 0.625 ({:.2}% off; ON {on}, OFF {off})",
            rel * 100.0
        ),
    )
}

fn leak_calibration() -> Outcome {
    let cfg = ModelConfig {
        leak_rate_hz: 0.1,
        seed: 9,
        ..ModelConfig::ideal(0.2)
    };
    let (pixels, seconds, dt) = (10_000usize, 100.0, 1e-2);
    let (on, off) = run_static(&cfg, 100, 100, 90.0, dt, (seconds / dt) as usize);
    let rate = on as f64 / (pixels as f64 * seconds);
    let rel = (rate - 0.1).abs() / 0.1;
    outcome(
        rel <= 0.10 && off == 0,
        format!(
            "ON {rate:.4} Hz/pixel vs 0.1 ({:.2}% off); OFF events {off}",
            rel * 100.0
        ),
    )
}

fn threshold_sampling() -> Outcome {
    let cfg = ModelConfig {
        theta_on: 0.3,
        theta_off: 0.3,
        sigma_theta: 0.03,
        seed: 1,
        ..ModelConfig::default()
    };
    let maps = sample_thresholds(&cfg, 260, 346);
    let v = &maps.on;
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = (v.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let min = v.iter().chain(&maps.off).copied().fold(f64::INFINITY, f64::min);
    outcome(
        (mean - 0.3).abs() <= 0.001 && (std - 0.03).abs() <= 0.002 && min >= 0.01,
        format!("mean {mean:.5}, std {std:.5}, min {min:.4}"),
    )
}

fn filter_step_response() -> Outcome {
    let cfg = ModelConfig {
        cutoff_hz: 50.0,
        theta_on: 10.0,
        theta_off: 10.0,
        sigma_theta: 0.0,
        ..ModelConfig::default()
    };
    let dt = 1e-4;
    let (lo, hi) = (100.0f64, 255.0f64);
    let mut emu = Emulator::new(&LumaFrame::constant(1, 1, lo, 0.0), cfg).unwrap();
    let (l0, l1) = (lo.ln(), hi.ln());
    let target = 1.0 - (-1.0f64).exp();
    let mut prev = 0.0;
    let mut crossing = f64::NAN;
    for k in 1..2000 {
        emu.step(&LumaFrame::constant(1, 1, hi, k as f64 * dt)).unwrap();
        let frac = (emu.state().pixels[0].l_lp - l0) / (l1 - l0);
        if frac >= target {
            crossing = (k as f64 - (frac - target) / (frac - prev)) * dt;
            break;
        }
        prev = frac;
    }
    let tau = 1.0 / (2.0 * std::f64::consts::PI * 50.0);
    let rel = (crossing - tau).abs() / tau;
    outcome(
        rel <= 0.02,
        format!(
            "63.2% at {:.4} ms vs {:.4} ms ({:.2}% off)",
            crossing * 1e3,
            tau * 1e3,
            rel * 100.0
        ),
    )
}

fn motion_blur_ordering() -> Outcome {
    let scene = MovingBarScene::default();
    let mut blurs = Vec::new();
    for cutoff in [10.0, 30.0, 100.0, 0.0] {
        let cfg = ModelConfig {
            cutoff_hz: cutoff,
            ..ModelConfig::ideal(0.2)
        };
        let ev = scene.simulate(&cfg, ExecMode::default()).unwrap();
        blurs.push(measure_motion_blur(&ev, scene.speed).unwrap());
    }
    let px: Vec<f64> = blurs.iter().map(|b| b.pixels).collect();
    let monotone = px.windows(2).all(|w| w[0] > w[1]);
    outcome(
        px[3] < 1.0 && px[0] > 4.0 && monotone,
        format!(
            "blur px at 10/30/100/inf Hz = {:.2}/{:.2}/{:.2}/{:.2} ({:.1}/{:.1}/{:.1}/{:.1} ms)",
            px[0], px[1], px[2], px[3], blurs[0].ms, blurs[1].ms, blurs[2].ms, blurs[3].ms
        ),
    )
}

fn latency_slope() -> Outcome {
    let params = PhotoreceptorParams {
        i_dark: 1e-4,
        ..Default::default()
    };
    let points = LatencyExperiment::default()
        .sweep(&log_space(0.1, 100.0, 7), &params, ExecMode::default())
        .unwrap();
    let slope = loglog_slope(&points);
    let misses: u64 = points.iter().map(|p| p.misses).sum();
    outcome(
        (slope + 1.0).abs() <= 0.1 && misses == 0,
        format!(
            "slope {slope:.3} over 0.1..100; median latency {:.3} ms -> {:.4} ms",
            points[0].median * 1e3,
            points[6].median * 1e3
        ),
    )
}

fn grating_events_per_edge() -> Outcome {
    let params = PhotoreceptorParams::default();
    let bright = GratingExperiment::default();
    let dark = GratingExperiment {
        gray: bright.gray / 10.0,
        ..bright
    };
    let b = bright.mean_events_per_edge(&params, 20, ExecMode::default()).unwrap();
    let d = dark.mean_events_per_edge(&params, 20, ExecMode::default()).unwrap();
    outcome(
        b >= 4.0 && d <= 3.0,
        format!("bright {b:.2} events/edge (>= 4), dark {d:.2} (<= 3)"),
    )
}

fn voxel_conservation() -> Outcome {
    let events = random_events(100_000, 346, 260, 3);
    let grid = build_voxel_grid(&events, 260, 346, 10, events.len()).unwrap();
    let polarity_sum: i64 = events.iter().map(|e| e.polarity.sign() as i64).sum();
    let conserved = grid.sum() == polarity_sum as f64;

    let window = &events[..25_000];
    let g = build_voxel_grid(window, 260, 346, 10, 25_000).unwrap();
    let span_s = (window[24_999].t - window[0].t) as f64 * 1e-6;
    let rate = 25_000.0 / span_s;
    let want = (25_000.0 / rate) / 10.0;
    let slice_ok = (g.slice_duration - want).abs() <= 1e-12 * want;
    outcome(
        conserved && slice_ok,
        format!(
            "grid sum {} vs polarity sum {polarity_sum}; N=25000 D=10 slice {:.6} s vs {want:.6} s",
            grid.sum(),
            g.slice_duration
        ),
    )
}

fn io_roundtrip() -> Outcome {
    let events = random_events(100_000, 346, 260, 4);
    let mut text = Vec::new();
    write_events_text(&events, &mut text).unwrap();
    let from_text = read_events_text(&text[..]).unwrap();
    let mut bin = Cursor::new(Vec::new());
    write_events_binary(&events, 346, 260, &mut bin).unwrap();
    let bin = bin.into_inner();
    let (_, from_bin) = read_events_binary(&bin[..]).unwrap();
    outcome(
        from_text == events && from_bin == events && bin.len() == 16 + 13 * events.len(),
        format!("text ok: {}, binary ok: {}", from_text == events, from_bin == events),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let s = Duration::from_secs;
    let criteria: &[Criterion] = &[
        ("upsample ratio", s(1), upsample_ratio),
        ("reconstruction oracle", s(5), reconstruction_oracle),
        ("determinism 1 vs 8 threads", s(10), determinism),
        ("shot-noise calibration", s(30), shot_noise_calibration),
        ("leak calibration", s(30), leak_calibration),
        ("threshold sampling", s(1), threshold_sampling),
        ("filter step response", s(1), filter_step_response),
        ("motion-blur ordering", s(60), motion_blur_ordering),
        ("latency slope", s(60), latency_slope),
        ("grating events per edge", s(30), grating_events_per_edge),
        ("voxel conservation", s(1), voxel_conservation),
        ("I/O roundtrip", s(1), io_roundtrip),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took <= *budget;
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {} [{:.2} s / budget {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
