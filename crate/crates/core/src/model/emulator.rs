use log::warn;

use super::events::{event_timestamp_us, generate_events, Event, Polarity};
use super::linlog::LinLog;
use super::lowpass::lowpass_update;
use super::noise::{leak_decrement, shot_noise_decision, shot_noise_probability};
use super::thresholds::sample_thresholds_with;
use super::ModelConfig;
use crate::error::{invalid, Error, Result};
use crate::frame::{LumaFrame, LumaSequence};
use crate::par::{map_rows, ExecMode};
use crate::rng::{draw, pixel_key, uniform, Purpose};

/// Shot-noise probabilities above this make the per-step Bernoulli
/// approximation of a Poisson process visibly wrong.
const MAX_NOISE_PROBABILITY: f64 = 0.1;

/// Log intensity and normalized luma of a frame, ready for the pixel model.
#[derive(Debug, Clone)]
pub struct PreparedFrame {
    pub width: usize,
    pub height: usize,
    pub log: Vec<f64>,
    pub norm: Vec<f64>,
}

impl PreparedFrame {
    pub fn new(frame: &LumaFrame, config: &ModelConfig) -> Self {
        let ll = LinLog::new(config.linlog_knee);
        Self {
            width: frame.width,
            height: frame.height,
            log: frame.data.iter().map(|&y| ll.apply(y)).collect(),
            norm: frame.data.iter().map(|&y| (y / 255.0).clamp(0.0, 1.0)).collect(),
        }
    }
}

/// State of one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelState {
    /// Memorized log intensity at the last event.
    pub l_mem: f64,
    /// Lowpass-filtered log intensity.
    pub l_lp: f64,
    pub theta_on: f64,
    pub theta_off: f64,
    noise_key: u64,
}

/// Per-pixel state of the whole array, row-major.
#[derive(Debug, Clone)]
pub struct SensorState {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<PixelState>,
    /// Number of frames consumed after the initializing one.
    pub frame_index: u64,
    /// Time of the last consumed frame, seconds.
    pub t_last: f64,
}

impl SensorState {
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &PixelState {
        &self.pixels[y * self.width + x]
    }
}

/// Streaming frame-to-event converter.
///
/// Created from the first frame, which only initializes the pixels; every
/// later frame yields the events of the interval since the previous one.
#[derive(Debug, Clone)]
pub struct Emulator {
    config: ModelConfig,
    state: SensorState,
    mode: ExecMode,
    warned_noise: bool,
}

impl Emulator {
    pub fn new(first: &LumaFrame, config: ModelConfig) -> Result<Self> {
        Self::with_mode(first, config, ExecMode::default())
    }

    pub fn with_mode(first: &LumaFrame, config: ModelConfig, mode: ExecMode) -> Result<Self> {
        config.validate()?;
        let (w, h) = (first.width, first.height);
        if w == 0 || h == 0 || w > u16::MAX as usize + 1 || h > u16::MAX as usize + 1 {
            return Err(invalid(format!("unsupported sensor size {w}x{h}")));
        }
        if !(first.timestamp >= 0.0 && first.timestamp.is_finite()) {
            return Err(invalid(format!(
                "first frame timestamp must be >= 0, got {}",
                first.timestamp
            )));
        }
        let input = PreparedFrame::new(first, &config);
        let maps = sample_thresholds_with(&config, h, w, mode);
        let pixels = (0..w * h)
            .map(|i| {
                let l = input.log[i];
                let theta_on = maps.on[i];
                let mut l_mem = l;
                if config.leak_rate_hz > 0.0 {
                    // Random leak phase so static pixels do not fire in lockstep.
                    l_mem -= uniform(config.seed, i as u64, 0, Purpose::LeakPhase) * theta_on;
                }
                PixelState {
                    l_mem,
                    l_lp: l,
                    theta_on,
                    theta_off: maps.off[i],
                    noise_key: pixel_key(config.seed, i as u64, Purpose::ShotNoise),
                }
            })
            .collect();
        Ok(Self {
            config,
            state: SensorState {
                width: w,
                height: h,
                pixels,
                frame_index: 0,
                t_last: first.timestamp,
            },
            mode,
            warned_noise: false,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn state(&self) -> &SensorState {
        &self.state
    }

    pub fn set_mode(&mut self, mode: ExecMode) {
        self.mode = mode;
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.state.width, self.state.height)
    }

    /// Consumes the next frame and returns the interval's events in stream order.
    pub fn step(&mut self, frame: &LumaFrame) -> Result<Vec<Event>> {
        let input = PreparedFrame::new(frame, &self.config);
        self.step_prepared(&input, frame.timestamp)
    }

    /// As [`step`](Self::step), for a frame already converted to log intensity.
    pub fn step_prepared(&mut self, input: &PreparedFrame, t: f64) -> Result<Vec<Event>> {
        let (w, h) = self.dims();
        if input.width != w || input.height != h {
            return Err(Error::DimensionMismatch {
                want_w: w,
                want_h: h,
                got_w: input.width,
                got_h: input.height,
            });
        }
        let t_j = self.state.t_last;
        if !(t > t_j) || !t.is_finite() {
            return Err(Error::NonMonotoneTime { prev: t_j, next: t });
        }
        let dt = t - t_j;
        self.state.frame_index += 1;
        let frame = self.state.frame_index;
        let cfg = &self.config;

        if cfg.shot_rate_hz > 0.0 && !self.warned_noise {
            let p = shot_noise_probability(cfg.shot_rate_hz, cfg.shot_bright_factor, 0.0, dt);
            if p > MAX_NOISE_PROBABILITY {
                warn!("shot-noise probability {p:.3} per step is large; use a finer timestamp resolution");
                self.warned_noise = true;
            }
        }

        let rows = map_rows(&mut self.state.pixels, w, self.mode, |y, row| {
            let mut out = Vec::new();
            let base = y * w;
            for (x, px) in row.iter_mut().enumerate() {
                let i = base + x;
                let y_norm = input.norm[i];
                px.l_lp = lowpass_update(px.l_lp, input.log[i], y_norm, dt, cfg.cutoff_hz, cfg.bw_floor);
                if cfg.leak_rate_hz > 0.0 {
                    px.l_mem -= leak_decrement(cfg.leak_rate_hz, px.theta_on, dt);
                }
                let n = generate_events(px.l_lp, &mut px.l_mem, px.theta_on, px.theta_off);
                let noise = if cfg.shot_rate_hz > 0.0 {
                    let p = shot_noise_probability(cfg.shot_rate_hz, cfg.shot_bright_factor, y_norm, dt);
                    shot_noise_decision(draw(px.noise_key, frame), p)
                } else {
                    None
                };
                if noise.is_some() {
                    px.l_mem = px.l_lp;
                }
                if n == 0 && noise.is_none() {
                    continue;
                }
                let signal = n.unsigned_abs();
                let total = signal + noise.is_some() as u64;
                let pol = if n > 0 { Polarity::On } else { Polarity::Off };
                let (ex, ey) = (x as u16, y as u16);
                for k in 1..=signal {
                    out.push(Event::new(event_timestamp_us(k, total, t_j, t), ex, ey, pol));
                }
                if let Some(p) = noise {
                    out.push(Event::new(event_timestamp_us(total, total, t_j, t), ex, ey, p));
                }
            }
            out
        });

        self.state.t_last = t;
        let mut events: Vec<Event> = rows.into_iter().flatten().collect();
        events.sort_unstable();
        Ok(events)
    }
}

/// Converts a whole luma sequence to an ordered event stream.
pub fn synthesize(seq: &LumaSequence, config: &ModelConfig) -> Result<Vec<Event>> {
    synthesize_with(seq, config, ExecMode::default())
}

pub fn synthesize_with(seq: &LumaSequence, config: &ModelConfig, mode: ExecMode) -> Result<Vec<Event>> {
    let frames = seq.frames();
    if frames.len() < 2 {
        return Err(invalid("need at least two frames to synthesize events"));
    }
    let mut emu = Emulator::with_mode(&frames[0], config.clone(), mode)?;
    let mut events = Vec::new();
    for f in &frames[1..] {
        events.extend(emu.step(f)?);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::lin_log;

    fn seq_1px(values: &[f64], dt: f64) -> LumaSequence {
        let frames = values
            .iter()
            .enumerate()
            .map(|(i, &v)| LumaFrame::constant(1, 1, v, i as f64 * dt))
            .collect();
        LumaSequence::new(frames, 1.0 / dt, 1).unwrap()
    }

    #[test]
    fn constant_input_no_events() {
        let frames = (0..20)
            .map(|i| LumaFrame::constant(8, 6, 120.0, i as f64 * 1e-3))
            .collect();
        let seq = LumaSequence::new(frames, 1000.0, 1).unwrap();
        let cfg = ModelConfig {
            cutoff_hz: 200.0,
            ..ModelConfig::default()
        };
        assert!(synthesize(&seq, &cfg).unwrap().is_empty());
    }

    #[test]
    fn single_pixel_three_on_events() {
        let y1 = (20f64.ln() + 0.35).exp();
        let seq = seq_1px(&[20.0, y1], 1e-3);
        let ev = synthesize(&seq, &ModelConfig::ideal(0.1)).unwrap();
        assert_eq!(ev.len(), 3);
        assert!(ev.iter().all(|e| e.polarity == Polarity::On));
        assert_eq!(ev.iter().map(|e| e.t).collect::<Vec<_>>(), vec![250, 500, 750]);
    }

    #[test]
    fn off_events_and_memory() {
        let y1 = (100f64.ln() - 0.25).exp();
        let mut emu = Emulator::new(&LumaFrame::constant(1, 1, 100.0, 0.0), ModelConfig::ideal(0.1)).unwrap();
        let ev = emu.step(&LumaFrame::constant(1, 1, y1, 0.001)).unwrap();
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|e| e.polarity == Polarity::Off));
        let mem = emu.state().pixel(0, 0).l_mem;
        assert!((mem - (100f64.ln() - 0.2)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_steps() {
        let mut emu = Emulator::new(&LumaFrame::constant(2, 2, 50.0, 0.0), ModelConfig::default()).unwrap();
        assert!(matches!(
            emu.step(&LumaFrame::constant(3, 2, 50.0, 0.1)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            emu.step(&LumaFrame::constant(2, 2, 50.0, 0.0)),
            Err(Error::NonMonotoneTime { .. })
        ));
        let one = seq_1px(&[1.0], 1.0);
        assert!(synthesize(&one, &ModelConfig::default()).is_err());
    }

    #[test]
    fn leak_phase_decorrelates() {
        let cfg = ModelConfig {
            sigma_theta: 0.0,
            leak_rate_hz: 1.0,
            seed: 3,
            ..ModelConfig::ideal(0.3)
        };
        let mut emu = Emulator::new(&LumaFrame::constant(2, 1, 80.0, 0.0), cfg).unwrap();
        let mut first: [Option<u64>; 2] = [None, None];
        for k in 1..=2000 {
            for e in emu.step(&LumaFrame::constant(2, 1, 80.0, k as f64 * 1e-3)).unwrap() {
                assert_eq!(e.polarity, Polarity::On);
                first[e.x as usize].get_or_insert(e.t);
            }
        }
        let (a, b) = (first[0].unwrap(), first[1].unwrap());
        assert_ne!(a, b);
    }

    #[test]
    fn leak_rate_follows_threshold() {
        // Two pixels with different thresholds: decrement scales with theta,
        // so both cross once per 1 / leak_rate but at different phases.
        let cfg = ModelConfig {
            leak_rate_hz: 0.1,
            ..ModelConfig::ideal(0.3)
        };
        let mut emu = Emulator::new(&LumaFrame::constant(2, 1, 80.0, 0.0), cfg).unwrap();
        emu.state.pixels[0].theta_on = 0.28;
        emu.state.pixels[1].theta_on = 0.32;
        let before = emu.state.pixels[1].l_mem;
        emu.step(&LumaFrame::constant(2, 1, 80.0, 1.0)).unwrap();
        let after = emu.state.pixels[1].l_mem;
        assert!((before - after - 0.032).abs() < 1e-12);
    }

    #[test]
    fn noise_resets_to_filtered_value() {
        let cfg = ModelConfig {
            shot_rate_hz: 1e5,
            ..ModelConfig::ideal(2.0)
        };
        // p per polarity = 0.5 * 1e5 * 1e-5 = 0.5: every step emits noise,
        // while the signal change stays below one threshold.
        let mut emu = Emulator::new(&LumaFrame::constant(1, 1, 0.0, 0.0), cfg).unwrap();
        let ev = emu.step(&LumaFrame::constant(1, 1, 10.0, 1e-5)).unwrap();
        assert_eq!(ev.len(), 1);
        let px = emu.state().pixel(0, 0);
        assert_eq!(px.l_mem, px.l_lp);
        assert!((px.l_lp - lin_log(10.0, 20.0)).abs() < 1e-12);
    }

    #[test]
    fn modes_are_bit_identical() {
        let frames: Vec<LumaFrame> = (0..30)
            .map(|k| {
                let data = (0..40 * 30)
                    .map(|i| (((i * 7 + k * 13) % 255) as f64).max(1.0))
                    .collect();
                LumaFrame::new(40, 30, data, k as f64 * 2e-3).unwrap()
            })
            .collect();
        let seq = LumaSequence::new(frames, 500.0, 1).unwrap();
        let cfg = ModelConfig {
            cutoff_hz: 100.0,
            leak_rate_hz: 0.5,
            shot_rate_hz: 5.0,
            seed: 42,
            ..ModelConfig::default()
        };
        let a = synthesize_with(&seq, &cfg, ExecMode::Sequential).unwrap();
        let b = synthesize_with(&seq, &cfg, ExecMode::Parallel).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
    }
}
