use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{crossing_count, Polarity};
use crate::rng::{CounterRng, Purpose};

/// Photocurrents below this (in units of `i_ref`) are clipped before the log.
const CURRENT_FLOOR: f64 = 1e-9;

/// Behavioral parameters of a single logarithmic photoreceptor.
///
/// Currents are normalized so that `i_ref` has time constant `tau_ref`; the
/// time constant scales as `tau_ref * i_ref / I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotoreceptorParams {
    pub tau_ref: f64,
    pub i_ref: f64,
    pub i_dark: f64,
    /// Shot-noise amplitude: per-step current noise has standard deviation
    /// `shot_noise_scale * sqrt((I + I_dark) / dt)`.
    pub shot_noise_scale: f64,
    /// Event threshold, log units.
    pub theta: f64,
    /// Integration step, seconds.
    pub dt: f64,
    /// Lower bound on the time constant (fixed bandwidth cap); 0 disables it.
    pub tau_min: f64,
}

impl Default for PhotoreceptorParams {
    fn default() -> Self {
        Self {
            tau_ref: 1e-3,
            i_ref: 1.0,
            i_dark: 0.1,
            shot_noise_scale: 1e-4,
            theta: 0.1,
            dt: 1e-5,
            tau_min: 0.0,
        }
    }
}

impl PhotoreceptorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_ref > 0.0 && self.i_ref > 0.0 && self.dt > 0.0) {
            return Err(invalid("tau_ref, i_ref and dt must be positive"));
        }
        if !(self.i_dark >= 0.0 && self.shot_noise_scale >= 0.0 && self.tau_min >= 0.0) {
            return Err(invalid("i_dark, shot_noise_scale and tau_min must be >= 0"));
        }
        if !(self.theta > 0.0) {
            return Err(invalid("theta must be positive"));
        }
        Ok(())
    }

    /// Time constant at total photocurrent `current`.
    pub fn tau(&self, current: f64) -> f64 {
        (self.tau_ref * self.i_ref / current.max(CURRENT_FLOOR)).max(self.tau_min)
    }
}

/// Photocurrent samples, one per `dt`, in units of `i_ref`.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulusWaveform {
    pub samples: Vec<f64>,
    pub dt: f64,
}

impl StimulusWaveform {
    pub fn new(samples: Vec<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(invalid("stimulus dt must be positive"));
        }
        if samples.iter().any(|s| !(*s >= 0.0)) {
            return Err(invalid("photocurrent samples must be >= 0"));
        }
        Ok(Self { samples, dt })
    }

    pub fn constant(current: f64, duration: f64, dt: f64) -> Result<Self> {
        let n = (duration / dt).round() as usize;
        Self::new(vec![current; n], dt)
    }

    /// Square-wave grating: `low` for the first half period, then `high`,
    /// repeated for `cycles` periods.
    pub fn square_grating(low: f64, high: f64, half_period: f64, cycles: usize, dt: f64) -> Result<Self> {
        let half = (half_period / dt).round() as usize;
        if half == 0 {
            return Err(invalid("half period shorter than dt"));
        }
        let samples = (0..2 * half * cycles)
            .map(|i| if (i / half) % 2 == 0 { low } else { high })
            .collect();
        Self::new(samples, dt)
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }
}

/// An event from the single-pixel simulator; `t` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabEvent {
    pub t: f64,
    pub polarity: Polarity,
}

/// First-order log photoreceptor with shot noise and an event detector.
#[derive(Debug, Clone)]
pub struct Photoreceptor {
    params: PhotoreceptorParams,
    rng: CounterRng,
    /// Photoreceptor output, log units.
    pub v_p: f64,
    /// Memorized value at the last event.
    pub v_mem: f64,
}

impl Photoreceptor {
    /// Starts settled at the noise-free output for `initial_current`.
    pub fn new(params: PhotoreceptorParams, initial_current: f64, seed: u64) -> Self {
        let v = (initial_current + params.i_dark).max(CURRENT_FLOOR).ln();
        Self {
            params,
            rng: CounterRng::new(seed, 0, 0, Purpose::Photoreceptor),
            v_p: v,
            v_mem: v,
        }
    }

    pub fn params(&self) -> &PhotoreceptorParams {
        &self.params
    }

    /// Advances by `dt` under signal photocurrent `current`; returns the signed
    /// number of events.
    #[inline]
    pub fn step(&mut self, current: f64, dt: f64) -> i64 {
        let p = &self.params;
        let mean = current + p.i_dark;
        let noisy = if p.shot_noise_scale > 0.0 {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            mean + p.shot_noise_scale * (mean / dt).sqrt() * z
        } else {
            mean
        }
        .max(CURRENT_FLOOR);
        let gain = (dt / p.tau(noisy)).min(1.0);
        self.v_p += gain * (noisy.ln() - self.v_p);
        let n = crossing_count(self.v_p - self.v_mem, p.theta, p.theta);
        self.v_mem += n as f64 * p.theta;
        n
    }
}

/// Output of [`simulate_photoreceptor`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhotoreceptorTrace {
    pub dt: f64,
    /// Photoreceptor output after each stimulus sample.
    pub v_p: Vec<f64>,
    pub events: Vec<LabEvent>,
}

impl PhotoreceptorTrace {
    pub fn time(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dt
    }
}

/// Runs the photoreceptor over a stimulus, starting settled at its first sample.
pub fn simulate_photoreceptor(
    stim: &StimulusWaveform,
    params: &PhotoreceptorParams,
    seed: u64,
) -> Result<PhotoreceptorTrace> {
    params.validate()?;
    let first = stim.samples.first().copied().unwrap_or(0.0);
    let mut pr = Photoreceptor::new(*params, first, seed);
    let mut v_p = Vec::with_capacity(stim.samples.len());
    let mut events = Vec::new();
    for (i, &current) in stim.samples.iter().enumerate() {
        let n = pr.step(current, stim.dt);
        let t = (i + 1) as f64 * stim.dt;
        let polarity = if n > 0 { Polarity::On } else { Polarity::Off };
        events.extend((0..n.unsigned_abs()).map(|_| LabEvent { t, polarity }));
        v_p.push(pr.v_p);
    }
    Ok(PhotoreceptorTrace {
        dt: stim.dt,
        v_p,
        events,
    })
}
