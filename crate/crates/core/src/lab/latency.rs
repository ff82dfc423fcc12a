use serde::Serialize;

use super::photoreceptor::{Photoreceptor, PhotoreceptorParams};
use crate::error::{invalid, Result};
use crate::par::{map_range, ExecMode};

/// Response latency to a light stepping down, swept over intensity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LatencyExperiment {
    /// Noise seeds per intensity.
    pub seeds: u64,
    /// Photocurrent after the step as a fraction of the one before.
    pub off_ratio: f64,
    /// Integration steps per post-step time constant (caps `params.dt`).
    pub steps_per_tau: f64,
    /// Pre-step settling, in pre-step time constants.
    pub settle_taus: f64,
    /// Give up after this many post-step time constants.
    pub timeout_taus: f64,
}

impl Default for LatencyExperiment {
    fn default() -> Self {
        Self {
            seeds: 100,
            off_ratio: 0.5,
            steps_per_tau: 200.0,
            settle_taus: 5.0,
            timeout_taus: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencyPoint {
    pub intensity: f64,
    /// Median time from the step to the first OFF event, seconds.
    pub median: f64,
    /// Standard deviation of the latency across seeds (jitter), seconds.
    pub jitter: f64,
    /// Runs that produced no OFF event before the timeout.
    pub misses: u64,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

impl LatencyPoint {
    pub fn from_runs(intensity: f64, runs: &[Option<f64>]) -> Self {
        let mut hits: Vec<f64> = runs.iter().flatten().copied().collect();
        let misses = (runs.len() - hits.len()) as u64;
        hits.sort_by(f64::total_cmp);
        let (median, jitter) = if hits.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            let mean = hits.iter().sum::<f64>() / hits.len() as f64;
            let var = hits.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / hits.len() as f64;
            (median(&hits), var.sqrt())
        };
        Self {
            intensity,
            median,
            jitter,
            misses,
        }
    }
}

impl LatencyExperiment {
    /// Latency of a single run, or `None` on timeout.
    pub fn single(&self, intensity: f64, params: &PhotoreceptorParams, seed: u64) -> Option<f64> {
        let low = intensity * self.off_ratio;
        let tau_before = params.tau(intensity + params.i_dark);
        let tau_after = params.tau(low + params.i_dark);
        let dt = params.dt.min(tau_after / self.steps_per_tau);
        let mut pr = Photoreceptor::new(*params, intensity, seed);
        let settle = (self.settle_taus * tau_before / dt).ceil() as usize;
        for _ in 0..settle {
            pr.step(intensity, dt);
        }
        let limit = (self.timeout_taus * tau_after / dt).ceil() as usize;
        (1..=limit).find(|_| pr.step(low, dt) < 0).map(|i| i as f64 * dt)
    }

    /// Per-seed latencies for seeds `0..seeds`; `None` marks a timeout.
    pub fn runs(&self, intensity: f64, params: &PhotoreceptorParams, mode: ExecMode) -> Vec<Option<f64>> {
        map_range(self.seeds as usize, mode, |s| self.single(intensity, params, s as u64))
    }

    pub fn measure(&self, intensity: f64, params: &PhotoreceptorParams, mode: ExecMode) -> LatencyPoint {
        LatencyPoint::from_runs(intensity, &self.runs(intensity, params, mode))
    }

    /// Checks a sweep's settings without running it.
    pub fn validate(&self, intensities: &[f64], params: &PhotoreceptorParams) -> Result<()> {
        params.validate()?;
        if intensities.len() < 2 {
            return Err(invalid("latency sweep needs at least 2 intensities"));
        }
        if intensities.iter().any(|i| !(*i > 0.0)) {
            return Err(invalid("intensities must be positive"));
        }
        if !(self.off_ratio > 0.0 && self.off_ratio < 1.0) {
            return Err(invalid("off_ratio must be in (0, 1)"));
        }
        if self.seeds == 0 {
            return Err(invalid("need at least one seed"));
        }
        Ok(())
    }

    pub fn sweep(
        &self,
        intensities: &[f64],
        params: &PhotoreceptorParams,
        mode: ExecMode,
    ) -> Result<Vec<LatencyPoint>> {
        self.validate(intensities, params)?;
        Ok(intensities.iter().map(|&i| self.measure(i, params, mode)).collect())
    }
}

/// Median latency and jitter at each intensity with the default experiment.
pub fn measure_latency(intensities: &[f64], params: &PhotoreceptorParams) -> Result<Vec<LatencyPoint>> {
    LatencyExperiment::default().sweep(intensities, params, ExecMode::default())
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Least-squares slope of `log(median)` against `log(intensity)`.
pub fn loglog_slope(points: &[LatencyPoint]) -> f64 {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.median.is_finite() && p.median > 0.0)
        .map(|p| (p.intensity.ln(), p.median.ln()))
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> PhotoreceptorParams {
        PhotoreceptorParams {
            i_dark: 1e-4,
            ..Default::default()
        }
    }

    #[test]
    fn noise_free_matches_exponential_decay() {
        let p = PhotoreceptorParams {
            shot_noise_scale: 0.0,
            ..fast()
        };
        let exp = LatencyExperiment::default();
        let i = 2.0;
        let lat = exp.single(i, &p, 0).unwrap();
        // V falls from ln(I) toward ln(I/2) with tau(I/2): first OFF after
        // tau * ln(d / (d - theta)), d = ln 2.
        let tau = p.tau(1.0 + p.i_dark);
        let d = ((i + p.i_dark) / (1.0 + p.i_dark)).ln();
        let want = tau * (d / (d - p.theta)).ln();
        assert!((lat - want).abs() / want < 0.03, "{lat} vs {want}");
    }

    #[test]
    fn doubling_intensity_halves_latency() {
        let exp = LatencyExperiment {
            seeds: 40,
            ..Default::default()
        };
        let a = exp.measure(1.0, &fast(), ExecMode::default());
        let b = exp.measure(2.0, &fast(), ExecMode::default());
        let ratio = b.median / a.median;
        assert!((ratio - 0.5).abs() < 0.5 * 0.15, "ratio {ratio}");
        assert_eq!(a.misses + b.misses, 0);
    }

    #[test]
    fn bandwidth_cap_flattens() {
        let capped = PhotoreceptorParams {
            tau_min: 1e-3,
            ..fast()
        };
        let exp = LatencyExperiment {
            seeds: 20,
            ..Default::default()
        };
        let pts = exp
            .sweep(&log_space(10.0, 1000.0, 3), &capped, ExecMode::default())
            .unwrap();
        assert!(loglog_slope(&pts).abs() < 0.1);
        assert!(pts.windows(2).all(|w| w[1].median <= w[0].median * 1.05));
    }

    #[test]
    fn sweep_validation() {
        let exp = LatencyExperiment::default();
        assert!(exp.sweep(&[1.0], &fast(), ExecMode::default()).is_err());
        assert!(exp.sweep(&[1.0, -1.0], &fast(), ExecMode::default()).is_err());
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(0.1, 100.0, 4);
        assert_eq!(v.len(), 4);
        assert!((v[0] - 0.1).abs() < 1e-12 && (v[3] - 100.0).abs() < 1e-9);
        assert!((v[1] - 1.0).abs() < 1e-12);
    }
}
