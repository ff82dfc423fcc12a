use rand_distr::{Distribution, Normal};

use super::ModelConfig;
use crate::par::{map_range, ExecMode};
use crate::rng::{CounterRng, Purpose};

/// Per-pixel ON and OFF threshold maps, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMaps {
    pub on: Vec<f64>,
    pub off: Vec<f64>,
}

fn sample_one(nominal: f64, sigma: f64, floor: f64, seed: u64, pixel: u64, purpose: Purpose) -> f64 {
    let theta = if sigma > 0.0 {
        let mut rng = CounterRng::new(seed, pixel, 0, purpose);
        Normal::new(nominal, sigma)
            .expect("sigma validated non-negative and finite")
            .sample(&mut rng)
    } else {
        nominal
    };
    theta.max(floor)
}

/// Draws each pixel's ON and OFF thresholds independently from
/// `N(nominal, sigma_theta)` and clips them below at `theta_min`.
pub fn sample_thresholds(config: &ModelConfig, height: usize, width: usize) -> ThresholdMaps {
    sample_thresholds_with(config, height, width, ExecMode::default())
}

pub fn sample_thresholds_with(config: &ModelConfig, height: usize, width: usize, mode: ExecMode) -> ThresholdMaps {
    let n = height * width;
    let pairs = map_range(n, mode, |i| {
        let i = i as u64;
        (
            sample_one(
                config.theta_on,
                config.sigma_theta,
                config.theta_min,
                config.seed,
                i,
                Purpose::ThresholdOn,
            ),
            sample_one(
                config.theta_off,
                config.sigma_theta,
                config.theta_min,
                config.seed,
                i,
                Purpose::ThresholdOff,
            ),
        )
    });
    let (on, off) = pairs.into_iter().unzip();
    ThresholdMaps { on, off }
}
