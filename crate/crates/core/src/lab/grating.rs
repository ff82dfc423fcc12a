use serde::Serialize;

use super::photoreceptor::{simulate_photoreceptor, PhotoreceptorParams, PhotoreceptorTrace, StimulusWaveform};
use crate::error::{invalid, Result};
use crate::model::Polarity;
use crate::par::{map_range, ExecMode};

/// A square-wave grating passing over one pixel.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GratingExperiment {
    /// Signal photocurrent of the gray strips.
    pub gray: f64,
    /// White-to-gray photocurrent ratio.
    pub contrast: f64,
    pub half_period: f64,
    pub cycles: usize,
}

impl Default for GratingExperiment {
    fn default() -> Self {
        Self {
            gray: 1.0,
            contrast: 2.0,
            half_period: 5e-3,
            cycles: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GratingSummary {
    pub gray: f64,
    pub edges: usize,
    pub events_per_edge: f64,
    pub on_per_rising_edge: f64,
    pub off_per_falling_edge: f64,
}

impl GratingExperiment {
    pub fn stimulus(&self, dt: f64) -> Result<StimulusWaveform> {
        StimulusWaveform::square_grating(self.gray, self.gray * self.contrast, self.half_period, self.cycles, dt)
    }

    /// Counts correct-polarity events after each edge, skipping the first
    /// period so the pixel starts from a periodic state.
    pub fn count_edges(&self, trace: &PhotoreceptorTrace) -> GratingSummary {
        let half = self.half_period;
        let n_edges = 2 * self.cycles - 1;
        let (mut on, mut off, mut rising, mut falling) = (0usize, 0usize, 0usize, 0usize);
        for k in 2..=n_edges {
            let start = k as f64 * half;
            let end = start + half;
            let is_rising = k % 2 == 1;
            let want = if is_rising { Polarity::On } else { Polarity::Off };
            let n = trace
                .events
                .iter()
                .filter(|e| e.t > start && e.t <= end && e.polarity == want)
                .count();
            if is_rising {
                on += n;
                rising += 1;
            } else {
                off += n;
                falling += 1;
            }
        }
        let edges = rising + falling;
        GratingSummary {
            gray: self.gray,
            edges,
            events_per_edge: (on + off) as f64 / edges.max(1) as f64,
            on_per_rising_edge: on as f64 / rising.max(1) as f64,
            off_per_falling_edge: off as f64 / falling.max(1) as f64,
        }
    }

    pub fn run(&self, params: &PhotoreceptorParams, seed: u64) -> Result<(PhotoreceptorTrace, GratingSummary)> {
        if self.cycles < 2 {
            return Err(invalid("grating needs at least 2 cycles"));
        }
        let trace = simulate_photoreceptor(&self.stimulus(params.dt)?, params, seed)?;
        let summary = self.count_edges(&trace);
        Ok((trace, summary))
    }

    /// Mean events per edge over seeds `0..seeds`.
    pub fn mean_events_per_edge(&self, params: &PhotoreceptorParams, seeds: u64, mode: ExecMode) -> Result<f64> {
        let runs = map_range(seeds as usize, mode, |s| {
            self.run(params, s as u64).map(|(_, g)| g.events_per_edge)
        });
        let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(runs.iter().sum::<f64>() / runs.len().max(1) as f64)
    }
}
