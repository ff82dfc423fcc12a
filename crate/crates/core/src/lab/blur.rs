use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::frame::LumaFrame;
use crate::model::{Emulator, Event, ModelConfig, Polarity};
use crate::par::ExecMode;

/// Minimum number of leading-edge events for a blur estimate.
pub const MIN_BLUR_EVENTS: usize = 50;

/// A bright bar sweeping right across a dark background.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MovingBarScene {
    pub width: usize,
    pub height: usize,
    pub bar_width: f64,
    /// Pixels per second.
    pub speed: f64,
    pub background: f64,
    pub foreground: f64,
    /// Frames per pixel of motion; keeps the stimulus finer than the pixel response.
    pub frames_per_pixel: f64,
    /// Extra simulated time after the leading edge leaves the sensor, seconds.
    pub tail: f64,
}

impl Default for MovingBarScene {
    fn default() -> Self {
        Self {
            width: 160,
            height: 4,
            bar_width: 40.0,
            speed: 420.0,
            background: 20.0,
            foreground: 255.0,
            frames_per_pixel: 10.0,
            tail: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlurMeasurement {
    /// Central 90 % spread of motion-compensated positions, pixels.
    pub pixels: f64,
    /// The same spread as time, milliseconds.
    pub ms: f64,
    pub events: usize,
}

impl MovingBarScene {
    pub fn frame_interval(&self) -> f64 {
        1.0 / (self.speed * self.frames_per_pixel)
    }

    /// Anti-aliased frame at time `t`; the leading edge sits at `speed * t`.
    pub fn render(&self, t: f64) -> LumaFrame {
        let lead = self.speed * t;
        let trail = lead - self.bar_width;
        let row: Vec<f64> = (0..self.width)
            .map(|x| {
                let (a, b) = (x as f64, x as f64 + 1.0);
                let cover = (b.min(lead) - a.max(trail)).clamp(0.0, 1.0);
                self.background + (self.foreground - self.background) * cover
            })
            .collect();
        let data = row.iter().copied().cycle().take(self.width * self.height).collect();
        LumaFrame {
            width: self.width,
            height: self.height,
            data,
            timestamp: t,
        }
    }

    pub fn frame_count(&self) -> usize {
        let duration = self.width as f64 / self.speed + self.tail;
        (duration / self.frame_interval()).ceil() as usize + 1
    }

    /// Runs the pixel model over the sweep and returns all events.
    pub fn simulate(&self, config: &ModelConfig, mode: ExecMode) -> Result<Vec<Event>> {
        if !(self.speed > 0.0) {
            return Err(invalid("edge speed must be positive"));
        }
        let dt = self.frame_interval();
        let mut emu = Emulator::with_mode(&self.render(0.0), config.clone(), mode)?;
        let mut events = Vec::new();
        for k in 1..self.frame_count() {
            events.extend(emu.step(&self.render(k as f64 * dt))?);
        }
        Ok(events)
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

/// Motion blur of the leading (ON) edge.
///
/// Each ON event is shifted back along the motion, `x' = x + 0.5 - v t`;
/// an instantaneous response collapses all of them onto one pixel-wide
/// line, while slow settling smears them over several pixels.
pub fn measure_motion_blur(events: &[Event], edge_speed: f64) -> Result<BlurMeasurement> {
    if !(edge_speed > 0.0) {
        return Err(invalid("edge speed must be positive"));
    }
    let mut xs: Vec<f64> = events
        .iter()
        .filter(|e| e.polarity == Polarity::On)
        .map(|e| e.x as f64 + 0.5 - edge_speed * e.t as f64 * 1e-6)
        .collect();
    if xs.len() < MIN_BLUR_EVENTS {
        return Err(Error::TooFewEvents(xs.len()));
    }
    xs.sort_by(f64::total_cmp);
    let pixels = quantile(&xs, 0.95) - quantile(&xs, 0.05);
    Ok(BlurMeasurement {
        pixels,
        ms: pixels / edge_speed * 1e3,
        events: xs.len(),
    })
}
