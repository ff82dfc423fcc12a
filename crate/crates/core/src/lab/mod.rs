//! Single-pixel physics lab and measurement harnesses: low-light grating
//! response, response latency versus intensity, and motion blur of a moving
//! edge.

mod blur;
mod grating;
mod latency;
mod photoreceptor;

pub use blur::{measure_motion_blur, BlurMeasurement, MovingBarScene, MIN_BLUR_EVENTS};
pub use grating::{GratingExperiment, GratingSummary};
pub use latency::{log_space, loglog_slope, measure_latency, LatencyExperiment, LatencyPoint};
pub use photoreceptor::{
    simulate_photoreceptor, LabEvent, Photoreceptor, PhotoreceptorParams, PhotoreceptorTrace, StimulusWaveform,
};
