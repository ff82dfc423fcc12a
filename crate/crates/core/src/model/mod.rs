//! The DVS pixel-array model.
//!
//! Each frame interval runs, per pixel: lin-log conversion, the
//! intensity-dependent lowpass, leak decrement, threshold quantization, and
//! the shot-noise comparator. Events of the interval are then spread evenly
//! in time and merged in stream order.

mod config;
mod emulator;
mod events;
mod linlog;
mod lowpass;
mod noise;
mod thresholds;

pub use config::ModelConfig;
pub use emulator::{synthesize, synthesize_with, Emulator, PixelState, PreparedFrame, SensorState};
pub use events::{assign_timestamps, crossing_count, event_timestamp_us, generate_events, Event, Polarity};
pub use linlog::{lin_log, LinLog};
pub use lowpass::{lowpass_update, pixel_cutoff};
pub use noise::{leak_decrement, shot_noise_decision, shot_noise_probability, shot_noise_rate};
pub use thresholds::{sample_thresholds, sample_thresholds_with, ThresholdMaps};
