//! Video-to-event conversion with a realistic DVS pixel model.
//!
//! The pipeline turns intensity frames into luma ([`frame`]), runs every pixel
//! through the log-intensity event model ([`model`]), and writes or bins the
//! resulting event stream ([`io`]). [`lab`] holds a single-pixel
//! photoreceptor simulator used to study low-light response, latency and
//! motion blur.
//!
//! Per-pixel work is spread over rayon when the `parallel` feature is on;
//! output is identical with or without it.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod frame;
pub mod io;
pub mod lab;
pub mod model;
pub mod par;
pub mod rng;

pub use config::{PipelineConfig, RunConfig};
pub use error::{Error, Result};
pub use frame::{LumaFrame, LumaSequence, RgbFrame};
pub use model::{synthesize, Emulator, Event, ModelConfig, Polarity};
pub use par::ExecMode;
