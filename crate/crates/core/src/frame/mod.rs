//! Video ingestion: color to luma, spatial rescaling, temporal upsampling.

mod source;
mod upsample;

pub use source::{list_image_files, load_image_luma, ImageDirSource, RawGraySource};
pub use upsample::{compute_upsample_ratio, Interpolator, LinearInterpolator, Upsampler};

use crate::error::{invalid, Error, Result};

/// BT.709 luma weights applied to linear (non gamma-corrected) RGB.
pub const BT709: [f64; 3] = [0.2126, 0.7152, 0.0722];

/// Interleaved RGB frame in digital numbers `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl RgbFrame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(invalid(format!(
                "rgb frame {width}x{height} needs {} samples, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=255.0).contains(*v)) {
            return Err(invalid(format!("rgb sample {v} outside [0, 255]")));
        }
        Ok(Self { width, height, data })
    }
}

/// A single luma image with its capture time in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct LumaFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
    pub timestamp: f64,
}

impl LumaFrame {
    pub fn new(width: usize, height: usize, data: Vec<f64>, timestamp: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid("frame dimensions must be non-zero"));
        }
        if data.len() != width * height {
            return Err(invalid(format!(
                "luma frame {width}x{height} needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
            timestamp,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64, timestamp: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
            timestamp,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn same_shape(&self, other: &LumaFrame) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                want_w: self.width,
                want_h: self.height,
                got_w: other.width,
                got_h: other.height,
            });
        }
        Ok(())
    }

    pub fn with_timestamp(mut self, t: f64) -> Self {
        self.timestamp = t;
        self
    }
}

/// Converts an RGB frame to luma. Gray pixels pass through exactly; the
/// result carries timestamp 0.
pub fn to_luma(frame: &RgbFrame) -> LumaFrame {
    let data = frame
        .data
        .chunks_exact(3)
        .map(|p| {
            if p[0] == p[1] && p[1] == p[2] {
                p[0]
            } else {
                (BT709[0] * p[0] + BT709[1] * p[1] + BT709[2] * p[2]).clamp(0.0, 255.0)
            }
        })
        .collect();
    LumaFrame {
        width: frame.width,
        height: frame.height,
        data,
        timestamp: 0.0,
    }
}

/// Bilinear resample with pixel-center alignment.
pub fn rescale(frame: &LumaFrame, out_h: usize, out_w: usize) -> Result<LumaFrame> {
    if out_h == 0 || out_w == 0 {
        return Err(invalid(format!("cannot rescale to {out_w}x{out_h}")));
    }
    if out_h == frame.height && out_w == frame.width {
        return Ok(frame.clone());
    }
    let (in_w, in_h) = (frame.width, frame.height);
    let sx = in_w as f64 / out_w as f64;
    let sy = in_h as f64 / out_h as f64;
    // Source coordinate and blend weight for each output column / row.
    let axis = |n_out: usize, scale: f64, n_in: usize| -> Vec<(usize, usize, f64)> {
        (0..n_out)
            .map(|i| {
                let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
                let i0 = s.floor() as usize;
                let i1 = (i0 + 1).min(n_in - 1);
                (i0, i1, s - i0 as f64)
            })
            .collect()
    };
    let cols = axis(out_w, sx, in_w);
    let rows = axis(out_h, sy, in_h);
    let mut data = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, wy) in &rows {
        for &(x0, x1, wx) in &cols {
            let top = frame.get(x0, y0) * (1.0 - wx) + frame.get(x1, y0) * wx;
            let bot = frame.get(x0, y1) * (1.0 - wx) + frame.get(x1, y1) * wx;
            data.push((top * (1.0 - wy) + bot * wy).clamp(0.0, 255.0));
        }
    }
    Ok(LumaFrame {
        width: out_w,
        height: out_h,
        data,
        timestamp: frame.timestamp,
    })
}

/// Luma frames at a fixed (possibly upsampled) frame rate.
#[derive(Debug, Clone)]
pub struct LumaSequence {
    frames: Vec<LumaFrame>,
    frame_rate: f64,
    upsample_ratio: u32,
}

impl LumaSequence {
    /// Validates shapes and strict timestamp ordering.
    pub fn new(frames: Vec<LumaFrame>, frame_rate: f64, upsample_ratio: u32) -> Result<Self> {
        if upsample_ratio == 0 {
            return Err(invalid("upsample ratio must be >= 1"));
        }
        if let Some(first) = frames.first() {
            for pair in frames.windows(2) {
                first.same_shape(&pair[1])?;
                if pair[1].timestamp <= pair[0].timestamp {
                    return Err(Error::NonMonotoneTime {
                        prev: pair[0].timestamp,
                        next: pair[1].timestamp,
                    });
                }
            }
        }
        Ok(Self {
            frames,
            frame_rate,
            upsample_ratio,
        })
    }

    /// Builds a sequence from source frames sampled at `source_fps`, upsampled
    /// by `ratio` through `interp`. Source frames are re-stamped at `i / fps`.
    pub fn from_source<I: Interpolator + ?Sized>(
        source: Vec<LumaFrame>,
        source_fps: f64,
        ratio: u32,
        interp: &I,
    ) -> Result<Self> {
        let frames =
            Upsampler::new(source.into_iter().map(Ok), source_fps, ratio, interp)?.collect::<Result<Vec<_>>>()?;
        Self::new(frames, source_fps * ratio as f64, ratio)
    }

    pub fn frames(&self) -> &[LumaFrame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<LumaFrame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Output frame rate `f_s * U`.
    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn upsample_ratio(&self) -> u32 {
        self.upsample_ratio
    }

    /// Time of the last frame relative to the first.
    pub fn duration(&self) -> f64 {
        match (self.frames.first(), self.frames.last()) {
            (Some(a), Some(b)) => b.timestamp - a.timestamp,
            _ => 0.0,
        }
    }

    pub fn dims(&self) -> Option<(usize, usize)> {
        self.frames.first().map(|f| (f.width, f.height))
    }
}
