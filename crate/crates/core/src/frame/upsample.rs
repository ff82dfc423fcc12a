use std::collections::VecDeque;

use super::LumaFrame;
use crate::error::{invalid, Error, Result};

/// Upsampling ratio needed to reach a timestamp step of `dt_max` from a
/// source at `f_s` Hz, optionally raised so the largest optic flow
/// (`flow_bound`, pixels per source interframe) moves at most one pixel.
pub fn compute_upsample_ratio(f_s: f64, dt_max: f64, flow_bound: Option<f64>) -> Result<u32> {
    if !(f_s > 0.0 && f_s.is_finite()) {
        return Err(invalid(format!("source frame rate must be positive, got {f_s}")));
    }
    if !(dt_max > 0.0 && dt_max.is_finite()) {
        return Err(invalid(format!("timestamp resolution must be positive, got {dt_max}")));
    }
    // Guard against 1/(1000 * 0.001) landing a hair above 1.0.
    let manual = (1.0 / (f_s * dt_max) - 1e-9).ceil().max(1.0);
    let ratio = match flow_bound {
        Some(f) if !(f >= 0.0 && f.is_finite()) => return Err(invalid(format!("flow bound must be >= 0, got {f}"))),
        Some(f) => manual.max(f.ceil()),
        None => manual,
    };
    if ratio > u32::MAX as f64 {
        return Err(invalid("upsample ratio overflows"));
    }
    Ok(ratio as u32)
}

/// Produces the frames between two source frames.
///
/// Implementations return exactly `u` frames: `a` itself followed by `u - 1`
/// intermediate frames, with timestamps `t_a + k (t_b - t_a) / u`.
pub trait Interpolator: Sync {
    fn interpolate(&self, a: &LumaFrame, b: &LumaFrame, u: u32) -> Result<Vec<LumaFrame>>;
}

/// Per-pixel linear blend between neighboring frames.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearInterpolator;

impl Interpolator for LinearInterpolator {
    fn interpolate(&self, a: &LumaFrame, b: &LumaFrame, u: u32) -> Result<Vec<LumaFrame>> {
        a.same_shape(b)?;
        if u == 0 {
            return Err(invalid("interpolation factor must be >= 1"));
        }
        if b.timestamp <= a.timestamp {
            return Err(Error::NonMonotoneTime {
                prev: a.timestamp,
                next: b.timestamp,
            });
        }
        let dt = b.timestamp - a.timestamp;
        let frames = (0..u)
            .map(|k| {
                let w = k as f64 / u as f64;
                let data = if k == 0 {
                    a.data.clone()
                } else {
                    a.data
                        .iter()
                        .zip(&b.data)
                        .map(|(&ya, &yb)| ya + w * (yb - ya))
                        .collect()
                };
                LumaFrame {
                    width: a.width,
                    height: a.height,
                    data,
                    timestamp: a.timestamp + k as f64 * dt / u as f64,
                }
            })
            .collect();
        Ok(frames)
    }
}

/// Streams an upsampled sequence from source frames without holding the
/// whole clip in memory. Source frames are re-stamped at `i / source_fps`.
pub struct Upsampler<'a, I, P: ?Sized> {
    source: I,
    interp: &'a P,
    source_fps: f64,
    ratio: u32,
    index: usize,
    prev: Option<LumaFrame>,
    pending: VecDeque<LumaFrame>,
    done: bool,
}

impl<'a, I, P> Upsampler<'a, I, P>
where
    I: Iterator<Item = Result<LumaFrame>>,
    P: Interpolator + ?Sized,
{
    pub fn new(source: I, source_fps: f64, ratio: u32, interp: &'a P) -> Result<Self> {
        if !(source_fps > 0.0 && source_fps.is_finite()) {
            return Err(invalid(format!("source frame rate must be positive, got {source_fps}")));
        }
        if ratio == 0 {
            return Err(invalid("upsample ratio must be >= 1"));
        }
        Ok(Self {
            source,
            interp,
            source_fps,
            ratio,
            index: 0,
            prev: None,
            pending: VecDeque::new(),
            done: false,
        })
    }

    fn stamp(&mut self, frame: LumaFrame) -> LumaFrame {
        let t = self.index as f64 / self.source_fps;
        self.index += 1;
        frame.with_timestamp(t)
    }
}

impl<I, P> Iterator for Upsampler<'_, I, P>
where
    I: Iterator<Item = Result<LumaFrame>>,
    P: Interpolator + ?Sized,
{
    type Item = Result<LumaFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(f) = self.pending.pop_front() {
                return Some(Ok(f));
            }
            if self.done {
                return None;
            }
            match self.source.next() {
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Some(Ok(frame)) => {
                    let cur = self.stamp(frame);
                    match self.prev.take() {
                        None => self.prev = Some(cur),
                        Some(prev) => {
                            match self.interp.interpolate(&prev, &cur, self.ratio) {
                                Ok(frames) => self.pending.extend(frames),
                                Err(e) => {
                                    self.done = true;
                                    return Some(Err(e));
                                }
                            }
                            self.prev = Some(cur);
                        }
                    }
                }
                None => {
                    self.done = true;
                    return self.prev.take().map(Ok);
                }
            }
        }
    }
}
