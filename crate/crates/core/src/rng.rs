//! Counter-based random streams.
//!
//! Every draw is a pure function of `(seed, pixel, frame, purpose, counter)`,
//! so a pixel sees the same numbers no matter which thread processes it or in
//! which order rows are visited.

use rand::RngCore;

/// What a random stream is used for. Distinct purposes never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    ThresholdOn = 1,
    ThresholdOff = 2,
    LeakPhase = 3,
    ShotNoise = 4,
    Photoreceptor = 5,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key for all draws of one `(seed, pixel, purpose)` triple. Hot loops cache
/// this per pixel and finish it with [`draw`].
#[inline(always)]
pub fn pixel_key(seed: u64, pixel: u64, purpose: Purpose) -> u64 {
    let k = mix64(seed ^ GOLDEN);
    let k = mix64(k ^ (purpose as u64).wrapping_mul(GOLDEN));
    mix64(k ^ pixel)
}

#[inline(always)]
fn stream_key(pixel_key: u64, frame: u64) -> u64 {
    mix64(pixel_key ^ frame.rotate_left(32))
}

/// Converts the top 53 bits to a uniform double in `[0, 1)`.
#[inline(always)]
pub fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[0, 1)` for frame `frame` of a cached [`pixel_key`].
#[inline(always)]
pub fn draw(pixel_key: u64, frame: u64) -> f64 {
    to_unit(mix64(stream_key(pixel_key, frame)))
}

/// A single uniform draw in `[0, 1)` for one `(pixel, frame, purpose)` cell.
#[inline]
pub fn uniform(seed: u64, pixel: u64, frame: u64, purpose: Purpose) -> f64 {
    draw(pixel_key(seed, pixel, purpose), frame)
}

/// An `RngCore` over one keyed stream; draws advance an internal counter.
///
/// Use this where a distribution needs more than one uniform (Gaussian
/// threshold samples, photoreceptor shot noise).
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, pixel: u64, frame: u64, purpose: Purpose) -> Self {
        Self {
            key: stream_key(pixel_key(seed, pixel, purpose), frame),
            counter: 0,
        }
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let v = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}
