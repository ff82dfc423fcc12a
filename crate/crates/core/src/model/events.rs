use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Sign of a brightness change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(i8)]
pub enum Polarity {
    Off = -1,
    On = 1,
}

impl Polarity {
    #[inline]
    pub fn sign(self) -> i8 {
        self as i8
    }

    pub fn from_sign(v: i64) -> Option<Self> {
        match v {
            1 => Some(Polarity::On),
            -1 => Some(Polarity::Off),
            _ => None,
        }
    }
}

/// A single DVS event. Timestamps are integer microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    pub t: u64,
    pub x: u16,
    pub y: u16,
    pub polarity: Polarity,
}

impl Event {
    pub fn new(t: u64, x: u16, y: u16, polarity: Polarity) -> Self {
        Self { t, x, y, polarity }
    }

    #[inline]
    fn sort_key(&self) -> (u64, u16, u16, Polarity) {
        (self.t, self.y, self.x, self.polarity)
    }
}

/// Stream order: time, then row, column and polarity.
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Signed number of threshold crossings for a log-intensity change.
///
/// Positive counts are ON events, negative counts OFF events.
#[inline(always)]
pub fn crossing_count(delta: f64, theta_on: f64, theta_off: f64) -> i64 {
    if delta >= theta_on {
        (delta / theta_on).floor() as i64
    } else if delta <= -theta_off {
        -((-delta / theta_off).floor() as i64)
    } else {
        0
    }
}

/// Quantizes `l_lp - *l_mem` into events and moves the memorized value by the
/// emitted multiples of the threshold. Returns the signed event count.
#[inline(always)]
pub fn generate_events(l_lp: f64, l_mem: &mut f64, theta_on: f64, theta_off: f64) -> i64 {
    let n = crossing_count(l_lp - *l_mem, theta_on, theta_off);
    if n > 0 {
        *l_mem += n as f64 * theta_on;
    } else if n < 0 {
        *l_mem += n as f64 * theta_off;
    }
    n
}

#[inline(always)]
fn to_us(t: f64) -> i64 {
    (t * 1e6).round() as i64
}

/// Timestamp of the `k`-th (1-based) of `n` events spread evenly over the
/// open interval `(t_j, t_j1)`, in microseconds.
///
/// When the interval is at least 2 us wide the result is kept strictly
/// inside it after rounding.
#[inline]
pub fn event_timestamp_us(k: u64, n: u64, t_j: f64, t_j1: f64) -> u64 {
    let t = t_j + k as f64 * (t_j1 - t_j) / (n + 1) as f64;
    let (lo, hi) = (to_us(t_j), to_us(t_j1));
    let mut us = to_us(t);
    if hi - lo >= 2 {
        us = us.clamp(lo + 1, hi - 1);
    } else {
        us = us.clamp(lo, hi);
    }
    us.max(0) as u64
}

/// Evenly spaced timestamps for `n` events between two frame times.
pub fn assign_timestamps(n: u64, t_j: f64, t_j1: f64) -> Vec<u64> {
    (1..=n).map(|k| event_timestamp_us(k, n, t_j, t_j1)).collect()
}
