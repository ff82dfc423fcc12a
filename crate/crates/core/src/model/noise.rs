use super::events::Polarity;

/// Shot-noise event rate (ON + OFF) of a pixel with normalized luma
/// `y_norm`: the full `rate_hz` in the dark, `bright_factor * rate_hz` at white.
#[inline(always)]
pub fn shot_noise_rate(rate_hz: f64, bright_factor: f64, y_norm: f64) -> f64 {
    rate_hz * (bright_factor + (1.0 - bright_factor) * (1.0 - y_norm))
}

/// Per-polarity probability of a noise event during a step of `dt`.
#[inline(always)]
pub fn shot_noise_probability(rate_hz: f64, bright_factor: f64, y_norm: f64, dt: f64) -> f64 {
    0.5 * shot_noise_rate(rate_hz, bright_factor, y_norm) * dt
}

/// Two-sided comparator: `u < p` gives OFF, `u > 1 - p` gives ON.
#[inline(always)]
pub fn shot_noise_decision(u: f64, p: f64) -> Option<Polarity> {
    if u < p {
        Some(Polarity::Off)
    } else if u > 1.0 - p {
        Some(Polarity::On)
    } else {
        None
    }
}

/// Amount removed from the memorized log intensity over `dt`.
///
/// The decrement rate scales with the pixel's own ON threshold, so a static
/// pixel crosses one threshold every `1 / leak_rate_hz` seconds.
#[inline(always)]
pub fn leak_decrement(leak_rate_hz: f64, theta_on: f64, dt: f64) -> f64 {
    leak_rate_hz * theta_on * dt
}
