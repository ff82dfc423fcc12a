use std::f64::consts::TAU;

/// Cutoff for a pixel with normalized luma `y_norm`: bandwidth grows linearly
/// with intensity above a floor of `bw_floor * cutoff_hz`.
#[inline(always)]
pub fn pixel_cutoff(cutoff_hz: f64, bw_floor: f64, y_norm: f64) -> f64 {
    cutoff_hz * (bw_floor + (1.0 - bw_floor) * y_norm)
}

/// One step of the first-order IIR lowpass on log intensity.
///
/// The update gain `dt * 2 pi f` is clamped at 1, so a step longer than the
/// filter time constant passes the input straight through. `cutoff_hz == 0`
/// disables filtering.
#[inline(always)]
pub fn lowpass_update(l_lp: f64, l_new: f64, y_norm: f64, dt: f64, cutoff_hz: f64, bw_floor: f64) -> f64 {
    if cutoff_hz <= 0.0 {
        return l_new;
    }
    let eps = (dt * TAU * pixel_cutoff(cutoff_hz, bw_floor, y_norm)).min(1.0);
    l_lp + eps * (l_new - l_lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_filter_passes_through() {
        assert_eq!(lowpass_update(1.0, 3.0, 0.2, 1e-3, 0.0, 0.1), 3.0);
    }

    #[test]
    fn long_step_clamps() {
        assert_eq!(lowpass_update(1.0, 3.0, 1.0, 1.0, 300.0, 0.1), 3.0);
    }

    #[test]
    fn bandwidth_floor() {
        assert!((pixel_cutoff(200.0, 0.1, 0.0) - 20.0).abs() < 1e-12);
        assert!((pixel_cutoff(200.0, 0.1, 1.0) - 200.0).abs() < 1e-12);
        assert!((pixel_cutoff(200.0, 0.1, 0.5) - 110.0).abs() < 1e-12);
    }

    #[test]
    fn step_response_time_constant() {
        // Analytic RC: 63.2 % of a unit step after 1 / (2 pi f).
        let (f, dt) = (50.0, 1e-4);
        let tau = 1.0 / (TAU * f);
        let target = 1.0 - (-1.0f64).exp();
        let mut y = 0.0;
        let mut prev = 0.0;
        let mut t = 0.0;
        let crossing = loop {
            y = lowpass_update(y, 1.0, 1.0, dt, f, 0.1);
            t += dt;
            if y >= target {
                break t - dt * (y - target) / (y - prev);
            }
            prev = y;
        };
        assert!((crossing - tau).abs() / tau < 0.02, "{crossing} vs {tau}");
    }

    #[test]
    fn dark_pixels_settle_slower() {
        let settle = |y_norm: f64| {
            let mut l = 0.0;
            let mut n = 0;
            while l < 0.9 {
                l = lowpass_update(l, 1.0, y_norm, 1e-4, 100.0, 0.1);
                n += 1;
            }
            n
        };
        assert!(settle(0.0) > settle(0.5));
        assert!(settle(0.5) > settle(1.0));
    }
}
