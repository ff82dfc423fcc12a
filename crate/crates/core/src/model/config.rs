use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the pixel-array model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Nominal ON threshold, log-intensity units.
    pub theta_on: f64,
    /// Nominal OFF threshold magnitude, log-intensity units.
    pub theta_off: f64,
    /// Per-pixel Gaussian threshold spread.
    pub sigma_theta: f64,
    /// Lowpass cutoff for a full-white pixel; 0 disables the filter.
    pub cutoff_hz: f64,
    /// Minimum bandwidth as a fraction of `cutoff_hz`.
    pub bw_floor: f64,
    pub leak_rate_hz: f64,
    /// Total (ON + OFF) shot-noise rate of a black pixel.
    pub shot_rate_hz: f64,
    /// Noise-rate multiplier for a full-white pixel.
    pub shot_bright_factor: f64,
    /// Lower clip for sampled thresholds (limits hot pixels).
    pub theta_min: f64,
    /// Luma below which log intensity is linearized, DN.
    pub linlog_knee: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            theta_on: 0.2,
            theta_off: 0.2,
            sigma_theta: 0.03,
            cutoff_hz: 0.0,
            bw_floor: 0.1,
            leak_rate_hz: 0.0,
            shot_rate_hz: 0.0,
            shot_bright_factor: 0.25,
            theta_min: 0.01,
            linlog_knee: 20.0,
            seed: 0,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v: f64 = value.trim().parse().map_err(|_| Error::BadValue {
        key: key.to_owned(),
        reason: format!("`{value}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::BadValue {
            key: key.to_owned(),
            reason: "must be finite".into(),
        });
    }
    Ok(v)
}

fn check(ok: bool, key: &str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::BadValue {
            key: key.to_owned(),
            reason: reason.to_owned(),
        })
    }
}

impl ModelConfig {
    pub const KEYS: &'static [&'static str] = &[
        "theta_on",
        "theta_off",
        "sigma_theta",
        "cutoff_hz",
        "bw_floor",
        "leak_rate_hz",
        "shot_rate_hz",
        "shot_bright_factor",
        "theta_min",
        "linlog_knee",
        "seed",
    ];

    /// An ideal sensor with a uniform threshold: no mismatch, filter or noise.
    pub fn ideal(theta: f64) -> Self {
        Self {
            theta_on: theta,
            theta_off: theta,
            sigma_theta: 0.0,
            ..Self::default()
        }
    }

    /// Sets one parameter from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "theta_on" => self.theta_on = parse_f64(key, value)?,
            "theta_off" => self.theta_off = parse_f64(key, value)?.abs(),
            "sigma_theta" => self.sigma_theta = parse_f64(key, value)?,
            "cutoff_hz" => self.cutoff_hz = parse_f64(key, value)?,
            "bw_floor" => self.bw_floor = parse_f64(key, value)?,
            "leak_rate_hz" => self.leak_rate_hz = parse_f64(key, value)?,
            "shot_rate_hz" => self.shot_rate_hz = parse_f64(key, value)?,
            "shot_bright_factor" => self.shot_bright_factor = parse_f64(key, value)?,
            "theta_min" => self.theta_min = parse_f64(key, value)?,
            "linlog_knee" => self.linlog_knee = parse_f64(key, value)?,
            "seed" => {
                self.seed = value.trim().parse().map_err(|_| Error::BadValue {
                    key: key.to_owned(),
                    reason: format!("`{value}` is not an unsigned integer"),
                })?
            }
            _ => return Err(Error::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        check(self.theta_on > 0.0, "theta_on", "must be > 0")?;
        check(self.theta_off > 0.0, "theta_off", "must be > 0")?;
        check(self.sigma_theta >= 0.0, "sigma_theta", "must be >= 0")?;
        check(self.cutoff_hz >= 0.0, "cutoff_hz", "must be >= 0")?;
        check(
            self.bw_floor > 0.0 && self.bw_floor <= 1.0,
            "bw_floor",
            "must be in (0, 1]",
        )?;
        check(self.leak_rate_hz >= 0.0, "leak_rate_hz", "must be >= 0")?;
        check(self.shot_rate_hz >= 0.0, "shot_rate_hz", "must be >= 0")?;
        check(
            self.shot_bright_factor > 0.0 && self.shot_bright_factor <= 1.0,
            "shot_bright_factor",
            "must be in (0, 1]",
        )?;
        check(self.theta_min > 0.0, "theta_min", "must be > 0")?;
        check(self.linlog_knee > 1.0, "linlog_knee", "must be > 1 DN")?;
        Ok(())
    }

    /// Renders the config in the `key = value` file format.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.kv_pairs() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn kv_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("theta_on", self.theta_on.to_string()),
            ("theta_off", self.theta_off.to_string()),
            ("sigma_theta", self.sigma_theta.to_string()),
            ("cutoff_hz", self.cutoff_hz.to_string()),
            ("bw_floor", self.bw_floor.to_string()),
            ("leak_rate_hz", self.leak_rate_hz.to_string()),
            ("shot_rate_hz", self.shot_rate_hz.to_string()),
            ("shot_bright_factor", self.shot_bright_factor.to_string()),
            ("theta_min", self.theta_min.to_string()),
            ("linlog_knee", self.linlog_knee.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}
