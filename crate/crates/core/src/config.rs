//! Flat `key = value` run configuration and the shipped presets.
//!
//! One parameter per line; `#` starts a comment. Keys mirror the command-line
//! flag names, and unknown keys are errors.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frame::compute_upsample_ratio;
use crate::model::ModelConfig;

/// Named presets shipped with the library, as config-file text.
pub const PRESETS: &[(&str, &str)] = &[
    ("ideal", include_str!("../presets/ideal.cfg")),
    ("bright", include_str!("../presets/bright.cfg")),
    ("dark", include_str!("../presets/dark.cfg")),
    ("mvsec_day", include_str!("../presets/mvsec_day.cfg")),
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parses config text into `(key, value)` pairs in file order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
            line: i + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::ConfigSyntax {
                line: i + 1,
                reason: "empty key or value".into(),
            });
        }
        out.push((k.to_owned(), v.to_owned()));
    }
    Ok(out)
}

/// Frame-pipeline settings: source rate, output geometry, upsampling.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input_fps: Option<f64>,
    pub dvs_h: Option<usize>,
    pub dvs_w: Option<usize>,
    /// Largest allowed timestamp step, seconds.
    pub timestamp_resolution: Option<f64>,
    /// Explicit upsampling ratio; overrides `timestamp_resolution`.
    pub upsample: Option<u32>,
    /// Largest optic flow between source frames, pixels.
    pub flow_bound: Option<f64>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::BadValue {
        key: key.to_owned(),
        reason: format!("cannot parse `{value}`"),
    })
}

impl PipelineConfig {
    pub const KEYS: &'static [&'static str] = &[
        "input_fps",
        "dvs_h",
        "dvs_w",
        "timestamp_resolution",
        "upsample",
        "flow_bound",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "input_fps" => self.input_fps = Some(parse(key, value)?),
            "dvs_h" => self.dvs_h = Some(parse(key, value)?),
            "dvs_w" => self.dvs_w = Some(parse(key, value)?),
            "timestamp_resolution" => self.timestamp_resolution = Some(parse(key, value)?),
            "upsample" => self.upsample = Some(parse(key, value)?),
            "flow_bound" => self.flow_bound = Some(parse(key, value)?),
            _ => return Err(Error::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    pub fn kv_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if let Some(v) = self.input_fps {
            out.push(("input_fps", v.to_string()));
        }
        if let Some(v) = self.dvs_h {
            out.push(("dvs_h", v.to_string()));
        }
        if let Some(v) = self.dvs_w {
            out.push(("dvs_w", v.to_string()));
        }
        if let Some(v) = self.timestamp_resolution {
            out.push(("timestamp_resolution", v.to_string()));
        }
        if let Some(v) = self.upsample {
            out.push(("upsample", v.to_string()));
        }
        if let Some(v) = self.flow_bound {
            out.push(("flow_bound", v.to_string()));
        }
        out
    }

    /// Upsampling ratio implied by the settings.
    ///
    /// An explicit `upsample` wins; otherwise the ratio comes from the
    /// timestamp resolution (and flow bound, when given); otherwise 1.
    pub fn resolve_ratio(&self) -> Result<u32> {
        if let Some(u) = self.upsample {
            if u == 0 {
                return Err(invalid("upsample must be >= 1"));
            }
            return Ok(u);
        }
        match (self.timestamp_resolution, self.flow_bound) {
            (Some(dt), flow) => {
                let fps = self
                    .input_fps
                    .ok_or_else(|| invalid("timestamp_resolution needs input_fps"))?;
                compute_upsample_ratio(fps, dt, flow)
            }
            (None, Some(f)) => {
                if !(f >= 0.0 && f.is_finite()) {
                    return Err(invalid(format!("flow bound must be >= 0, got {f}")));
                }
                Ok((f.ceil() as u32).max(1))
            }
            (None, None) => Ok(1),
        }
    }
}

/// Everything needed to reproduce a synthesis run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub pipeline: PipelineConfig,
}

impl RunConfig {
    pub fn from_preset(name: &str) -> Result<Self> {
        let text = preset_text(name).ok_or_else(|| {
            let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
            invalid(format!("unknown preset `{name}` (available: {})", names.join(", ")))
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if ModelConfig::KEYS.contains(&key) {
            self.model.set(key, value)
        } else if PipelineConfig::KEYS.contains(&key) {
            self.pipeline.set(key, value)
        } else {
            Err(Error::UnknownKey(key.to_owned()))
        }
    }

    /// Applies config-file text on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_kv(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.model.kv_pairs().into_iter().chain(self.pipeline.kv_pairs()) {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let kv = parse_kv("# header\n\ntheta_on = 0.5 # trailing\n  seed=3\n").unwrap();
        assert_eq!(
            kv,
            vec![
                ("theta_on".to_string(), "0.5".to_string()),
                ("seed".to_string(), "3".to_string())
            ]
        );
        assert!(matches!(
            parse_kv("theta_on 0.5"),
            Err(Error::ConfigSyntax { line: 1, .. })
        ));
        assert!(parse_kv("x =").is_err());
    }

    #[test]
    fn unknown_keys_are_errors() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.apply_text("bogus = 1"), Err(Error::UnknownKey(_))));
    }

    #[test]
    fn presets_load() {
        for (name, _) in PRESETS {
            let cfg = RunConfig::from_preset(name).unwrap();
            cfg.model.validate().unwrap();
        }
        let day = RunConfig::from_preset("mvsec_day").unwrap().model;
        assert_eq!((day.theta_on, day.theta_off, day.sigma_theta), (0.73, 0.43, 0.03));
        assert_eq!((day.shot_rate_hz, day.leak_rate_hz, day.cutoff_hz), (2.0, 0.5, 200.0));
        let ideal = RunConfig::from_preset("ideal").unwrap().model;
        assert_eq!(ideal.sigma_theta, 0.0);
        assert!(RunConfig::from_preset("nope").is_err());
    }

    #[test]
    fn kv_roundtrip() {
        let mut cfg = RunConfig::from_preset("dark").unwrap();
        cfg.set("input_fps", "60").unwrap();
        cfg.set("timestamp_resolution", "0.001").unwrap();
        cfg.set("seed", "7").unwrap();
        let mut back = RunConfig::default();
        back.apply_text(&cfg.to_kv()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn ratio_resolution() {
        let mut p = PipelineConfig {
            input_fps: Some(60.0),
            timestamp_resolution: Some(1e-3),
            ..Default::default()
        };
        assert_eq!(p.resolve_ratio().unwrap(), 17);
        p.flow_bound = Some(30.2);
        assert_eq!(p.resolve_ratio().unwrap(), 31);
        p.upsample = Some(4);
        assert_eq!(p.resolve_ratio().unwrap(), 4);
        assert_eq!(PipelineConfig::default().resolve_ratio().unwrap(), 1);
        let no_fps = PipelineConfig {
            timestamp_resolution: Some(1e-3),
            ..Default::default()
        };
        assert!(no_fps.resolve_ratio().is_err());
    }
}
