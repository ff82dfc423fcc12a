use clap::Args;

use evgen::RunConfig;

use crate::failure::{classify_lib, CmdResult};

macro_rules! param_flags {
    ($($name:ident => $help:literal,)*) => {
        /// Model and pipeline parameters; each flag is also a config-file key.
        #[derive(Args, Debug, Default, Clone)]
        pub struct ParamFlags {
            $(
                #[arg(long = stringify!($name), value_name = "VALUE", help = $help)]
                pub $name: Option<String>,
            )*
        }

        impl ParamFlags {
            pub fn pairs(&self) -> Vec<(&'static str, &str)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$name {
                        out.push((stringify!($name), v.as_str()));
                    }
                )*
                out
            }
        }
    };
}

param_flags! {
    theta_on => "Nominal ON threshold (log units)",
    theta_off => "Nominal OFF threshold magnitude (log units)",
    sigma_theta => "Per-pixel threshold spread",
    cutoff_hz => "Lowpass cutoff for a white pixel; 0 disables",
    bw_floor => "Minimum bandwidth as a fraction of the cutoff",
    leak_rate_hz => "Leak event rate",
    shot_rate_hz => "Total shot-noise rate of a black pixel",
    shot_bright_factor => "Shot-noise multiplier for a white pixel",
    theta_min => "Lower clip for sampled thresholds",
    linlog_knee => "Luma below which log intensity is linearized",
    seed => "Seed for thresholds, leak phase and noise",
    input_fps => "Source frame rate",
    dvs_h => "Output sensor height",
    dvs_w => "Output sensor width",
    timestamp_resolution => "Largest allowed timestamp step, seconds",
    upsample => "Explicit upsampling ratio",
    flow_bound => "Largest optic flow between source frames, pixels",
}

impl ParamFlags {
    pub fn apply(&self, cfg: &mut RunConfig) -> CmdResult {
        for (k, v) in self.pairs() {
            cfg.set(k, v).map_err(|e| classify_lib(e, &format!("--{k}")))?;
        }
        Ok(())
    }
}
