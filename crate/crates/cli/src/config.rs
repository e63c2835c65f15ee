//! Flat JSON experiment configuration.
//!
//! Every key is optional; missing keys take the reference-system values.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `C`, `K`, `M` | cells, users per cell, antennas | 18, 36, 2 |
//! | `G0_dB` | gain scale in dB | 60 |
//! | `nu`, `delta` | propagation exponent, breakpoint distance | 3.0, 0.05 |
//! | `V`, `A_max` | penalty weight, arrival cap | 50, 50 |
//! | `utility` | `proportional_fair` or `max_min` | `proportional_fair` |
//! | `mode` | `arq_llc`, `harq` or `genie_ref` | `harq` |
//! | `slots_warmup`, `slots_measure` | phase lengths | 10000, 100000 |
//! | `seed` | master seed | 1 |
//! | `r_first` | `"auto"` or one rate per user index | `"auto"` |
//! | `harq_target_fraction` | genie fraction targeted by `"auto"` | 0.97 |
//! | `probe_slots` | probe length for `"auto"` | 20000 |
//! | `ici_iterations` | warm-up passes | 1 |
//! | `reset_queues` | zero queues before measuring | true |
//! | `parallel` | use all cores | false |

use std::path::Path;

use serde::Deserialize;
use zfharq::layout::LayoutParams;
use zfharq::scheduler::{Mode, Utility};
use zfharq::sim::{ExperimentConfig, RFirst};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RFirstField {
    Name(String),
    Rates(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "C")]
    cells: Option<usize>,
    #[serde(rename = "K")]
    users: Option<usize>,
    #[serde(rename = "M")]
    antennas: Option<usize>,
    #[serde(rename = "G0_dB")]
    g0_db: Option<f64>,
    nu: Option<f64>,
    delta: Option<f64>,
    #[serde(rename = "V")]
    v: Option<f64>,
    #[serde(rename = "A_max")]
    a_max: Option<f64>,
    utility: Option<Utility>,
    mode: Option<Mode>,
    slots_warmup: Option<u64>,
    slots_measure: Option<u64>,
    seed: Option<u64>,
    r_first: Option<RFirstField>,
    harq_target_fraction: Option<f64>,
    probe_slots: Option<u64>,
    ici_iterations: Option<u32>,
    reset_queues: Option<bool>,
    parallel: Option<bool>,
}

/// Parses and validates a configuration text.
pub fn parse_config_str(text: &str) -> CliResult<ExperimentConfig> {
    let raw: RawConfig = if text.trim().is_empty() {
        RawConfig::default()
    } else {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?
    };
    let mut c = ExperimentConfig::reference(
        raw.utility.unwrap_or(Utility::ProportionalFair),
        raw.mode.unwrap_or(Mode::Harq),
    );
    let reference = c.layout;
    c.layout = LayoutParams {
        cells: raw.cells.unwrap_or(reference.cells),
        users_per_cell: raw.users.unwrap_or(reference.users_per_cell),
        antennas: raw.antennas.unwrap_or(reference.antennas),
        g0: raw.g0_db.map_or(reference.g0, |db| 10f64.powf(db / 10.0)),
        nu: raw.nu.unwrap_or(reference.nu),
        delta: raw.delta.unwrap_or(reference.delta),
    };
    if let Some(v) = raw.v {
        c.scheduler.v = v;
    }
    if let Some(a) = raw.a_max {
        c.scheduler.a_max = a;
    }
    if let Some(n) = raw.slots_warmup {
        c.slots_warmup = n;
    }
    if let Some(n) = raw.slots_measure {
        c.slots_measure = n;
    }
    if let Some(s) = raw.seed {
        c.seed = s;
    }
    if let Some(n) = raw.probe_slots {
        c.probe_slots = n;
    }
    if let Some(n) = raw.ici_iterations {
        c.ici_iterations = n;
    }
    if let Some(b) = raw.reset_queues {
        c.reset_queues = b;
    }
    if let Some(b) = raw.parallel {
        c.parallel = b;
    }
    let fraction = raw.harq_target_fraction.unwrap_or(0.97);
    c.r_first = match raw.r_first {
        None => RFirst::Auto { target_fraction: fraction },
        Some(RFirstField::Name(n)) if n == "auto" => RFirst::Auto { target_fraction: fraction },
        Some(RFirstField::Name(n)) => {
            return Err(CliError::Validation(format!("config: r_first must be \"auto\" or a list of rates, got \"{n}\"")))
        }
        Some(RFirstField::Rates(r)) => {
            if raw.harq_target_fraction.is_some() {
                return Err(CliError::Validation(
                    "config: harq_target_fraction only applies when r_first is \"auto\"".into(),
                ));
            }
            RFirst::Fixed(r)
        }
    };
    c.validate()?;
    Ok(c)
}

/// Reads and parses a configuration file.
pub fn parse_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}
