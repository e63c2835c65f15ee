use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::LayoutParams;
use crate::scheduler::{Mode, SchedulerParams, Utility};

/// How the HARQ first-block rates are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RFirst {
    /// Per user index, the smallest rate whose HARQ throughput on a
    /// GenieRef probe trace reaches `target_fraction` of the genie rate.
    Auto { target_fraction: f64 },
    /// One rate per user index, shared by all cells.
    Fixed(Vec<f64>),
}

impl Default for RFirst {
    fn default() -> Self {
        RFirst::Auto { target_fraction: 0.97 }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub layout: LayoutParams<f64>,
    pub scheduler: SchedulerParams<f64>,
    pub slots_warmup: u64,
    pub slots_measure: u64,
    pub seed: u64,
    pub r_first: RFirst,
    /// Length of the GenieRef probe used by `RFirst::Auto`.
    pub probe_slots: u64,
    /// Warm-up passes; each pass after the first schedules against the
    /// CDFs measured by the previous one.
    pub ici_iterations: u32,
    /// Zero the virtual queues when measurement starts.
    pub reset_queues: bool,
    /// Process cells on the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl ExperimentConfig {
    /// The 18-cell reference system with `V = A_max = 50`.
    pub fn reference(utility: Utility, mode: Mode) -> Self {
        Self {
            layout: LayoutParams::reference(),
            scheduler: SchedulerParams {
                v: 50.0,
                a_max: 50.0,
                utility,
                mode,
            },
            slots_warmup: 10_000,
            slots_measure: 100_000,
            seed: 1,
            r_first: RFirst::default(),
            probe_slots: 20_000,
            ici_iterations: 1,
            reset_queues: true,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        self.scheduler.validate()?;
        if self.slots_warmup < 1 {
            return Err(Error::param("ExperimentConfig.slots_warmup", "must be at least 1"));
        }
        if self.slots_measure < 1 {
            return Err(Error::param("ExperimentConfig.slots_measure", "must be at least 1"));
        }
        if self.ici_iterations < 1 {
            return Err(Error::param("ExperimentConfig.ici_iterations", "must be at least 1"));
        }
        match &self.r_first {
            RFirst::Auto { target_fraction } => {
                if !(*target_fraction > 0.0 && *target_fraction < 1.0) {
                    return Err(Error::param("ExperimentConfig.r_first", "target fraction must lie in (0, 1)"));
                }
                if self.probe_slots < 1 {
                    return Err(Error::param("ExperimentConfig.probe_slots", "must be at least 1"));
                }
            }
            RFirst::Fixed(rates) => {
                if rates.len() != self.layout.users_per_cell {
                    return Err(Error::param(
                        "ExperimentConfig.r_first",
                        format!("expected {} rates, got {}", self.layout.users_per_cell, rates.len()),
                    ));
                }
                if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
                    return Err(Error::param("ExperimentConfig.r_first", "rates must be positive"));
                }
            }
        }
        Ok(())
    }
}
