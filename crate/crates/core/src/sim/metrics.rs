use serde::Serialize;

use crate::ici::IciModelKind;
use crate::scheduler::Mode;

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 20;
/// Windows used for the queue-stability check.
pub const QUEUE_WINDOWS: usize = 10;

/// Where the ICI that reaches the users came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    /// Computed from every cell's beams in the same slot.
    Simulated,
    /// Drawn from an ICI model; other cells are not simulated.
    Model(IciModelKind),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserMetrics {
    pub cell: usize,
    /// Zero-based user index within the cell.
    pub user: usize,
    /// Position in cell widths.
    pub position: f64,
    /// Long-run throughput under the run's mode, bits per channel use.
    pub throughput: f64,
    pub stderr: f64,
    /// Time average of the realized mutual information.
    pub genie_throughput: f64,
    pub genie_stderr: f64,
    pub scheduled_fraction: f64,
    /// Fraction of scheduled slots in outage (ARQ-LLC only).
    pub outage_fraction: Option<f64>,
    pub r_first: Option<f64>,
    pub acks: Option<u64>,
    /// Mean inter-ACK time in slots (HARQ only).
    pub mean_delay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    /// Utility of the users' long-run throughputs (natural log for PF).
    pub utility: f64,
    /// Mean total backlog in each tenth of the run.
    pub queue_windows: Vec<f64>,
}

impl CellSummary {
    /// Relative change of the mean backlog between the last two tenths.
    pub fn queue_drift(&self) -> f64 {
        let n = self.queue_windows.len();
        if n < 2 {
            return 0.0;
        }
        let (prev, last) = (self.queue_windows[n - 2], self.queue_windows[n - 1]);
        if prev == 0.0 && last == 0.0 {
            0.0
        } else {
            (last - prev).abs() / prev.abs().max(last.abs())
        }
    }
}

/// Total backlog of every simulated cell at one slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueSample {
    pub slot: u64,
    pub totals: Vec<f64>,
}

/// Per-slot mutual information of every user of one cell; zero when the
/// user was not scheduled.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoTrace {
    pub cell: usize,
    pub users: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub mode: Mode,
    pub scheduling_model: IciModelKind,
    pub realization: Realization,
    pub slots: u64,
    pub users: Vec<UserMetrics>,
    pub cells: Vec<CellSummary>,
    pub queue_trace: Vec<QueueSample>,
    #[serde(skip)]
    pub traces: Vec<InfoTrace>,
}

impl Metrics {
    pub fn user(&self, cell: usize, user: usize) -> Option<&UserMetrics> {
        self.users.iter().find(|u| u.cell == cell && u.user == user)
    }

    pub fn cell_users(&self, cell: usize) -> impl Iterator<Item = &UserMetrics> {
        self.users.iter().filter(move |u| u.cell == cell)
    }

    pub fn trace(&self, cell: usize) -> Option<&InfoTrace> {
        self.traces.iter().find(|t| t.cell == cell)
    }
}

/// Running sums for one user.
#[derive(Debug, Clone, Default)]
pub(crate) struct UserAccum {
    pub served: f64,
    pub info: f64,
    pub scheduled: u64,
    pub outages: u64,
    pub served_batches: [f64; BATCHES],
    pub info_batches: [f64; BATCHES],
    /// Bits delivered by HARQ ACKs.
    pub acked_batches: [f64; BATCHES],
}

/// Mean and batch-means standard error of a per-slot quantity.
pub(crate) fn batch_stats(total: f64, batches: &[f64; BATCHES], slots: u64) -> (f64, f64) {
    let mean = total / slots as f64;
    if slots < BATCHES as u64 {
        return (mean, f64::NAN);
    }
    let sizes = batch_sizes(slots);
    let means: Vec<f64> = batches.iter().zip(&sizes).map(|(s, &n)| s / n as f64).collect();
    let m = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    (mean, (var / BATCHES as f64).sqrt())
}

/// Batch a slot belongs to.
#[inline]
pub(crate) fn batch_of(slot: u64, slots: u64) -> usize {
    ((slot as u128 * BATCHES as u128 / slots as u128) as usize).min(BATCHES - 1)
}

fn batch_sizes(slots: u64) -> [u64; BATCHES] {
    let mut sizes = [0u64; BATCHES];
    for (b, size) in sizes.iter_mut().enumerate() {
        let lo = (b as u128 * slots as u128).div_ceil(BATCHES as u128);
        let hi = ((b as u128 + 1) * slots as u128).div_ceil(BATCHES as u128);
        *size = (hi - lo) as u64;
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_partition_the_run() {
        for slots in [20u64, 21, 99, 1000, 12345] {
            let mut counts = [0u64; BATCHES];
            for t in 0..slots {
                counts[batch_of(t, slots)] += 1;
            }
            assert_eq!(counts, batch_sizes(slots), "slots {slots}");
        }
    }

    #[test]
    fn constant_series_has_zero_error() {
        let slots = 100;
        let mut b = [0.0; BATCHES];
        for t in 0..slots {
            b[batch_of(t, slots)] += 2.0;
        }
        let (m, se) = batch_stats(200.0, &b, slots);
        assert_eq!(m, 2.0);
        assert!(se.abs() < 1e-12);
    }
}
