//! Multi-cell slot loop: warm-up ICI measurement, measurement runs in each
//! scheduling mode, and the extremal-ICI bound runs.
//!
//! Per slot every simulated cell draws its channels and schedules against
//! its frozen ICI model; after a barrier the users' ICI is realized from
//! all cells' beams of the same slot, service is applied and the virtual
//! queues are updated. Cells only exchange the per-slot beam snapshot, so
//! the parallel and serial loops produce identical results.

mod config;
mod engine;
mod metrics;

pub use config::{ExperimentConfig, RFirst};
pub use engine::{
    resolve_r_first, run_bound_experiments, run_experiment, run_measurement, run_model_bound, run_warmup,
    run_warmup_state, BoundMetrics, RunOptions, Warmup,
};
pub use metrics::{CellSummary, InfoTrace, Metrics, QueueSample, Realization, UserMetrics, BATCHES, QUEUE_WINDOWS};
