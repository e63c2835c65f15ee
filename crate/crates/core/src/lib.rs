//! Decentralized multi-cell MU-MIMO downlink scheduling under random
//! inter-cell interference.
//!
//! The crate implements a drift-plus-penalty scheduler with zero-forcing
//! beamforming and two retransmission schemes: adaptive variable-rate
//! coding with ARQ at the link layer, and incremental-redundancy HARQ
//! driven by fed-back mutual information. A slotted system simulator runs
//! both on a one-dimensional torus of cells and also evaluates the
//! deterministic-mean and rank-one extremal ICI models that bound the
//! genie-aided throughput.
//!
//! The link-level math is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the simulator uses.

pub mod error;
pub mod harq;
pub mod ici;
pub mod layout;
pub mod rng;
pub mod scalar;
pub mod scheduler;
pub mod selection;
pub mod sim;
pub mod zfbf;

pub use error::{Error, Result};
pub use scalar::Real;

pub type LayoutParams = layout::LayoutParams<f64>;
pub type PathGainMap = layout::PathGainMap<f64>;
pub type ChannelSet = layout::ChannelSet<f64>;
pub type CellChannels = layout::CellChannels<f64>;
pub type BeamAllocation = zfbf::BeamAllocation<f64>;
pub type EmpiricalCdf = ici::EmpiricalCdf<f64>;
pub type IciModel = ici::IciModel<f64>;
pub type SchedulerParams = scheduler::SchedulerParams<f64>;
pub type SchedulerState = scheduler::SchedulerState<f64>;
pub type RateAllocation = scheduler::RateAllocation<f64>;
pub type HarqUserState = harq::HarqUserState<f64>;
