//! Inter-cell interference: realized and mean ICI power, empirical CDFs,
//! and the extremal (deterministic-mean and rank-one) ICI models that
//! bound the achievable throughput.

mod cdf;
mod sidecar;

pub use cdf::{EmpiricalCdf, IciDistribution, PointMass};
pub use sidecar::{CdfSet, MAGIC as SIDECAR_MAGIC};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{CellChannels, PathGainMap};
use crate::scalar::{Real, EULER_GAMMA};
use crate::zfbf::BeamAllocation;

/// Which ICI statistics a cell works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IciModelKind {
    Empirical,
    DeterministicMean,
    Rank1Extremal,
}

/// Per-user ICI statistics for the users of one cell.
#[derive(Debug, Clone, PartialEq)]
pub enum IciModel<T> {
    /// Measured marginal CDFs.
    Empirical(Vec<EmpiricalCdf<T>>),
    /// ICI fixed at its full-power mean `sum_{c' != c} g_{k,c,c'}`.
    DeterministicMean(Vec<T>),
    /// Every interferer serves one user at full power; holds the
    /// interferer gains of each user.
    Rank1Extremal(Vec<Vec<T>>),
}

impl<T: Real> IciModel<T> {
    pub fn deterministic_mean(gains: &PathGainMap<T>, cell: usize) -> Self {
        IciModel::DeterministicMean((0..gains.users()).map(|k| mean_ici(k, cell, gains)).collect())
    }

    pub fn rank1(gains: &PathGainMap<T>, cell: usize) -> Self {
        IciModel::Rank1Extremal((0..gains.users()).map(|k| gains.interferers(cell, k)).collect())
    }

    pub fn kind(&self) -> IciModelKind {
        match self {
            IciModel::Empirical(_) => IciModelKind::Empirical,
            IciModel::DeterministicMean(_) => IciModelKind::DeterministicMean,
            IciModel::Rank1Extremal(_) => IciModelKind::Rank1Extremal,
        }
    }

    pub fn users(&self) -> usize {
        match self {
            IciModel::Empirical(v) => v.len(),
            IciModel::DeterministicMean(v) => v.len(),
            IciModel::Rank1Extremal(v) => v.len(),
        }
    }

    /// Mean ICI power of `user` under this model.
    pub fn mean(&self, user: usize) -> T {
        match self {
            IciModel::Empirical(v) => v[user].mean(),
            IciModel::DeterministicMean(v) => v[user],
            IciModel::Rank1Extremal(v) => v[user].iter().copied().sum(),
        }
    }

    pub fn means(&self) -> Vec<T> {
        (0..self.users()).map(|k| self.mean(k)).collect()
    }

    /// Draws one ICI power for `user`.
    pub fn sample<R: Rng + ?Sized>(&self, user: usize, rng: &mut R) -> T {
        match self {
            IciModel::Empirical(v) => v[user].quantile(T::sample_unit(rng)),
            IciModel::DeterministicMean(v) => v[user],
            IciModel::Rank1Extremal(v) => rank1_ici_sample(&v[user], rng),
        }
    }

    /// `P(chi <= x)` for models with a tabulated marginal.
    pub fn cdf(&self, user: usize, x: T) -> Result<T> {
        match self {
            IciModel::Empirical(v) => Ok(v[user].eval(x)),
            IciModel::DeterministicMean(v) => Ok(PointMass(v[user]).cdf(x)),
            IciModel::Rank1Extremal(_) => Err(Error::InvalidArgument(
                "rank-one model has no tabulated CDF; use it for throughput bounds only".into(),
            )),
        }
    }
}

/// Realized ICI power at `(cell, user)` given every cell's beams for the
/// same slot. `allocations` is indexed by cell.
pub fn instantaneous_ici<T: Real>(
    user: usize,
    cell: usize,
    channels: &CellChannels<T>,
    allocations: &[BeamAllocation<T>],
    gains: &PathGainMap<T>,
) -> T {
    allocations
        .iter()
        .enumerate()
        .filter(|&(bs, a)| bs != cell && !a.is_silent())
        .map(|(bs, a)| gains.get(cell, user, bs) * a.received_power(channels.vector(user, bs)))
        .sum()
}

/// Mean ICI power when all interferers transmit at full power.
pub fn mean_ici<T: Real>(user: usize, cell: usize, gains: &PathGainMap<T>) -> T {
    gains
        .row(cell, user)
        .iter()
        .enumerate()
        .filter(|&(bs, _)| bs != cell)
        .map(|(_, &g)| g)
        .sum()
}

/// Draw of the rank-one extremal ICI: `sum_i g_i E_i` with `E_i` i.i.d.
/// unit-mean exponential (`|h^H v|^2` for unit `v` independent of `h`).
pub fn rank1_ici_sample<T: Real, R: Rng + ?Sized>(interferer_gains: &[T], rng: &mut R) -> T {
    interferer_gains.iter().map(|&g| g * T::sample_exp1(rng)).sum()
}

/// Upper bound, in bits, on the per-user throughput gap between the
/// rank-one and deterministic-mean ICI models: `gamma / ln 2`.
pub fn gap_constant<T: Real>() -> T {
    T::lit(EULER_GAMMA) / T::LN_2()
}
