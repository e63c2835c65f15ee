//! Drift-plus-penalty scheduling: virtual queues, flow control for
//! proportional-fair and max-min utilities, ARQ-LLC rate allocation and
//! the per-slot two-step transmitter optimization.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ici::{IciDistribution, IciModel, PointMass};
use crate::scalar::Real;
use crate::selection::{greedy_select, SelectionInput};
use crate::zfbf::BeamAllocation;

/// Rate grid resolution for ARQ-LLC, bits per channel use.
pub const RATE_STEP: f64 = 0.01;
/// Largest allocatable rate, bits per channel use.
pub const RATE_MAX: f64 = 20.0;

const RATE_BLOCK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Utility {
    /// `sum_k ln R_k`.
    ProportionalFair,
    /// `min_k R_k`.
    MaxMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Adaptive variable-rate coding, outage service, ARQ at the link layer.
    ArqLlc,
    /// Incremental-redundancy HARQ; queues are served by fed-back mutual
    /// information.
    Harq,
    /// Genie-aided reference: every slot is served at its realized mutual
    /// information.
    GenieRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerParams<T> {
    /// Penalty weight `V`.
    pub v: T,
    /// Arrival cap, bits per channel use.
    pub a_max: T,
    pub utility: Utility,
    pub mode: Mode,
}

impl<T: Real> SchedulerParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.v.is_finite() && self.v > T::zero()) {
            return Err(Error::param("SchedulerParams.V", format!("must be positive, got {}", self.v)));
        }
        if !(self.a_max.is_finite() && self.a_max > T::zero()) {
            return Err(Error::param("SchedulerParams.A_max", format!("must be positive, got {}", self.a_max)));
        }
        Ok(())
    }
}

/// Virtual queue backlogs of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerState<T> {
    pub queues: Vec<T>,
}

impl<T: Real> SchedulerState<T> {
    pub fn new(users: usize) -> Self {
        Self {
            queues: vec![T::zero(); users],
        }
    }

    pub fn reset(&mut self) {
        self.queues.iter_mut().for_each(|q| *q = T::zero());
    }

    pub fn total(&self) -> T {
        self.queues.iter().copied().sum()
    }
}

/// Coding rates of the active users, parallel to `BeamAllocation::active`.
/// Empty outside ARQ-LLC mode.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateAllocation<T> {
    pub rates: Vec<T>,
}

/// Virtual arrivals maximizing `V U(A) - sum_k A_k Q_k` over `[0, A_max]^K`.
pub fn flow_control<T: Real>(queues: &[T], params: &SchedulerParams<T>) -> Vec<T> {
    match params.utility {
        Utility::ProportionalFair => queues
            .iter()
            .map(|&q| if q > T::zero() { (params.v / q).min(params.a_max) } else { params.a_max })
            .collect(),
        Utility::MaxMin => {
            let total: T = queues.iter().copied().sum();
            let a = if params.v >= total { params.a_max } else { T::zero() };
            vec![a; queues.len()]
        }
    }
}

/// `Q'_k = max(0, Q_k - service_k) + A_k`.
pub fn queue_update<T: Real>(queues: &mut [T], service: &[T], arrivals: &[T]) -> Result<()> {
    if queues.len() != service.len() || queues.len() != arrivals.len() {
        return Err(Error::InvalidArgument("queue update dimensions differ".into()));
    }
    if service.iter().chain(arrivals).any(|x| !(*x >= T::zero())) {
        return Err(Error::InvalidArgument("service and arrivals must be nonnegative".into()));
    }
    for ((q, &s), &a) in queues.iter_mut().zip(service).zip(arrivals) {
        *q = (*q - s).max(T::zero()) + a;
    }
    Ok(())
}

/// Outage-rate service: `r` if `r <= I`, else 0.
#[inline]
pub fn arqllc_service<T: Real>(rate: T, information: T) -> T {
    if rate <= information {
        rate
    } else {
        T::zero()
    }
}

/// Utility of a throughput vector.
pub fn utility_value<T: Real>(utility: Utility, rates: &[T]) -> T {
    match utility {
        Utility::ProportionalFair => rates.iter().map(|r| r.ln()).sum(),
        Utility::MaxMin => rates.iter().copied().fold(T::infinity(), T::min),
    }
}

#[inline]
fn grid_rate<T: Real>(i: usize) -> T {
    T::from_usize(i).unwrap() * T::lit(RATE_STEP)
}

/// Search interval of the rate grid, ordered by its bound; ties pop the
/// lower interval first.
struct Interval<T> {
    bound: T,
    a: usize,
    b: usize,
    sa: T,
}

impl<T: Real> PartialEq for Interval<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Interval<T> {}

impl<T: Real> PartialOrd for Interval<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Interval<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .partial_cmp(&other.bound)
            .unwrap_or(Ordering::Equal)
            .then(other.a.cmp(&self.a))
    }
}

/// Grid rate maximizing the expected outage rate
/// `r * F(S / (2^r - 1) - 1)` for effective power `S = g |h^H v|^2 P`.
///
/// The success probability is nonincreasing in `r`, so the grid splits
/// into a zero-outage prefix, a zero-probability tail, and a middle band
/// that is searched best-first over halving intervals with the bound
/// `r_hi * F(x(r_lo))`. The
/// result equals an exhaustive scan of the grid; ties go to the smaller
/// rate. Returns 0 when every grid rate has zero expected service.
pub fn arqllc_rate<T: Real, D: IciDistribution<T> + ?Sized>(effective_power: T, dist: &D) -> T {
    if !(effective_power > T::zero()) {
        return T::zero();
    }
    let n = (RATE_MAX / RATE_STEP).round() as usize;
    let success = |i: usize| {
        let r: T = grid_rate(i);
        dist.cdf(effective_power / (r * T::LN_2()).exp_m1() - T::one())
    };

    // Largest i with success == 1, or 0.
    let (mut lo, mut hi) = (0usize, n + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if success(mid) >= T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let full = lo;
    // Smallest i > full with success == 0, or n + 1.
    let (mut lo, mut hi) = (full, n + 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if success(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = hi;

    let mut best_i = full;
    let mut best = if full > 0 { grid_rate(full) } else { T::zero() };

    // Best-first branch and bound over intervals [a, b] of the band, keyed
    // by the bound r_b * success(a). The start of every interval is itself a
    // candidate, which keeps the incumbent tight.
    let consider = |i: usize, obj: T, best: &mut T, best_i: &mut usize| {
        if obj > *best || (obj == *best && obj > T::zero() && i < *best_i) {
            *best = obj;
            *best_i = i;
        }
    };
    let mut heap = BinaryHeap::new();
    if full + 1 < zero {
        let (a, b) = (full + 1, zero - 1);
        let sa = success(a);
        consider(a, grid_rate::<T>(a) * sa, &mut best, &mut best_i);
        heap.push(Interval { bound: grid_rate::<T>(b) * sa, a, b, sa });
    }
    while let Some(Interval { bound, a, b, sa }) = heap.pop() {
        if bound < best {
            break;
        }
        if b - a < RATE_BLOCK {
            for i in a + 1..=b {
                let obj = grid_rate::<T>(i) * success(i);
                consider(i, obj, &mut best, &mut best_i);
            }
            continue;
        }
        let mid = a + (b - a) / 2 + 1;
        let sm = success(mid);
        consider(mid, grid_rate::<T>(mid) * sm, &mut best, &mut best_i);
        heap.push(Interval { bound: grid_rate::<T>(mid - 1) * sa, a, b: mid - 1, sa });
        heap.push(Interval { bound: grid_rate::<T>(b) * sm, a: mid, b, sa: sm });
    }
    if best > T::zero() {
        grid_rate(best_i)
    } else {
        T::zero()
    }
}

/// One slot of the two-step transmitter optimization for one cell.
///
/// Step 1 selects users and powers against the mean-ICI surrogate with the
/// virtual queues as weights. Step 2, in ARQ-LLC mode, picks each active
/// user's rate against its ICI marginal from `model`.
pub fn schedule_slot<T: Real>(
    channels: &[&[Complex<T>]],
    queues: &[T],
    model: &IciModel<T>,
    own_gains: &[T],
    max_users: usize,
    params: &SchedulerParams<T>,
) -> Result<(BeamAllocation<T>, RateAllocation<T>)> {
    let mean_ici: Vec<T> = (0..channels.len()).map(|k| model.mean(k)).collect();
    let input = SelectionInput {
        channels,
        weights: queues,
        mean_ici: &mean_ici,
        own_gains,
    };
    let alloc = greedy_select(&input, max_users)?.allocation;
    let rates = match params.mode {
        Mode::ArqLlc => {
            let mut rates = Vec::with_capacity(alloc.active.len());
            for ((&k, v), &p) in alloc.active.iter().zip(&alloc.steering).zip(&alloc.powers) {
                let s = crate::zfbf::effective_gain(own_gains[k], channels[k], v, p);
                let r = match model {
                    IciModel::Empirical(cdfs) => arqllc_rate(s, &cdfs[k]),
                    IciModel::DeterministicMean(m) => arqllc_rate(s, &PointMass(m[k])),
                    IciModel::Rank1Extremal(_) => {
                        return Err(Error::InvalidArgument("ARQ-LLC rate allocation needs a tabulated ICI CDF".into()))
                    }
                };
                rates.push(r);
            }
            RateAllocation { rates }
        }
        Mode::Harq | Mode::GenieRef => RateAllocation::default(),
    };
    Ok((alloc, rates))
}

/// Monte Carlo estimate of the optimality-gap constant
/// `1/2 (K A_max^2 + sum_k E[log2^2(1 + g_k |h_k|^2 / (1 + chi_k))])`
/// with `|h_k|^2 ~ Gamma(antennas, 1)` and `chi_k` drawn from `model`.
pub fn kappa<T: Real, R: Rng + ?Sized>(
    a_max: T,
    own_gains: &[T],
    antennas: usize,
    model: &IciModel<T>,
    samples: usize,
    rng: &mut R,
) -> T {
    kappa_with(a_max, own_gains.len(), samples, rng, |user, rng| {
        let h2: T = (0..antennas).map(|_| T::sample_exp1(rng)).sum();
        let chi = model.sample(user, rng);
        own_gains[user] * h2 / (T::one() + chi)
    })
}

/// [`kappa`] for an arbitrary channel law: `draw_sinr(user, rng)` returns
/// one sample of `g_k |h_k|^2 / (1 + chi_k)`.
pub fn kappa_with<T: Real, R: Rng + ?Sized>(
    a_max: T,
    users: usize,
    samples: usize,
    rng: &mut R,
    mut draw_sinr: impl FnMut(usize, &mut R) -> T,
) -> T {
    let k = T::from_usize(users).unwrap();
    let mut second = T::zero();
    if samples > 0 {
        for user in 0..users {
            let mut acc = T::zero();
            for _ in 0..samples {
                let l = draw_sinr(user, rng).ln_1p() / T::LN_2();
                acc = acc + l * l;
            }
            second = second + acc / T::from_usize(samples).unwrap();
        }
    }
    T::lit(0.5) * (k * a_max * a_max + second)
}
