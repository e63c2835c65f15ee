//! Incremental-redundancy HARQ: per-user accumulated mutual information,
//! ACK/NACK feedback, and renewal-reward throughput and delay analysis.
//!
//! A packet of first-block rate `r` is decoded in the first slot where the
//! mutual information accumulated since the packet started reaches `r`.
//! Information in excess of `r` at the decoding slot is discarded.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tail probability above which a truncated renewal sum is flagged.
pub const RENEWAL_TAIL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Ack,
    Nack,
    /// Not scheduled; nothing is fed back.
    Idle,
}

/// HARQ receiver/transmitter state of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct HarqUserState<T> {
    r_first: T,
    acc: T,
    inter_ack: Vec<u64>,
    packet_start: u64,
    elapsed: u64,
}

impl<T: Real> HarqUserState<T> {
    pub fn new(r_first: T) -> Result<Self> {
        if !(r_first.is_finite() && r_first > T::zero()) {
            return Err(Error::param("HarqUserState.r_first", format!("must be positive, got {r_first}")));
        }
        Ok(Self {
            r_first,
            acc: T::zero(),
            inter_ack: Vec::new(),
            packet_start: 0,
            elapsed: 0,
        })
    }

    pub fn r_first(&self) -> T {
        self.r_first
    }

    /// Mutual information accumulated toward the current packet.
    pub fn accumulated(&self) -> T {
        self.acc
    }

    pub fn acks(&self) -> u64 {
        self.inter_ack.len() as u64
    }

    /// Inter-ACK times `W(1..N)` in slots.
    pub fn inter_ack_times(&self) -> &[u64] {
        &self.inter_ack
    }

    pub fn elapsed(&self) -> u64 {
        self.elapsed
    }

    /// Slots since the last ACK (or since the start).
    pub fn since_last_ack(&self) -> u64 {
        self.elapsed - self.packet_start
    }

    /// Advances one slot. `information` must be zero when the user is not
    /// scheduled.
    pub fn step(&mut self, scheduled: bool, information: T) -> Result<Feedback> {
        if !(information.is_finite() && information >= T::zero()) {
            return Err(Error::InvalidArgument(format!("mutual information {information} is negative or not finite")));
        }
        if !scheduled && information != T::zero() {
            return Err(Error::InvalidArgument("unscheduled user observed nonzero mutual information".into()));
        }
        self.elapsed += 1;
        if !scheduled {
            return Ok(Feedback::Idle);
        }
        self.acc = self.acc + information;
        if self.acc >= self.r_first {
            self.inter_ack.push(self.elapsed - self.packet_start);
            self.packet_start = self.elapsed;
            self.acc = T::zero();
            Ok(Feedback::Ack)
        } else {
            Ok(Feedback::Nack)
        }
    }

    /// `r N / t` over the `elapsed` slots so far.
    pub fn throughput(&self) -> T {
        if self.elapsed == 0 {
            return T::zero();
        }
        harq_throughput(self.r_first, self.acks(), self.elapsed)
    }

    /// Mean inter-ACK time, `None` before the first ACK.
    pub fn mean_delay(&self) -> Option<T> {
        if self.inter_ack.is_empty() {
            return None;
        }
        let total: u64 = self.inter_ack.iter().sum();
        Some(T::from_u64(total).unwrap() / T::from_usize(self.inter_ack.len()).unwrap())
    }
}

/// Free-function form of [`HarqUserState::step`].
pub fn harq_step<T: Real>(state: &mut HarqUserState<T>, scheduled: bool, information: T) -> Result<Feedback> {
    state.step(scheduled, information)
}

/// `r N / t`: `N` packets of `r` bits per channel use delivered in `t`
/// slots. `t` equals the inter-ACK times plus the open interval since the
/// last ACK.
pub fn harq_throughput<T: Real>(r_first: T, acks: u64, slots: u64) -> T {
    debug_assert!(slots >= 1);
    r_first * T::from_u64(acks).unwrap() / T::from_u64(slots).unwrap()
}

/// Time average of a mutual-information trace: the throughput of a
/// system that always transmits at the realized mutual information.
pub fn genie_throughput<T: Real>(trace: &[T]) -> Result<T> {
    if trace.is_empty() {
        return Err(Error::InvalidArgument("empty mutual-information trace".into()));
    }
    Ok(trace.iter().copied().sum::<T>() / T::from_usize(trace.len()).unwrap())
}

/// Mean inter-ACK time from level-crossing probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalDelay<T> {
    pub mean: T,
    /// Last probability of the truncated sum.
    pub tail: T,
    /// `tail >= RENEWAL_TAIL`: the sum is likely truncated too early.
    pub truncated: bool,
}

/// `E[W] = 1 + sum_t P(A[t])`, where `A[t]` is the event that the first
/// `t` slots of a packet accumulate less than `r`.
pub fn renewal_mean_delay<T: Real>(probs: &[T]) -> Result<RenewalDelay<T>> {
    for (i, &p) in probs.iter().enumerate() {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidArgument(format!("probability at t = {} outside [0, 1]", i + 1)));
        }
        if i > 0 && p > probs[i - 1] {
            return Err(Error::NonMonotone { index: i + 1 });
        }
    }
    let tail = probs.last().copied().unwrap_or(T::zero());
    let truncated = tail >= T::lit(RENEWAL_TAIL);
    if truncated {
        log::warn!("renewal sum truncated with tail probability {tail}");
    }
    Ok(RenewalDelay {
        mean: T::one() + probs.iter().copied().sum::<T>(),
        tail,
        truncated,
    })
}

/// Monte Carlo estimate of `P(A[t])`, `t = 1..=max_t`, from a trace.
///
/// Each start index opens a virtual packet at that slot; `A[t]` holds
/// while the information accumulated over `t` slots stays below `r`.
/// Starts without `max_t` slots of trace left are skipped.
pub fn level_crossing_probs<T: Real>(
    trace: &[T],
    r_first: T,
    starts: impl IntoIterator<Item = usize>,
    max_t: usize,
) -> Vec<T> {
    let mut prefix = Vec::with_capacity(trace.len() + 1);
    let mut acc = T::zero();
    prefix.push(acc);
    for &x in trace {
        acc = acc + x;
        prefix.push(acc);
    }
    // survivors[t] = number of starts still below r after t + 1 slots.
    let mut exits = vec![0u64; max_t + 1];
    let mut n = 0u64;
    for s in starts {
        if s + max_t > trace.len() {
            continue;
        }
        n += 1;
        let target = prefix[s] + r_first;
        let window = &prefix[s + 1..=s + max_t];
        // First t (1-based) whose accumulated sum reaches r.
        let w = window.partition_point(|&p| p < target) + 1;
        exits[w.min(max_t + 1) - 1] += 1;
    }
    if n == 0 {
        return Vec::new();
    }
    let nn = T::from_u64(n).unwrap();
    let mut out = Vec::with_capacity(max_t);
    let mut alive = n;
    for &e in exits.iter().take(max_t) {
        alive -= e;
        out.push(T::from_u64(alive).unwrap() / nn);
    }
    out
}

/// Renewal estimate of the mean inter-ACK time on a trace.
///
/// Virtual packets start at every slot that follows a slot in which the
/// user was scheduled, the condition under which real packets start after
/// an ACK. The horizon doubles until the tail probability drops below
/// [`RENEWAL_TAIL`] or would exceed a quarter of the trace.
pub fn trace_renewal_delay<T: Real>(trace: &[T], r_first: T) -> Result<RenewalDelay<T>> {
    let starts: Vec<usize> = (1..trace.len()).filter(|&i| trace[i - 1] > T::zero()).collect();
    let mut horizon = 64usize;
    loop {
        let probs = level_crossing_probs(trace, r_first, starts.iter().copied(), horizon);
        if probs.is_empty() {
            return Err(Error::InvalidArgument("trace too short for a renewal estimate".into()));
        }
        let tail = *probs.last().unwrap();
        if tail < T::lit(RENEWAL_TAIL) || 2 * horizon > trace.len() / 4 {
            return renewal_mean_delay(&probs);
        }
        horizon *= 2;
    }
}

/// Outcome of running the HARQ state machine over a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSummary<T> {
    pub r_first: T,
    /// `r N / t` over the whole trace.
    pub throughput: T,
    /// `r / mean(W)`: throughput over completed packets only, free of the
    /// partial packet at the end of the trace.
    pub renewal_throughput: T,
    pub acks: u64,
    pub mean_delay: Option<T>,
}

/// Replays a mutual-information trace through a fresh HARQ state. Zero
/// entries are slots where the user was not scheduled.
pub fn replay_trace<T: Real>(trace: &[T], r_first: T) -> Result<TraceSummary<T>> {
    let mut state = HarqUserState::new(r_first)?;
    for &x in trace {
        state.step(x > T::zero(), x)?;
    }
    Ok(TraceSummary {
        r_first,
        throughput: state.throughput(),
        renewal_throughput: state.mean_delay().map_or(T::zero(), |w| r_first / w),
        acks: state.acks(),
        mean_delay: state.mean_delay(),
    })
}

/// Smallest first-block rate (to bisection accuracy) whose HARQ renewal
/// throughput on `trace` reaches `fraction` of the genie throughput.
/// `None` when the trace is too short for any rate to get there.
pub fn target_r_first<T: Real>(trace: &[T], fraction: T) -> Result<Option<T>> {
    let genie = genie_throughput(trace)?;
    if !(genie > T::zero()) {
        return Ok(None);
    }
    let target = fraction * genie;
    let active = trace.iter().filter(|&&x| x > T::zero()).count();
    let per_tx = trace.iter().copied().sum::<T>() / T::from_usize(active).unwrap();
    let total: T = trace.iter().copied().sum();
    let reaches = |r: T| -> Result<bool> { Ok(replay_trace(trace, r)?.renewal_throughput >= target) };

    let step = T::lit(2.0).powf(T::lit(0.125));
    let mut lo = per_tx * T::lit(0.125);
    if reaches(lo)? {
        return Ok(Some(lo));
    }
    let mut hi = lo * step;
    loop {
        if hi > total {
            return Ok(None);
        }
        if reaches(hi)? {
            break;
        }
        lo = hi;
        hi = hi * step;
    }
    for _ in 0..30 {
        let mid = (lo + hi) / T::lit(2.0);
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
