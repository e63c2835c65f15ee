//! Step one of the two-step scheduler: greedy user selection with
//! zero-forcing, and weighted waterfilling, both against the mean-ICI
//! surrogate objective `sum_k Q_k log(1 + g |h^H v|^2 P / (1 + chi_bar))`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::zfbf::{inner, zf_gains, zf_steering, BeamAllocation};

/// Per-cell inputs to user selection. All slices are indexed by user.
#[derive(Debug, Clone, Copy)]
pub struct SelectionInput<'a, T> {
    /// Own-cell channel vectors `h_{k,c,c}`.
    pub channels: &'a [&'a [Complex<T>]],
    /// Virtual queue backlogs.
    pub weights: &'a [T],
    pub mean_ici: &'a [T],
    pub own_gains: &'a [T],
}

impl<T: Real> SelectionInput<'_, T> {
    fn validate(&self) -> Result<()> {
        let k = self.channels.len();
        if self.weights.len() != k || self.mean_ici.len() != k || self.own_gains.len() != k {
            return Err(Error::InvalidArgument("selection input dimensions differ".into()));
        }
        if self.weights.iter().any(|w| !(*w >= T::zero())) {
            return Err(Error::InvalidArgument("weights must be nonnegative".into()));
        }
        Ok(())
    }

    /// `g / (1 + chi_bar)` for `user`.
    #[inline]
    fn scale(&self, user: usize) -> T {
        self.own_gains[user] / (T::one() + self.mean_ici[user])
    }
}

/// Selected beams together with the surrogate objective in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T> {
    pub allocation: BeamAllocation<T>,
    pub objective: T,
}

impl<T: Real> Selection<T> {
    pub fn objective_bits(&self) -> T {
        self.objective / T::LN_2()
    }
}

/// Maximizes `sum_k Q_k ln(1 + a_k P_k)` subject to `sum_k P_k <= budget`.
///
/// Closed-form water level: the users are sorted by activation threshold
/// `1 / (a_k Q_k)` and the active prefix is grown until the level stops
/// exceeding the next threshold. The budget binds exactly.
pub fn weighted_waterfilling<T: Real>(weights: &[T], eff: &[T], budget: T) -> Result<Vec<T>> {
    if weights.len() != eff.len() {
        return Err(Error::InvalidArgument("weights and gains differ in length".into()));
    }
    if weights.is_empty() {
        return Ok(Vec::new());
    }
    if weights.iter().chain(eff).any(|x| !(*x > T::zero() && x.is_finite())) {
        return Err(Error::InvalidArgument("waterfilling needs positive weights and gains".into()));
    }
    if !(budget >= T::zero()) {
        return Err(Error::InvalidArgument("negative power budget".into()));
    }

    let n = weights.len();
    let threshold: Vec<T> = (0..n).map(|k| T::one() / (eff[k] * weights[k])).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| threshold[a].partial_cmp(&threshold[b]).unwrap().then(a.cmp(&b)));

    let mut sum_w = T::zero();
    let mut sum_inv = T::zero();
    let mut level = T::zero();
    for (m, &k) in order.iter().enumerate() {
        sum_w = sum_w + weights[k];
        sum_inv = sum_inv + T::one() / eff[k];
        level = (budget + sum_inv) / sum_w;
        if m + 1 == n || level <= threshold[order[m + 1]] {
            break;
        }
    }
    Ok((0..n)
        .map(|k| (weights[k] * level - T::one() / eff[k]).max(T::zero()))
        .collect())
}

/// Surrogate objective (nats) of a candidate allocation.
pub fn surrogate_objective<T: Real>(input: &SelectionInput<'_, T>, alloc: &BeamAllocation<T>) -> T {
    alloc
        .active
        .iter()
        .zip(&alloc.steering)
        .zip(&alloc.powers)
        .map(|((&k, v), &p)| {
            let a = input.scale(k) * inner(input.channels[k], v).norm_sqr();
            input.weights[k] * (a * p).ln_1p()
        })
        .sum()
}

/// Surrogate objective of `set` after zero-forcing and waterfilling, from
/// the effective gains alone.
fn score_set<T: Real>(input: &SelectionInput<'_, T>, set: &[usize]) -> Option<T> {
    let cols: Vec<&[Complex<T>]> = set.iter().map(|&k| input.channels[k]).collect();
    let gains = zf_gains(&cols).ok()?;
    let eff: Vec<T> = set.iter().zip(&gains).map(|(&k, &g)| input.scale(k) * g).collect();
    let w: Vec<T> = set.iter().map(|&k| input.weights[k]).collect();
    let powers = weighted_waterfilling(&w, &eff, T::one()).ok()?;
    Some(w.iter().zip(&eff).zip(&powers).map(|((&q, &a), &p)| q * (a * p).ln_1p()).sum())
}

/// Zero-forces `set`, waterfills, and scores the result. `None` when the
/// set is rank deficient.
pub fn evaluate_set<T: Real>(input: &SelectionInput<'_, T>, set: &[usize]) -> Option<Selection<T>> {
    let cols: Vec<&[Complex<T>]> = set.iter().map(|&k| input.channels[k]).collect();
    let steering = zf_steering(&cols).ok()?;
    let eff: Vec<T> = set
        .iter()
        .zip(&steering)
        .map(|(&k, v)| input.scale(k) * inner(input.channels[k], v).norm_sqr())
        .collect();
    let w: Vec<T> = set.iter().map(|&k| input.weights[k]).collect();
    let powers = weighted_waterfilling(&w, &eff, T::one()).ok()?;
    let objective = w
        .iter()
        .zip(&eff)
        .zip(&powers)
        .map(|((&q, &a), &p)| q * (a * p).ln_1p())
        .sum();
    Some(Selection {
        allocation: BeamAllocation {
            active: set.to_vec(),
            steering,
            powers,
        },
        objective,
    })
}

/// Greedy user selection.
///
/// Grows the active set one user at a time, each time adding the user that
/// maximizes the surrogate objective after re-deriving zero-forcing vectors
/// and waterfilled powers. Stops when no addition improves the objective or
/// `max_users` is reached. Users with zero weight are never selected; ties
/// go to the lowest user index.
pub fn greedy_select<T: Real>(input: &SelectionInput<'_, T>, max_users: usize) -> Result<Selection<T>> {
    input.validate()?;
    if max_users == 0 {
        return Err(Error::InvalidArgument("max_users must be at least 1".into()));
    }
    let mut set: Vec<usize> = Vec::with_capacity(max_users);
    let mut current = T::zero();
    while set.len() < max_users {
        let mut best: Option<(usize, T)> = None;
        for k in 0..input.channels.len() {
            if input.weights[k] <= T::zero() || set.contains(&k) {
                continue;
            }
            set.push(k);
            let score = score_set(input, &set);
            set.pop();
            if let Some(c) = score {
                if best.is_none_or(|(_, b)| c > b) {
                    best = Some((k, c));
                }
            }
        }
        match best {
            Some((k, b)) if b > current => {
                set.push(k);
                current = b;
            }
            _ => break,
        }
    }
    set.sort_unstable();
    // Sorted set, so the allocation lists users by index.
    let current = match evaluate_set(input, &set) {
        Some(s) => s,
        None if set.is_empty() => Selection {
            allocation: BeamAllocation::silent(),
            objective: T::zero(),
        },
        None => return Err(Error::DegenerateChannel { ratio: 0.0 }),
    };
    Ok(current)
}
