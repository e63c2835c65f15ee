//! Zero-forcing beamforming, effective gains, SINR and mutual information.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest-to-largest singular value ratio below which an active set is
/// treated as rank deficient.
pub const RANK_THRESHOLD: f64 = 1e-9;

const MAX_SWEEPS: usize = 60;

/// Per-cell beamforming decision for one slot.
///
/// `active`, `steering` and `powers` are parallel; users not listed carry
/// zero power.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BeamAllocation<T> {
    pub active: Vec<usize>,
    pub steering: Vec<Vec<Complex<T>>>,
    pub powers: Vec<T>,
}

impl<T: Real> BeamAllocation<T> {
    pub fn silent() -> Self {
        Self {
            active: Vec::new(),
            steering: Vec::new(),
            powers: Vec::new(),
        }
    }

    pub fn is_silent(&self) -> bool {
        self.active.is_empty()
    }

    pub fn total_power(&self) -> T {
        self.powers.iter().copied().sum()
    }

    /// Power given to `user`, zero when inactive.
    pub fn power_of(&self, user: usize) -> T {
        self.position(user).map_or(T::zero(), |i| self.powers[i])
    }

    pub fn position(&self, user: usize) -> Option<usize> {
        self.active.iter().position(|&u| u == user)
    }

    /// `h^H Σ h` for the covariance this allocation induces.
    pub fn received_power(&self, h: &[Complex<T>]) -> T {
        self.steering
            .iter()
            .zip(&self.powers)
            .map(|(v, &p)| inner(h, v).norm_sqr() * p)
            .sum()
    }
}

/// `a^H b`.
#[inline]
pub fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

#[inline]
pub fn norm_sqr<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Thin SVD `A = U diag(sigma) J^H` of a tall `rows x cols` matrix given
/// by columns, computed with one-sided (Hestenes) Jacobi rotations.
struct ThinSvd<T> {
    /// Orthogonalized columns `A J = U diag(sigma)`, not yet normalized.
    work: Vec<Vec<Complex<T>>>,
    /// Accumulated unitary `J`, column major.
    right: Vec<Vec<Complex<T>>>,
}

impl<T: Real> ThinSvd<T> {
    fn new(columns: &[&[Complex<T>]]) -> Self {
        let n = columns.len();
        let mut work: Vec<Vec<Complex<T>>> = columns.iter().map(|c| c.to_vec()).collect();
        let mut right: Vec<Vec<Complex<T>>> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| if i == j { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) })
                    .collect()
            })
            .collect();
        let eps = T::epsilon();
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let alpha = norm_sqr(&work[p]);
                    let beta = norm_sqr(&work[q]);
                    let gamma = inner(&work[p], &work[q]);
                    let g = gamma.norm();
                    if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    // Rotate the phase out of column q, then apply a real
                    // Jacobi rotation to the pair.
                    let phase = (gamma / g).conj();
                    let zeta = (beta - alpha) / (T::lit(2.0) * g);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    rotate(&mut work, p, q, phase, c, s);
                    rotate(&mut right, p, q, phase, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        Self { work, right }
    }

    fn singular_values(&self) -> Vec<T> {
        self.work.iter().map(|c| norm_sqr(c).sqrt()).collect()
    }
}

fn rotate<T: Real>(cols: &mut [Vec<Complex<T>>], p: usize, q: usize, phase: Complex<T>, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    let (cp, cq) = (&mut lo[p], &mut hi[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * phase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Unit-norm zero-forcing steering vectors for the active-user channels
/// `columns` (each an M-vector).
///
/// Vector `k` is the normalized `k`-th column of `(H^+)^H`, so
/// `h_j^H v_k = 0` for `j != k`.
pub fn zf_steering<T: Real>(columns: &[&[Complex<T>]]) -> Result<Vec<Vec<Complex<T>>>> {
    let n = columns.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let rows = columns[0].len();
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::InvalidArgument("channel columns differ in length".into()));
    }
    if n > rows {
        return Err(Error::DegenerateChannel { ratio: 0.0 });
    }
    if n == 1 {
        let norm = norm_sqr(columns[0]).sqrt();
        if !(norm > T::zero()) {
            return Err(Error::DegenerateChannel { ratio: 0.0 });
        }
        return Ok(vec![columns[0].iter().map(|x| x / norm).collect()]);
    }

    let svd = ThinSvd::new(columns);
    let sigma = svd.singular_values();
    let max = sigma.iter().copied().fold(T::zero(), T::max);
    let min = sigma.iter().copied().fold(T::infinity(), T::min);
    if !(max > T::zero()) || min < T::lit(RANK_THRESHOLD) * max {
        let ratio = if max > T::zero() { (min / max).as_f64() } else { 0.0 };
        return Err(Error::DegenerateChannel { ratio });
    }

    // B = A J diag(sigma)^-2 J^H. Column k: sum_i work_i * conj(J[k][i]) / sigma_i^2.
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = vec![Complex::new(T::zero(), T::zero()); rows];
        for i in 0..n {
            let w = svd.right[i][k].conj() / (sigma[i] * sigma[i]);
            for (acc, x) in v.iter_mut().zip(&svd.work[i]) {
                *acc = *acc + x * w;
            }
        }
        let norm = norm_sqr(&v).sqrt();
        out.push(v.into_iter().map(|x| x / norm).collect());
    }
    Ok(out)
}

/// `|h_k^H v_k|^2` for the unit-norm zero-forcing vectors of `columns`,
/// without forming the vectors.
///
/// Equals `1 / [(H^H H)^-1]_kk`. The Gram inverse comes from a Cholesky
/// factorization whenever `tr(G) tr(G^-1)` certifies a condition number far
/// from the rank threshold; otherwise the SVD path decides.
pub fn zf_gains<T: Real>(columns: &[&[Complex<T>]]) -> Result<Vec<T>> {
    let n = columns.len();
    if n == 1 {
        let g = norm_sqr(columns[0]);
        if !(g > T::zero()) {
            return Err(Error::DegenerateChannel { ratio: 0.0 });
        }
        return Ok(vec![g]);
    }
    if n > 1 && columns.iter().all(|c| c.len() == columns[0].len()) && n <= columns[0].len() {
        if let Some(diag) = gram_inverse_diagonal(columns) {
            let trace: T = columns.iter().map(|c| norm_sqr(c)).sum();
            let trace_inv: T = diag.iter().copied().sum();
            if trace * trace_inv <= T::lit(1e8) {
                return Ok(diag.into_iter().map(|d| T::one() / d).collect());
            }
        }
    }
    let steering = zf_steering(columns)?;
    Ok(columns.iter().zip(&steering).map(|(h, v)| inner(h, v).norm_sqr()).collect())
}

/// Diagonal of `(H^H H)^-1` via `G = L L^H`; `None` on a nonpositive pivot.
fn gram_inverse_diagonal<T: Real>(columns: &[&[Complex<T>]]) -> Option<Vec<T>> {
    let n = columns.len();
    let zero = Complex::new(T::zero(), T::zero());
    // Lower triangle of L, row major.
    let mut l = vec![zero; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = inner(columns[i], columns[j]);
            for m in 0..j {
                sum = sum - l[i * n + m] * l[j * n + m].conj();
            }
            if i == j {
                if !(sum.re > T::zero()) {
                    return None;
                }
                l[i * n + i] = Complex::new(sum.re.sqrt(), T::zero());
            } else {
                l[i * n + j] = sum / l[j * n + j].re;
            }
        }
    }
    // Columns of L^-1 by forward substitution; [G^-1]_kk = sum_i |(L^-1)_ik|^2.
    let mut diag = vec![T::zero(); n];
    let mut x = vec![zero; n];
    for k in 0..n {
        for i in 0..n {
            let mut sum = if i == k { Complex::new(T::one(), T::zero()) } else { zero };
            for m in k..i {
                sum = sum - l[i * n + m] * x[m];
            }
            x[i] = if i < k { zero } else { sum / l[i * n + i].re };
            if i >= k {
                diag[k] = diag[k] + x[i].norm_sqr();
            }
        }
    }
    Some(diag)
}

/// `g |h^H v|^2 P`.
#[inline]
pub fn effective_gain<T: Real>(gain: T, h: &[Complex<T>], v: &[Complex<T>], power: T) -> T {
    gain * inner(h, v).norm_sqr() * power
}

/// `numerator / (1 + chi)`.
#[inline]
pub fn realized_sinr<T: Real>(numerator: T, chi: T) -> T {
    numerator / (T::one() + chi)
}

/// Mutual information in bits per channel use.
#[inline]
pub fn mutual_information<T: Real>(numerator: T, chi: T) -> T {
    (T::one() + realized_sinr(numerator, chi)).log2()
}
