use crate::error::{Error, Result};
use crate::scalar::Real;

/// Marginal distribution of a user's ICI power.
pub trait IciDistribution<T> {
    /// `P(chi <= x)`.
    fn cdf(&self, x: T) -> T;
}

/// Right-continuous empirical CDF over nonnegative samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf<T> {
    sorted: Vec<T>,
    mean: T,
    /// Every `INDEX_STRIDE`-th sample, so lookups touch a small table and
    /// one short window of `sorted`.
    index: Vec<T>,
}

const INDEX_STRIDE: usize = 64;

impl<T: Real> EmpiricalCdf<T> {
    pub fn build(mut samples: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        if samples.iter().any(|x| !(x.is_finite() && *x >= T::zero())) {
            return Err(Error::InvalidArgument("ICI samples must be finite and nonnegative".into()));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self::new_unchecked(samples))
    }

    /// Wraps samples that are already sorted, validating every invariant.
    pub fn from_sorted(sorted: Vec<T>) -> Result<Self> {
        let corrupt = |inv: &str| Error::Corrupt {
            what: "empirical CDF".into(),
            invariant: inv.into(),
        };
        if sorted.is_empty() {
            return Err(corrupt("sample count >= 1"));
        }
        if sorted.iter().any(|x| !(x.is_finite() && *x >= T::zero())) {
            return Err(corrupt("samples finite and nonnegative"));
        }
        if sorted.windows(2).any(|w| w[0] > w[1]) {
            return Err(corrupt("samples sorted ascending"));
        }
        Ok(Self::new_unchecked(sorted))
    }

    fn new_unchecked(sorted: Vec<T>) -> Self {
        let mean = sorted.iter().copied().sum::<T>() / T::from_usize(sorted.len()).unwrap();
        let index = sorted.iter().step_by(INDEX_STRIDE).copied().collect();
        Self { sorted, mean, index }
    }

    /// Point mass at `x`.
    pub fn point_mass(x: T) -> Result<Self> {
        Self::build(vec![x])
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[T] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: T) -> T {
        let j = self.index.partition_point(|&s| s <= x);
        let lo = if j == 0 { 0 } else { (j - 1) * INDEX_STRIDE + 1 };
        let hi = (j * INDEX_STRIDE).min(self.sorted.len());
        let below = lo + self.sorted[lo..hi.max(lo)].partition_point(|&s| s <= x);
        T::from_usize(below).unwrap() / T::from_usize(self.sorted.len()).unwrap()
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn min(&self) -> T {
        self.sorted[0]
    }

    pub fn max(&self) -> T {
        self.sorted[self.sorted.len() - 1]
    }

    /// Inverse-CDF draw for `u` in `[0, 1)`.
    pub fn quantile(&self, u: T) -> T {
        let n = self.sorted.len();
        let i = (u * T::from_usize(n).unwrap()).floor().to_usize().unwrap_or(0).min(n - 1);
        self.sorted[i]
    }

    /// Largest vertical distance between two empirical CDFs.
    pub fn ks_distance(&self, other: &Self) -> T {
        let (a, b) = (&self.sorted, &other.sorted);
        let (na, nb) = (T::from_usize(a.len()).unwrap(), T::from_usize(b.len()).unwrap());
        let (mut i, mut j) = (0, 0);
        let mut d = T::zero();
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            let fa = T::from_usize(i).unwrap() / na;
            let fb = T::from_usize(j).unwrap() / nb;
            d = d.max((fa - fb).abs());
        }
        d
    }
}

impl<T: Real> IciDistribution<T> for EmpiricalCdf<T> {
    fn cdf(&self, x: T) -> T {
        self.eval(x)
    }
}

/// Deterministic ICI power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass<T>(pub T);

impl<T: Real> IciDistribution<T> for PointMass<T> {
    fn cdf(&self, x: T) -> T {
        if x >= self.0 {
            T::one()
        } else {
            T::zero()
        }
    }
}
