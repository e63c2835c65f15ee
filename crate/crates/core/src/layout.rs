//! One-dimensional torus cell layout, static path gains and per-slot
//! Rayleigh channel draws.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{indexed_substream, substream, Purpose, MAX_CELLS, MAX_INDEX};
use crate::scalar::Real;

/// Geometry and propagation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams<T> {
    /// Number of cells on the ring.
    pub cells: usize,
    pub users_per_cell: usize,
    /// Base-station antennas.
    pub antennas: usize,
    /// Gain scale, linear power ratio (60 dB is `1e6`).
    pub g0: T,
    /// Propagation exponent.
    pub nu: T,
    /// 3 dB breakpoint distance in cell widths.
    pub delta: T,
}

impl<T: Real> LayoutParams<T> {
    pub fn new(cells: usize, users_per_cell: usize, antennas: usize, g0: T, nu: T, delta: T) -> Result<Self> {
        let p = Self {
            cells,
            users_per_cell,
            antennas,
            g0,
            nu,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// The 18-cell, 36-user, 2-antenna reference system at 60 dB.
    pub fn reference() -> Self {
        Self {
            cells: 18,
            users_per_cell: 36,
            antennas: 2,
            g0: T::lit(1e6),
            nu: T::lit(3.0),
            delta: T::lit(0.05),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_CELLS).contains(&self.cells) {
            return Err(Error::param("LayoutParams.C", format!("must be in 1..={MAX_CELLS}")));
        }
        if !(1..=MAX_INDEX).contains(&self.users_per_cell) {
            return Err(Error::param("LayoutParams.K", format!("must be in 1..={MAX_INDEX}")));
        }
        if self.antennas < 1 {
            return Err(Error::param("LayoutParams.M", "must be at least 1"));
        }
        let positive = |v: T, name: &str| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and positive, got {v}")))
            }
        };
        positive(self.g0, "LayoutParams.G0")?;
        positive(self.nu, "LayoutParams.nu")?;
        positive(self.delta, "LayoutParams.delta")
    }

    /// Maximum number of simultaneously zero-forced users per cell.
    pub fn max_active(&self) -> usize {
        self.antennas.min(self.users_per_cell)
    }
}

/// Position of user `k` (1-based) of cell `cell`, in cell widths.
///
/// Users sit on a uniform grid symmetric about the cell center.
pub fn user_position<T: Real>(k: usize, cell: usize, users_per_cell: usize) -> Result<T> {
    if k < 1 || k > users_per_cell {
        return Err(Error::InvalidArgument(format!(
            "user index {k} outside 1..={users_per_cell}"
        )));
    }
    let kk = T::from_usize(k).unwrap();
    let big_k = T::from_usize(users_per_cell).unwrap();
    let two = T::lit(2.0);
    Ok((two * kk - big_k - T::one()) / (two * big_k) + T::from_usize(cell).unwrap())
}

/// Modulo-`cells` distance between position `u` and base station `bs`.
/// Always in `[0, cells / 2]`.
pub fn torus_distance<T: Real>(u: T, bs: usize, cells: usize) -> T {
    let c = T::from_usize(cells).unwrap();
    let d = (u - T::from_usize(bs).unwrap()) % c;
    let d = if d < T::zero() { d + c } else { d };
    d.min(c - d)
}

/// Path gain from base station `bs` to user `k` (1-based) of `cell`.
pub fn path_gain<T: Real>(layout: &LayoutParams<T>, k: usize, cell: usize, bs: usize) -> Result<T> {
    if cell >= layout.cells || bs >= layout.cells {
        return Err(Error::InvalidArgument(format!(
            "cell index out of range 0..{}",
            layout.cells
        )));
    }
    let u = user_position::<T>(k, cell, layout.users_per_cell)?;
    Ok(gain_at_distance(layout, torus_distance(u, bs, layout.cells)))
}

#[inline]
fn gain_at_distance<T: Real>(layout: &LayoutParams<T>, d: T) -> T {
    layout.g0 / (T::one() + (d / layout.delta).powf(layout.nu))
}

/// Static gains `g[cell][user][bs]`, users 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGainMap<T> {
    cells: usize,
    users: usize,
    gains: Vec<T>,
}

impl<T: Real> PathGainMap<T> {
    pub fn from_layout(layout: &LayoutParams<T>) -> Result<Self> {
        layout.validate()?;
        let (cells, users) = (layout.cells, layout.users_per_cell);
        let mut gains = Vec::with_capacity(cells * users * cells);
        for c in 0..cells {
            for k in 1..=users {
                for bs in 0..cells {
                    gains.push(path_gain(layout, k, c, bs)?);
                }
            }
        }
        Ok(Self { cells, users, gains })
    }

    /// Builds a map from explicit values laid out as `[cell][user][bs]`.
    pub fn from_raw(cells: usize, users: usize, gains: Vec<T>) -> Result<Self> {
        if gains.len() != cells * users * cells {
            return Err(Error::InvalidArgument(format!(
                "expected {} gains, got {}",
                cells * users * cells,
                gains.len()
            )));
        }
        if gains.iter().any(|g| !(g.is_finite() && *g >= T::zero())) {
            return Err(Error::InvalidArgument("gains must be finite and nonnegative".into()));
        }
        Ok(Self { cells, users, gains })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users(&self) -> usize {
        self.users
    }

    #[inline]
    pub fn get(&self, cell: usize, user: usize, bs: usize) -> T {
        self.gains[(cell * self.users + user) * self.cells + bs]
    }

    #[inline]
    pub fn own(&self, cell: usize, user: usize) -> T {
        self.get(cell, user, cell)
    }

    /// Gains from every base station to `(cell, user)`.
    pub fn row(&self, cell: usize, user: usize) -> &[T] {
        let start = (cell * self.users + user) * self.cells;
        &self.gains[start..start + self.cells]
    }

    /// Gains from the interfering base stations only.
    pub fn interferers(&self, cell: usize, user: usize) -> Vec<T> {
        self.row(cell, user)
            .iter()
            .enumerate()
            .filter(|&(bs, _)| bs != cell)
            .map(|(_, &g)| g)
            .collect()
    }

    pub fn own_gains(&self, cell: usize) -> Vec<T> {
        (0..self.users).map(|k| self.own(cell, k)).collect()
    }
}

/// Channel vectors seen by the users of one receiving cell:
/// `h[user][bs]`, each an `antennas`-vector.
///
/// A user's own-cell vectors are always present. Its vectors to the other
/// base stations come from a separate per-user substream and may be drawn
/// on demand with [`CellChannels::draw_cross`]; the values do not depend on
/// when they are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct CellChannels<T> {
    cells: usize,
    antennas: usize,
    cell: usize,
    h: Vec<Complex<T>>,
    cross: Vec<bool>,
    key: Option<(u64, u64)>,
}

impl<T: Real> CellChannels<T> {
    pub fn from_raw(users: usize, cells: usize, antennas: usize, h: Vec<Complex<T>>) -> Result<Self> {
        if h.len() != users * cells * antennas {
            return Err(Error::InvalidArgument("channel tensor has wrong length".into()));
        }
        Ok(Self {
            cells,
            antennas,
            cell: 0,
            h,
            cross: vec![true; users],
            key: None,
        })
    }

    #[inline]
    pub fn vector(&self, user: usize, bs: usize) -> &[Complex<T>] {
        debug_assert!(bs == self.cell || self.cross[user], "cross channel of user {user} not drawn");
        let start = (user * self.cells + bs) * self.antennas;
        &self.h[start..start + self.antennas]
    }

    pub fn users(&self) -> usize {
        self.cross.len()
    }

    pub fn has_cross(&self, user: usize) -> bool {
        self.cross[user]
    }

    /// Draws `user`'s channels to the other base stations if not yet present.
    pub fn draw_cross(&mut self, user: usize) {
        if self.cross[user] {
            return;
        }
        let (seed, slot) = self.key.expect("channels drawn from a substream");
        let mut rng = indexed_substream(seed, slot, self.cell, user, Purpose::CrossChannels);
        for bs in (0..self.cells).filter(|&bs| bs != self.cell) {
            let start = (user * self.cells + bs) * self.antennas;
            for x in &mut self.h[start..start + self.antennas] {
                *x = complex_normal(&mut rng);
            }
        }
        self.cross[user] = true;
    }
}

/// One slot's channels for every `(user, cell, bs)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    pub slot: u64,
    pub cells: Vec<CellChannels<T>>,
}

impl<T: Real> ChannelSet<T> {
    #[inline]
    pub fn vector(&self, cell: usize, user: usize, bs: usize) -> &[Complex<T>] {
        self.cells[cell].vector(user, bs)
    }
}

/// Draws one circularly-symmetric complex Gaussian with unit variance.
#[inline]
pub fn complex_normal<T: Real, R: rand::Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let s = T::FRAC_1_SQRT_2();
    Complex::new(T::sample_normal(rng) * s, T::sample_normal(rng) * s)
}

/// Own-cell channels of the users of `cell` in `slot`; cross channels are
/// left for [`CellChannels::draw_cross`].
pub fn draw_own_channels<T: Real>(layout: &LayoutParams<T>, slot: u64, cell: usize, seed: u64) -> CellChannels<T> {
    let (users, cells, m) = (layout.users_per_cell, layout.cells, layout.antennas);
    let mut rng = substream(seed, slot, cell, Purpose::Channels);
    let zero = Complex::new(T::zero(), T::zero());
    let mut h = vec![zero; users * cells * m];
    for k in 0..users {
        let start = (k * cells + cell) * m;
        for x in &mut h[start..start + m] {
            *x = complex_normal(&mut rng);
        }
    }
    CellChannels {
        cells,
        antennas: m,
        cell,
        h,
        cross: vec![cells == 1; users],
        key: Some((seed, slot)),
    }
}

/// Channels seen by the users of `cell` in `slot`.
pub fn draw_cell_channels<T: Real>(layout: &LayoutParams<T>, slot: u64, cell: usize, seed: u64) -> CellChannels<T> {
    let mut ch = draw_own_channels(layout, slot, cell, seed);
    for k in 0..layout.users_per_cell {
        ch.draw_cross(k);
    }
    ch
}

/// Full channel tensor for `slot`. Bit-identical for a repeated
/// `(seed, slot)` pair.
pub fn draw_channels<T: Real>(layout: &LayoutParams<T>, slot: u64, seed: u64) -> ChannelSet<T> {
    ChannelSet {
        slot,
        cells: (0..layout.cells)
            .map(|c| draw_cell_channels(layout, slot, c, seed))
            .collect(),
    }
}
