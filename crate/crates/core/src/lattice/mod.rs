//! Periodic lattices over a flat 8-torus with dimensional reduction, and
//! central finite differences on them.
//!
//! Fields depend only on the *active* axes; every inactive axis carries
//! the same period `L` and contributes a factor `L` to volume integrals.
//! Grid points are stored row-major over the active axes (the first
//! listed axis varies slowest).

mod torsion;

pub use torsion::*;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, Spin7Error};
use crate::forms::{FourForm, TwoForm, Vec8, DIM};

/// Shape and discretization of a reduced torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    /// Active coordinate axes, numbered 1 to 8, strictly increasing.
    pub active_axes: Vec<usize>,
    pub points_per_axis: usize,
    pub period: f64,
    /// 2 or 4.
    #[serde(default = "default_stencil")]
    pub stencil_order: usize,
}

fn default_stencil() -> usize {
    2
}

impl LatticeSpec {
    pub fn new(
        active_axes: Vec<usize>,
        points_per_axis: usize,
        period: f64,
        stencil_order: usize,
    ) -> Result<Self> {
        let s = LatticeSpec {
            active_axes,
            points_per_axis,
            period,
            stencil_order,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.active_axes.is_empty() {
            return Err(Spin7Error::InvalidLattice("no active axes".into()));
        }
        if self.active_axes.iter().any(|&a| !(1..=DIM).contains(&a)) {
            return Err(Spin7Error::InvalidLattice("active axes must lie in 1..=8".into()));
        }
        if self.active_axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Spin7Error::InvalidLattice(
                "active axes must be strictly increasing".into(),
            ));
        }
        if self.stencil_order != 2 && self.stencil_order != 4 {
            return Err(Spin7Error::InvalidLattice(format!(
                "stencil order {} (expected 2 or 4)",
                self.stencil_order
            )));
        }
        if self.points_per_axis < 2 * self.stencil_order {
            return Err(Spin7Error::InvalidLattice(format!(
                "{} points per axis is fewer than twice the stencil order",
                self.points_per_axis
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Spin7Error::InvalidLattice(format!("period {}", self.period)));
        }
        let k = self.active_axes.len() as u32;
        if self.points_per_axis.checked_pow(k).map_or(true, |n| n > 1 << 26) {
            return Err(Spin7Error::InvalidLattice("grid too large".into()));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    pub fn dims(&self) -> usize {
        self.active_axes.len()
    }

    pub fn num_points(&self) -> usize {
        self.points_per_axis.pow(self.dims() as u32)
    }

    /// 0-based coordinate index of the `pos`-th active axis.
    pub fn axis(&self, pos: usize) -> usize {
        self.active_axes[pos] - 1
    }

    /// Position of coordinate `m` (0-based) among the active axes.
    pub fn active_position(&self, m: usize) -> Option<usize> {
        self.active_axes.iter().position(|&a| a == m + 1)
    }

    /// Volume of one grid cell times the inactive periods: `h^k L^{8-k}`.
    pub fn cell_volume(&self) -> f64 {
        let k = self.dims() as i32;
        self.spacing().powi(k) * self.period.powi(DIM as i32 - k)
    }

    pub fn total_volume(&self) -> f64 {
        self.period.powi(DIM as i32)
    }

    fn stride(&self, pos: usize) -> usize {
        self.points_per_axis.pow((self.dims() - 1 - pos) as u32)
    }

    /// Multi-index of a point along the active axes.
    pub fn multi_index(&self, p: usize) -> Vec<usize> {
        (0..self.dims())
            .map(|a| (p / self.stride(a)) % self.points_per_axis)
            .collect()
    }

    /// Position in R^8 (inactive coordinates are 0).
    pub fn position(&self, p: usize) -> Vec8 {
        let h = self.spacing();
        let mut x = Vec8::zero();
        for (a, i) in self.multi_index(p).into_iter().enumerate() {
            x.0[self.axis(a)] = i as f64 * h;
        }
        x
    }

    /// Index of the point `offset` steps away along active axis `pos`, with wrap.
    #[inline]
    pub fn neighbour(&self, p: usize, pos: usize, offset: isize) -> usize {
        let n = self.points_per_axis as isize;
        let stride = self.stride(pos);
        let c = ((p / stride) % self.points_per_axis) as isize;
        let c2 = (c + offset).rem_euclid(n);
        (p as isize + (c2 - c) * stride as isize) as usize
    }

    /// Same grid apart from the stencil order.
    pub fn same_grid(&self, other: &LatticeSpec) -> bool {
        self.active_axes == other.active_axes
            && self.points_per_axis == other.points_per_axis
            && self.period == other.period
    }

    fn stencil(&self) -> &'static [(isize, f64)] {
        match self.stencil_order {
            2 => &[(1, 0.5), (-1, -0.5)],
            _ => &[
                (1, 2.0 / 3.0),
                (-1, -2.0 / 3.0),
                (2, -1.0 / 12.0),
                (-2, 1.0 / 12.0),
            ],
        }
    }
}

/// Pointwise values that can be combined linearly by a stencil.
pub trait FieldValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add_scaled(&mut self, a: f64, x: &Self);
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add_scaled(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
}

impl FieldValue for FourForm {
    fn zero() -> Self {
        FourForm::zero()
    }
    fn add_scaled(&mut self, a: f64, x: &Self) {
        self.axpy(a, x);
    }
}

impl FieldValue for TwoForm {
    fn zero() -> Self {
        TwoForm::zero()
    }
    fn add_scaled(&mut self, a: f64, x: &Self) {
        for (r, xr) in self.0.iter_mut().zip(x.0.iter()) {
            for (v, xv) in r.iter_mut().zip(xr.iter()) {
                *v += a * xv;
            }
        }
    }
}

impl FieldValue for Vec8 {
    fn zero() -> Self {
        Vec8::zero()
    }
    fn add_scaled(&mut self, a: f64, x: &Self) {
        for (v, xv) in self.0.iter_mut().zip(x.0.iter()) {
            *v += a * xv;
        }
    }
}

/// One value per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField<V> {
    pub spec: LatticeSpec,
    pub values: Vec<V>,
}

impl<V: FieldValue> LatticeField<V> {
    pub fn from_fn(spec: &LatticeSpec, f: impl Fn(usize) -> V + Sync + Send) -> Self {
        let values = (0..spec.num_points()).into_par_iter().map(f).collect();
        LatticeField {
            spec: spec.clone(),
            values,
        }
    }

    pub fn constant(spec: &LatticeSpec, v: V) -> Self {
        LatticeField {
            spec: spec.clone(),
            values: vec![v; spec.num_points()],
        }
    }

    pub fn map<W: FieldValue>(&self, f: impl Fn(usize, &V) -> W + Sync) -> LatticeField<W> {
        let values = self.values.par_iter().enumerate().map(|(p, v)| f(p, v)).collect();
        LatticeField {
            spec: self.spec.clone(),
            values,
        }
    }

    /// Central difference along active axis `pos`.
    pub fn derivative(&self, pos: usize) -> LatticeField<V> {
        let spec = &self.spec;
        let inv_h = 1.0 / spec.spacing();
        let st = spec.stencil();
        self.map(|p, _| {
            let mut acc = V::zero();
            for &(off, w) in st {
                acc.add_scaled(w * inv_h, &self.values[spec.neighbour(p, pos, off)]);
            }
            acc
        })
    }

    /// Central second difference along active axis `pos`, of the same order
    /// as the first-derivative stencil.
    pub fn second_derivative(&self, pos: usize) -> LatticeField<V> {
        let spec = &self.spec;
        let inv_h2 = 1.0 / (spec.spacing() * spec.spacing());
        let st: &[(isize, f64)] = match spec.stencil_order {
            2 => &[(0, -2.0), (1, 1.0), (-1, 1.0)],
            _ => &[
                (0, -2.5),
                (1, 4.0 / 3.0),
                (-1, 4.0 / 3.0),
                (2, -1.0 / 12.0),
                (-2, -1.0 / 12.0),
            ],
        };
        self.map(|p, _| {
            let mut acc = V::zero();
            for &(off, w) in st {
                acc.add_scaled(w * inv_h2, &self.values[spec.neighbour(p, pos, off)]);
            }
            acc
        })
    }

    /// Derivatives along every active axis.
    pub fn gradient(&self) -> Vec<LatticeField<V>> {
        (0..self.spec.dims()).map(|a| self.derivative(a)).collect()
    }
}

/// Gradient of a 4-form field; one entry per active axis.
pub fn fd_gradient(f: &LatticeField<FourForm>) -> Vec<LatticeField<FourForm>> {
    f.gradient()
}

/// Deterministic pairwise sum (fixed split points, independent of threads).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    let (a, b) = if xs.len() > 4096 {
        rayon::join(|| pairwise_sum(&xs[..mid]), || pairwise_sum(&xs[mid..]))
    } else {
        (pairwise_sum(&xs[..mid]), pairwise_sum(&xs[mid..]))
    };
    a + b
}

/// `max |x|`, ignoring nothing: a NaN anywhere yields NaN.
pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0_f64, |m, x| {
        if x.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(x.abs())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1(n: usize, order: usize) -> LatticeSpec {
        LatticeSpec::new(vec![1], n, 1.0, order).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(LatticeSpec::new(vec![], 8, 1.0, 2).is_err());
        assert!(LatticeSpec::new(vec![9], 8, 1.0, 2).is_err());
        assert!(LatticeSpec::new(vec![2, 1], 8, 1.0, 2).is_err());
        assert!(LatticeSpec::new(vec![1], 7, 1.0, 4).is_err());
        assert!(LatticeSpec::new(vec![1], 8, 1.0, 3).is_err());
        assert!(LatticeSpec::new(vec![1], 8, -1.0, 2).is_err());
        let s = LatticeSpec::new(vec![2, 5], 8, 2.0, 4).unwrap();
        assert_eq!(s.num_points(), 64);
        assert_eq!(s.cell_volume(), 0.25f64.powi(2) * 2f64.powi(6));
    }

    #[test]
    fn neighbours_wrap() {
        let s = LatticeSpec::new(vec![1, 3], 4, 1.0, 2).unwrap();
        // point (0, 3) -> index 3
        assert_eq!(s.neighbour(3, 1, 1), 0);
        assert_eq!(s.neighbour(3, 0, -1), 15);
        assert_eq!(s.multi_index(7), vec![1, 3]);
        assert_eq!(s.position(7).0[2], 0.75);
    }

    #[test]
    fn stencil_arithmetic() {
        let s = spec1(4, 2);
        let f = LatticeField {
            spec: s.clone(),
            values: vec![0.0, 1.0, 0.0, -1.0],
        };
        let d = f.derivative(0);
        let h = s.spacing();
        assert_eq!(d.values[0], (1.0 - (-1.0)) / (2.0 * h));
        let c = LatticeField::constant(&s, 3.5);
        assert!(c.derivative(0).values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn observed_order_matches_stencil() {
        for order in [2usize, 4] {
            let mut errs = Vec::new();
            for n in [16usize, 32, 64] {
                let s = spec1(n, order);
                let two_pi = 2.0 * std::f64::consts::PI;
                let f = LatticeField::from_fn(&s, |p| (two_pi * s.position(p).0[0]).sin());
                let d = f.derivative(0);
                let e = (0..n)
                    .map(|p| (d.values[p] - two_pi * (two_pi * s.position(p).0[0]).cos()).abs())
                    .fold(0.0, f64::max);
                errs.push(e);
            }
            for w in errs.windows(2) {
                let rate = (w[0] / w[1]).log2();
                assert!((rate - order as f64).abs() < 0.2, "order {order} rate {rate}");
            }
        }
    }

    #[test]
    fn pairwise_sum_is_deterministic() {
        let xs: Vec<f64> = (0..100_000).map(|i| ((i * 7919) % 1000) as f64 * 1e-3).collect();
        let a = pairwise_sum(&xs);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| pairwise_sum(&xs));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
