//! Torsion of a lattice Spin(7)-structure and the flat-space identities
//! it satisfies.
//!
//! `T_{m;ab} = (1/96) skew_{ab}[(∂_mΦ_{ajkl})Φ_{bjkl}]`, with `∂_m` the
//! central difference along coordinate `m` (zero for inactive axes).  The
//! norm is the full contraction `|T|² = T_{m;ab}T_{m;ab}`.

use rayon::prelude::*;

use super::{max_abs, pairwise_sum, FieldValue, LatticeField, LatticeSpec};
use crate::algebra::{contract_three, diamond, pi21, pi7};
use crate::forms::{mat_mul, Endo8, FourForm, Mat8, TwoForm, DIM, N_PAIRS, ZERO_MAT};

/// `T_{m;ab}` at one point: one 2-form per coordinate direction `m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Torsion(pub [TwoForm; DIM]);

impl Torsion {
    pub fn zero() -> Self {
        Torsion([TwoForm::zero(); DIM])
    }

    /// `T_{m;ab}T_{m;ab}`.
    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|t| t.norm2_full()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, t| m.max(t.max_abs()))
    }

    /// `(X⌟T)_{ab} = X_m T_{m;ab}`.
    pub fn contract_vector(&self, x: &crate::forms::Vec8) -> TwoForm {
        let mut out = TwoForm::zero();
        for m in 0..DIM {
            if x.0[m] != 0.0 {
                out.add_scaled(x.0[m], &self.0[m]);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|t| t.0.iter().flatten().all(|v| v.is_finite()))
    }
}

impl FieldValue for Torsion {
    fn zero() -> Self {
        Torsion::zero()
    }
    fn add_scaled(&mut self, a: f64, x: &Self) {
        for (t, xt) in self.0.iter_mut().zip(x.0.iter()) {
            t.add_scaled(a, xt);
        }
    }
}

impl std::ops::Mul<Torsion> for f64 {
    type Output = Torsion;
    fn mul(self, rhs: Torsion) -> Torsion {
        let mut out = Torsion::zero();
        out.add_scaled(self, &rhs);
        out
    }
}

/// Pointwise torsion from the derivatives `dphi[a] = ∂_{axis(a)}Φ`.
pub fn torsion_at(spec: &LatticeSpec, dphi: &[&FourForm], phi: &FourForm) -> Torsion {
    let mut t = Torsion::zero();
    for (a, d) in dphi.iter().enumerate() {
        let c = contract_three(d, phi);
        t.0[spec.axis(a)] = (1.0 / 96.0) * Endo8(c).skew_part();
    }
    t
}

pub fn torsion_from_gradient(
    f: &LatticeField<FourForm>,
    grad: &[LatticeField<FourForm>],
) -> LatticeField<Torsion> {
    f.map(|p, phi| {
        let d: Vec<&FourForm> = grad.iter().map(|g| &g.values[p]).collect();
        torsion_at(&f.spec, &d, phi)
    })
}

pub fn torsion(f: &LatticeField<FourForm>) -> LatticeField<Torsion> {
    torsion_from_gradient(f, &f.gradient())
}

/// `(Div T)_{ab} = Σ_m ∂_m T_{m;ab}` without projection.
pub fn div_torsion_raw(tf: &LatticeField<Torsion>) -> LatticeField<TwoForm> {
    let spec = &tf.spec;
    let mut acc = LatticeField::constant(spec, TwoForm::zero());
    for a in 0..spec.dims() {
        let m = spec.axis(a);
        let slice = tf.map(|_, t| t.0[m]);
        let d = slice.derivative(a);
        acc.values
            .par_iter_mut()
            .zip(d.values.par_iter())
            .for_each(|(x, y)| x.add_scaled(1.0, y));
    }
    acc
}

/// `π₇(Div T)`, the flow generator.
pub fn div_torsion(tf: &LatticeField<Torsion>, f: &LatticeField<FourForm>) -> LatticeField<TwoForm> {
    let raw = div_torsion_raw(tf);
    raw.map(|p, d| pi7(d, &f.values[p]))
}

/// `½ ∫ |T|² vol` as a Riemann sum including the inactive periods.
pub fn energy(tf: &LatticeField<Torsion>) -> f64 {
    let dens: Vec<f64> = tf.values.par_iter().map(|t| t.norm2()).collect();
    0.5 * tf.spec.cell_volume() * pairwise_sum(&dens)
}

/// `∫ ⟨A, B⟩` for 2-form fields with the full-contraction pairing.
pub fn integrate_pairing(a: &LatticeField<TwoForm>, b: &LatticeField<TwoForm>) -> f64 {
    let dens: Vec<f64> = a
        .values
        .par_iter()
        .zip(b.values.par_iter())
        .map(|(x, y)| {
            let mut s = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    s += x.0[i][j] * y.0[i][j];
                }
            }
            s
        })
        .collect();
    a.spec.cell_volume() * pairwise_sum(&dens)
}

/// `max_x |T(x)|`.
pub fn max_torsion(tf: &LatticeField<Torsion>) -> f64 {
    let v: Vec<f64> = tf.values.par_iter().map(|t| t.norm2().sqrt()).collect();
    max_abs(&v)
}

/// `max_{x,m} |π₂₁(T_m)|`: the continuum torsion is `Ω²₇`-valued.
pub fn omega21_defect(tf: &LatticeField<Torsion>, f: &LatticeField<FourForm>) -> f64 {
    let v: Vec<f64> = tf
        .values
        .par_iter()
        .zip(f.values.par_iter())
        .map(|(t, phi)| t.0.iter().fold(0.0_f64, |m, tm| m.max(pi21(tm, phi).max_abs())))
        .collect();
    max_abs(&v)
}

/// `max |∂_mΦ − T_m⋄Φ|`.
pub fn reconstruction_residual(
    f: &LatticeField<FourForm>,
    grad: &[LatticeField<FourForm>],
    tf: &LatticeField<Torsion>,
) -> f64 {
    let spec = &f.spec;
    let v: Vec<f64> = (0..spec.num_points())
        .into_par_iter()
        .map(|p| {
            let phi = &f.values[p];
            (0..spec.dims())
                .map(|a| {
                    let tm: Endo8 = tf.values[p].0[spec.axis(a)].into();
                    (grad[a].values[p] - diamond(&tm, phi)).max_abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    max_abs(&v)
}

/// Residuals of the three contraction identities for `∇Φ`:
/// `(∇Φ_{ijkl})Φ_{abkl} + Φ_{ijkl}∇Φ_{abkl} + 4∇Φ_{ijab}`,
/// `(∇Φ_{ijkl})Φ_{ajkl} + Φ_{ijkl}∇Φ_{ajkl}` and `(∇Φ_{ijkl})Φ_{ijkl}`.
pub fn nabla_identity_residuals(f: &LatticeField<FourForm>, grad: &[LatticeField<FourForm>]) -> [f64; 3] {
    let spec = &f.spec;
    let per_point: Vec<[f64; 3]> = (0..spec.num_points())
        .into_par_iter()
        .map(|p| {
            let phi = &f.values[p];
            let pp = phi.pair_matrix();
            let mut r = [0.0_f64; 3];
            for g in grad {
                let d = &g.values[p];
                let dp = d.pair_matrix();
                for x in 0..N_PAIRS {
                    for y in 0..N_PAIRS {
                        let mut s = 0.0;
                        for z in 0..N_PAIRS {
                            s += dp[x][z] * pp[y][z] + pp[x][z] * dp[y][z];
                        }
                        r[0] = r[0].max((2.0 * s + 4.0 * dp[x][y]).abs());
                    }
                }
                let c1 = contract_three(d, phi);
                let c2 = contract_three(phi, d);
                for i in 0..DIM {
                    for a in 0..DIM {
                        r[1] = r[1].max((c1[i][a] + c2[i][a]).abs());
                    }
                }
                r[2] = r[2].max(d.full_contraction(phi).abs());
            }
            r
        })
        .collect();
    let mut out = [0.0_f64; 3];
    for r in per_point {
        for k in 0..3 {
            out[k] = out[k].max(r[k]);
        }
    }
    out
}

/// Max-norm residuals of the flat-space Bianchi, Ricci and scalar identities.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CurvatureResiduals {
    pub bianchi: f64,
    pub ricci: f64,
    /// Trace of the Ricci residual.
    pub scalar: f64,
    /// The scalar expression with `+8|T|²` in place of the trace of the
    /// quadratic Ricci term; kept for comparison.
    pub scalar_naive: f64,
}

fn mm(a: &TwoForm, b: &TwoForm) -> Mat8 {
    mat_mul(&a.0, &b.0)
}

/// Evaluate the identities at every point from `T` and its differences.
pub fn curvature_residuals(tf: &LatticeField<Torsion>) -> CurvatureResiduals {
    let spec = &tf.spec;
    let grad_t = tf.gradient();
    let active: Vec<usize> = (0..spec.dims()).map(|a| spec.axis(a)).collect();
    let per_point: Vec<[f64; 4]> = (0..spec.num_points())
        .into_par_iter()
        .map(|p| {
            let t = &tf.values[p];
            // dt[m] = ∂_m T at p (zero for inactive m)
            let mut dt = [Torsion::zero(); DIM];
            for (a, &m) in active.iter().enumerate() {
                dt[m] = grad_t[a].values[p];
            }
            let mut bianchi = 0.0_f64;
            for &i in &active {
                for &j in &active {
                    if j <= i {
                        continue;
                    }
                    let tij = mm(&t.0[i], &t.0[j]);
                    let tji = mm(&t.0[j], &t.0[i]);
                    for a in 0..DIM {
                        for b in 0..DIM {
                            let r =
                                dt[i].0[j].0[a][b] - dt[j].0[i].0[a][b] - 2.0 * tij[a][b] + 2.0 * tji[a][b];
                            bianchi = bianchi.max(r.abs());
                        }
                    }
                }
            }
            // u_j = Σ_a T_{a;ja},  w_b = Σ_a T_{a;ba} (same vector)
            let mut w = [0.0; DIM];
            for a in 0..DIM {
                for b in 0..DIM {
                    w[b] += t.0[a].0[b][a];
                }
            }
            let mut ricci = ZERO_MAT;
            for i in 0..DIM {
                for j in 0..DIM {
                    let mut r = 0.0;
                    for a in 0..DIM {
                        r += 4.0 * dt[i].0[a].0[j][a] - 4.0 * dt[a].0[i].0[j][a];
                    }
                    for b in 0..DIM {
                        r -= 8.0 * t.0[i].0[j][b] * w[b];
                    }
                    for a in 0..DIM {
                        for b in 0..DIM {
                            r += 8.0 * t.0[a].0[j][b] * t.0[i].0[b][a];
                        }
                    }
                    ricci[i][j] = r;
                }
            }
            let ric_max = ricci.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
            let scalar: f64 = (0..DIM).map(|i| ricci[i][i]).sum();
            let mut naive = 8.0 * t.norm2();
            for i in 0..DIM {
                for a in 0..DIM {
                    naive += 4.0 * dt[i].0[a].0[i][a] - 4.0 * dt[a].0[i].0[i][a];
                }
            }
            for a in 0..DIM {
                for j in 0..DIM {
                    for b in 0..DIM {
                        naive += 8.0 * t.0[a].0[j][b] * t.0[j].0[b][a];
                    }
                }
            }
            [bianchi, ric_max, scalar.abs(), naive.abs()]
        })
        .collect();
    let mut out = [0.0_f64; 4];
    for r in per_point {
        for k in 0..4 {
            out[k] = if r[k].is_nan() { f64::NAN } else { out[k].max(r[k]) };
        }
    }
    CurvatureResiduals {
        bianchi: out[0],
        ricci: out[1],
        scalar: out[2],
        scalar_naive: out[3],
    }
}

pub fn bianchi_residual(tf: &LatticeField<Torsion>) -> f64 {
    curvature_residuals(tf).bianchi
}

pub fn ricci_residual(tf: &LatticeField<Torsion>) -> f64 {
    curvature_residuals(tf).ricci
}

pub fn scalar_residual(tf: &LatticeField<Torsion>) -> f64 {
    curvature_residuals(tf).scalar
}
