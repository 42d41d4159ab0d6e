//! The nonlinear metric induced by an admissible 4-form.
//!
//! For a nonzero `v` completed to a frame `{v, e_1, …, e_7}`,
//!
//! ```text
//! B_ij(v) = ((e_i⌟v⌟Φ) ∧ (e_j⌟v⌟Φ) ∧ (v⌟Φ))(e_1, …, e_7)
//! A(v)    = ((v⌟Φ) ∧ Φ)(e_1, …, e_7)
//! g(v,v)² = −7³ / 6^(7/3) · (det B)^(1/3) / A³
//! ```
//!
//! Forms are evaluated on vectors with the determinant convention
//! (`e^1∧…∧e^k (e_1, …, e_k) = 1`).  The completing frame is the coordinate
//! basis with the axis of the largest component of `v` removed, so the
//! 7-form evaluations reduce to reading one component.  Off-diagonal
//! entries come from polarization.

use std::sync::OnceLock;

use crate::error::{Result, Spin7Error};
use crate::forms::{tables, FourForm, Mat8, Metric8, Vec8, DIM, ZERO_MAT};

/// Dense exterior-algebra element indexed by the bitmask of its basis covector.
type Ext = [f64; 256];

fn four_to_ext(phi: &FourForm) -> Ext {
    let mut e = [0.0; 256];
    for (n, q) in tables().quads.iter().enumerate() {
        let m = q.iter().fold(0usize, |m, &i| m | (1 << i));
        e[m] = phi.0[n];
    }
    e
}

fn masks(degree: u32) -> &'static [usize] {
    static MASKS: OnceLock<Vec<Vec<usize>>> = OnceLock::new();
    &MASKS.get_or_init(|| {
        let mut by_degree = vec![Vec::new(); DIM + 1];
        for m in 0..256usize {
            by_degree[m.count_ones() as usize].push(m);
        }
        by_degree
    })[degree as usize]
}

fn interior(v: &[f64; DIM], a: &Ext, degree: u32) -> Ext {
    let mut out = [0.0; 256];
    for &m in masks(degree) {
        let val = a[m];
        if val == 0.0 {
            continue;
        }
        for (i, &vi) in v.iter().enumerate() {
            let bit = 1usize << i;
            if m & bit == 0 || vi == 0.0 {
                continue;
            }
            let pos = (m & (bit - 1)).count_ones();
            let s = if pos % 2 == 0 { 1.0 } else { -1.0 };
            out[m ^ bit] += s * vi * val;
        }
    }
    out
}

/// Sign of moving the covectors of `b` past those of `a` into ascending order.
#[inline]
fn wedge_sign(a: usize, b: usize) -> f64 {
    let mut inversions = 0;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Component `target` of `a ∧ b`, with `a`, `b` homogeneous of the given
/// degrees and `target` a mask of degree `da + db`.
fn wedge_component(a: &Ext, da: u32, b: &Ext, target: usize) -> f64 {
    let mut acc = 0.0;
    // enumerate submasks of target with popcount da
    let mut sub = target;
    loop {
        if (sub as u32).count_ones() == da {
            let va = a[sub];
            if va != 0.0 {
                let rest = target ^ sub;
                let vb = b[rest];
                if vb != 0.0 {
                    acc += wedge_sign(sub, rest) * va * vb;
                }
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & target;
    }
    acc
}

/// For each removed axis `k`, the nonzero terms of the top component
/// `(α ∧ β ∧ γ)` on the complementary mask with `α`, `β` of degree 2 and `γ`
/// of degree 3, as `(mask α, mask β, mask γ, sign)`.
fn b_terms() -> &'static [Vec<(u8, u8, u8, f64)>; DIM] {
    static TERMS: OnceLock<[Vec<(u8, u8, u8, f64)>; DIM]> = OnceLock::new();
    TERMS.get_or_init(|| {
        std::array::from_fn(|k| {
            let target = 0xFF ^ (1usize << k);
            let mut out = Vec::new();
            for &ma in masks(2) {
                for &mb in masks(2) {
                    if ma & mb != 0 || (ma | mb) & !target != 0 {
                        continue;
                    }
                    let rest = target ^ ma ^ mb;
                    let s = wedge_sign(ma, mb) * wedge_sign(ma | mb, rest);
                    out.push((ma as u8, mb as u8, rest as u8, s));
                }
            }
            out
        })
    })
}

#[cfg(test)]
fn wedge_full(a: &Ext, da: u32, b: &Ext, db: u32) -> Ext {
    let mut out = [0.0; 256];
    for &ma in masks(da) {
        let va = a[ma];
        if va == 0.0 {
            continue;
        }
        for &mb in masks(db) {
            let vb = b[mb];
            if vb == 0.0 || ma & mb != 0 {
                continue;
            }
            out[ma | mb] += wedge_sign(ma, mb) * va * vb;
        }
    }
    out
}

/// `g(v, v)` from the closed-form quadratic expression.
fn quadratic(phi: &Ext, v: &[f64; DIM]) -> Result<f64> {
    let mut k = 0;
    for i in 1..DIM {
        if v[i].abs() > v[k].abs() {
            k = i;
        }
    }
    if v[k] == 0.0 {
        return Err(Spin7Error::Degenerate("zero vector".into()));
    }
    let target = 0xFF ^ (1usize << k);
    let frame: Vec<usize> = (0..DIM).filter(|&i| i != k).collect();

    let vphi = interior(v, phi, 4);
    let a = wedge_component(&vphi, 3, phi, target);

    let mut c = Vec::with_capacity(7);
    for &i in &frame {
        let mut e = [0.0; DIM];
        e[i] = 1.0;
        c.push(interior(&e, &vphi, 3));
    }
    let terms = &b_terms()[k];
    let mut b = nalgebra::SMatrix::<f64, 7, 7>::zeros();
    for i in 0..7 {
        for j in i..7 {
            let val: f64 = terms
                .iter()
                .map(|&(ma, mb, rest, s)| s * c[i][ma as usize] * c[j][mb as usize] * vphi[rest as usize])
                .sum();
            b[(i, j)] = val;
            b[(j, i)] = val;
        }
    }
    let det_b = b.determinant();
    let scale = phi.iter().fold(0.0_f64, |m, x| m.max(x.abs())) * v[k].abs();
    if a.abs() <= 1e-12 * scale.powi(2).max(f64::MIN_POSITIVE) {
        return Err(Spin7Error::Degenerate(format!(
            "A(v) = {a:e} vanishes for a frame vector"
        )));
    }
    let g2 = -(343.0 / 6f64.powf(7.0 / 3.0)) * det_b.cbrt() / (a * a * a);
    if !(g2 > 0.0) || !g2.is_finite() {
        return Err(Spin7Error::Degenerate(format!(
            "g(v,v)^2 = {g2:e} is not positive"
        )));
    }
    Ok(g2.sqrt())
}

/// `g_Φ(v, v)` for a single vector.
pub fn norm_squared_from_form(phi: &FourForm, v: &Vec8) -> Result<f64> {
    quadratic(&four_to_ext(phi), &v.0)
}

/// The full induced metric, by polarization over the coordinate basis.
pub fn metric_from_form(phi: &FourForm) -> Result<Metric8> {
    let ext = four_to_ext(phi);
    let mut diag = [0.0; DIM];
    for (i, d) in diag.iter_mut().enumerate() {
        let mut e = [0.0; DIM];
        e[i] = 1.0;
        *d = quadratic(&ext, &e)?;
    }
    let mut g: Mat8 = ZERO_MAT;
    for i in 0..DIM {
        g[i][i] = diag[i];
        for j in i + 1..DIM {
            let mut e = [0.0; DIM];
            e[i] = 1.0;
            e[j] = 1.0;
            let q = quadratic(&ext, &e)?;
            let gij = 0.5 * (q - diag[i] - diag[j]);
            g[i][j] = gij;
            g[j][i] = gij;
        }
    }
    let m = nalgebra::SMatrix::<f64, 8, 8>::from_fn(|r, c| g[r][c]);
    if m.cholesky().is_none() {
        return Err(Spin7Error::Degenerate(
            "induced metric is not positive-definite".into(),
        ));
    }
    Ok(Metric8(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::cayley_form;
    use crate::sampling::{random_rotation, rng};
    use crate::spinor::rotate_form;

    #[test]
    fn cayley_form_induces_euclidean_metric() {
        let g = metric_from_form(&cayley_form()).unwrap();
        assert!(g.deviation_from_identity() < 1e-12);
    }

    #[test]
    fn conformal_scaling() {
        let c: f64 = 1.7;
        let phi = c.powi(4) * cayley_form();
        let g = metric_from_form(&phi).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { c * c } else { 0.0 };
                assert!((g.0[i][j] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rotated_forms_are_isometric() {
        let mut r = rng(9);
        for _ in 0..5 {
            let rot = random_rotation(&mut r);
            let phi = rotate_form(&rot, &cayley_form()).unwrap();
            let g = metric_from_form(&phi).unwrap();
            assert!(g.deviation_from_identity() < 1e-10);
        }
    }

    #[test]
    fn zero_form_is_degenerate() {
        assert!(matches!(
            metric_from_form(&FourForm::zero()),
            Err(Spin7Error::Degenerate(_))
        ));
    }

    #[test]
    fn tabulated_top_terms_match_generic_wedge() {
        let mut r = rng(3);
        let phi = four_to_ext(&rotate_form(&random_rotation(&mut r), &cayley_form()).unwrap());
        let v = [0.3, -1.2, 0.5, 0.1, 0.9, -0.4, 0.2, 0.7];
        let k = 1;
        let target = 0xFF ^ (1usize << k);
        let vphi = interior(&v, &phi, 4);
        let c: Vec<Ext> = (0..DIM)
            .filter(|&i| i != k)
            .map(|i| {
                let mut e = [0.0; DIM];
                e[i] = 1.0;
                interior(&e, &vphi, 3)
            })
            .collect();
        for i in 0..7 {
            for j in 0..7 {
                let slow = wedge_component(&wedge_full(&c[i], 2, &c[j], 2), 4, &vphi, target);
                let fast: f64 = b_terms()[k]
                    .iter()
                    .map(|&(ma, mb, rest, s)| s * c[i][ma as usize] * c[j][mb as usize] * vphi[rest as usize])
                    .sum();
                assert!((slow - fast).abs() < 1e-12, "{i} {j}: {slow} vs {fast}");
            }
        }
    }

    #[test]
    fn wedge_sign_basic() {
        // e^1 ∧ e^0 = −e^0 ∧ e^1
        assert_eq!(wedge_sign(0b10, 0b01), -1.0);
        assert_eq!(wedge_sign(0b01, 0b10), 1.0);
    }
}
