//! Octonionic parametrization of isometric Spin(7)-structures and the
//! SO(8) action on 4-forms.

use crate::algebra::{cayley_form, diamond, diamond_mat, interior};
use crate::error::{Result, Spin7Error};
use crate::forms::{
    identity_mat, mat_det, mat_max_abs, mat_mul, mat_scale, tables, Endo8, FourForm, Mat8, ThreeForm, Vec8,
    DIM, N_PAIRS, N_TRIPLES,
};
use crate::octonion::{standard_table, Octonion};

/// `Θ_{0,X}`: the alternation of `(a, b, c, d) ↦ Φ₀(a·X, b, c, d)`.
///
/// Writing `a·X = R_X a` this is `¼ (R_Xᵀ ⋄ Φ₀)`.
pub fn theta_form(x: &Vec8) -> FourForm {
    let r = standard_table().right_mul_matrix(&Octonion::from(*x));
    let rt = crate::forms::mat_transpose(&r);
    0.25 * diamond_mat(&rt, &cayley_form())
}

/// A point `(f, X)` of the unit sphere in `R ⊕ R^8`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BryantPoint {
    pub f: f64,
    pub x: Vec8,
}

impl BryantPoint {
    pub fn new(f: f64, x: Vec8) -> Result<Self> {
        let defect = (f * f + x.norm2() - 1.0).abs();
        if defect > 1e-12 || !defect.is_finite() {
            return Err(Spin7Error::OffSphere(defect));
        }
        Ok(BryantPoint { f, x })
    }

    pub fn antipode(&self) -> Self {
        BryantPoint {
            f: -self.f,
            x: self.x.scale(-1.0),
        }
    }
}

/// `X ∧ γ` for a 1-form `X` and a 3-form `γ`.
pub fn wedge_one_three(x: &Vec8, gamma: &ThreeForm) -> FourForm {
    let t = tables();
    let mut out = FourForm::zero();
    for (n, q) in t.quads.iter().enumerate() {
        let [i, j, k, l] = *q;
        out.0[n] = x.0[i] * gamma.get(j, k, l) - x.0[j] * gamma.get(i, k, l) + x.0[k] * gamma.get(i, j, l)
            - x.0[l] * gamma.get(i, j, k);
    }
    out
}

/// The four-form family in its literal closed form:
/// `(f² − |X|²)Φ₀ + 2fΘ_{0,X} + 8 X∧(X⌟Φ₀)`.
///
/// The quadratic term of this expression does not land in the orbit of
/// `Φ₀`; see [`spinor_form`] for the admissible family.
pub fn bryant_form(p: &BryantPoint) -> Result<FourForm> {
    let p = BryantPoint::new(p.f, p.x)?;
    Ok(bryant_form_with(&p, 2.0, 8.0))
}

/// `(f² − |X|²)Φ₀ + α fΘ_{0,X} + β X∧(X⌟Φ₀)`.
pub fn bryant_form_with(p: &BryantPoint, alpha: f64, beta: f64) -> FourForm {
    let phi = cayley_form();
    let (f, x) = (p.f, p.x);
    let mut out = (f * f - x.norm2()) * phi;
    out.axpy(alpha * f, &theta_form(&x));
    out.axpy(beta, &wedge_one_three(&x, &interior(&x, &phi)));
    out
}

/// The admissible family through `Φ₀`:
/// `(f² − |X|²)Φ₀ + 2fΘ_{0,X} + 2|X|²Φ₀ + ⅛ R_X⋄(R_X⋄Φ₀)` for imaginary `X`,
/// equal to `exp(−½θR_Y)·Φ₀` for `(f, X) = (cos θ, sin θ·Y)`, `|Y| = 1`.
pub fn spinor_form(p: &BryantPoint) -> Result<FourForm> {
    let p = BryantPoint::new(p.f, p.x)?;
    if p.x.0[0].abs() > 1e-12 {
        return Err(Spin7Error::NotImaginary(p.x.0[0]));
    }
    let phi = cayley_form();
    let (f, x) = (p.f, p.x);
    let rx = standard_table().right_mul_matrix(&Octonion::from(x));
    let mut out = (f * f + x.norm2()) * phi;
    out.axpy(2.0 * f, &theta_form(&x));
    out.axpy(0.125, &diamond_mat(&rx, &diamond_mat(&rx, &phi)));
    Ok(out)
}

/// Matrix exponential of a skew matrix (scaling and squaring around a
/// degree-18 Taylor core).
pub fn so8_exp(a: &Endo8) -> Result<Endo8> {
    let scale = a.max_abs().max(1.0);
    let mut defect = 0.0_f64;
    for i in 0..DIM {
        for j in 0..DIM {
            defect = defect.max((a.0[i][j] + a.0[j][i]).abs());
        }
    }
    if defect > 1e-12 * scale || !defect.is_finite() {
        return Err(Spin7Error::NotSkew(defect));
    }
    let mut norm1 = 0.0_f64;
    for j in 0..DIM {
        norm1 = norm1.max((0..DIM).map(|i| a.0[i][j].abs()).sum());
    }
    let mut s = 0;
    while norm1 / f64::powi(2.0, s) > 0.25 {
        s += 1;
    }
    let b = mat_scale(&a.0, f64::powi(2.0, -s));
    // Horner: I + B(I + B/2(I + B/3(...)))
    let mut r = identity_mat();
    for k in (1..=18).rev() {
        let mut next = mat_scale(&mat_mul(&b, &r), 1.0 / k as f64);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += 1.0;
        }
        r = next;
    }
    for _ in 0..s {
        r = mat_mul(&r, &r);
    }
    Ok(Endo8(r))
}

/// Push-forward of a 4-form by a frame change:
/// `(R·σ)_{ijkl} = R_{ip}R_{jq}R_{kr}R_{ls} σ_{pqrs}`.
///
/// A left action: `R₁·(R₂·σ) = (R₁R₂)·σ`, and
/// `d/dt (exp(tA)·σ)|₀ = A⋄σ`.
pub fn rotate_form(r: &Endo8, sigma: &FourForm) -> Result<FourForm> {
    let det = mat_det(&r.0);
    let scale = mat_max_abs(&r.0).max(f64::MIN_POSITIVE);
    if !(det.abs() > 1e-14 * scale.powi(8)) {
        return Err(Spin7Error::Singular(det));
    }
    Ok(rotate_form_unchecked(&r.0, sigma))
}

pub(crate) fn rotate_form_unchecked(r: &Mat8, sigma: &FourForm) -> FourForm {
    let t = tables();
    let s = sigma.slices();
    // stage 1: u1[pqr][l] = Σ_s R_ls σ_pqrs = −Σ_s R_ls S[s][pqr]
    let mut u1 = [[0.0; DIM]; N_TRIPLES];
    for (tr, row) in u1.iter_mut().enumerate() {
        for (l, o) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for x in 0..DIM {
                acc += r[l][x] * s[x][tr];
            }
            *o = -acc;
        }
    }
    // stage 2: u2[pq][k][l] = Σ_r R_kr u1[pqr][l]
    let mut u2 = [[[0.0; DIM]; DIM]; N_PAIRS];
    for (pq, pair) in t.pairs.iter().enumerate() {
        for rr in 0..DIM {
            if rr == pair[0] || rr == pair[1] {
                continue;
            }
            let (tr, sg) = t.triple(pair[0], pair[1], rr);
            let src = &u1[tr];
            for k in 0..DIM {
                let c = sg * r[k][rr];
                if c == 0.0 {
                    continue;
                }
                for l in 0..DIM {
                    u2[pq][k][l] += c * src[l];
                }
            }
        }
    }
    // stage 3: u3[p][jkl] = Σ_q R_jq u2[pq][k][l] for canonical (j,k,l)
    let mut u3 = [[0.0; N_TRIPLES]; DIM];
    for p in 0..DIM {
        for q in 0..DIM {
            if q == p {
                continue;
            }
            let (pq, sg) = t.pair(p, q);
            let src = &u2[pq];
            for (n, tr) in t.triples.iter().enumerate() {
                let c = r[tr[0]][q];
                if c != 0.0 {
                    u3[p][n] += sg * c * src[tr[1]][tr[2]];
                }
            }
        }
    }
    // stage 4: out[ijkl] = Σ_p R_ip u3[p][jkl]
    let mut out = FourForm::zero();
    for (n, q) in t.quads.iter().enumerate() {
        let (tr, _) = t.triple(q[1], q[2], q[3]);
        let mut acc = 0.0;
        for p in 0..DIM {
            acc += r[q[0]][p] * u3[p][tr];
        }
        out.0[n] = acc;
    }
    out
}

/// `exp(A)·σ`, the orbit step used by the integrator.
pub fn exp_rotate(a: &Endo8, sigma: &FourForm) -> Result<FourForm> {
    let r = so8_exp(a)?;
    Ok(rotate_form_unchecked(&r.0, sigma))
}

/// First-order (Euler) update `σ + A⋄σ`, kept for comparison with the
/// orbit-preserving step.
pub fn euler_update(a: &Endo8, sigma: &FourForm) -> FourForm {
    *sigma + diamond(a, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{metric_from_form, pi21, pi7};
    use crate::forms::{mat_transpose, AnyForm};
    use crate::sampling::{random_four_form, random_rotation, random_skew, random_vec, rng};

    fn dense(s: &FourForm) -> Vec<f64> {
        let mut d = vec![0.0; 4096];
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    for l in 0..8 {
                        d[((i * 8 + j) * 8 + k) * 8 + l] = s.get(i, j, k, l);
                    }
                }
            }
        }
        d
    }

    fn brute_rotate(r: &Mat8, s: &FourForm) -> FourForm {
        // contract one slot at a time on the dense tensor
        let mut d = dense(s);
        for slot in 0..4 {
            let mut nd = vec![0.0; 4096];
            for idx in 0..4096 {
                let mut digits = [idx >> 9, (idx >> 6) & 7, (idx >> 3) & 7, idx & 7];
                let out_i = digits[slot];
                let mut acc = 0.0;
                for p in 0..8 {
                    digits[slot] = p;
                    let src = ((digits[0] * 8 + digits[1]) * 8 + digits[2]) * 8 + digits[3];
                    acc += r[out_i][p] * d[src];
                }
                nd[idx] = acc;
            }
            d = nd;
        }
        let mut out = FourForm::zero();
        for (n, q) in tables().quads.iter().enumerate() {
            out.0[n] = d[((q[0] * 8 + q[1]) * 8 + q[2]) * 8 + q[3]];
        }
        out
    }

    #[test]
    fn theta_matches_direct_alternation() {
        let phi = cayley_form();
        let x = Vec8::basis(1);
        let table = standard_table();
        let th = theta_form(&x);
        for (n, q) in tables().quads.iter().enumerate() {
            let mut acc = 0.0;
            // alternate Φ₀(a·X, b, c, d) over the 4 slots
            for (slot, sign) in [(0usize, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)] {
                let a = q[slot];
                let rest: Vec<usize> = q.iter().copied().filter(|&v| v != a).collect();
                let ax = table.mul(&Octonion::basis(a), &Octonion::from(x));
                for (p, c) in ax.0.iter().enumerate() {
                    acc += sign * c * phi.get(p, rest[0], rest[1], rest[2]);
                }
            }
            assert!((th.0[n] - acc / 4.0).abs() < 1e-15, "component {n}");
        }
        assert_eq!(theta_form(&Vec8::zero()).max_abs(), 0.0);
        let y = random_vec(&mut rng(1));
        assert!((theta_form(&y.scale(-1.0)) + theta_form(&y)).max_abs() < 1e-15);
    }

    #[test]
    fn bryant_special_points() {
        let phi = cayley_form();
        let one = BryantPoint::new(1.0, Vec8::zero()).unwrap();
        assert_eq!(bryant_form(&one).unwrap(), phi);
        assert_eq!(bryant_form(&one.antipode()).unwrap(), phi);
        assert!(matches!(
            BryantPoint::new(1.0, Vec8::basis(2)),
            Err(Spin7Error::OffSphere(_))
        ));
    }

    #[test]
    fn spinor_form_is_orbit_of_right_multiplication() {
        let mut r = rng(2);
        let mut y = random_vec(&mut r);
        y.0[0] = 0.0;
        let y = y.scale(1.0 / y.norm());
        let theta: f64 = 0.83;
        let p = BryantPoint::new(theta.cos(), y.scale(theta.sin())).unwrap();
        let s = spinor_form(&p).unwrap();
        let ry = standard_table().right_mul_matrix(&Octonion::from(y));
        let rot = so8_exp(&Endo8(mat_scale(&ry, -0.5 * theta))).unwrap();
        let viaexp = rotate_form(&rot, &cayley_form()).unwrap();
        assert!((s - viaexp).max_abs() < 1e-12);
        let g = metric_from_form(&s).unwrap();
        assert!(g.deviation_from_identity() < 1e-10);
        assert_eq!(spinor_form(&p.antipode()).unwrap(), s);
    }

    #[test]
    fn exp_is_orthogonal() {
        let mut r = rng(3);
        let a: Endo8 = random_skew(&mut r).into();
        let big = 3.0 * a;
        for m in [a, big] {
            let q = so8_exp(&m).unwrap();
            let qtq = mat_mul(&mat_transpose(&q.0), &q.0);
            assert!(
                mat_max_abs(&crate::forms::mat_sub(&qtq, &identity_mat())) < 1e-13,
                "orthogonality"
            );
            assert!((mat_det(&q.0) - 1.0).abs() < 1e-12);
            let qm = so8_exp(&(-1.0 * m)).unwrap();
            assert!(mat_max_abs(&crate::forms::mat_sub(&qm.0, &mat_transpose(&q.0))) < 1e-13);
        }
        assert_eq!(so8_exp(&Endo8::zero()).unwrap(), Endo8::identity());
        assert!(matches!(so8_exp(&Endo8::identity()), Err(Spin7Error::NotSkew(_))));
    }

    #[test]
    fn exp_taylor_remainder_is_cubic() {
        let a: Endo8 = random_skew(&mut rng(4)).into();
        let mut prev = None;
        for k in 0..3 {
            let eps = 1e-2 / f64::powi(2.0, k);
            let m = eps * a;
            let q = so8_exp(&m).unwrap();
            let m2 = mat_scale(&mat_mul(&m.0, &m.0), 0.5);
            let approx = crate::forms::mat_add(&crate::forms::mat_add(&identity_mat(), &m.0), &m2);
            let err = mat_max_abs(&crate::forms::mat_sub(&q.0, &approx));
            if let Some(p) = prev {
                let ratio: f64 = p / err;
                assert!((ratio.log2() - 3.0).abs() < 0.1, "ratio {ratio}");
            }
            prev = Some(err);
        }
    }

    #[test]
    fn rotation_matches_brute_force_and_composes() {
        let mut r = rng(5);
        let s = random_four_form(&mut r);
        let r1 = random_endo_inv(&mut r);
        let r2 = random_rotation(&mut r);
        let a = rotate_form(&r1, &s).unwrap();
        assert!((a - brute_rotate(&r1.0, &s)).max_abs() < 1e-12);
        let lhs = rotate_form(&Endo8(mat_mul(&r1.0, &r2.0)), &s).unwrap();
        let rhs = rotate_form(&r1, &rotate_form(&r2, &s).unwrap()).unwrap();
        assert!((lhs - rhs).max_abs() < 1e-11);
        assert_eq!(rotate_form(&Endo8::identity(), &s).unwrap(), s);
        assert!(matches!(
            rotate_form(&Endo8::zero(), &s),
            Err(Spin7Error::Singular(_))
        ));
    }

    fn random_endo_inv(r: &mut crate::sampling::SeededRng) -> Endo8 {
        let mut m = crate::sampling::random_endo(r);
        for i in 0..8 {
            m.0[i][i] += 3.0;
        }
        m
    }

    #[test]
    fn derivative_of_action_is_diamond() {
        let phi = cayley_form();
        let a: Endo8 = random_skew(&mut rng(6)).into();
        let h = 1e-4;
        let plus = exp_rotate(&(h * a), &phi).unwrap();
        let minus = exp_rotate(&(-h * a), &phi).unwrap();
        let fd = (1.0 / (2.0 * h)) * (plus - minus);
        assert!((fd - diamond(&a, &phi)).max_abs() < 1e-6);
    }

    #[test]
    fn stabiliser_and_isometry() {
        let phi = cayley_form();
        let mut r = rng(7);
        let b = random_skew(&mut r);
        let b21: Endo8 = pi21(&b, &phi).into();
        let fixed = exp_rotate(&(2.0 * b21), &phi).unwrap();
        assert!((fixed - phi).max_abs() < 1e-10);
        let b7: Endo8 = pi7(&b, &phi).into();
        let moved = exp_rotate(&b7, &phi).unwrap();
        assert!((moved - phi).max_abs() > 1e-3);
        let n = crate::algebra::form_inner(&AnyForm::Four(moved), &AnyForm::Four(moved)).unwrap();
        assert!((n - 14.0).abs() < 1e-12);
    }
}
