//! Pointwise Spin(7) linear algebra on R^8.
//!
//! Conventions: components of a k-form are the totally antisymmetric
//! coefficients `sigma_{i1..ik}` with `sigma = (1/k!) sigma_{I} dx^I`; the
//! inner product of k-forms is `(1/k!)` times the full index contraction;
//! the diamond operator is `(A⋄σ)_{ijkl} = A_{ip}σ_{pjkl} + A_{jp}σ_{ipkl} +
//! A_{kp}σ_{ijpl} + A_{lp}σ_{ijkp}`.  Operations that take the structure
//! form as a parameter assume it lies in the SO(8)-orbit of the Cayley form
//! (induced metric = identity), which is the case everywhere on the lattice.

mod lambda;
mod metric;
mod ranks;

pub use lambda::{decompose4, lambda_matrix, lambda_op, lambda_spectrum, FourFormParts};
pub use metric::{metric_from_form, norm_squared_from_form};
pub use ranks::{diamond_image_ranks, isotypic_ranks, lambda_multiplicities, numerical_rank};

use std::sync::OnceLock;

use crate::error::{Result, Spin7Error};
use crate::forms::{
    tables, AnyForm, Endo8, FourForm, Mat8, ThreeForm, TwoForm, Vec8, DIM, N_PAIRS, N_QUADS, N_TRIPLES,
    ZERO_MAT,
};
use crate::octonion::{Octonion, OctonionTable};

/// Cayley form built from an arbitrary octonion table:
/// the alternation of `(x, y, z, w) -> <x, y (z̄ w)>`.
pub fn cayley_form_from(table: &OctonionTable) -> FourForm {
    let t = tables();
    let perms = permutations4();
    let mut out = FourForm::zero();
    for (n, q) in t.quads.iter().enumerate() {
        let mut acc = 0.0;
        for (p, sign) in &perms {
            let (i, j, k, l) = (q[p[0]], q[p[1]], q[p[2]], q[p[3]]);
            let zw = table.mul(&Octonion::basis(k).conj(), &Octonion::basis(l));
            let y_zw = table.mul(&Octonion::basis(j), &zw);
            acc += sign * y_zw.0[i];
        }
        out.0[n] = acc / 24.0;
    }
    out
}

/// The reference Cayley form `Φ₀` (standard octonion table).
pub fn cayley_form() -> FourForm {
    static PHI0: OnceLock<FourForm> = OnceLock::new();
    *PHI0.get_or_init(|| cayley_form_from(&OctonionTable::standard()))
}

fn permutations4() -> Vec<([usize; 4], f64)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut p = [a, b, c, d];
                    let s = crate::forms::sort_sign(&mut p);
                    if s != 0 {
                        out.push(([a, b, c, d], s as f64));
                    }
                }
            }
        }
    }
    out
}

/// Euclidean Hodge star on 4-forms, orientation `e^1∧…∧e^8`.
pub fn hodge_star4(sigma: &FourForm) -> FourForm {
    let t = tables();
    let mut out = FourForm::zero();
    for q in 0..N_QUADS {
        let (m, s) = t.star_entry(q);
        out.0[m] = s * sigma.0[q];
    }
    out
}

/// `⟨σ, τ⟩ = (1/k!) σ_I τ_I`; errors on a degree mismatch.
pub fn form_inner(a: &AnyForm, b: &AnyForm) -> Result<f64> {
    match (a, b) {
        (AnyForm::Two(x), AnyForm::Two(y)) => Ok(inner2(x, y)),
        (AnyForm::Three(x), AnyForm::Three(y)) => Ok(x.0.iter().zip(y.0.iter()).map(|(p, q)| p * q).sum()),
        (AnyForm::Four(x), AnyForm::Four(y)) => Ok(x.canonical_dot(y)),
        _ => Err(Spin7Error::DegreeMismatch {
            left: a.degree(),
            right: b.degree(),
        }),
    }
}

pub fn inner2(a: &TwoForm, b: &TwoForm) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            s += a.0[i][j] * b.0[i][j];
        }
    }
    0.5 * s
}

pub fn inner4(a: &FourForm, b: &FourForm) -> f64 {
    a.canonical_dot(b)
}

/// `(β·Φ)_{ij} = β_{ab} Φ_{abij}`.
pub fn contract_two_four(beta: &TwoForm, phi: &FourForm) -> TwoForm {
    let t = tables();
    let mut canon = [0.0; N_PAIRS];
    for (pij, ij) in t.pairs.iter().enumerate() {
        let mut acc = 0.0;
        for ab in t.pairs.iter() {
            let b = beta.0[ab[0]][ab[1]];
            if b != 0.0 {
                acc += b * phi.get(ab[0], ab[1], ij[0], ij[1]);
            }
        }
        canon[pij] = 2.0 * acc;
    }
    TwoForm::from_canonical(&canon)
}

/// Projection onto `Ω²₇`: `β/4 − (1/8) β_{ab}Φ_{abij}`.
pub fn pi7(beta: &TwoForm, phi: &FourForm) -> TwoForm {
    let c = contract_two_four(beta, phi);
    let mut out = ZERO_MAT;
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j] = 0.25 * beta.0[i][j] - 0.125 * c.0[i][j];
        }
    }
    TwoForm(out)
}

/// Projection onto `Ω²₂₁`: `3β/4 + (1/8) β_{ab}Φ_{abij}`.
pub fn pi21(beta: &TwoForm, phi: &FourForm) -> TwoForm {
    let c = contract_two_four(beta, phi);
    let mut out = ZERO_MAT;
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j] = 0.75 * beta.0[i][j] + 0.125 * c.0[i][j];
        }
    }
    TwoForm(out)
}

/// Infinitesimal GL(8) action of `A` on a 4-form.
pub fn diamond(a: &Endo8, phi: &FourForm) -> FourForm {
    diamond_mat(&a.0, phi)
}

pub(crate) fn diamond_mat(a: &Mat8, phi: &FourForm) -> FourForm {
    let t = tables();
    let s = phi.slices();
    let mut out = FourForm::zero();
    for (n, q) in t.quads.iter().enumerate() {
        let [i, j, k, l] = *q;
        let (t_jkl, _) = t.triple(j, k, l);
        let (t_ikl, _) = t.triple(i, k, l);
        let (t_ijl, _) = t.triple(i, j, l);
        let (t_ijk, _) = t.triple(i, j, k);
        let mut acc = 0.0;
        for p in 0..DIM {
            acc +=
                a[i][p] * s[p][t_jkl] - a[j][p] * s[p][t_ikl] + a[k][p] * s[p][t_ijl] - a[l][p] * s[p][t_ijk];
        }
        out.0[n] = acc;
    }
    out
}

/// `C_{ab} = σ_{ajkl} τ_{bjkl}`.
pub fn contract_three(sigma: &FourForm, tau: &FourForm) -> Mat8 {
    let sa = sigma.slices();
    let tb = tau.slices();
    let mut c = ZERO_MAT;
    for a in 0..DIM {
        for b in 0..DIM {
            let mut acc = 0.0;
            for t in 0..N_TRIPLES {
                acc += sa[a][t] * tb[b][t];
            }
            c[a][b] = 6.0 * acc;
        }
    }
    c
}

/// Triple contraction `(σ⌟₃Φ)_{ab}`: the skew part of `σ_{ajkl}Φ_{bjkl}`.
/// On `Ω²₇` it inverts the diamond map up to the factor 96.
pub fn triple_contract(sigma: &FourForm, phi: &FourForm) -> TwoForm {
    Endo8(contract_three(sigma, phi)).skew_part()
}

/// Recover `β ∈ Ω²₇` from `β⋄Φ`.
pub fn diamond_inverse7(sigma: &FourForm, phi: &FourForm) -> TwoForm {
    (1.0 / 96.0) * pi7(&triple_contract(sigma, phi), phi)
}

/// Interior product `(X⌟σ)_{ijk} = X_l σ_{lijk}`.
pub fn interior(x: &Vec8, sigma: &FourForm) -> ThreeForm {
    let s = sigma.slices();
    let mut out = ThreeForm::zero();
    for (t, o) in out.0.iter_mut().enumerate() {
        *o = (0..DIM).map(|l| x.0[l] * s[l][t]).sum();
    }
    out
}

/// Split `γ = X⌟Φ + γ₄₈` with `γ₄₈_{ijk}Φ_{ijkl} = 0`.
pub fn decompose3(gamma: &ThreeForm, phi: &FourForm) -> (Vec8, ThreeForm) {
    let s = phi.slices();
    // γ_{ijk}Φ_{mijk} = 6 Σ_t γ_t S[m][t] = 42 X_m
    let mut x = Vec8::zero();
    for m in 0..DIM {
        let acc: f64 = (0..N_TRIPLES).map(|t| gamma.0[t] * s[m][t]).sum();
        x.0[m] = 6.0 * acc / 42.0;
    }
    let g8 = interior(&x, phi);
    let mut rest = *gamma;
    for (r, g) in rest.0.iter_mut().zip(g8.0.iter()) {
        *r -= g;
    }
    (x, rest)
}

/// `γ_{ijk}Φ_{ijkl}` as a vector (zero exactly on `Ω³₄₈`).
pub fn three_form_trace(gamma: &ThreeForm, phi: &FourForm) -> Vec8 {
    let t = tables();
    let mut v = Vec8::zero();
    for (l, vl) in v.0.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (n, tr) in t.triples.iter().enumerate() {
            acc += gamma.0[n] * phi.get(tr[0], tr[1], tr[2], l);
        }
        *vl = 6.0 * acc;
    }
    v
}

/// Components of `A` in `Ω⁰ ⊕ S₀ ⊕ Ω²₇ ⊕ Ω²₂₁`.
#[derive(Clone, Copy, Debug)]
pub struct EndoParts {
    pub trace: f64,
    pub traceless_symmetric: Endo8,
    pub omega7: TwoForm,
    pub omega21: TwoForm,
}

impl EndoParts {
    /// `⅛(tr A) g + A₀ + A₇ + A₂₁`.
    pub fn reconstruct(&self) -> Endo8 {
        let mut m = self.traceless_symmetric.0;
        for i in 0..DIM {
            m[i][i] += self.trace / 8.0;
            for j in 0..DIM {
                m[i][j] += self.omega7.0[i][j] + self.omega21.0[i][j];
            }
        }
        Endo8(m)
    }
}

pub fn endo_split(a: &Endo8, phi: &FourForm) -> EndoParts {
    let trace = a.trace();
    let mut sym = a.symmetric_part();
    for i in 0..DIM {
        sym.0[i][i] -= trace / 8.0;
    }
    let skew = a.skew_part();
    let omega7 = pi7(&skew, phi);
    let omega21 = skew - omega7;
    EndoParts {
        trace,
        traceless_symmetric: sym,
        omega7,
        omega21,
    }
}

/// `Ā = ¼(tr A) g − Aᵀ`, so that `⋆(A⋄Φ) = Ā⋄Φ`.
pub fn diamond_bar(a: &Endo8) -> Endo8 {
    let mut m = a.transpose().0;
    let tr = a.trace();
    for (i, row) in m.iter_mut().enumerate() {
        for x in row.iter_mut() {
            *x = -*x;
        }
        row[i] += 0.25 * tr;
    }
    Endo8(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{mat_mul, mat_trace};
    use crate::sampling::{random_endo, rng};

    fn phi() -> FourForm {
        cayley_form()
    }

    #[test]
    fn cayley_form_has_fourteen_unit_components() {
        let p = phi();
        let nz: Vec<f64> = p.0.iter().copied().filter(|x| *x != 0.0).collect();
        assert_eq!(nz.len(), 14);
        assert!(nz.iter().all(|x| x.abs() == 1.0));
        assert_eq!(p.get(0, 1, 2, 4), 1.0);
    }

    #[test]
    fn full_contraction_is_336_and_inner_is_14() {
        let p = phi();
        assert_eq!(p.full_contraction(&p), 336.0);
        let v = form_inner(&AnyForm::Four(p), &AnyForm::Four(p)).unwrap();
        assert_eq!(v, 14.0);
    }

    #[test]
    fn self_dual() {
        let p = phi();
        assert_eq!(hodge_star4(&p), p);
        let e1234 = FourForm::basis(0, 1, 2, 3);
        assert_eq!(hodge_star4(&e1234), FourForm::basis(4, 5, 6, 7));
    }

    #[test]
    fn inner_degree_mismatch_is_an_error() {
        let e = form_inner(&AnyForm::Two(TwoForm::basis(0, 1)), &AnyForm::Four(phi()));
        assert_eq!(e, Err(Spin7Error::DegreeMismatch { left: 2, right: 4 }));
        let one = form_inner(
            &AnyForm::Two(TwoForm::basis(0, 1)),
            &AnyForm::Two(TwoForm::basis(0, 1)),
        );
        assert_eq!(one, Ok(1.0));
    }

    #[test]
    fn diamond_of_identity_is_four_phi() {
        let p = phi();
        let d = diamond(&Endo8::identity(), &p);
        assert!((d - 4.0 * p).max_abs() < 1e-15);
        let n = inner4(&d, &d);
        assert!((n - 224.0).abs() < 1e-12);
    }

    #[test]
    fn projections_resolve_identity_and_have_eigenvalues() {
        let p = phi();
        let mut r = rng(3);
        for _ in 0..10 {
            let beta = random_endo(&mut r).skew_part();
            let b7 = pi7(&beta, &p);
            let b21 = pi21(&beta, &p);
            assert!(((b7 + b21) - beta).max_abs() < 1e-14);
            let c7 = contract_two_four(&b7, &p);
            let c21 = contract_two_four(&b21, &p);
            assert!((c7 - (-6.0) * b7).max_abs() < 1e-12);
            assert!((c21 - 2.0 * b21).max_abs() < 1e-12);
            assert!((pi7(&b7, &p) - b7).max_abs() < 1e-14);
        }
    }

    #[test]
    fn diamond_kills_omega21_and_inverts_on_omega7() {
        let p = phi();
        let mut r = rng(4);
        let beta = random_endo(&mut r).skew_part();
        let b21 = pi21(&beta, &p);
        assert!(diamond(&b21.into(), &p).max_abs() < 1e-12);
        let b7 = pi7(&beta, &p);
        let tc = triple_contract(&diamond(&b7.into(), &p), &p);
        assert!((tc - 96.0 * b7).max_abs() < 1e-12);
        assert!(triple_contract(&FourForm::zero(), &p).max_abs() == 0.0);
        assert!(pi7(&triple_contract(&p, &p), &p).max_abs() < 1e-12);
    }

    #[test]
    fn hodge_star_of_diamond() {
        let p = phi();
        let mut r = rng(5);
        let a = random_endo(&mut r);
        let lhs = hodge_star4(&diamond(&a, &p));
        let rhs = diamond(&diamond_bar(&a), &p);
        assert!((lhs - rhs).max_abs() < 1e-12);
    }

    #[test]
    fn diamond_inner_product_formula() {
        let p = phi();
        let mut r = rng(6);
        for _ in 0..5 {
            let a = random_endo(&mut r);
            let b = random_endo(&mut r);
            let pa = endo_split(&a, &p);
            let pb = endo_split(&b, &p);
            let lhs = inner4(&diamond(&a, &p), &diamond(&b, &p));
            let rhs = 3.5 * pa.trace * pb.trace
                + 4.0 * mat_trace(&mat_mul(&pa.traceless_symmetric.0, &pb.traceless_symmetric.0))
                - 16.0 * mat_trace(&mat_mul(&pa.omega7.0, &pb.omega7.0));
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn endo_split_cases() {
        let p = phi();
        let g = endo_split(&Endo8::identity(), &p);
        assert_eq!(g.trace, 8.0);
        assert!(g.traceless_symmetric.max_abs() < 1e-15);
        assert!(g.omega7.max_abs() == 0.0 && g.omega21.max_abs() == 0.0);

        let mut r = rng(7);
        let skew: Endo8 = random_endo(&mut r).skew_part().into();
        let s = endo_split(&skew, &p);
        assert!(s.trace.abs() < 1e-15);
        assert!(s.traceless_symmetric.max_abs() < 1e-15);

        let a = random_endo(&mut r);
        let parts = endo_split(&a, &p);
        assert!((parts.reconstruct() - a).max_abs() < 1e-13);
    }

    #[test]
    fn decompose3_recovers_vector_part() {
        let p = phi();
        let e1 = Vec8::basis(0);
        let gamma = interior(&e1, &p);
        let (x, rest) = decompose3(&gamma, &p);
        for i in 0..DIM {
            assert!((x.0[i] - e1.0[i]).abs() < 1e-15);
        }
        assert!(rest.max_abs() < 1e-15);

        let (x0, r0) = decompose3(&ThreeForm::zero(), &p);
        assert_eq!(x0, Vec8::zero());
        assert_eq!(r0, ThreeForm::zero());

        let mut g = ThreeForm::zero();
        for (n, v) in g.0.iter_mut().enumerate() {
            *v = ((n * 7 + 3) % 11) as f64 - 5.0;
        }
        let (_, g48) = decompose3(&g, &p);
        let tr = three_form_trace(&g48, &p);
        assert!(tr.norm() < 1e-12);
    }
}
