//! The equivariant operator `Λ_Φ` on 4-forms and the 1+7+27+35 splitting.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{diamond, hodge_star4, inner4, pi7, triple_contract};
use crate::forms::{tables, FourForm, N_PAIRS, N_QUADS};

/// `Λ_Φ(σ) = U_{ijkl} + U_{iklj} + U_{iljk} + U_{jkil} + U_{jlki} + U_{klij}`
/// with `U_{ijkl} = σ_{ijmn}Φ_{mnkl}`.
pub fn lambda_op(sigma: &FourForm, phi: &FourForm) -> FourForm {
    let t = tables();
    let ps = sigma.pair_matrix();
    let pp = phi.pair_matrix();
    let mut u = [[0.0; N_PAIRS]; N_PAIRS];
    for (a, row) in u.iter_mut().enumerate() {
        for (c, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for b in 0..N_PAIRS {
                acc += ps[a][b] * pp[b][c];
            }
            *out = 2.0 * acc;
        }
    }
    let ue = |a: usize, b: usize, c: usize, d: usize| -> f64 {
        let (p, s1) = t.pair(a, b);
        let (q, s2) = t.pair(c, d);
        s1 * s2 * u[p][q]
    };
    let mut out = FourForm::zero();
    for (n, q) in t.quads.iter().enumerate() {
        let [i, j, k, l] = *q;
        out.0[n] = ue(i, j, k, l)
            + ue(i, k, l, j)
            + ue(i, l, j, k)
            + ue(j, k, i, l)
            + ue(j, l, k, i)
            + ue(k, l, i, j);
    }
    out
}

/// Matrix of `Λ_Φ` in the canonical 70-component basis.
pub fn lambda_matrix(phi: &FourForm) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(N_QUADS, N_QUADS);
    for c in 0..N_QUADS {
        let mut e = FourForm::zero();
        e.0[c] = 1.0;
        let img = lambda_op(&e, phi);
        for r in 0..N_QUADS {
            m[(r, c)] = img.0[r];
        }
    }
    m
}

/// Eigenvalues of `Λ_Φ`, ascending.  The operator is self-adjoint for the
/// canonical inner product, so the symmetric solver applies.
pub fn lambda_spectrum(phi: &FourForm) -> Vec<f64> {
    let m = lambda_matrix(phi);
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Components of a 4-form in `Ω⁴₁ ⊕ Ω⁴₇ ⊕ Ω⁴₂₇ ⊕ Ω⁴₃₅`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourFormParts {
    pub one: FourForm,
    pub seven: FourForm,
    pub twenty_seven: FourForm,
    pub thirty_five: FourForm,
}

impl FourFormParts {
    pub fn sum(&self) -> FourForm {
        self.one + self.seven + self.twenty_seven + self.thirty_five
    }

    pub fn as_array(&self) -> [FourForm; 4] {
        [self.one, self.seven, self.twenty_seven, self.thirty_five]
    }
}

/// Split `σ` into its four isotypic parts.
///
/// `Ω⁴₃₅` is the anti-self-dual part; `Ω⁴₁` is the line through `Φ`;
/// `Ω⁴₇ = Ω²₇⋄Φ` is recovered through the triple contraction; `Ω⁴₂₇` is
/// what remains of the self-dual part.
pub fn decompose4(sigma: &FourForm, phi: &FourForm) -> FourFormParts {
    let star = hodge_star4(sigma);
    let thirty_five = 0.5 * (*sigma - star);
    let one = (inner4(sigma, phi) / inner4(phi, phi)) * *phi;
    let beta = (1.0 / 96.0) * pi7(&triple_contract(sigma, phi), phi);
    let seven = diamond(&beta.into(), phi);
    let twenty_seven = *sigma - one - seven - thirty_five;
    FourFormParts {
        one,
        seven,
        twenty_seven,
        thirty_five,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::cayley_form;
    use crate::forms::Endo8;
    use crate::sampling::{random_endo, random_four_form, rng};

    #[test]
    fn eigenvalues_on_model_vectors() {
        let p = cayley_form();
        assert!((lambda_op(&p, &p) + 24.0 * p).max_abs() < 1e-12);
        let mut r = rng(1);
        let a = random_endo(&mut r);
        let mut a0 = a.symmetric_part();
        let tr = a0.trace();
        for i in 0..8 {
            a0.0[i][i] -= tr / 8.0;
        }
        let s0 = diamond(&a0, &p);
        assert!(lambda_op(&s0, &p).max_abs() < 1e-12);
        let b7: Endo8 = pi7(&a.skew_part(), &p).into();
        let s7 = diamond(&b7, &p);
        assert!((lambda_op(&s7, &p) + 12.0 * s7).max_abs() < 1e-12);
    }

    #[test]
    fn spectrum_multiplicities() {
        let ev = lambda_spectrum(&cayley_form());
        let count = |x: f64| ev.iter().filter(|e| (*e - x).abs() < 1e-9).count();
        assert_eq!(
            (count(-24.0), count(-12.0), count(4.0), count(0.0)),
            (1, 7, 27, 35)
        );
    }

    #[test]
    fn parts_are_eigenvectors_and_orthogonal() {
        let p = cayley_form();
        let mut r = rng(2);
        let s = random_four_form(&mut r);
        let parts = decompose4(&s, &p);
        assert!((parts.sum() - s).max_abs() < 1e-13);
        let arr = parts.as_array();
        for (part, lam) in arr.iter().zip([-24.0, -12.0, 4.0, 0.0]) {
            assert!((lambda_op(part, &p) - lam * *part).max_abs() < 1e-11);
        }
        for a in 0..4 {
            for b in a + 1..4 {
                assert!(inner4(&arr[a], &arr[b]).abs() < 1e-12);
            }
        }
        let pp = decompose4(&p, &p);
        assert!((pp.one - p).max_abs() < 1e-15);
        assert!(pp.seven.max_abs() < 1e-13 && pp.twenty_seven.max_abs() < 1e-13);
        assert_eq!(pp.thirty_five.max_abs(), 0.0);
    }
}
