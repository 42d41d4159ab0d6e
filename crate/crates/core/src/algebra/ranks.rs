//! Numerical ranks of the representation-theoretic maps.

use nalgebra::DMatrix;

use super::{decompose4, diamond, lambda_spectrum, pi21, pi7};
use crate::forms::{tables, Endo8, FourForm, TwoForm, DIM, N_QUADS};

/// Rank of the matrix whose columns are `cols`.  Singular values count when
/// they exceed `rel_tol · max(σ_max, 1)`, so a block of round-off-sized
/// columns has rank 0.
pub fn numerical_rank(cols: &[Vec<f64>], rel_tol: f64) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let rows = cols[0].len();
    let m = DMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r]);
    let sv = m.singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, b| a.max(*b));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax.max(1.0)).count()
}

fn basis_two_forms() -> Vec<TwoForm> {
    tables()
        .pairs
        .iter()
        .map(|p| TwoForm::basis(p[0], p[1]))
        .collect()
}

fn traceless_symmetric_basis() -> Vec<Endo8> {
    let mut out = Vec::with_capacity(35);
    for p in tables().pairs.iter() {
        let mut m = Endo8::zero();
        m.0[p[0]][p[1]] = 1.0;
        m.0[p[1]][p[0]] = 1.0;
        out.push(m);
    }
    for i in 0..DIM - 1 {
        let mut m = Endo8::zero();
        m.0[i][i] = 1.0;
        m.0[DIM - 1][DIM - 1] = -1.0;
        out.push(m);
    }
    out
}

/// Ranks of `A ↦ A⋄Φ` restricted to `Ω⁰, S₀, Ω²₇, Ω²₂₁`.
pub fn diamond_image_ranks(phi: &FourForm) -> [usize; 4] {
    let img = |a: &Endo8| diamond(a, phi).0.to_vec();
    let r0 = numerical_rank(&[img(&Endo8::identity())], 1e-9);
    let s0: Vec<Vec<f64>> = traceless_symmetric_basis().iter().map(img).collect();
    let b7: Vec<Vec<f64>> = basis_two_forms()
        .iter()
        .map(|b| img(&pi7(b, phi).into()))
        .collect();
    let b21: Vec<Vec<f64>> = basis_two_forms()
        .iter()
        .map(|b| img(&pi21(b, phi).into()))
        .collect();
    [
        r0,
        numerical_rank(&s0, 1e-9),
        numerical_rank(&b7, 1e-9),
        numerical_rank(&b21, 1e-9),
    ]
}

/// Ranks of the four projectors of [`decompose4`] on the 70-dimensional space.
pub fn isotypic_ranks(phi: &FourForm) -> [usize; 4] {
    let mut cols: [Vec<Vec<f64>>; 4] = Default::default();
    for n in 0..N_QUADS {
        let mut e = FourForm::zero();
        e.0[n] = 1.0;
        let parts = decompose4(&e, phi).as_array();
        for (c, p) in cols.iter_mut().zip(parts.iter()) {
            c.push(p.0.to_vec());
        }
    }
    [
        numerical_rank(&cols[0], 1e-9),
        numerical_rank(&cols[1], 1e-9),
        numerical_rank(&cols[2], 1e-9),
        numerical_rank(&cols[3], 1e-9),
    ]
}

/// Multiplicities of the eigenvalues `−24, −12, 4, 0` of `Λ_Φ`, and the
/// number of eigenvalues matching none of them.
pub fn lambda_multiplicities(phi: &FourForm) -> ([usize; 4], usize) {
    let ev = lambda_spectrum(phi);
    let targets = [-24.0, -12.0, 4.0, 0.0];
    let mut counts = [0; 4];
    let mut other = 0;
    for e in ev {
        match targets.iter().position(|t| (e - t).abs() < 1e-8) {
            Some(k) => counts[k] += 1,
            None => other += 1,
        }
    }
    (counts, other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::cayley_form;

    #[test]
    fn representation_dimensions() {
        let p = cayley_form();
        assert_eq!(diamond_image_ranks(&p), [1, 35, 7, 0]);
        assert_eq!(isotypic_ranks(&p), [1, 7, 27, 35]);
        assert_eq!(lambda_multiplicities(&p), ([1, 7, 27, 35], 0));
    }
}
