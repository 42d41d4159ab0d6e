//! Octonions over the basis (1, e1, ..., e7).
//!
//! Multiplication table: `e_i e_{i+1} = e_{i+3}` (indices mod 7 in 1..=7),
//! i.e. the quaternionic triples
//!
//! ```text
//! (1,2,4) (2,3,5) (3,4,6) (4,5,7) (5,6,1) (6,7,2) (7,1,3)
//! ```
//!
//! closed under cyclic permutation, `e_i^2 = -1`, and `e_j e_i = -e_i e_j`
//! for `i != j`.

use std::ops::{Add, Mul, Neg, Sub};

use crate::forms::{Mat8, Vec8, DIM, ZERO_MAT};

/// The seven oriented quaternionic triples of the standard table.
pub const FANO_TRIPLES: [[usize; 3]; 7] = [
    [1, 2, 4],
    [2, 3, 5],
    [3, 4, 6],
    [4, 5, 7],
    [5, 6, 1],
    [6, 7, 2],
    [7, 1, 3],
];

/// Structure constants `e_a e_b = sum_c table[a][b][c] e_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct OctonionTable {
    coeff: [[[f64; DIM]; DIM]; DIM],
}

impl OctonionTable {
    pub fn from_triples(triples: &[[usize; 3]; 7]) -> Self {
        let mut coeff = [[[0.0; DIM]; DIM]; DIM];
        for a in 0..DIM {
            coeff[0][a][a] = 1.0;
            coeff[a][0][a] = 1.0;
        }
        for a in 1..DIM {
            coeff[a][a][0] = -1.0;
        }
        for &[i, j, k] in triples {
            for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                coeff[a][b][c] = 1.0;
                coeff[b][a][c] = -1.0;
            }
        }
        OctonionTable { coeff }
    }

    pub fn standard() -> Self {
        Self::from_triples(&FANO_TRIPLES)
    }

    /// Overwrite a single structure constant (used to build broken tables
    /// for negative-control tests).
    pub fn with_entry(mut self, a: usize, b: usize, c: usize, value: f64) -> Self {
        self.coeff[a][b][c] = value;
        self
    }

    #[inline]
    pub fn coeff(&self, a: usize, b: usize, c: usize) -> f64 {
        self.coeff[a][b][c]
    }

    pub fn mul(&self, x: &Octonion, y: &Octonion) -> Octonion {
        let mut out = [0.0; DIM];
        for a in 0..DIM {
            if x.0[a] == 0.0 {
                continue;
            }
            for b in 0..DIM {
                let xy = x.0[a] * y.0[b];
                if xy == 0.0 {
                    continue;
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o += self.coeff[a][b][c] * xy;
                }
            }
        }
        Octonion(out)
    }

    /// Matrix of `x -> x * y` (column `a` holds `e_a * y`).
    pub fn right_mul_matrix(&self, y: &Octonion) -> Mat8 {
        let mut m = ZERO_MAT;
        for a in 0..DIM {
            let col = self.mul(&Octonion::basis(a), y);
            for c in 0..DIM {
                m[c][a] = col.0[c];
            }
        }
        m
    }

    /// Matrix of `x -> y * x`.
    pub fn left_mul_matrix(&self, y: &Octonion) -> Mat8 {
        let mut m = ZERO_MAT;
        for a in 0..DIM {
            let col = self.mul(y, &Octonion::basis(a));
            for c in 0..DIM {
                m[c][a] = col.0[c];
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Octonion(pub [f64; DIM]);

impl Octonion {
    pub fn one() -> Self {
        Self::basis(0)
    }

    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; DIM];
        v[i] = 1.0;
        Octonion(v)
    }

    pub fn real(&self) -> f64 {
        self.0[0]
    }

    pub fn conj(&self) -> Self {
        let mut c = self.0.map(|x| -x);
        c[0] = self.0[0];
        Octonion(c)
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dot(&self, other: &Octonion) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }
}

impl From<Vec8> for Octonion {
    fn from(v: Vec8) -> Self {
        Octonion(v.0)
    }
}

impl From<Octonion> for Vec8 {
    fn from(o: Octonion) -> Self {
        Vec8(o.0)
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(self, rhs: Octonion) -> Octonion {
        let mut o = self.0;
        o.iter_mut().zip(rhs.0.iter()).for_each(|(a, b)| *a += b);
        Octonion(o)
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, rhs: Octonion) -> Octonion {
        self + (-rhs)
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Octonion {
        Octonion(self.0.map(|x| -x))
    }
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, rhs: Octonion) -> Octonion {
        oct_mul(&self, &rhs)
    }
}

pub fn standard_table() -> &'static OctonionTable {
    static TABLE: std::sync::OnceLock<OctonionTable> = std::sync::OnceLock::new();
    TABLE.get_or_init(OctonionTable::standard)
}

/// Product in the standard table.
pub fn oct_mul(a: &Octonion, b: &Octonion) -> Octonion {
    standard_table().mul(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oct() -> impl Strategy<Value = Octonion> {
        prop::array::uniform8(-2.0..2.0f64).prop_map(Octonion)
    }

    #[test]
    fn unit_and_imaginary_squares() {
        let b = Octonion([0.3, -1.0, 2.0, 0.0, 0.5, 0.25, -0.75, 1.5]);
        assert_eq!(oct_mul(&Octonion::one(), &b), b);
        assert_eq!(oct_mul(&b, &Octonion::one()), b);
        for i in 1..8 {
            let e = Octonion::basis(i);
            assert_eq!(oct_mul(&e, &e), -Octonion::one());
        }
        assert_eq!(
            oct_mul(&Octonion::basis(1), &Octonion::basis(2)),
            Octonion::basis(4)
        );
        assert_eq!(
            oct_mul(&Octonion::basis(2), &Octonion::basis(1)),
            -Octonion::basis(4)
        );
    }

    #[test]
    fn right_multiplication_by_unit_imaginary_squares_to_minus_one() {
        let t = standard_table();
        let y = Octonion([0.0, 0.6, 0.0, 0.0, 0.8, 0.0, 0.0, 0.0]);
        let r = t.right_mul_matrix(&y);
        let r2 = crate::forms::mat_mul(&r, &r);
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { -1.0 } else { 0.0 };
                assert!((r2[i][j] - want).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(a in oct(), b in oct()) {
            let ab = oct_mul(&a, &b);
            prop_assert!((ab.norm() - a.norm() * b.norm()).abs() < 1e-12);
        }

        #[test]
        fn conjugation_reverses_products(a in oct(), b in oct()) {
            let lhs = oct_mul(&a, &b).conj();
            let rhs = oct_mul(&b.conj(), &a.conj());
            for i in 0..8 {
                prop_assert!((lhs.0[i] - rhs.0[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn alternative_law(a in oct(), b in oct()) {
            // (a a) b = a (a b)
            let lhs = oct_mul(&oct_mul(&a, &a), &b);
            let rhs = oct_mul(&a, &oct_mul(&a, &b));
            for i in 0..8 {
                prop_assert!((lhs.0[i] - rhs.0[i]).abs() < 1e-11);
            }
        }
    }
}
