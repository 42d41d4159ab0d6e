//! Tensor types on R^8 and the index/sign tables shared by every contraction.
//!
//! Exterior forms of degree 3 and 4 are stored by their canonical components
//! (strictly increasing index tuples, lexicographic order).  Dense access with
//! the antisymmetry sign rules goes through lookup tables that are built once
//! per process.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

pub const DIM: usize = 8;
pub const N_PAIRS: usize = 28;
pub const N_TRIPLES: usize = 56;
pub const N_QUADS: usize = 70;

pub type Mat8 = [[f64; DIM]; DIM];

pub const ZERO_MAT: Mat8 = [[0.0; DIM]; DIM];

pub fn identity_mat() -> Mat8 {
    let mut m = ZERO_MAT;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn mat_mul(a: &Mat8, b: &Mat8) -> Mat8 {
    let mut c = ZERO_MAT;
    for i in 0..DIM {
        for k in 0..DIM {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..DIM {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn mat_transpose(a: &Mat8) -> Mat8 {
    let mut t = ZERO_MAT;
    for i in 0..DIM {
        for j in 0..DIM {
            t[j][i] = a[i][j];
        }
    }
    t
}

pub fn mat_trace(a: &Mat8) -> f64 {
    (0..DIM).map(|i| a[i][i]).sum()
}

/// Max-abs entry.
pub fn mat_max_abs(a: &Mat8) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Frobenius norm squared (full index contraction).
pub fn mat_norm2(a: &Mat8) -> f64 {
    a.iter().flatten().map(|x| x * x).sum()
}

pub fn mat_scale(a: &Mat8, s: f64) -> Mat8 {
    let mut out = *a;
    out.iter_mut().flatten().for_each(|x| *x *= s);
    out
}

pub fn mat_add(a: &Mat8, b: &Mat8) -> Mat8 {
    let mut out = *a;
    for i in 0..DIM {
        for j in 0..DIM {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn mat_sub(a: &Mat8, b: &Mat8) -> Mat8 {
    mat_add(a, &mat_scale(b, -1.0))
}

/// Determinant by partial-pivot LU.
pub fn mat_det(a: &Mat8) -> f64 {
    let mut m = *a;
    let mut det = 1.0;
    for col in 0..DIM {
        let piv = (col..DIM)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..DIM {
            let f = m[r][col] / m[col][col];
            for c in col..DIM {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

/// Sign of the permutation that sorts `idx` (0 when an index repeats).
pub fn sort_sign(idx: &mut [usize]) -> i8 {
    let mut sign = 1i8;
    for i in 0..idx.len() {
        for j in 0..idx.len() - 1 - i {
            if idx[j] == idx[j + 1] {
                return 0;
            }
            if idx[j] > idx[j + 1] {
                idx.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        0
    } else {
        sign
    }
}

/// Precomputed index/sign tables for forms on R^8.
pub struct IndexTables {
    pub pairs: [[usize; 2]; N_PAIRS],
    pub triples: [[usize; 3]; N_TRIPLES],
    pub quads: [[usize; 4]; N_QUADS],
    pair_lookup: [[(u8, i8); DIM]; DIM],
    triple_lookup: Vec<(u8, i8)>,
    quad_lookup: Vec<(u8, i8)>,
    /// `slice[a][t]` = (canonical quad index, sign) of `(a, triples[t])`, sign 0 if `a` repeats.
    slice: [[(u8, i8); N_TRIPLES]; DIM],
    /// Hodge dual of each canonical quad: complementary quad index and sign.
    star: [(u8, i8); N_QUADS],
}

impl IndexTables {
    fn build() -> Self {
        let mut pairs = [[0; 2]; N_PAIRS];
        let mut triples = [[0; 3]; N_TRIPLES];
        let mut quads = [[0; 4]; N_QUADS];
        let (mut np, mut nt, mut nq) = (0, 0, 0);
        for i in 0..DIM {
            for j in i + 1..DIM {
                pairs[np] = [i, j];
                np += 1;
                for k in j + 1..DIM {
                    triples[nt] = [i, j, k];
                    nt += 1;
                    for l in k + 1..DIM {
                        quads[nq] = [i, j, k, l];
                        nq += 1;
                    }
                }
            }
        }

        let mut pair_lookup = [[(0u8, 0i8); DIM]; DIM];
        for (n, p) in pairs.iter().enumerate() {
            pair_lookup[p[0]][p[1]] = (n as u8, 1);
            pair_lookup[p[1]][p[0]] = (n as u8, -1);
        }

        let mut triple_lookup = vec![(0u8, 0i8); DIM * DIM * DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut idx = [i, j, k];
                    let s = sort_sign(&mut idx);
                    if s != 0 {
                        let n = triples.iter().position(|t| *t == idx).unwrap();
                        triple_lookup[(i * DIM + j) * DIM + k] = (n as u8, s);
                    }
                }
            }
        }

        let mut quad_lookup = vec![(0u8, 0i8); DIM * DIM * DIM * DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        let mut idx = [i, j, k, l];
                        let s = sort_sign(&mut idx);
                        if s != 0 {
                            let n = quads.iter().position(|q| *q == idx).unwrap();
                            quad_lookup[((i * DIM + j) * DIM + k) * DIM + l] = (n as u8, s);
                        }
                    }
                }
            }
        }

        let mut slice = [[(0u8, 0i8); N_TRIPLES]; DIM];
        for (a, row) in slice.iter_mut().enumerate() {
            for (t, tr) in triples.iter().enumerate() {
                row[t] = quad_lookup[((a * DIM + tr[0]) * DIM + tr[1]) * DIM + tr[2]];
            }
        }

        let mut star = [(0u8, 0i8); N_QUADS];
        for (n, q) in quads.iter().enumerate() {
            let comp: Vec<usize> = (0..DIM).filter(|x| !q.contains(x)).collect();
            let mut all = [q[0], q[1], q[2], q[3], comp[0], comp[1], comp[2], comp[3]];
            let s = sort_sign(&mut all);
            let m = quads.iter().position(|c| c[..] == comp[..]).unwrap();
            star[n] = (m as u8, s);
        }

        IndexTables {
            pairs,
            triples,
            quads,
            pair_lookup,
            triple_lookup,
            quad_lookup,
            slice,
            star,
        }
    }

    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> (usize, f64) {
        let (n, s) = self.pair_lookup[i][j];
        (n as usize, s as f64)
    }

    #[inline]
    pub fn triple(&self, i: usize, j: usize, k: usize) -> (usize, f64) {
        let (n, s) = self.triple_lookup[(i * DIM + j) * DIM + k];
        (n as usize, s as f64)
    }

    #[inline]
    pub fn quad(&self, i: usize, j: usize, k: usize, l: usize) -> (usize, f64) {
        let (n, s) = self.quad_lookup[((i * DIM + j) * DIM + k) * DIM + l];
        (n as usize, s as f64)
    }

    #[inline]
    pub fn slice_entry(&self, a: usize, t: usize) -> (usize, f64) {
        let (n, s) = self.slice[a][t];
        (n as usize, s as f64)
    }

    #[inline]
    pub fn star_entry(&self, q: usize) -> (usize, f64) {
        let (n, s) = self.star[q];
        (n as usize, s as f64)
    }
}

pub fn tables() -> &'static IndexTables {
    static TABLES: OnceLock<IndexTables> = OnceLock::new();
    TABLES.get_or_init(IndexTables::build)
}

// ---------------------------------------------------------------------------
// Vectors and matrices
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec8(pub [f64; DIM]);

impl Vec8 {
    pub fn zero() -> Self {
        Vec8([0.0; DIM])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; DIM];
        v[i] = 1.0;
        Vec8(v)
    }

    pub fn dot(&self, other: &Vec8) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Vec8(self.0.map(|x| x * s))
    }
}

impl Index<usize> for Vec8 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec8 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Endomorphism `A_{ij}` of the tangent space.  Row index is the covariant
/// slot, column index the contraction slot of the diamond operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Endo8(pub Mat8);

impl Endo8 {
    pub fn zero() -> Self {
        Endo8(ZERO_MAT)
    }

    pub fn identity() -> Self {
        Endo8(identity_mat())
    }

    pub fn trace(&self) -> f64 {
        mat_trace(&self.0)
    }

    pub fn transpose(&self) -> Self {
        Endo8(mat_transpose(&self.0))
    }

    /// Skew part `(A - A^T)/2` as a 2-form.
    pub fn skew_part(&self) -> TwoForm {
        let mut s = ZERO_MAT;
        for i in 0..DIM {
            for j in 0..DIM {
                s[i][j] = 0.5 * (self.0[i][j] - self.0[j][i]);
            }
        }
        TwoForm(s)
    }

    pub fn symmetric_part(&self) -> Endo8 {
        let mut s = ZERO_MAT;
        for i in 0..DIM {
            for j in 0..DIM {
                s[i][j] = 0.5 * (self.0[i][j] + self.0[j][i]);
            }
        }
        Endo8(s)
    }

    pub fn max_abs(&self) -> f64 {
        mat_max_abs(&self.0)
    }
}

impl From<TwoForm> for Endo8 {
    fn from(b: TwoForm) -> Self {
        Endo8(b.0)
    }
}

/// Skew 8x8 matrix `beta_{ij}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoForm(pub Mat8);

impl TwoForm {
    pub fn zero() -> Self {
        TwoForm(ZERO_MAT)
    }

    /// `e^i ∧ e^j`.
    pub fn basis(i: usize, j: usize) -> Self {
        let mut m = ZERO_MAT;
        m[i][j] = 1.0;
        m[j][i] = -1.0;
        TwoForm(m)
    }

    pub fn from_canonical(c: &[f64; N_PAIRS]) -> Self {
        let t = tables();
        let mut m = ZERO_MAT;
        for (n, p) in t.pairs.iter().enumerate() {
            m[p[0]][p[1]] = c[n];
            m[p[1]][p[0]] = -c[n];
        }
        TwoForm(m)
    }

    pub fn canonical(&self) -> [f64; N_PAIRS] {
        let t = tables();
        let mut c = [0.0; N_PAIRS];
        for (n, p) in t.pairs.iter().enumerate() {
            c[n] = self.0[p[0]][p[1]];
        }
        c
    }

    /// Full contraction `beta_{ab} beta_{ab}`.
    pub fn norm2_full(&self) -> f64 {
        mat_norm2(&self.0)
    }

    pub fn max_abs(&self) -> f64 {
        mat_max_abs(&self.0)
    }

    pub fn skew_defect(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..DIM {
            for j in 0..DIM {
                d = d.max((self.0[i][j] + self.0[j][i]).abs());
            }
        }
        d
    }
}

/// Totally antisymmetric rank-3 tensor stored by its 56 canonical components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThreeForm(pub [f64; N_TRIPLES]);

impl ThreeForm {
    pub fn zero() -> Self {
        ThreeForm([0.0; N_TRIPLES])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        let (n, s) = tables().triple(i, j, k);
        s * self.0[n]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Totally antisymmetric rank-4 tensor stored by its 70 canonical components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourForm(pub [f64; N_QUADS]);

impl Default for FourForm {
    fn default() -> Self {
        FourForm::zero()
    }
}

impl FourForm {
    pub fn zero() -> Self {
        FourForm([0.0; N_QUADS])
    }

    /// `e^i ∧ e^j ∧ e^k ∧ e^l` for distinct indices (sign follows the order).
    pub fn basis(i: usize, j: usize, k: usize, l: usize) -> Self {
        let mut f = FourForm::zero();
        let (n, s) = tables().quad(i, j, k, l);
        f.0[n] = s;
        f
    }

    /// Dense accessor with antisymmetry signs (0 on repeated indices).
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let (n, s) = tables().quad(i, j, k, l);
        s * self.0[n]
    }

    /// Slice matrix `S[a][t] = sigma(a, triples[t])`.
    pub fn slices(&self) -> [[f64; N_TRIPLES]; DIM] {
        let t = tables();
        let mut s = [[0.0; N_TRIPLES]; DIM];
        for (a, row) in s.iter_mut().enumerate() {
            for (tt, v) in row.iter_mut().enumerate() {
                let (n, sg) = t.slice_entry(a, tt);
                *v = sg * self.0[n];
            }
        }
        s
    }

    /// Pair matrix `P[(ij)][(kl)] = sigma_{ijkl}` over canonical pairs.
    pub fn pair_matrix(&self) -> [[f64; N_PAIRS]; N_PAIRS] {
        let t = tables();
        let mut m = [[0.0; N_PAIRS]; N_PAIRS];
        for (p, pij) in t.pairs.iter().enumerate() {
            for (q, pkl) in t.pairs.iter().enumerate() {
                m[p][q] = self.get(pij[0], pij[1], pkl[0], pkl[1]);
            }
        }
        m
    }

    /// Full index contraction `sigma_{ijkl} tau_{ijkl}` (= 24 x canonical dot).
    pub fn full_contraction(&self, other: &FourForm) -> f64 {
        24.0 * self.canonical_dot(other)
    }

    pub fn canonical_dot(&self, other: &FourForm) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        FourForm(self.0.map(|x| x * s))
    }

    pub fn axpy(&mut self, a: f64, x: &FourForm) {
        for (y, xi) in self.0.iter_mut().zip(x.0.iter()) {
            *y += a * xi;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Add for FourForm {
    type Output = FourForm;
    fn add(mut self, rhs: FourForm) -> FourForm {
        self += rhs;
        self
    }
}

impl AddAssign for FourForm {
    fn add_assign(&mut self, rhs: FourForm) {
        self.axpy(1.0, &rhs);
    }
}

impl Sub for FourForm {
    type Output = FourForm;
    fn sub(mut self, rhs: FourForm) -> FourForm {
        self -= rhs;
        self
    }
}

impl SubAssign for FourForm {
    fn sub_assign(&mut self, rhs: FourForm) {
        self.axpy(-1.0, &rhs);
    }
}

impl Neg for FourForm {
    type Output = FourForm;
    fn neg(self) -> FourForm {
        self.scale(-1.0)
    }
}

impl Mul<FourForm> for f64 {
    type Output = FourForm;
    fn mul(self, rhs: FourForm) -> FourForm {
        rhs.scale(self)
    }
}

impl Add for TwoForm {
    type Output = TwoForm;
    fn add(self, rhs: TwoForm) -> TwoForm {
        TwoForm(mat_add(&self.0, &rhs.0))
    }
}

impl Sub for TwoForm {
    type Output = TwoForm;
    fn sub(self, rhs: TwoForm) -> TwoForm {
        TwoForm(mat_sub(&self.0, &rhs.0))
    }
}

impl Mul<TwoForm> for f64 {
    type Output = TwoForm;
    fn mul(self, rhs: TwoForm) -> TwoForm {
        TwoForm(mat_scale(&rhs.0, self))
    }
}

impl Add for Endo8 {
    type Output = Endo8;
    fn add(self, rhs: Endo8) -> Endo8 {
        Endo8(mat_add(&self.0, &rhs.0))
    }
}

impl Sub for Endo8 {
    type Output = Endo8;
    fn sub(self, rhs: Endo8) -> Endo8 {
        Endo8(mat_sub(&self.0, &rhs.0))
    }
}

impl Mul<Endo8> for f64 {
    type Output = Endo8;
    fn mul(self, rhs: Endo8) -> Endo8 {
        Endo8(mat_scale(&rhs.0, self))
    }
}

/// Symmetric 8x8 matrix `g_{ij}` induced by an admissible 4-form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric8(pub Mat8);

impl Metric8 {
    pub fn identity() -> Self {
        Metric8(identity_mat())
    }

    /// Max-abs deviation from the identity matrix.
    pub fn deviation_from_identity(&self) -> f64 {
        mat_max_abs(&mat_sub(&self.0, &identity_mat()))
    }
}

/// A form of degree 2, 3 or 4, for degree-checked inner products.
#[derive(Clone, Copy, Debug)]
pub enum AnyForm {
    Two(TwoForm),
    Three(ThreeForm),
    Four(FourForm),
}

impl AnyForm {
    pub fn degree(&self) -> usize {
        match self {
            AnyForm::Two(_) => 2,
            AnyForm::Three(_) => 3,
            AnyForm::Four(_) => 4,
        }
    }
}
