//! Seeded random inputs for property checks and initial data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::{
    mat_mul, mat_scale, mat_transpose, Endo8, FourForm, TwoForm, Vec8, DIM, N_QUADS, ZERO_MAT,
};
use crate::spinor::so8_exp;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries uniform in `[-1, 1)`.
pub fn random_endo<R: Rng>(r: &mut R) -> Endo8 {
    let mut m = ZERO_MAT;
    for row in m.iter_mut() {
        for x in row.iter_mut() {
            *x = r.gen_range(-1.0..1.0);
        }
    }
    Endo8(m)
}

pub fn random_skew<R: Rng>(r: &mut R) -> TwoForm {
    random_endo(r).skew_part()
}

pub fn random_vec<R: Rng>(r: &mut R) -> Vec8 {
    let mut v = Vec8::zero();
    for x in v.0.iter_mut() {
        *x = r.gen_range(-1.0..1.0);
    }
    v
}

pub fn random_four_form<R: Rng>(r: &mut R) -> FourForm {
    let mut f = FourForm::zero();
    for x in f.0.iter_mut().take(N_QUADS) {
        *x = r.gen_range(-1.0..1.0);
    }
    f
}

/// A rotation `exp(A)` with `A` a random skew matrix of entries up to
/// `π/2` in size; covers SO(8) well enough for identity sweeps.
pub fn random_rotation<R: Rng>(r: &mut R) -> Endo8 {
    let mut a = random_skew(r);
    for i in 0..DIM {
        for j in 0..DIM {
            a.0[i][j] *= std::f64::consts::FRAC_PI_2;
        }
    }
    let q = so8_exp(&a.into()).expect("skew by construction");
    // one Newton step towards the polar factor removes the O(1e-15)
    // orthogonality drift accumulated by repeated squaring
    let qtq = mat_mul(&mat_transpose(&q.0), &q.0);
    let mut corr = mat_scale(&qtq, -0.5);
    for (i, row) in corr.iter_mut().enumerate() {
        row[i] += 1.5;
    }
    Endo8(mat_mul(&q.0, &corr))
}
