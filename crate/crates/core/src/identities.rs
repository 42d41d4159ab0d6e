//! Pointwise identity checks: the contraction identities of an admissible
//! 4-form, the admissibility validator, and the full self-test suite.

use serde::Serialize;

use crate::algebra::{
    cayley_form_from, contract_three, contract_two_four, diamond, diamond_bar, diamond_image_ranks,
    endo_split, hodge_star4, inner4, isotypic_ranks, lambda_multiplicities, lambda_spectrum,
    metric_from_form, pi21, pi7, triple_contract,
};
use crate::error::{Result, Spin7Error};
use crate::forms::{mat_mul, mat_trace, tables, Endo8, FourForm, DIM, N_PAIRS};
use crate::octonion::{Octonion, OctonionTable};
use crate::sampling::{random_endo, random_rotation, random_skew, random_vec, rng};
use crate::spinor::{exp_rotate, rotate_form, so8_exp, spinor_form, BryantPoint};

/// `Φ_{ijkl}Φ_{abcl}` against its expansion in `g` and `Φ`, over all
/// canonical triples `(ijk)`, `(abc)`.
pub fn impiden1_residual(phi: &FourForm) -> f64 {
    let t = tables();
    let s = phi.slices();
    let d = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
    let mut worst = 0.0_f64;
    for (n1, &[i, j, k]) in t.triples.iter().enumerate() {
        for (n2, &[a, b, c]) in t.triples.iter().enumerate() {
            let lhs: f64 = (0..DIM).map(|l| s[l][n1] * s[l][n2]).sum();
            let g3 = d(i, a) * d(j, b) * d(k, c) + d(i, b) * d(j, c) * d(k, a) + d(i, c) * d(j, a) * d(k, b)
                - d(i, a) * d(j, c) * d(k, b)
                - d(i, b) * d(j, a) * d(k, c)
                - d(i, c) * d(j, b) * d(k, a);
            let p = |w: usize, x: usize, y: usize, z: usize| phi.get(w, x, y, z);
            let gp = d(i, a) * p(j, k, b, c)
                + d(i, b) * p(j, k, c, a)
                + d(i, c) * p(j, k, a, b)
                + d(j, a) * p(k, i, b, c)
                + d(j, b) * p(k, i, c, a)
                + d(j, c) * p(k, i, a, b)
                + d(k, a) * p(i, j, b, c)
                + d(k, b) * p(i, j, c, a)
                + d(k, c) * p(i, j, a, b);
            worst = worst.max((lhs - (g3 - gp)).abs());
        }
    }
    worst
}

/// `Φ_{ijkl}Φ_{abkl} − (6g_{ia}g_{jb} − 6g_{ib}g_{ja} − 4Φ_{ijab})`.
pub fn impiden2_residual(phi: &FourForm) -> f64 {
    let pm = phi.pair_matrix();
    let mut worst = 0.0_f64;
    for p in 0..N_PAIRS {
        for q in 0..N_PAIRS {
            let lhs: f64 = 2.0 * (0..N_PAIRS).map(|r| pm[p][r] * pm[q][r]).sum::<f64>();
            let rhs = if p == q { 6.0 } else { 0.0 } - 4.0 * pm[p][q];
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// `Φ_{ijkl}Φ_{ajkl} − 42 g_{ia}`.
pub fn impiden3_residual(phi: &FourForm) -> f64 {
    let c = contract_three(phi, phi);
    let mut worst = 0.0_f64;
    for (i, row) in c.iter().enumerate() {
        for (a, v) in row.iter().enumerate() {
            let want = if i == a { 42.0 } else { 0.0 };
            worst = worst.max((v - want).abs());
        }
    }
    worst
}

/// `Φ_{ijkl}Φ_{ijkl} − 336`.
pub fn impiden4_residual(phi: &FourForm) -> f64 {
    (phi.full_contraction(phi) - 336.0).abs()
}

/// `β_{ab}Φ_{bpqr} − (β_{pi}Φ_{iqra} + β_{qi}Φ_{irpa} + β_{ri}Φ_{ipqa})`
/// for `β ∈ Ω²₂₁`, over all index choices.
pub fn omega21_identity_residual(beta: &crate::forms::TwoForm, phi: &FourForm) -> f64 {
    let b = &beta.0;
    let mut worst = 0.0_f64;
    for a in 0..DIM {
        for p in 0..DIM {
            for q in 0..DIM {
                for r in 0..DIM {
                    let mut lhs = 0.0;
                    let mut rhs = 0.0;
                    for x in 0..DIM {
                        lhs += b[a][x] * phi.get(x, p, q, r);
                        rhs += b[p][x] * phi.get(x, q, r, a)
                            + b[q][x] * phi.get(x, r, p, a)
                            + b[r][x] * phi.get(x, p, q, a);
                    }
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    worst
}

/// Outcome of the admissibility validator for one 4-form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `max |g_Φ − I|`, or `+∞` when the metric formula degenerates.
    pub metric_deviation: f64,
    /// Residual of the quadratic identity `Φ·Φ = 6g∧g − 4Φ` (orthonormal frame).
    pub quadratic_residual: f64,
    /// Largest distance of the sorted `Λ_Φ` spectrum from `(−24, −12⁷, 0³⁵, 4²⁷)`.
    pub spectrum_error: f64,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self, tol: f64) -> bool {
        self.metric_deviation < tol && self.quadratic_residual < tol && self.spectrum_error < tol
    }
}

fn expected_spectrum() -> Vec<f64> {
    let mut v = vec![-24.0];
    v.extend(std::iter::repeat(-12.0).take(7));
    v.extend(std::iter::repeat(0.0).take(35));
    v.extend(std::iter::repeat(4.0).take(27));
    v
}

/// Check that `σ` lies in the SO(8)-orbit of the Cayley form (i.e. is an
/// admissible form inducing the Euclidean metric).
pub fn admissibility(sigma: &FourForm) -> AdmissibilityReport {
    let metric_deviation = match metric_from_form(sigma) {
        Ok(g) => g.deviation_from_identity(),
        Err(_) => f64::INFINITY,
    };
    let spectrum_error = lambda_spectrum(sigma)
        .iter()
        .zip(expected_spectrum())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    AdmissibilityReport {
        metric_deviation,
        quadratic_residual: impiden2_residual(sigma),
        spectrum_error,
    }
}

/// `Ok(())` when `σ` passes [`admissibility`] at tolerance `tol`.
pub fn validate_admissible(sigma: &FourForm, tol: f64) -> Result<()> {
    let r = admissibility(sigma);
    if r.is_admissible(tol) {
        Ok(())
    } else {
        Err(Spin7Error::Inadmissible(format!(
            "metric deviation {:e}, quadratic residual {:e}, spectrum error {:e}",
            r.metric_deviation, r.quadratic_residual, r.spectrum_error
        )))
    }
}

/// One line of the self-test report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, max_error: f64, tolerance: f64) -> Self {
        IdentityCheck {
            name: name.to_string(),
            max_error,
            tolerance,
            passed: max_error.is_finite() && max_error < tolerance,
        }
    }

    fn exact(name: &str, got: &[usize], want: &[usize]) -> Self {
        let miss = got.iter().zip(want).filter(|(a, b)| a != b).count();
        IdentityCheck {
            name: format!("{name} {got:?} (want {want:?})"),
            max_error: miss as f64,
            tolerance: 0.5,
            passed: miss == 0,
        }
    }
}

/// Number of random rotations of the structure form swept by the suite.
pub const SUITE_ROTATIONS: usize = 100;

/// Run every pointwise identity on the Cayley form built from `table`.
pub fn run_identity_suite(table: &OctonionTable) -> Vec<IdentityCheck> {
    const EXACT: f64 = 1e-12;
    const LOOSE: f64 = 1e-10;
    let phi = cayley_form_from(table);
    let mut out = Vec::new();
    let mut r = rng(0x5eed);

    let mut comp = 0.0_f64;
    for _ in 0..50 {
        let a = Octonion(random_vec(&mut r).0);
        let b = Octonion(random_vec(&mut r).0);
        comp = comp.max((table.mul(&a, &b).norm() - a.norm() * b.norm()).abs());
    }
    out.push(IdentityCheck::new("octonion |ab| = |a||b|", comp, EXACT));

    let rotated: Vec<FourForm> = (0..SUITE_ROTATIONS)
        .map(|_| rotate_form(&random_rotation(&mut r), &phi).expect("rotation is invertible"))
        .collect();
    let sweep = |f: &dyn Fn(&FourForm) -> f64| -> (f64, f64) {
        let base = f(&phi);
        let rot = rotated.iter().map(f).fold(0.0_f64, f64::max);
        (base, rot)
    };
    for (name, f) in [
        (
            "impiden1 triple contraction",
            impiden1_residual as fn(&FourForm) -> f64,
        ),
        ("impiden2 double contraction (-4 Phi term)", impiden2_residual),
        ("impiden3 contraction = 42 g", impiden3_residual),
        ("impiden4 full contraction = 336", impiden4_residual),
    ] {
        let (b, rr) = sweep(&f);
        out.push(IdentityCheck::new(name, b, EXACT));
        out.push(IdentityCheck::new(
            &format!("{name}, {SUITE_ROTATIONS} rotations"),
            rr,
            EXACT,
        ));
    }
    out.push(IdentityCheck::new(
        "self-duality *Phi = Phi",
        (hodge_star4(&phi) - phi).max_abs(),
        EXACT,
    ));

    let (mult, other) = lambda_multiplicities(&phi);
    out.push(IdentityCheck::exact(
        "Lambda eigenvalue multiplicities (-24,-12,4,0)",
        &[mult[0], mult[1], mult[2], mult[3], other],
        &[1, 7, 27, 35, 0],
    ));
    out.push(IdentityCheck::exact(
        "decompose4 projector ranks",
        &isotypic_ranks(&phi),
        &[1, 7, 27, 35],
    ));
    out.push(IdentityCheck::exact(
        "diamond image ranks (Omega0, S0, Omega2_7, Omega2_21)",
        &diamond_image_ranks(&phi),
        &[1, 35, 7, 0],
    ));

    let mut eig7 = 0.0_f64;
    let mut eig21 = 0.0_f64;
    let mut four_term = 0.0_f64;
    let mut inv96 = 0.0_f64;
    let mut star = 0.0_f64;
    let mut inner = 0.0_f64;
    for n in 0..10 {
        let beta = random_skew(&mut r);
        let b7 = pi7(&beta, &phi);
        let b21 = pi21(&beta, &phi);
        eig7 = eig7.max((contract_two_four(&b7, &phi) + 6.0 * b7).max_abs());
        eig21 = eig21.max((contract_two_four(&b21, &phi) - 2.0 * b21).max_abs());
        if n < 3 {
            four_term = four_term.max(omega21_identity_residual(&b21, &phi));
        }
        inv96 = inv96.max((triple_contract(&diamond(&b7.into(), &phi), &phi) - 96.0 * b7).max_abs());
        let a = random_endo(&mut r);
        let b = random_endo(&mut r);
        star = star.max((hodge_star4(&diamond(&a, &phi)) - diamond(&diamond_bar(&a), &phi)).max_abs());
        let pa = endo_split(&a, &phi);
        let pb = endo_split(&b, &phi);
        let lhs = inner4(&diamond(&a, &phi), &diamond(&b, &phi));
        let rhs = 3.5 * pa.trace * pb.trace
            + 4.0 * mat_trace(&mat_mul(&pa.traceless_symmetric.0, &pb.traceless_symmetric.0))
            - 16.0 * mat_trace(&mat_mul(&pa.omega7.0, &pb.omega7.0));
        inner = inner.max((lhs - rhs).abs());
    }
    out.push(IdentityCheck::new(
        "pi7 eigenrelation beta.Phi = -6 beta",
        eig7,
        EXACT,
    ));
    out.push(IdentityCheck::new(
        "pi21 eigenrelation beta.Phi = 2 beta",
        eig21,
        EXACT,
    ));
    out.push(IdentityCheck::new(
        "Omega2_21 four-term identity",
        four_term,
        EXACT,
    ));
    out.push(IdentityCheck::new(
        "diamond g = 4 Phi",
        (diamond(&Endo8::identity(), &phi) - 4.0 * phi).max_abs(),
        LOOSE,
    ));
    out.push(IdentityCheck::new("Hodge star of A diamond Phi", star, LOOSE));
    out.push(IdentityCheck::new("<A.Phi, B.Phi> formula", inner, LOOSE));
    out.push(IdentityCheck::new(
        "triple contraction inverse = 96 beta",
        inv96,
        LOOSE,
    ));

    let metric_dev = metric_from_form(&phi)
        .map(|g| g.deviation_from_identity())
        .unwrap_or(f64::INFINITY);
    out.push(IdentityCheck::new("metric of Phi = identity", metric_dev, LOOSE));
    let rot_metric = rotated
        .iter()
        .take(10)
        .map(|s| {
            metric_from_form(s)
                .map(|g| g.deviation_from_identity())
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0_f64, f64::max);
    out.push(IdentityCheck::new(
        "metric of rotated Phi = identity",
        rot_metric,
        LOOSE,
    ));

    let mut isotropy = 0.0_f64;
    let mut orth = 0.0_f64;
    for _ in 0..5 {
        let b = random_skew(&mut r);
        let b21: Endo8 = pi21(&b, &phi).into();
        let moved = exp_rotate(&b21, &phi).unwrap_or(FourForm::zero());
        isotropy = isotropy.max((moved - phi).max_abs());
        let q = so8_exp(&b.into()).expect("skew input");
        let qtq = mat_mul(&q.transpose().0, &q.0);
        for (i, row) in qtq.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                orth = orth.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    out.push(IdentityCheck::new(
        "isotropy exp(Omega2_21) fixes Phi",
        isotropy,
        LOOSE,
    ));
    out.push(IdentityCheck::new("so8_exp orthogonality", orth, 1e-13));

    // the spinor family is built from the reference table, so this checks
    // the supplied table against it
    let mut spin = 0.0_f64;
    for _ in 0..3 {
        let mut y = random_vec(&mut r);
        y.0[0] = 0.0;
        let y = y.scale(1.0 / y.norm());
        let th: f64 = r_unit(&mut r) * std::f64::consts::PI;
        let p = BryantPoint::new(th.cos(), y.scale(th.sin())).expect("unit sphere");
        let s = spinor_form(&p).expect("imaginary spinor");
        let g = metric_from_form(&s)
            .map(|g| g.deviation_from_identity())
            .unwrap_or(f64::INFINITY);
        spin = spin.max(impiden2_residual(&s)).max(g);
    }
    out.push(IdentityCheck::new(
        "spinor family stays in the orbit",
        spin,
        LOOSE,
    ));
    out
}

fn r_unit(r: &mut crate::sampling::SeededRng) -> f64 {
    use rand::Rng;
    r.gen_range(0.0..1.0)
}
