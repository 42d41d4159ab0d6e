//! Flow-level checks: the gradient structure of the energy, the evolution
//! of `|T|²`, soliton residuals and schedules, and parabolic rescaling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, FlowState};
use crate::algebra::pi7;
use crate::error::{Result, Spin7Error};
use crate::forms::{mat_mul, mat_transpose, Endo8, FourForm, Mat8, TwoForm, Vec8, DIM};
use crate::lattice::{
    div_torsion, div_torsion_raw, energy, integrate_pairing, max_abs, torsion, FieldValue, LatticeField,
    Torsion,
};
use crate::spinor::exp_rotate;

/// Outcome of [`energy_gradient_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientCheck {
    /// `(E(Φ_{+ε}) − E(Φ_{−ε}))/(2ε)`.
    pub finite_difference: f64,
    /// `−∫⟨Div T, X⟩` (full contraction).
    pub predicted: f64,
    pub relative_error: f64,
}

fn rotate_field(
    f: &LatticeField<FourForm>,
    x: &LatticeField<TwoForm>,
    s: f64,
) -> Result<LatticeField<FourForm>> {
    let values: Result<Vec<FourForm>> = f
        .values
        .par_iter()
        .zip(x.values.par_iter())
        .map(|(phi, xv)| exp_rotate(&(s * Endo8::from(*xv)), phi))
        .collect();
    Ok(LatticeField {
        spec: f.spec.clone(),
        values: values?,
    })
}

/// Compare the central difference of `E` along `Φ_s = exp(sX)·Φ` with
/// `−∫⟨Div T, X⟩`.
pub fn energy_gradient_check(
    field: &LatticeField<FourForm>,
    direction: &LatticeField<TwoForm>,
    eps: f64,
) -> Result<GradientCheck> {
    if !field.spec.same_grid(&direction.spec) {
        return Err(Spin7Error::IncompatibleLattice("direction field".into()));
    }
    let ep = energy(&torsion(&rotate_field(field, direction, eps)?));
    let em = energy(&torsion(&rotate_field(field, direction, -eps)?));
    let fd = (ep - em) / (2.0 * eps);
    let ev = evaluate(field);
    let predicted = -integrate_pairing(&ev.generator, direction);
    let denom = fd.abs().max(predicted.abs());
    let relative_error = if denom == 0.0 {
        0.0
    } else {
        (fd - predicted).abs() / denom
    };
    Ok(GradientCheck {
        finite_difference: fd,
        predicted,
        relative_error,
    })
}

/// The two quartic contractions
/// `Q₁ = T_{a;bp}T_{m;bc}T_{a;pq}T_{m;qc}` and
/// `Q₂ = T_{a;bp}T_{m;bc}T_{a;cq}T_{m;pq}`,
/// evaluated as `Σ_{a,m}⟨T_a², T_mT_mᵀ⟩` and `Σ_{a,m}⟨T_aT_m, T_mT_a⟩`.
pub fn quartic_terms(t: &Torsion) -> (f64, f64) {
    let sq: Vec<Mat8> = t.0.iter().map(|x| mat_mul(&x.0, &x.0)).collect();
    let gram: Vec<Mat8> = t.0.iter().map(|x| mat_mul(&x.0, &mat_transpose(&x.0))).collect();
    let frob = |a: &Mat8, b: &Mat8| -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .map(|(x, y)| x * y)
            .sum()
    };
    let (mut q1, mut q2) = (0.0, 0.0);
    for a in 0..DIM {
        for m in 0..DIM {
            q1 += frob(&sq[a], &gram[m]);
            let am = mat_mul(&t.0[a].0, &t.0[m].0);
            let ma = mat_mul(&t.0[m].0, &t.0[a].0);
            q2 += frob(&am, &ma);
        }
    }
    (q1, q2)
}

/// Max-norm residual of the flat-space evolution equation with the commonly quoted sign,
/// `2∂_t|T|² = 2Δ|T|² − 4|∇T|² + 16Q₁ + 16Q₂`, at the middle of three
/// consecutive states with a central difference in time.
///
/// Along the flow `∂_tT_m = [Div T, T_m] + π₇(∇_m Div T)`; two uses of the
/// Bianchi identity then give the quartic part as `−16(Q₁ + Q₂)`, and the
/// `+16` sign leaves an `O(1)` residual whenever the `T_m` do not commute.
/// [`torsion_evolution_residual_with`] takes the coefficient explicitly.
pub fn torsion_evolution_residual(prev: &FlowState, cur: &FlowState, next: &FlowState) -> Result<f64> {
    torsion_evolution_residual_with(prev, cur, next, 16.0)
}

/// [`torsion_evolution_residual`] with quartic coefficient `κ` in place of 16.
pub fn torsion_evolution_residual_with(
    prev: &FlowState,
    cur: &FlowState,
    next: &FlowState,
    kappa: f64,
) -> Result<f64> {
    let spec = &cur.field.spec;
    if !(prev.field.spec.same_grid(spec) && next.field.spec.same_grid(spec)) {
        return Err(Spin7Error::IncompatibleLattice("evolution triple".into()));
    }
    if !(prev.t < cur.t && cur.t < next.t) {
        return Err(Spin7Error::InvalidParameter(
            "states must be in increasing time".into(),
        ));
    }
    let dens = |f: &LatticeField<FourForm>| torsion(f).map(|_, t| t.norm2());
    let tf = torsion(&cur.field);
    let n_cur = tf.map(|_, t| t.norm2());
    let n_prev = dens(&prev.field);
    let n_next = dens(&next.field);
    let inv_2dt = 1.0 / (next.t - prev.t);
    let grad_t = tf.gradient();
    let lap: Vec<LatticeField<f64>> = (0..spec.dims()).map(|a| n_cur.second_derivative(a)).collect();
    let res: Vec<f64> = (0..spec.num_points())
        .into_par_iter()
        .map(|p| {
            let dt_n = (n_next.values[p] - n_prev.values[p]) * inv_2dt;
            let lap_n: f64 = lap.iter().map(|l| l.values[p]).sum();
            let grad2: f64 = grad_t.iter().map(|g| g.values[p].norm2()).sum();
            let (q1, q2) = quartic_terms(&tf.values[p]);
            2.0 * dt_n - (2.0 * lap_n - 4.0 * grad2 + kappa * (q1 + q2))
        })
        .collect();
    Ok(max_abs(&res))
}

/// `max |Div T − X⌟T − π₇(∇X)|` with `(∇X)_{ab} = ∂_a X_b` (skew part).
pub fn soliton_residual(state: &FlowState, x: &LatticeField<Vec8>) -> Result<f64> {
    let field = &state.field;
    let spec = &field.spec;
    if !spec.same_grid(&x.spec) {
        return Err(Spin7Error::IncompatibleLattice("vector field".into()));
    }
    let tf = torsion(field);
    let div = div_torsion(&tf, field);
    let grad_x = x.gradient();
    let res: Vec<f64> = (0..spec.num_points())
        .into_par_iter()
        .map(|p| {
            let mut nabla = Endo8::zero();
            for (a, g) in grad_x.iter().enumerate() {
                nabla.0[spec.axis(a)] = g.values[p].0;
            }
            let nabla7 = pi7(&nabla.skew_part(), &field.values[p]);
            let r = div.values[p] - tf.values[p].contract_vector(&x.values[p]) - nabla7;
            r.max_abs()
        })
        .collect();
    Ok(max_abs(&res))
}

/// Where a schedule's invariants are anchored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `ρ = |t|^p`, `α = ∓2p/t`, `t̂ = −2pc`.
    Power,
    /// The power schedule translated and normalised so that `ρ(0) = 1`:
    /// `ρ = |1 − ct/(2p)|^p`, `α = 1/(1 − ct/(2p))`, `t̂ = 0`.
    Anchored,
}

/// Time reparametrisation `ρ` and scale factor `α` of a soliton.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonSchedule {
    pub c: i32,
    pub p: f64,
    pub kind: ScheduleKind,
    pub t_hat: f64,
    /// `Î` as `(lower, upper)`; `None` is unbounded.
    pub interval: (Option<f64>, Option<f64>),
}

/// Residuals of the three schedule invariants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleCheck {
    /// `ρ(0) − 1`.
    pub rho_at_zero: f64,
    /// `α(t̂) − 1`.
    pub alpha_at_anchor: f64,
    /// `max |α + (2/c)(log ρ)′|` over sample points of `Î` (0 for `c = 0`).
    pub log_derivative: f64,
}

impl ScheduleCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.rho_at_zero.abs() <= tol && self.alpha_at_anchor.abs() <= tol && self.log_derivative <= tol
    }
}

/// The power schedule `ρ = |t|^p` for `c ∈ {−1, 0, 1}` and `p > 0`.
pub fn soliton_schedule(c: i32, p: f64) -> Result<SolitonSchedule> {
    if !(-1..=1).contains(&c) {
        return Err(Spin7Error::InvalidParameter(format!(
            "c = {c} is not in {{-1, 0, 1}}"
        )));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Spin7Error::InvalidParameter(format!("p = {p} must be positive")));
    }
    let t_hat = if c == 0 { 0.0 } else { -2.0 * p * f64::from(c) };
    Ok(SolitonSchedule {
        c,
        p,
        kind: ScheduleKind::Power,
        t_hat,
        interval: interval(c, t_hat),
    })
}

fn interval(c: i32, t_hat: f64) -> (Option<f64>, Option<f64>) {
    match c {
        1 => (None, Some(t_hat)),
        -1 => (Some(t_hat), None),
        _ => (None, None),
    }
}

impl SolitonSchedule {
    /// The same schedule re-anchored at `t = 0`.
    pub fn anchored(&self) -> SolitonSchedule {
        SolitonSchedule {
            kind: ScheduleKind::Anchored,
            t_hat: 0.0,
            interval: interval(self.c, 0.0),
            ..*self
        }
    }

    fn shift(&self, t: f64) -> f64 {
        1.0 - f64::from(self.c) * t / (2.0 * self.p)
    }

    pub fn rho(&self, t: f64) -> f64 {
        match (self.c, self.kind) {
            (0, _) => 1.0,
            (_, ScheduleKind::Power) => t.abs().powf(self.p),
            (_, ScheduleKind::Anchored) => self.shift(t).abs().powf(self.p),
        }
    }

    pub fn alpha(&self, t: f64) -> f64 {
        match (self.c, self.kind) {
            (0, _) => 1.0,
            (c, ScheduleKind::Power) => -2.0 * self.p / (f64::from(c) * t),
            (_, ScheduleKind::Anchored) => 1.0 / self.shift(t),
        }
    }

    /// `(log ρ)′`, in closed form.
    pub fn log_rho_derivative(&self, t: f64) -> f64 {
        match (self.c, self.kind) {
            (0, _) => 0.0,
            (_, ScheduleKind::Power) => self.p / t,
            (c, ScheduleKind::Anchored) => -0.5 * f64::from(c) / self.shift(t),
        }
    }

    /// Sample points inside `Î`, away from the singular time.
    pub fn sample_times(&self) -> Vec<f64> {
        let offsets = [0.0, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];
        match self.interval {
            (None, Some(hi)) => offsets.iter().map(|o| hi - o).collect(),
            (Some(lo), None) => offsets.iter().map(|o| lo + o).collect(),
            _ => offsets.iter().flat_map(|o| [*o, -o]).collect(),
        }
    }

    pub fn check(&self) -> ScheduleCheck {
        let log_derivative = if self.c == 0 {
            self.sample_times()
                .iter()
                .map(|&t| (self.alpha(t) - 1.0).abs().max((self.rho(t) - 1.0).abs()))
                .fold(0.0, f64::max)
        } else {
            let c = f64::from(self.c);
            self.sample_times()
                .iter()
                .map(|&t| {
                    let a = self.alpha(t);
                    (a + (2.0 / c) * self.log_rho_derivative(t)).abs() / a.abs().max(1.0)
                })
                .fold(0.0, f64::max)
        };
        ScheduleCheck {
            rho_at_zero: self.rho(0.0) - 1.0,
            alpha_at_anchor: self.alpha(self.t_hat) - 1.0,
            log_derivative,
        }
    }
}

/// Verification of the parabolic rescaling `Φ̃ = c⁴Φ`, `g̃ = c²g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RescaleReport {
    pub c: f64,
    /// `max |T̃ − c²T| / max |c²T|`.
    pub torsion: f64,
    /// `max |Div_g̃ T̃ − Div_g T| / max |Div_g T|`.
    pub divergence: f64,
    /// `max | |∇̃ʲT̃|_g̃ − c^{−(1+j)}|∇ʲT|_g | / max c^{−(1+j)}|∇ʲT|_g` for `j = 0, 1`.
    pub norms: [f64; 2],
}

impl RescaleReport {
    pub fn max_error(&self) -> f64 {
        self.torsion
            .max(self.divergence)
            .max(self.norms[0])
            .max(self.norms[1])
    }
}

fn rel(diff: &[f64], scale: &[f64]) -> f64 {
    let s = max_abs(scale);
    let d = max_abs(diff);
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// Rescale a state by `c > 0`.
///
/// The report is computed in the original coordinates with metric
/// `g̃ = c²δ`: every raised index carries a factor `c⁻²`.  The returned
/// state is the same structure in Euclidean coordinates `y = c·x`, where
/// the components are unchanged, the period becomes `c·L` and time `c²t`.
pub fn parabolic_rescale(state: &FlowState, c: f64) -> Result<(FlowState, RescaleReport)> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Spin7Error::InvalidParameter(format!(
            "rescale factor {c} must be positive"
        )));
    }
    let s = c * c;
    let field = &state.field;
    let spec = &field.spec;
    let scaled = field.map(|_, phi| c.powi(4) * *phi);

    let tf = torsion(field);
    let div = div_torsion(&tf, field);
    let inv_s3 = s.powi(-3);
    let tf_s = torsion(&scaled).map(|_, t| inv_s3 * *t);
    let raw_s = div_torsion_raw(&tf_s).map(|_, d| (1.0 / s) * *d);
    let div_s = raw_s.map(|p, d| pi7(d, &((1.0 / (s * s)) * scaled.values[p])));

    let n = spec.num_points();
    let mut t_diff = vec![0.0; n];
    let mut t_scale = vec![0.0; n];
    let mut d_diff = vec![0.0; n];
    let mut d_scale = vec![0.0; n];
    let mut n0_diff = vec![0.0; n];
    let mut n0_scale = vec![0.0; n];
    let mut n1_diff = vec![0.0; n];
    let mut n1_scale = vec![0.0; n];
    let grad = tf.gradient();
    let grad_s = tf_s.gradient();
    for p in 0..n {
        let want = s * tf.values[p];
        let mut d = tf_s.values[p];
        d.add_scaled(-1.0, &want);
        t_diff[p] = d.max_abs();
        t_scale[p] = want.max_abs();
        d_diff[p] = (div_s.values[p] - div.values[p]).max_abs();
        d_scale[p] = div.values[p].max_abs();
        let n0 = (inv_s3 * tf_s.values[p].norm2()).sqrt();
        let n0_want = tf.values[p].norm2().sqrt() / c;
        n0_diff[p] = n0 - n0_want;
        n0_scale[p] = n0_want;
        let g2: f64 = grad.iter().map(|g| g.values[p].norm2()).sum();
        let g2_s: f64 = grad_s.iter().map(|g| g.values[p].norm2()).sum();
        let n1 = (s.powi(-4) * g2_s).sqrt();
        let n1_want = g2.sqrt() / s;
        n1_diff[p] = n1 - n1_want;
        n1_scale[p] = n1_want;
    }
    let report = RescaleReport {
        c,
        torsion: rel(&t_diff, &t_scale),
        divergence: rel(&d_diff, &d_scale),
        norms: [rel(&n0_diff, &n0_scale), rel(&n1_diff, &n1_scale)],
    };
    let mut new_spec = spec.clone();
    new_spec.period = c * spec.period;
    let rescaled = FlowState {
        field: LatticeField {
            spec: new_spec,
            values: field.values.clone(),
        },
        t: s * state.t,
        step: state.step,
    };
    Ok((rescaled, report))
}

/// Descriptive fit of `max|T|` against the time to an estimated singular
/// time `τ`, for runs that approach the blow-up guard.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeIFit {
    /// Estimated singular time.
    pub tau: f64,
    /// Slope of `log max|T|` against `log(τ − t)`; a Type-I rate is `−½`.
    pub exponent: f64,
    pub samples: usize,
}

fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fit the last `window` samples `(t, max|T|)`.
///
/// `τ` comes from extrapolating `1/max|T|²` linearly to zero, which is exact
/// for `max|T| = (C(τ − t))^{−½}`. Returns `None` when fewer than three
/// samples are available or `1/max|T|²` is not decreasing towards a time
/// after the last sample.
pub fn type_one_fit(samples: &[(f64, f64)], window: usize) -> Option<TypeIFit> {
    let tail = &samples[samples.len().saturating_sub(window)..];
    if tail.len() < 3 || tail.iter().any(|&(_, m)| !(m > 0.0 && m.is_finite())) {
        return None;
    }
    let ts: Vec<f64> = tail.iter().map(|s| s.0).collect();
    let inv: Vec<f64> = tail.iter().map(|s| 1.0 / (s.1 * s.1)).collect();
    let (slope, intercept) = line_fit(&ts, &inv);
    if !(slope < 0.0) {
        return None;
    }
    let tau = -intercept / slope;
    let last = *ts.last().unwrap();
    if !(tau > last) {
        return None;
    }
    let xs: Vec<f64> = ts.iter().map(|t| (tau - t).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|s| s.1.ln()).collect();
    let (exponent, _) = line_fit(&xs, &ys);
    Some(TypeIFit {
        tau,
        exponent,
        samples: tail.len(),
    })
}
