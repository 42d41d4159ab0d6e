//! The run driver: stepping, halting, diagnostic records and checkpoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{advance, evaluate, Evaluation, FlowConfig, FlowState};
use crate::algebra::{metric_from_form, pi21};
use crate::error::{Result, Spin7Error};
use crate::lattice::{
    curvature_residuals, div_torsion_raw, integrate_pairing, max_abs, max_torsion, omega21_defect,
    pairwise_sum, LatticeField, Torsion,
};

/// One row of the diagnostic series.  The CSV columns are the first ten
/// fields after `step`; the rest go to auxiliary outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub step: u64,
    pub t: f64,
    pub energy: f64,
    /// Forward difference `(E_{k+1} − E_k)/dt`.
    pub dedt: f64,
    /// `−∫ |π₇ Div T|²` (full contraction).
    pub neg_div_t2: f64,
    pub max_t: f64,
    pub bianchi: f64,
    pub ricci: f64,
    pub scalar: f64,
    /// `max |g_Φ − I|` over the sampled points.
    pub metric_drift: f64,
    /// `max |π₂₁(T_m)|`.
    pub omega21_defect: f64,
    pub scalar_naive: f64,
    /// `max |π₇ Div T|`, the convergence measure.
    pub generator_max: f64,
    /// `max |π₂₁ Div T|` before projection: the discretization error that
    /// the projection removes.
    pub generator_raw_omega21: f64,
    /// `max |π₂₁(π₇ Div T)|`, zero up to round-off by construction.
    pub generator_omega21: f64,
    /// `∫(Λ − 3|T|²)|Div T|²` with `Λ = (2π/L)²`, the lower bound for
    /// `d²E/dt²` along the flow.
    pub convexity_bound: f64,
}

impl DiagRecord {
    pub const CSV_HEADER: &'static str =
        "t,E,dEdt,negDivT2,maxT,bianchi,ricci,scalar,metric_drift,omega21_defect";

    pub fn csv_values(&self) -> [f64; 10] {
        [
            self.t,
            self.energy,
            self.dedt,
            self.neg_div_t2,
            self.max_t,
            self.bianchi,
            self.ricci,
            self.scalar,
            self.metric_drift,
            self.omega21_defect,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.csv_values().iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaltReason {
    Converged,
    MaxSteps,
    TEnd,
    BlowUp,
}

/// Receives records and checkpoints as the run produces them.
pub trait RunObserver {
    fn record(&mut self, record: &DiagRecord) -> Result<()>;
    fn checkpoint(&mut self, state: &FlowState) -> Result<()>;
}

/// Discards everything.
pub struct NullObserver;

impl RunObserver for NullObserver {
    fn record(&mut self, _: &DiagRecord) -> Result<()> {
        Ok(())
    }
    fn checkpoint(&mut self, _: &FlowState) -> Result<()> {
        Ok(())
    }
}

impl RunObserver for Vec<DiagRecord> {
    fn record(&mut self, record: &DiagRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }
    fn checkpoint(&mut self, _: &FlowState) -> Result<()> {
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub halt: HaltReason,
    pub final_state: FlowState,
    /// `max |π₇ Div T|` at the final state.
    pub final_generator_max: f64,
    pub records: usize,
}

fn metric_drift(field: &LatticeField<crate::forms::FourForm>, samples: usize) -> f64 {
    let n = field.values.len();
    let stride = n.div_ceil(samples).max(1);
    let devs: Vec<f64> = (0..n)
        .step_by(stride)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|p| match metric_from_form(&field.values[p]) {
            Ok(g) => g.deviation_from_identity(),
            Err(_) => f64::INFINITY,
        })
        .collect();
    max_abs(&devs)
}

fn record_for(
    config: &FlowConfig,
    state: &FlowState,
    ev: &Evaluation,
    next_energy: f64,
    dt: f64,
) -> DiagRecord {
    let spec = &state.field.spec;
    let field = &state.field;
    let tf: &LatticeField<Torsion> = &ev.torsion;
    let curv = curvature_residuals(tf);
    let raw = div_torsion_raw(tf);
    let raw_21: Vec<f64> = raw
        .values
        .par_iter()
        .zip(field.values.par_iter())
        .map(|(d, phi)| pi21(d, phi).max_abs())
        .collect();
    let gen_21: Vec<f64> = ev
        .generator
        .values
        .par_iter()
        .zip(field.values.par_iter())
        .map(|(d, phi)| pi21(d, phi).max_abs())
        .collect();
    let lam = (2.0 * std::f64::consts::PI / spec.period).powi(2);
    let conv: Vec<f64> = ev
        .generator
        .values
        .par_iter()
        .zip(tf.values.par_iter())
        .map(|(d, t)| (lam - 3.0 * t.norm2()) * d.norm2_full())
        .collect();
    DiagRecord {
        step: state.step,
        t: state.t,
        energy: ev.energy,
        dedt: (next_energy - ev.energy) / dt,
        neg_div_t2: -integrate_pairing(&ev.generator, &ev.generator),
        max_t: max_torsion(tf),
        bianchi: curv.bianchi,
        ricci: curv.ricci,
        scalar: curv.scalar,
        metric_drift: metric_drift(field, config.metric_samples),
        omega21_defect: omega21_defect(tf, field),
        scalar_naive: curv.scalar_naive,
        generator_max: ev.generator_max,
        generator_raw_omega21: max_abs(&raw_21),
        generator_omega21: max_abs(&gen_21),
        convexity_bound: spec.cell_volume() * pairwise_sum(&conv),
    }
}

fn halt_reason(config: &FlowConfig, state: &FlowState, ev: &Evaluation, dt: f64) -> Option<HaltReason> {
    let h = state.field.spec.spacing();
    if ev.generator_max < config.tolerances.convergence {
        Some(HaltReason::Converged)
    } else if max_torsion(&ev.torsion) > config.tolerances.blowup / h {
        Some(HaltReason::BlowUp)
    } else if config.max_steps.is_some_and(|m| state.step >= m) {
        Some(HaltReason::MaxSteps)
    } else if config.t_end.is_some_and(|t| state.t + 1e-9 * dt >= t) {
        Some(HaltReason::TEnd)
    } else {
        None
    }
}

/// Run the flow from `start` until a halting condition holds.
///
/// Records are emitted for every step divisible by `diag_every` and for
/// the final state; checkpoints hold the state *before* its step is
/// taken, so resuming from checkpoint `k` reproduces every record from
/// step `k` on, bit for bit.
pub fn run_flow(config: &FlowConfig, start: FlowState, observer: &mut dyn RunObserver) -> Result<RunSummary> {
    config.validate()?;
    if !start.field.spec.same_grid(&config.lattice) {
        return Err(Spin7Error::IncompatibleLattice(
            "start state does not match the configured lattice".into(),
        ));
    }
    let dt = config.dt();
    let mut last_good = start.step;
    let mut records = 0;
    let mut cur = start;
    let mut ev = evaluate(&cur.field);
    loop {
        if !(ev.energy.is_finite() && ev.generator_max.is_finite()) {
            return Err(Spin7Error::NonFinite {
                step: cur.step,
                last_good_step: last_good,
            });
        }
        let halt = halt_reason(config, &cur, &ev, dt);
        let due = config.checkpoint_every > 0 && cur.step % config.checkpoint_every == 0;
        if due || (halt.is_some() && config.checkpoint_every > 0) {
            observer.checkpoint(&cur)?;
            last_good = cur.step;
        }
        let next = advance(&cur, &ev.generator, dt, config.integrator);
        let ev_next = evaluate(&next.field);
        if halt.is_some() || cur.step % config.diag_every == 0 {
            let rec = record_for(config, &cur, &ev, ev_next.energy, dt);
            if !rec.is_finite() {
                return Err(Spin7Error::NonFinite {
                    step: cur.step,
                    last_good_step: last_good,
                });
            }
            observer.record(&rec)?;
            records += 1;
        }
        if let Some(halt) = halt {
            return Ok(RunSummary {
                halt,
                final_generator_max: ev.generator_max,
                final_state: cur,
                records,
            });
        }
        cur = next;
        ev = ev_next;
    }
}
