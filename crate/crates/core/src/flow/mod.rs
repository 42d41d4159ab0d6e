//! The harmonic Spin(7)-flow `∂_tΦ = (Div T)⋄Φ` on a reduced flat torus.
//!
//! Each step freezes the field, computes `T` and the generator `π₇(Div T)`,
//! and writes `exp(dt·π₇ Div T)·Φ` pointwise into a fresh buffer.  The time
//! step is `dt = cfl·h²`.

mod config;
mod diagnostics;
mod heat;
mod initial;
mod run;

pub use config::{FlowConfig, InitialData, Integrator, Profile, Tolerances};
pub use diagnostics::*;
pub use heat::{entropy, entropy_time_grid, heat_kernel_1d, theta, theta_series, EntropyOptions};
pub use initial::{initial_data, validate_field};
pub use run::{run_flow, DiagRecord, HaltReason, NullObserver, RunObserver, RunSummary};

use rayon::prelude::*;

use crate::forms::{Endo8, FourForm, TwoForm};
use crate::lattice::{div_torsion, energy, max_abs, torsion, LatticeField, Torsion};
use crate::spinor::{euler_update, rotate_form_unchecked, so8_exp};

/// A point on a flow trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub field: LatticeField<FourForm>,
    pub t: f64,
    pub step: u64,
}

/// Quantities computed from a frozen field at the start of a step.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub torsion: LatticeField<Torsion>,
    /// `π₇(Div T)`.
    pub generator: LatticeField<TwoForm>,
    pub energy: f64,
    /// `max |π₇(Div T)_{ab}|` over the grid.
    pub generator_max: f64,
}

pub fn evaluate(field: &LatticeField<FourForm>) -> Evaluation {
    let tf = torsion(field);
    let generator = div_torsion(&tf, field);
    let e = energy(&tf);
    let maxes: Vec<f64> = generator.values.par_iter().map(|g| g.max_abs()).collect();
    Evaluation {
        generator_max: max_abs(&maxes),
        energy: e,
        torsion: tf,
        generator,
    }
}

/// Apply one pointwise update with a precomputed generator.
pub fn advance(
    state: &FlowState,
    generator: &LatticeField<TwoForm>,
    dt: f64,
    integrator: Integrator,
) -> FlowState {
    let field = state.field.map(|p, phi| {
        let a = generator.values[p];
        if a.max_abs() == 0.0 {
            return *phi;
        }
        let a: Endo8 = (dt * a).into();
        match integrator {
            Integrator::LieEuler => {
                let r = so8_exp(&a).expect("π₇ output is skew");
                rotate_form_unchecked(&r.0, phi)
            }
            Integrator::Euler => euler_update(&a, phi),
        }
    });
    FlowState {
        field,
        t: state.t + dt,
        step: state.step + 1,
    }
}

/// One flow step of size `dt`.
pub fn flow_step(state: &FlowState, dt: f64, integrator: Integrator) -> FlowState {
    let ev = evaluate(&state.field);
    advance(state, &ev.generator, dt, integrator)
}
