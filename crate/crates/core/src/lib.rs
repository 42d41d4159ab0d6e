//! Spin(7)-structures on R⁸ and the harmonic Spin(7)-flow on flat tori.
//!
//! * [`algebra`]: the Cayley form, the ⋄-action, type decompositions and
//!   the nonlinear metric of an admissible 4-form.
//! * [`spinor`]: the spinor family through the Cayley form and the SO(8)
//!   exponential.
//! * [`identities`]: the pointwise identity suite and the admissibility
//!   validator.
//! * [`lattice`]: periodic lattices, finite differences, torsion and the
//!   flat-space residuals.
//! * [`flow`]: the integrator, run driver and flow-level diagnostics.

pub mod algebra;
pub mod error;
pub mod flow;
pub mod forms;
pub mod identities;
pub mod lattice;
pub mod octonion;
pub mod sampling;
pub mod spinor;

pub use error::{Result, Spin7Error};
pub use flow::{DiagRecord, FlowConfig, FlowState, HaltReason, InitialData, Integrator, Profile, RunSummary};
pub use forms::{AnyForm, Endo8, FourForm, Metric8, ThreeForm, TwoForm, Vec8};
pub use identities::IdentityCheck;
pub use lattice::{LatticeField, LatticeSpec, Torsion};
pub use octonion::{Octonion, OctonionTable};
