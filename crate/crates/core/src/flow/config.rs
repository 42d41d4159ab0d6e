//! Run configuration.  Every struct rejects unknown keys so that a typo in
//! an experiment sweep fails loudly instead of silently using a default.

use serde::{Deserialize, Serialize};

use crate::error::{Result, Spin7Error};
use crate::lattice::LatticeSpec;

/// Spatial profile `θ(x)` multiplying a fixed generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// `Σ_a sin(2π·mode·x_a/L)` over the active axes.
    Sine {
        #[serde(default = "one")]
        mode: u32,
    },
    /// `exp(−|x − x_c|²/(2w²))` with periodic distance, centred at the
    /// middle of the box unless `centre` (one entry per active axis) is given.
    Bump {
        width: f64,
        #[serde(default)]
        centre: Option<Vec<f64>>,
    },
}

fn one() -> u32 {
    1
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Sine { mode: 1 }
    }
}

/// Initial-data families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// The Cayley form at every point.
    Constant,
    /// `exp(ε θ(x) A)·Φ₀` with `A = π₇` of a seeded skew matrix, normalised
    /// so that `max |A_ij| = 1`.
    RotationField {
        amplitude: f64,
        #[serde(default)]
        profile: Profile,
    },
    /// The spinor family at `(cos εθ(x), sin εθ(x)·Y)` with `Y` a seeded unit
    /// imaginary octonion.
    BryantWave {
        amplitude: f64,
        #[serde(default)]
        profile: Profile,
    },
    /// `exp(Σ_j ε sin(2π k_j·x/L + φ_j) A_j)·Φ₀` with seeded integer wave
    /// vectors `0 < |k_j|_∞ ≤ max_mode` and `Ω²₇` generators `A_j`.
    RandomSmooth {
        amplitude: f64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "one")]
        max_mode: u32,
    },
}

fn default_modes() -> usize {
    3
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Pointwise `Φ ← exp(dt·π₇ Div T)·Φ`; stays on the isometric orbit.
    #[default]
    LieEuler,
    /// Componentwise `Φ ← Φ + dt·(π₇ Div T)⋄Φ`; for comparison only.
    Euler,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Halt once `max |π₇ Div T| < convergence`.
    pub convergence: f64,
    /// Halt once `max |T| > blowup / h`.
    pub blowup: f64,
    /// Pointwise admissibility required of initial data.
    pub admissibility: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            convergence: 1e-8,
            blowup: 1e6,
            admissibility: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub lattice: LatticeSpec,
    pub initial: InitialData,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<u64>,
    /// Emit a diagnostic record every this many steps (and at the halt).
    #[serde(default = "default_diag_every")]
    pub diag_every: u64,
    /// Write a checkpoint every this many steps; 0 disables checkpoints.
    #[serde(default)]
    pub checkpoint_every: u64,
    /// Grid points (strided) at which the induced metric is evaluated per
    /// record; the metric formula is the most expensive diagnostic.
    #[serde(default = "default_metric_samples")]
    pub metric_samples: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub integrator: Integrator,
}

fn default_cfl() -> f64 {
    0.1
}

fn default_diag_every() -> u64 {
    1
}

fn default_metric_samples() -> usize {
    16
}

impl FlowConfig {
    pub fn new(lattice: LatticeSpec, initial: InitialData) -> Self {
        FlowConfig {
            lattice,
            initial,
            seed: 0,
            cfl: default_cfl(),
            t_end: None,
            max_steps: None,
            diag_every: default_diag_every(),
            checkpoint_every: 0,
            metric_samples: default_metric_samples(),
            tolerances: Tolerances::default(),
            integrator: Integrator::default(),
        }
    }

    /// `dt = cfl·h²`.
    pub fn dt(&self) -> f64 {
        let h = self.lattice.spacing();
        self.cfl * h * h
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        let bad = |m: &str| Err(Spin7Error::InvalidParameter(m.into()));
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad("cfl must lie in (0, 1)");
        }
        if self.t_end.is_none() && self.max_steps.is_none() {
            return bad("one of t_end or max_steps is required");
        }
        if let Some(t) = self.t_end {
            if !(t.is_finite() && t >= 0.0) {
                return bad("t_end must be finite and nonnegative");
            }
        }
        if self.diag_every == 0 {
            return bad("diag_every must be positive");
        }
        if self.metric_samples == 0 {
            return bad("metric_samples must be positive");
        }
        let t = &self.tolerances;
        if !(t.convergence >= 0.0 && t.blowup > 0.0 && t.admissibility > 0.0) {
            return bad("tolerances must be positive");
        }
        let check_profile = |p: &Profile| -> Result<()> {
            match p {
                Profile::Sine { mode } if *mode == 0 => bad("sine mode must be positive"),
                Profile::Bump { width, .. } if !(*width > 0.0) => bad("bump width must be positive"),
                Profile::Bump { centre: Some(c), .. } if c.len() != self.lattice.dims() => {
                    bad("bump centre needs one entry per active axis")
                }
                _ => Ok(()),
            }
        };
        match &self.initial {
            InitialData::Constant => Ok(()),
            InitialData::RotationField { amplitude, profile }
            | InitialData::BryantWave { amplitude, profile } => {
                if !amplitude.is_finite() {
                    return bad("amplitude must be finite");
                }
                check_profile(profile)
            }
            InitialData::RandomSmooth {
                amplitude,
                modes,
                max_mode,
            } => {
                if !amplitude.is_finite() || *modes == 0 || *max_mode == 0 {
                    return bad("random-smooth needs finite amplitude and positive modes/max_mode");
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "lattice": {"active_axes": [1], "points_per_axis": 32, "period": 1.0},
        "initial": {"family": "rotation-field", "amplitude": 0.05, "profile": {"kind": "sine", "mode": 1}},
        "seed": 3,
        "max_steps": 10
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c: FlowConfig = serde_json::from_str(GOOD).unwrap();
        c.validate().unwrap();
        assert_eq!(c.cfl, 0.1);
        assert_eq!(c.integrator, Integrator::LieEuler);
        assert_eq!(c.tolerances.convergence, 1e-8);
        assert_eq!(c.lattice.stencil_order, 2);
    }

    #[test]
    fn unknown_keys_rejected_at_every_level() {
        for bad in [
            GOOD.replace("\"seed\"", "\"sead\""),
            GOOD.replace("\"period\"", "\"perod\""),
            GOOD.replace("\"amplitude\"", "\"amp\""),
            GOOD.replace("\"mode\"", "\"modes\""),
        ] {
            assert!(serde_json::from_str::<FlowConfig>(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn validation_catches_ranges() {
        let mut c: FlowConfig = serde_json::from_str(GOOD).unwrap();
        c.cfl = 1.5;
        assert!(c.validate().is_err());
        c.cfl = 0.1;
        c.max_steps = None;
        assert!(c.validate().is_err());
    }
}
