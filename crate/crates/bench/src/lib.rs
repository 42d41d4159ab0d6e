//! Shared fixtures for the benchmarks.

use spin7_core::flow::{initial_data, FlowConfig, FlowState, InitialData, Profile};
use spin7_core::LatticeSpec;

/// A smooth rotation-field state on a `dims`-dimensional lattice.
pub fn rotation_state(dims: usize, n: usize) -> FlowState {
    let spec = LatticeSpec::new((1..=dims).collect(), n, 1.0, 4).expect("valid lattice");
    let mut config = FlowConfig::new(
        spec,
        InitialData::RotationField {
            amplitude: 0.1,
            profile: Profile::Sine { mode: 1 },
        },
    );
    config.max_steps = Some(1);
    initial_data(&config).expect("admissible initial data")
}

pub fn dt(state: &FlowState) -> f64 {
    0.1 * state.field.spec.spacing().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let s = rotation_state(2, 8);
        assert_eq!(s.field.values.len(), 64);
        assert!(dt(&s) > 0.0);
    }
}
