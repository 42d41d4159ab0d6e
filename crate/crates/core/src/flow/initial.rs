//! Seeded initial data on the reduced torus.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use super::config::{FlowConfig, InitialData, Profile};
use super::FlowState;
use crate::algebra::{cayley_form, pi7};
use crate::error::{Result, Spin7Error};
use crate::forms::{Endo8, FourForm, TwoForm, Vec8};
use crate::identities::admissibility;
use crate::lattice::{LatticeField, LatticeSpec};
use crate::sampling::{random_skew, random_vec, rng, SeededRng};
use crate::spinor::{exp_rotate, spinor_form, BryantPoint};

/// A seeded `Ω²₇` generator with `max |A_ij| = 1`.
fn seeded_generator(r: &mut SeededRng) -> TwoForm {
    let a = pi7(&random_skew(r), &cayley_form());
    (1.0 / a.max_abs()) * a
}

fn profile_value(spec: &LatticeSpec, profile: &Profile, x: &Vec8) -> f64 {
    let l = spec.period;
    match profile {
        Profile::Sine { mode } => (0..spec.dims())
            .map(|a| (2.0 * PI * f64::from(*mode) * x.0[spec.axis(a)] / l).sin())
            .sum(),
        Profile::Bump { width, centre } => {
            let r2: f64 = (0..spec.dims())
                .map(|a| {
                    let c = centre.as_ref().map_or(0.5 * l, |c| c[a]);
                    let d = x.0[spec.axis(a)] - c;
                    let d = d - l * (d / l).round();
                    d * d
                })
                .sum();
            (-r2 / (2.0 * width * width)).exp()
        }
    }
}

/// Build and validate the initial state of a run.
pub fn initial_data(config: &FlowConfig) -> Result<FlowState> {
    config.validate()?;
    let spec = &config.lattice;
    let phi0 = cayley_form();
    let mut r = rng(config.seed);
    let field = match &config.initial {
        InitialData::Constant => LatticeField::constant(spec, phi0),
        InitialData::RotationField { amplitude, profile } => {
            let a: Endo8 = seeded_generator(&mut r).into();
            let eps = *amplitude;
            try_field(spec, |p| {
                let theta = eps * profile_value(spec, profile, &spec.position(p));
                exp_rotate(&(theta * a), &phi0)
            })?
        }
        InitialData::BryantWave { amplitude, profile } => {
            let mut y = random_vec(&mut r);
            y.0[0] = 0.0;
            let y = y.scale(1.0 / y.norm());
            let eps = *amplitude;
            try_field(spec, |p| {
                let theta = eps * profile_value(spec, profile, &spec.position(p));
                let pt = BryantPoint::new(theta.cos(), y.scale(theta.sin()))?;
                spinor_form(&pt)
            })?
        }
        InitialData::RandomSmooth {
            amplitude,
            modes,
            max_mode,
        } => {
            let m = i64::from(*max_mode);
            let terms: Vec<(Vec<i64>, f64, Endo8)> = (0..*modes)
                .map(|_| {
                    let k = loop {
                        let k: Vec<i64> = (0..spec.dims()).map(|_| r.gen_range(-m..=m)).collect();
                        if k.iter().any(|&x| x != 0) {
                            break k;
                        }
                    };
                    let phase = r.gen_range(0.0..2.0 * PI);
                    (k, phase, seeded_generator(&mut r).into())
                })
                .collect();
            let eps = *amplitude;
            try_field(spec, |p| {
                let x = spec.position(p);
                let mut gen = Endo8::zero();
                for (k, phase, a) in &terms {
                    let arg: f64 = (0..spec.dims())
                        .map(|ax| k[ax] as f64 * x.0[spec.axis(ax)])
                        .sum::<f64>()
                        * 2.0
                        * PI
                        / spec.period;
                    gen = gen + (eps * (arg + phase).sin()) * *a;
                }
                exp_rotate(&gen, &phi0)
            })?
        }
    };
    validate_field(&field, config.tolerances.admissibility)?;
    Ok(FlowState {
        field,
        t: 0.0,
        step: 0,
    })
}

fn try_field(
    spec: &LatticeSpec,
    f: impl Fn(usize) -> Result<FourForm> + Sync + Send,
) -> Result<LatticeField<FourForm>> {
    let values: Result<Vec<FourForm>> = (0..spec.num_points()).into_par_iter().map(f).collect();
    Ok(LatticeField {
        spec: spec.clone(),
        values: values?,
    })
}

/// Run the admissibility validator at every grid point.
pub fn validate_field(field: &LatticeField<FourForm>, tol: f64) -> Result<()> {
    let bad = (0..field.values.len())
        .into_par_iter()
        .find_first(|&p| !admissibility(&field.values[p]).is_admissible(tol));
    match bad {
        None => Ok(()),
        Some(p) => {
            let r = admissibility(&field.values[p]);
            Err(Spin7Error::Inadmissible(format!(
                "grid point {p}: metric deviation {:e}, quadratic residual {:e}, spectrum error {:e}",
                r.metric_deviation, r.quadratic_residual, r.spectrum_error
            )))
        }
    }
}
