//! The backward heat kernel on the reduced torus, the monotone quantity
//! `Θ` and the entropy `λ(Φ, σ)`.
//!
//! The kernel is a product of periodized 1-D Gaussians over the active
//! axes.  Inactive axes integrate out exactly (each factor integrates to 1
//! over its period), so only the active cell volume `h^k` appears.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FlowState;
use crate::error::{Result, Spin7Error};
use crate::forms::Vec8;
use crate::lattice::{pairwise_sum, torsion, LatticeField, LatticeSpec, Torsion};

/// `Σ_n (4πτ)^{-1/2} exp(−(d + nL)²/(4τ))`.
///
/// Short times use the image sum and long times its Poisson dual
/// `(1/L) Σ_k exp(−4π²k²τ/L²) cos(2πkd/L)`; either series stops once a
/// term falls below `1e-16` of the running sum.
pub fn heat_kernel_1d(d: f64, tau: f64, period: f64) -> f64 {
    let l = period;
    let d = d - l * (d / l).round();
    if 4.0 * tau < l * l {
        let norm = 1.0 / (4.0 * PI * tau).sqrt();
        let mut sum = (-d * d / (4.0 * tau)).exp();
        let mut n = 1.0;
        loop {
            let a = d + n * l;
            let b = d - n * l;
            let term = (-a * a / (4.0 * tau)).exp() + (-b * b / (4.0 * tau)).exp();
            sum += term;
            if term < 1e-16 * sum {
                break;
            }
            n += 1.0;
        }
        norm * sum
    } else {
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let envelope = 2.0 * (-4.0 * PI * PI * k * k * tau / (l * l)).exp();
            sum += envelope * (2.0 * PI * k * d / l).cos();
            if envelope < 1e-16 * sum.abs() {
                break;
            }
            k += 1.0;
        }
        sum / l
    }
}

fn density(tf: &LatticeField<Torsion>) -> Vec<f64> {
    tf.values.par_iter().map(|t| t.norm2()).collect()
}

/// `τ·∫|T|² u vol` for a kernel centred at `x0` with time separation `τ`.
fn weighted_integral(spec: &LatticeSpec, dens: &[f64], x0: &Vec8, tau: f64) -> f64 {
    let h = spec.spacing();
    let n = spec.points_per_axis;
    let tables: Vec<Vec<f64>> = (0..spec.dims())
        .map(|a| {
            let c = x0.0[spec.axis(a)];
            (0..n)
                .map(|i| heat_kernel_1d(i as f64 * h - c, tau, spec.period))
                .collect()
        })
        .collect();
    let terms: Vec<f64> = (0..spec.num_points())
        .into_par_iter()
        .map(|p| {
            let idx = spec.multi_index(p);
            idx.iter()
                .enumerate()
                .fold(dens[p], |acc, (a, &i)| acc * tables[a][i])
        })
        .collect();
    tau * h.powi(spec.dims() as i32) * pairwise_sum(&terms)
}

/// `Θ_{(x0,t0)}(Φ(t)) = (t0 − t)∫|T|² u vol`.  Only the active coordinates
/// of `x0` matter.
pub fn theta(state: &FlowState, x0: &Vec8, t0: f64) -> Result<f64> {
    if !(state.t < t0) {
        return Err(Spin7Error::NotBeforeCentre { t: state.t, t0 });
    }
    let tf = torsion(&state.field);
    Ok(weighted_integral(
        &state.field.spec,
        &density(&tf),
        x0,
        t0 - state.t,
    ))
}

pub fn theta_series(states: &[FlowState], x0: &Vec8, t0: f64) -> Result<Vec<f64>> {
    if let Some(first) = states.first() {
        if let Some(bad) = states.iter().find(|s| !s.field.spec.same_grid(&first.field.spec)) {
            return Err(Spin7Error::IncompatibleLattice(format!(
                "state at step {} is on a different lattice",
                bad.step
            )));
        }
    }
    states.iter().map(|s| theta(s, x0, t0)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EntropyOptions {
    /// Number of points of the geometric time grid in `[h², σ]`.
    pub t_samples: usize,
    /// Stride (in grid points, per axis) of the kernel centres.
    pub x_stride: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions {
            t_samples: 16,
            x_stride: 1,
        }
    }
}

/// `t_j = σ (t_min/σ)^{j/n}` for `j = 0, …, n−1`; the grid for `2n` contains
/// the grid for `n` exactly.
pub fn entropy_time_grid(sigma: f64, t_min: f64, n: usize) -> Vec<f64> {
    if t_min >= sigma || n <= 1 {
        return vec![sigma];
    }
    let r = t_min / sigma;
    (0..n).map(|j| sigma * r.powf(j as f64 / n as f64)).collect()
}

/// `λ(Φ, σ) = max_{x, t ∈ (0, σ]} t∫|T|²(y) u_{(x,t)}(y, 0) vol`, sampled on
/// the strided grid and the geometric time grid.  A lower bound for the
/// continuum maximum that can only grow as sampling is refined.
pub fn entropy(state: &FlowState, sigma: f64, opts: EntropyOptions) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Spin7Error::InvalidParameter("σ must be positive".into()));
    }
    if opts.t_samples == 0 || opts.x_stride == 0 {
        return Err(Spin7Error::InvalidParameter(
            "t_samples and x_stride must be positive".into(),
        ));
    }
    let spec = &state.field.spec;
    let h = spec.spacing();
    let n = spec.points_per_axis;
    let dens = density(&torsion(&state.field));
    let centres: Vec<usize> = (0..spec.num_points())
        .filter(|&p| spec.multi_index(p).iter().all(|i| i % opts.x_stride == 0))
        .collect();
    let mut best = 0.0_f64;
    for t in entropy_time_grid(sigma, h * h, opts.t_samples) {
        // translation invariance: the kernel depends on index differences only
        let table: Vec<f64> = (0..n)
            .map(|i| heat_kernel_1d(i as f64 * h, t, spec.period))
            .collect();
        let vals: Vec<f64> = centres
            .par_iter()
            .map(|&c| {
                let ci = spec.multi_index(c);
                let terms: Vec<f64> = (0..spec.num_points())
                    .map(|p| {
                        let yi = spec.multi_index(p);
                        yi.iter()
                            .zip(&ci)
                            .fold(dens[p], |acc, (&y, &x)| acc * table[(y + n - x) % n])
                    })
                    .collect();
                t * h.powi(spec.dims() as i32) * pairwise_sum(&terms)
            })
            .collect();
        best = vals.into_iter().fold(best, f64::max);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_integrates_to_one_and_branches_agree() {
        let l = 2.0;
        for tau in [1e-3, 0.05, 0.2499 * l * l, 0.2501 * l * l, 3.0] {
            let n = 400;
            let h = l / n as f64;
            let s: f64 = (0..n)
                .map(|i| heat_kernel_1d(i as f64 * h - 0.3, tau, l))
                .sum::<f64>()
                * h;
            assert!((s - 1.0).abs() < 1e-10, "τ={tau}: {s}");
        }
        // both representations at the crossover
        let tau = 0.25 * l * l;
        let d = 0.37;
        let norm = 1.0 / (4.0 * PI * tau).sqrt();
        let images: f64 = (-20..=20)
            .map(|n| (-(d + n as f64 * l).powi(2) / (4.0 * tau)).exp())
            .sum::<f64>()
            * norm;
        assert!((heat_kernel_1d(d, tau, l) - images).abs() < 1e-14);
    }

    #[test]
    fn time_grid_nests_under_doubling() {
        let a = entropy_time_grid(0.5, 1e-4, 16);
        let b = entropy_time_grid(0.5, 1e-4, 32);
        for (j, t) in a.iter().enumerate() {
            assert_eq!(*t, b[2 * j]);
        }
        assert_eq!(a[0], 0.5);
    }
}
