//! Fitted constants of the norm-evolution inequalities for `|h|²` and
//! `|B|²`, certified by fitting on one batch of trajectories and holding
//! out the others.

use serde::{Deserialize, Serialize};

use crate::difference::{divergence_adjoint, operator_l, MetricPair};
use crate::error::{LabError, Result};
use crate::field::TensorField;
use crate::flow::euler::euler_pair_derivative;
use crate::flow::{integrate, FlowState, Scheme, WarpedProfile};
use crate::norms;

/// Largest spread `max/min` of a constant fitted on different batches.
pub const STABILITY_FACTOR: f64 = 2.0;
/// Slack allowed when the constant fitted on the first batch is applied to
/// the others.
pub const HOLDOUT_SLACK: f64 = 1.2;
/// Euler step used for the time derivatives of the norms.
pub const NORM_EPSILON: f64 = 1e-4;
/// Points where the bound is below this fraction of its largest value do
/// not constrain the fit.
const BOUND_FLOOR: f64 = 1e-8;

/// Pairs sampled along one pair of trajectories, with their times.
#[derive(Debug)]
pub struct TrajectoryBatch {
    pub samples: Vec<(f64, MetricPair)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundFit {
    pub name: String,
    /// Smallest constant making the inequality hold on each batch.
    pub per_batch: Vec<f64>,
    /// Constant fitted on the first batch.
    pub fitted: f64,
    pub stable: bool,
    /// Whether stability is required. Only the constants depending on the
    /// dimension alone are; the weighted ones also depend on the curvature
    /// bound of each trajectory.
    pub gated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBoundsReport {
    pub sigma: f64,
    pub batches: usize,
    pub fits: Vec<BoundFit>,
    pub pass: bool,
}

impl NormBoundsReport {
    /// The constant fitted for the weighted `|B|²` inequality; `a = 8N/σ`
    /// makes the combined energy dominate it.
    pub fn n_b(&self) -> f64 {
        self.fits[3].fitted
    }
}

pub const BOUND_NAMES: [&str; 4] = ["h-norm C0", "B-norm C0", "weighted h-norm N0", "weighted B-norm N0"];
const GATED: [bool; 4] = [true, true, false, false];

/// Smallest `c ≥ 0` with `lhs ≤ c·bound` wherever the bound is not
/// negligible.
fn fit(lhs: &[f64], bound: &[f64]) -> f64 {
    let floor = BOUND_FLOOR * bound.iter().copied().fold(0.0, f64::max);
    lhs.iter()
        .zip(bound)
        .filter(|(_, &b)| b > floor)
        .map(|(&l, &b)| l / b)
        .fold(0.0, f64::max)
}

/// The four constants on one pair at time `t`. With `drop_adjoint_term`
/// the `δ*B` contribution is left out of the `|h|²` inequalities.
pub fn fit_pair(pair: &MetricPair, t: f64, sigma: f64, drop_adjoint_term: bool) -> Result<[f64; 4]> {
    if !(t > 0.0) {
        return Err(LabError::NonpositiveTime(t));
    }
    let gt = pair.g_tilde();
    let h = pair.h();
    let b = pair.b();
    let dh2: TensorField = euler_pair_derivative(pair, NORM_EPSILON, |p| Ok(norms::norm_sq(p.g_tilde(), p.h())))?;
    let db2: TensorField = euler_pair_derivative(pair, NORM_EPSILON, |p| Ok(norms::norm_sq(p.g_tilde(), p.b())))?;
    let mut drive = operator_l(pair, h);
    if !drop_adjoint_term {
        drive = drive.axpy(-2.0, &divergence_adjoint(pair.connection_tilde(), b))?;
    }
    let drive = norms::inner(gt, &drive, h)?;
    let nrm = |v: &TensorField| norms::norm(gt, v);
    let (hn, bn, dhn) = (nrm(h), nrm(b), nrm(pair.grad_h()));
    let (ginv, gn) = (nrm(pair.g().inverse()), nrm(pair.g().field()));
    let (rct, rmt, rc) = (nrm(pair.ricci_tilde()), nrm(pair.riemann_tilde()), nrm(pair.ricci()));
    let drct = nrm(&pair.connection_tilde().covariant_derivative(pair.ricci_tilde()));

    let s = sigma;
    let pts = pair.points();
    let mut cols: [(Vec<f64>, Vec<f64>); 4] = Default::default();
    for &p in pts {
        let v = |f: &TensorField| f.value(p);
        let (h, bb, dh, gi) = (v(&hn), v(&bn), v(&dhn), v(&ginv));
        let rem = v(&dh2) - 2.0 * v(&drive);
        cols[0].0.push(rem);
        cols[0].1.push((v(&rct) + gi * v(&rmt)) * h * h + gi * gi * h * dh * dh);
        cols[1].0.push(v(&db2));
        cols[1].1.push(
            (v(&rct) + gi * v(&rc)) * bb * bb + v(&gn) * gi * v(&drct) * h * bb + gi * gi * v(&rc) * dh * bb,
        );
        cols[2].0.push(rem / t.powf(1.0 + s));
        cols[2].1.push((1.0 + s) * h * h / (t * t) + dh * dh / t);
        cols[3].0.push(v(&db2) / t.powf(s) - s * bb * bb / (2.0 * t.powf(1.0 + s)));
        cols[3].1.push(s * bb * bb / (2.0 * t) + h * h / t.powf(2.0 - s) + dh * dh / t);
    }
    Ok(cols.map(|(l, b)| fit(&l, &b)))
}

/// Constants over every sample of a batch.
pub fn fit_batch(batch: &TrajectoryBatch, sigma: f64, drop_adjoint_term: bool) -> Result<[f64; 4]> {
    let mut out = [0.0_f64; 4];
    for (t, pair) in &batch.samples {
        let c = fit_pair(pair, *t, sigma, drop_adjoint_term)?;
        for (o, v) in out.iter_mut().zip(c) {
            *o = o.max(v);
        }
    }
    Ok(out)
}

/// Fit on the first batch, hold out the rest: every batch constant must lie
/// within `HOLDOUT_SLACK` of the first and within `STABILITY_FACTOR` of each
/// other. Fails with `UnstableConstant` when a gated constant is unstable;
/// every fitted constant must be finite.
pub fn verify_norm_evolution_bounds(
    batches: &[TrajectoryBatch],
    sigma: f64,
    drop_adjoint_term: bool,
) -> Result<NormBoundsReport> {
    if batches.len() < 2 {
        return Err(LabError::param("batches", "need at least two batches"));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(LabError::param("sigma", "must lie in (0, 1)"));
    }
    let per: Vec<[f64; 4]> = batches
        .iter()
        .map(|b| fit_batch(b, sigma, drop_adjoint_term))
        .collect::<Result<_>>()?;
    let fits: Vec<BoundFit> = (0..4)
        .map(|k| {
            let values: Vec<f64> = per.iter().map(|c| c[k]).collect();
            let fitted = values[0];
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let stable = values.iter().all(|&v| v <= HOLDOUT_SLACK * fitted) && hi <= STABILITY_FACTOR * lo;
            BoundFit {
                name: BOUND_NAMES[k].to_string(),
                per_batch: values,
                fitted,
                stable,
                gated: GATED[k],
            }
        })
        .collect();
    if let Some(bad) = fits
        .iter()
        .find(|f| (f.gated && !f.stable) || f.per_batch.iter().any(|v| !v.is_finite()))
    {
        return Err(LabError::UnstableConstant {
            name: bad.name.clone(),
            values: bad.per_batch.clone(),
        });
    }
    Ok(NormBoundsReport {
        sigma,
        batches: batches.len(),
        fits,
        pass: true,
    })
}

/// How perturbed-cylinder batches are generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderBatchSpec {
    pub dim: usize,
    pub points: usize,
    pub radius: f64,
    /// Relative size of the random profile perturbation.
    pub amplitude: f64,
    pub dt: f64,
    /// Sample times (multiples of `dt`).
    pub times: Vec<f64>,
    pub seed: u64,
}

impl CylinderBatchSpec {
    fn profile(&self, id: u64) -> Result<WarpedProfile> {
        WarpedProfile::cylinder(self.dim, self.points, self.radius)?.perturbed(self.amplitude, self.seed, id)
    }

    /// Batches `ids`: the round cylinder against seeded perturbations of
    /// it, all flowed with RK4 and paired at the sample times.
    pub fn batches(&self, ids: &[u64]) -> Result<Vec<TrajectoryBatch>> {
        let t_end = self.times.iter().copied().fold(0.0, f64::max);
        let run = |p: WarpedProfile| integrate(&FlowState::warped(p)?, t_end, self.dt, Scheme::Rk4, 1);
        let round = run(WarpedProfile::cylinder(self.dim, self.points, self.radius)?)?;
        ids.iter()
            .map(|&id| {
                let bumpy = run(self.profile(id)?)?;
                let samples = self
                    .times
                    .iter()
                    .map(|&t| {
                        let k = (t / self.dt).round() as usize;
                        let pair = MetricPair::new(bumpy[k].metric()?, round[k].metric()?)?;
                        Ok((bumpy[k].t, pair))
                    })
                    .collect::<Result<_>>()?;
                Ok(TrajectoryBatch { samples })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_pair_fits_zero() {
        let p = WarpedProfile::cylinder(3, 16, 1.0).unwrap();
        let g = p.embedded_metric().unwrap();
        let pair = MetricPair::new(g.clone(), g).unwrap();
        assert_eq!(fit_pair(&pair, 0.1, 0.5, false).unwrap(), [0.0; 4]);
    }

    #[test]
    fn fit_ignores_negligible_bounds() {
        assert_eq!(fit(&[1.0, 0.5], &[0.0, 1.0]), 0.5);
        assert_eq!(fit(&[-1.0], &[1.0]), 0.0);
    }

    #[test]
    fn needs_two_batches() {
        assert!(verify_norm_evolution_bounds(&[], 0.5, false).is_err());
    }
}
