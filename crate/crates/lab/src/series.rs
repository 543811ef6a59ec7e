//! Energies of pairs of computed flows.

use std::f64::consts::TAU;

use ricci_core::difference::MetricPair;
use ricci_core::energy::gronwall::refinement_order;
use ricci_core::energy::{build_cutoff_weight, energies, Basepoint, CutoffWeight, EnergySample, Quadrature, WeightParams};
use ricci_core::flow::{integrate, ExactFamily, FlowData, FlowState, Scheme, Trajectory, WarpedProfile};
use ricci_core::{LabError, MetricField, Result};
use serde::{Deserialize, Serialize};

use crate::config::{Family, ScenarioConfig};

/// The exact family a config names, if any.
pub fn exact_family(cfg: &ScenarioConfig) -> Option<ExactFamily> {
    let (dim, r0) = (cfg.dim, cfg.r0);
    match cfg.family {
        Family::Sphere => Some(ExactFamily::ShrinkingSphere { dim, r0 }),
        Family::Cylinder => Some(ExactFamily::ShrinkingCylinder { dim, r0 }),
        _ => None,
    }
}

/// Initial data of the reference solution.
pub fn initial_state(cfg: &ScenarioConfig) -> Result<FlowState> {
    if let Some(f) = exact_family(cfg) {
        return FlowState::family(f);
    }
    let (r0, amp) = (cfg.r0, cfg.amplitude);
    let profile = match cfg.family {
        Family::BumpyCylinder => {
            WarpedProfile::from_fn(cfg.dim, TAU, cfg.resolution, |_| 1.0, |x| r0 * (1.0 + amp * x.cos()))?
        }
        _ => WarpedProfile::cylinder(cfg.dim, cfg.resolution, r0)?,
    };
    FlowState::warped(profile)
}

/// Initial data of the compared solution: the reference perturbed by
/// `delta` (seeded).
pub fn perturbed_state(cfg: &ScenarioConfig) -> Result<FlowState> {
    let base = initial_state(cfg)?;
    if cfg.delta == 0.0 {
        return Ok(base);
    }
    match &base.data {
        FlowData::Warped(p) => FlowState::warped(p.perturbed(cfg.delta, cfg.seed.unwrap_or(0), 0)?),
        _ => Err(LabError::InvalidParameter {
            name: "delta".into(),
            reason: "perturbations need a warped family".into(),
        }),
    }
}

/// RK4 from `state` to `t_end` keeping every `stride`-th step.
pub fn rk4(state: &FlowState, t_end: f64, dt: f64, stride: usize) -> Result<Trajectory> {
    integrate(state, t_end, dt, Scheme::Rk4, stride)
}

/// Cutoff and quadrature for pairs whose reference solution starts at
/// `gbar`. Exact families use the trivial weight on their small charts;
/// warped pairs measure distance from the slice `x = 0`.
pub fn weight_for(cfg: &ScenarioConfig, initial: &FlowState, gbar: &MetricField) -> Result<(CutoffWeight, Quadrature)> {
    match initial.data {
        FlowData::Warped(_) => {
            let params = WeightParams {
                r: cfg.r,
                l1: cfg.l1,
                l2: cfg.l2,
                gamma: cfg.gamma,
                beta: cfg.beta,
                tau: None,
            };
            Ok((build_cutoff_weight(gbar, Basepoint::Slice(0), params)?, Quadrature::Warped))
        }
        _ => {
            let cw = CutoffWeight::compact(gbar);
            let quad = Quadrature::Full(cw.points.clone());
            Ok((cw, quad))
        }
    }
}

/// `(B_r, H_r, K_r)` at every common sample time after 0. With
/// `check_weight` the weight inequality is also checked against the actual
/// `g̃(t)`.
pub fn pair_energies(
    g: &[FlowState],
    g_tilde: &[FlowState],
    cw: &CutoffWeight,
    quad: &Quadrature,
    check_weight: bool,
) -> Result<Vec<EnergySample>> {
    if g.len() != g_tilde.len() {
        return Err(LabError::InvalidParameter {
            name: "trajectories".into(),
            reason: "sample counts differ".into(),
        });
    }
    let mut out = Vec::with_capacity(g.len());
    for (a, b) in g.iter().zip(g_tilde) {
        if (a.t - b.t).abs() > 1e-12 * a.t.max(1.0) {
            return Err(LabError::InvalidParameter {
                name: "trajectories".into(),
                reason: format!("sample times {} and {} differ", a.t, b.t),
            });
        }
        if a.t == 0.0 {
            continue;
        }
        let gt = b.metric()?;
        if check_weight && !cw.is_compact() {
            cw.check_weight_inequality(&gt, b.t)?;
        }
        let pair = MetricPair::new(a.metric()?, gt)?;
        out.push(energies(&pair, a.t, cw, quad)?);
    }
    Ok(out)
}

/// Evolve the reference at `dt_tilde` and the compared solution at `dt`,
/// keeping samples every `stride` steps of `dt`.
pub fn pair_series(cfg: &ScenarioConfig) -> Result<(Vec<EnergySample>, CutoffWeight)> {
    let reference = initial_state(cfg)?;
    let compared = perturbed_state(cfg)?;
    let (cw, quad) = weight_for(cfg, &reference, &reference.metric()?)?;
    let ratio = cfg.dt / cfg.dt_tilde();
    let fine_stride = (cfg.stride as f64 * ratio).round() as usize;
    if fine_stride == 0 || (fine_stride as f64 - cfg.stride as f64 * ratio).abs() > 1e-9 {
        return Err(LabError::InvalidParameter {
            name: "dt_tilde".into(),
            reason: "sample times of the two solutions must coincide".into(),
        });
    }
    let g = rk4(&compared, cfg.t_end, cfg.dt, cfg.stride)?;
    let gt = rk4(&reference, cfg.t_end, cfg.dt_tilde(), fine_stride)?;
    let samples = pair_energies(&g, &gt, &cw, &quad, true)?;
    Ok((samples, cw))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeRefinement {
    pub dts: Vec<f64>,
    /// `E_r(t_end)` between the solutions at `Δt` and `Δt/2`.
    pub energies: Vec<f64>,
    /// `E_r` ratio per halving of `Δt`.
    pub factors: Vec<f64>,
    /// Order of `E_r` in `Δt`, least squares.
    pub order: f64,
}

/// The same initial data integrated at `Δt` and `Δt/2` for each `Δt`,
/// compared through `E_r` at `t_end`.
pub fn time_refinement(cfg: &ScenarioConfig) -> Result<TimeRefinement> {
    let initial = initial_state(cfg)?;
    let (cw, quad) = weight_for(cfg, &initial, &initial.metric()?)?;
    let mut dts = cfg.dts.clone();
    dts.sort_by(|a, b| b.total_cmp(a));
    let mut energies = Vec::with_capacity(dts.len());
    for &dt in &dts {
        let coarse = rk4(&initial, cfg.t_end, dt, usize::MAX)?;
        let fine = rk4(&initial, cfg.t_end, dt / 2.0, usize::MAX)?;
        let last = |t: &Trajectory| t.last().cloned().into_iter().collect::<Vec<_>>();
        let s = pair_energies(&last(&coarse), &last(&fine), &cw, &quad, false)?;
        let s = s.last().ok_or(LabError::NonpositiveTime(cfg.t_end))?;
        energies.push(ricci_core::energy::combined_energy(s.b, s.h, s.t, cfg.sigma, cfg.a)?);
    }
    let (factors, order) = if energies.len() >= 2 {
        refinement_order(&energies)
    } else {
        (Vec::new(), f64::NAN)
    };
    Ok(TimeRefinement {
        dts,
        energies,
        factors,
        order,
    })
}
