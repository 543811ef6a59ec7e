//! The six scenarios.

use ricci_core::energy::{gronwall_certificate, volume_growth_check, Basepoint, CertificateParams, EnergyReport};
use ricci_core::flow::{curvature_rate_monitor, uniform_equivalence, FlowData, FlowState, Trajectory};
use ricci_core::verify::{verify_all, SuiteConfig};
use ricci_core::LabError;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ScenarioConfig};
use crate::report::{Artifact, Check, Outcome};
use crate::series::{self, exact_family, initial_state, rk4};

/// Absolute error allowed in the closed-form radius.
pub const RADIUS_TOLERANCE: f64 = 1e-6;
/// Error ratio per halving of `Δt` expected from RK4.
pub const RK4_RATIO: (f64, f64) = (12.0, 20.0);
/// Relative agreement of the monitored `K` with its closed form.
pub const RATE_TOLERANCE: f64 = 0.01;
/// Smallest reduction of `E_r` per halving of `Δt` in the refinement study.
pub const MIN_HALVING_FACTOR: f64 = 8.0;
/// Smallest fitted order of `E_r` in `Δt`.
pub const MIN_TIME_ORDER: f64 = 2.5;
/// Ellipticity constant in the damping terms of the certificate.
pub const ALPHA0: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    VerifyIdentities,
    Flow,
    Energy,
    Uniqueness,
    BlowupMonitor,
    ConvergenceStudy,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::VerifyIdentities => "verify-identities",
            ScenarioKind::Flow => "flow",
            ScenarioKind::Energy => "energy",
            ScenarioKind::Uniqueness => "uniqueness",
            ScenarioKind::BlowupMonitor => "blowup-monitor",
            ScenarioKind::ConvergenceStudy => "convergence-study",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical breakdown: {0}")]
    Breakdown(LabError),
    #[error("scenario failed: {0}")]
    Failure(LabError),
}

impl From<LabError> for ScenarioError {
    fn from(e: LabError) -> Self {
        match e {
            e if e.is_numerical_breakdown() => ScenarioError::Breakdown(e),
            LabError::InvalidParameter { name, reason } => ScenarioError::Config(ConfigError::Field { field: name, reason }),
            e => ScenarioError::Failure(e),
        }
    }
}

impl ScenarioError {
    /// Process exit status: 2 configuration, 3 failed check, 4 breakdown.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 2,
            ScenarioError::Failure(_) => 3,
            ScenarioError::Breakdown(_) => 4,
        }
    }
}

type Run = Result<Outcome, ScenarioError>;

/// Validate `cfg` and run one scenario. Deterministic in `(kind, cfg)`.
pub fn run_scenario(kind: ScenarioKind, cfg: &ScenarioConfig) -> Run {
    cfg.validate()?;
    match kind {
        ScenarioKind::VerifyIdentities => verify_identities(cfg),
        ScenarioKind::Flow => flow(cfg),
        ScenarioKind::Energy => energy(cfg, ScenarioKind::Energy),
        ScenarioKind::Uniqueness => {
            if cfg.delta != 0.0 {
                return Err(ConfigError::Field {
                    field: "delta".into(),
                    reason: "uniqueness compares solutions with the same initial data".into(),
                }
                .into());
            }
            energy(cfg, ScenarioKind::Uniqueness)
        }
        ScenarioKind::BlowupMonitor => blowup_monitor(cfg),
        ScenarioKind::ConvergenceStudy => convergence_study(cfg),
    }
}

fn verify_identities(cfg: &ScenarioConfig) -> Run {
    let suite = SuiteConfig {
        dim: cfg.dim,
        seed: cfg.seed()?,
        samples: cfg.samples,
        resolution: cfg.resolution,
        resolutions: cfg.resolutions.clone(),
        refinement_samples: cfg.refinement_samples,
    };
    let reports = verify_all(&suite)?;
    let mut out = Outcome::new(ScenarioKind::VerifyIdentities.name());
    for r in &reports {
        let order = match r.order {
            Some(o) => format!("order {o:.3}"),
            None if r.exact => "exact to roundoff".to_string(),
            None => "order not measured".to_string(),
        };
        let aux_failed: Vec<&str> = r.aux.iter().filter(|a| !a.pass).map(|a| a.name.as_str()).collect();
        let detail = if aux_failed.is_empty() {
            order
        } else {
            format!("{order}; failed {}", aux_failed.join(", "))
        };
        out.checks.push(Check {
            name: r.id.clone(),
            pass: r.pass,
            value: r.max_ratio(),
            bound: 1.0,
            detail,
        });
        if !r.refinement.is_empty() {
            let rows: Vec<(f64, f64)> = r.resolutions.iter().zip(&r.refinement).map(|(&n, &e)| (n as f64, e)).collect();
            out.artifacts
                .push(Artifact::dat(&format!("refinement-{}.dat", r.id), ["N", "relative_residual"], &rows));
        }
    }
    out.artifacts.push(Artifact::json("identities.json", &reports));
    Ok(out)
}

#[derive(Serialize)]
struct FlowSummary {
    family: String,
    t_end: f64,
    dt: f64,
    dts: Vec<f64>,
    errors: Vec<f64>,
    ratios: Vec<f64>,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn final_values(t: &Trajectory) -> Vec<f64> {
    match &t.last().expect("trajectory has a final state").data {
        FlowData::Warped(p) => p.phi.iter().chain(&p.psi).copied().collect(),
        FlowData::Family { radius, .. } => vec![*radius],
        FlowData::Metric(_) => Vec::new(),
    }
}

fn flow(cfg: &ScenarioConfig) -> Run {
    let initial = initial_state(cfg)?;
    let mut out = Outcome::new(ScenarioKind::Flow.name());
    let traj = rk4(&initial, cfg.t_end, cfg.dt, cfg.stride)?;
    let finals: Vec<Vec<f64>> = cfg
        .dts
        .iter()
        .map(|&dt| rk4(&initial, cfg.t_end, dt, usize::MAX).map(|t| final_values(&t)))
        .collect::<ricci_core::Result<_>>()?;
    // Errors along the `dts` ladder: against the closed form, or between
    // successive halvings for warped profiles.
    let (errors, name) = match exact_family(cfg) {
        Some(f) => {
            let exact = f.radius(cfg.t_end).ok_or(LabError::ExtinctionReached { last_time: cfg.t_end })?;
            let e = (final_values(&traj)[0] - exact).abs();
            out.checks.push(Check::at_most(
                "radius-law",
                e,
                RADIUS_TOLERANCE,
                format!("|r(t) - r_exact(t)| at t = {} with dt = {}", cfg.t_end, cfg.dt),
            ));
            let rows: Vec<(f64, f64)> = traj
                .iter()
                .map(|s| match s.data {
                    FlowData::Family { radius, .. } => (s.t, radius * radius),
                    _ => (s.t, f64::NAN),
                })
                .collect();
            out.artifacts.push(Artifact::dat("radius.dat", ["t", "r^2"], &rows));
            (finals.iter().map(|v| (v[0] - exact).abs()).collect::<Vec<_>>(), f.name().to_string())
        }
        None => {
            let rows: Vec<(f64, f64)> = traj
                .iter()
                .map(|s| match &s.data {
                    FlowData::Warped(p) => (s.t, p.min_psi()),
                    _ => (s.t, f64::NAN),
                })
                .collect();
            out.artifacts.push(Artifact::dat("min-psi.dat", ["t", "min_psi"], &rows));
            let diffs = finals.windows(2).map(|w| max_diff(&w[0], &w[1])).collect();
            (diffs, format!("{:?}", cfg.family))
        }
    };
    let halving = cfg.dts.windows(2).all(|w| (w[0] / w[1] - 2.0).abs() < 1e-12);
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    // A static family is reproduced exactly and has no error to halve.
    if halving && !ratios.is_empty() && errors[0] > 1e-14 {
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &r| (l.min(r), h.max(r)));
        out.checks.push(Check {
            name: "rk4-order".into(),
            pass: lo >= RK4_RATIO.0 && hi <= RK4_RATIO.1,
            value: lo,
            bound: RK4_RATIO.0,
            detail: format!("error ratios {ratios:?} per halving of dt, expected in [{}, {}]", RK4_RATIO.0, RK4_RATIO.1),
        });
    }
    out.artifacts.push(Artifact::json(
        "flow.json",
        &FlowSummary {
            family: name,
            t_end: cfg.t_end,
            dt: cfg.dt,
            dts: cfg.dts.clone(),
            errors,
            ratios,
        },
    ));
    Ok(out)
}

fn energy(cfg: &ScenarioConfig, kind: ScenarioKind) -> Run {
    let mut out = Outcome::new(kind.name());
    let (samples, cw) = match series::pair_series(cfg) {
        Ok(s) => s,
        Err(e @ LabError::InvariantViolation { .. }) => {
            out.checks.push(Check::failed("cutoff-weight", e.to_string()));
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    if !cw.is_compact() {
        out.checks.push(Check {
            name: "cutoff-weight".into(),
            pass: true,
            value: cw.tau,
            bound: cfg.t_end,
            detail: "pointwise invariants and weight inequality along g~(t)".into(),
        });
    }
    let mut report = EnergyReport::new(samples, cfg.sigma, cfg.a, cfg.r)?;

    let vbar = if cw.is_compact() {
        0.0
    } else {
        let initial = initial_state(cfg)?;
        let g0 = initial.metric()?;
        let (_, quad) = series::weight_for(cfg, &initial, &g0)?;
        let vg = volume_growth_check(&g0, &g0, Basepoint::Slice(0), cfg.r, &quad)?;
        out.checks.push(Check {
            name: "volume-growth".into(),
            pass: vg.passes,
            value: vg.vbar,
            bound: f64::INFINITY,
            detail: format!("ball volumes {:?}", vg.volumes),
        });
        vg.vbar
    };
    let params = CertificateParams {
        sigma: cfg.sigma,
        a: cfg.a,
        alpha0: ALPHA0,
        r: if cw.is_compact() { f64::INFINITY } else { cfg.r },
        vbar,
        t0: cfg.t0,
    };
    match gronwall_certificate(&report.samples, &params) {
        Ok(c) => {
            out.checks.push(Check {
                name: "gronwall-certificate".into(),
                pass: c.passes(),
                value: c.e_t1,
                bound: c.e_t0 + c.leakage,
                detail: format!("C = {:e}, N3 = {:e}, window end {:e}", c.c, c.n3, c.window_end),
            });
            report.certificate = Some(c);
        }
        Err(e @ LabError::WindowEmpty { .. }) => out.checks.push(Check::failed("gronwall-certificate", e.to_string())),
        Err(e) => return Err(e.into()),
    }
    if kind == ScenarioKind::Uniqueness {
        let worst = report.combined.iter().copied().fold(0.0, f64::max);
        out.checks.push(Check::at_most(
            "energy-vanishes",
            worst,
            cfg.energy_tolerance,
            "largest E_r between solutions with the same initial data",
        ));
    }

    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    out.artifacts.push(Artifact {
        name: "energy.csv".into(),
        contents: csv,
    });
    let rows: Vec<(f64, f64)> = report.samples.iter().zip(&report.combined).map(|(s, e)| (s.t, *e)).collect();
    out.artifacts.push(Artifact::dat("e_r.dat", ["t", "E_r"], &rows));
    out.artifacts.push(Artifact::json("energy.json", &report));
    Ok(out)
}

fn blowup_monitor(cfg: &ScenarioConfig) -> Run {
    let initial: FlowState = initial_state(cfg)?;
    let traj = rk4(&initial, cfg.t_end, cfg.dt, cfg.stride)?;
    let monitor = curvature_rate_monitor(&traj, cfg.sigma)?;
    let mut out = Outcome::new(ScenarioKind::BlowupMonitor.name());
    let k = monitor.k_ricci;
    out.checks.push(Check::at_most(
        "rate-bound",
        k,
        f64::MAX,
        format!("K = sup t^(1-sigma)|Rc| with sigma = {}", cfg.sigma),
    ));
    // Integrating |∂g/∂t| ≤ 2Kt^{σ−1} bounds the distortion of g(t) against g(0).
    let lambda = uniform_equivalence(&traj)?;
    let bound = (2.0 * k * cfg.t_end.powf(cfg.sigma) / cfg.sigma).exp();
    out.checks.push(Check::at_most(
        "uniform-equivalence",
        lambda,
        bound,
        "eigenvalue ratio of g(t) to g(0) against exp(2 K t^sigma / sigma)",
    ));
    if let Some(f) = exact_family(cfg) {
        let grid = 10_000;
        let exact = (0..=grid)
            .map(|i| cfg.t_end * i as f64 / grid as f64)
            .filter_map(|t| f.radius(t).map(|r| t.powf(1.0 - cfg.sigma) * f.ricci_norm(r)))
            .fold(0.0, f64::max);
        let rel = (k - exact).abs() / exact.max(f64::MIN_POSITIVE);
        out.checks.push(Check {
            name: "closed-form-rate".into(),
            pass: (k - exact).abs() <= RATE_TOLERANCE * exact + 1e-12,
            value: rel,
            bound: RATE_TOLERANCE,
            detail: format!("K = {k:e}, closed form {exact:e}"),
        });
    }
    let rows: Vec<(f64, f64)> = monitor.samples.iter().map(|s| (s.t, s.ricci_rate)).collect();
    out.artifacts.push(Artifact::dat("rate.dat", ["t", "t^(1-sigma)|Rc|"], &rows));
    out.artifacts.push(Artifact::json("monitor.json", &monitor));
    Ok(out)
}

fn convergence_study(cfg: &ScenarioConfig) -> Run {
    let study = series::time_refinement(cfg)?;
    let mut out = Outcome::new(ScenarioKind::ConvergenceStudy.name());
    let worst = study.factors.iter().copied().fold(f64::INFINITY, f64::min);
    out.checks.push(Check::at_least(
        "halving-factor",
        if study.factors.is_empty() { f64::NAN } else { worst },
        MIN_HALVING_FACTOR,
        "smallest E_r(t_end) reduction per halving of dt",
    ));
    out.checks.push(Check::at_least(
        "time-order",
        study.order,
        MIN_TIME_ORDER,
        "least-squares order of E_r(t_end) in dt; E_r is quadratic in the RK4 error",
    ));
    let rows: Vec<(f64, f64)> = study.dts.iter().copied().zip(study.energies.iter().copied()).collect();
    out.artifacts.push(Artifact::dat("convergence.dat", ["dt", "E_r"], &rows));
    out.artifacts.push(Artifact::json("convergence.json", &study));
    Ok(out)
}
