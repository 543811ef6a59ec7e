//! Ricci-flow solution data: exact families, warped products, Euler families
//! and curvature-rate monitors.
//!
//! Only exact families and warped profiles are integrated in time. General
//! metrics on a chart are differentiated instantaneously through
//! [`euler`] instead.

pub mod euler;
pub mod exact;
pub mod warped;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::curvature;
use crate::deriv::STENCIL_REACH;
use crate::error::{LabError, Result};
use crate::field::TensorField;
use crate::linalg;
use crate::metric::MetricField;
use crate::norms;

pub use euler::{default_epsilon, euler_metric_derivative, euler_pair_derivative, ricci_flow_rhs, Differentiable};
pub use exact::ExactFamily;
pub use warped::WarpedProfile;

/// Steps are refused once any positive quantity falls below this fraction of
/// its initial value.
pub const EXTINCTION_FRACTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Rk4,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlowData {
    Metric(MetricField),
    Warped(WarpedProfile),
    Family { family: ExactFamily, radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub data: FlowData,
    /// Step size that produced this state (0 for an initial state).
    pub dt: f64,
    pub steps: usize,
    pub scheme: Option<Scheme>,
}

impl FlowState {
    pub fn new(t: f64, data: FlowData) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(LabError::param("t", "must be nonnegative"));
        }
        Ok(FlowState {
            t,
            data,
            dt: 0.0,
            steps: 0,
            scheme: None,
        })
    }

    pub fn family(family: ExactFamily) -> Result<Self> {
        family.validate()?;
        Self::new(0.0, FlowData::Family { family, radius: family.r0() })
    }

    pub fn warped(profile: WarpedProfile) -> Result<Self> {
        Self::new(0.0, FlowData::Warped(profile))
    }

    /// The metric this state describes, on its chart.
    pub fn metric(&self) -> Result<MetricField> {
        match &self.data {
            FlowData::Metric(g) => Ok(g.clone()),
            FlowData::Warped(p) => p.embedded_metric(),
            FlowData::Family { family, radius } => family.metric(*radius),
        }
    }

    pub fn chart(&self) -> Chart {
        match &self.data {
            FlowData::Metric(g) => *g.chart(),
            FlowData::Warped(p) => p.embedded_chart(),
            FlowData::Family { family, .. } => family.chart(),
        }
    }

    fn values(&self) -> Result<Vec<f64>> {
        match &self.data {
            FlowData::Metric(_) => Err(LabError::param(
                "state",
                "general metrics are differentiated, not integrated",
            )),
            FlowData::Warped(p) => Ok(p.phi.iter().chain(&p.psi).copied().collect()),
            FlowData::Family { radius, .. } => Ok(vec![*radius]),
        }
    }

    fn with_values(&self, v: &[f64]) -> Result<FlowData> {
        Ok(match &self.data {
            FlowData::Metric(_) => unreachable!("values() rejects metric states"),
            FlowData::Warped(p) => {
                let m = p.points();
                FlowData::Warped(WarpedProfile::new(p.dim, p.period, v[..m].to_vec(), v[m..].to_vec())?)
            }
            FlowData::Family { family, .. } => FlowData::Family {
                family: *family,
                radius: v[0],
            },
        })
    }

    fn rate(&self, data: &FlowData) -> Result<Vec<f64>> {
        match data {
            FlowData::Metric(_) => unreachable!("values() rejects metric states"),
            FlowData::Warped(p) => {
                let (a, b) = p.rhs()?;
                Ok(a.into_iter().chain(b).collect())
            }
            FlowData::Family { family, radius } => Ok(vec![family.rate(*radius)?]),
        }
    }
}

/// Accepted states at the requested output times, oldest first.
pub type Trajectory = Vec<FlowState>;

/// Advance `state` to `t_end` with fixed steps of (at most) `dt`, keeping
/// every `output_stride`-th state plus the initial and final ones.
pub fn integrate(state: &FlowState, t_end: f64, dt: f64, scheme: Scheme, output_stride: usize) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LabError::param("dt", "must be positive"));
    }
    if !(t_end >= state.t) {
        return Err(LabError::param("t_end", "must not precede the initial time"));
    }
    if output_stride == 0 {
        return Err(LabError::param("output_stride", "must be at least 1"));
    }
    let y0 = state.values()?;
    let floor: Vec<f64> = y0.iter().map(|v| v * EXTINCTION_FRACTION).collect();
    let steps = ((t_end - state.t) / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps > 0 { (t_end - state.t) / steps as f64 } else { 0.0 };

    let mut out = vec![state.clone()];
    let mut y = y0;
    let mut current = state.clone();
    for k in 1..=steps {
        let t = state.t + h * (k - 1) as f64;
        let extinct = || LabError::ExtinctionReached { last_time: t };
        let eval = |v: &[f64]| -> Result<Vec<f64>> {
            if v.iter().zip(&floor).any(|(x, f)| !(x > f)) {
                return Err(extinct());
            }
            let data = current.with_values(v).map_err(|e| breakdown(e, t))?;
            current.rate(&data).map_err(|e| breakdown(e, t))
        };
        let next = match scheme {
            Scheme::Euler => {
                let k1 = eval(&y)?;
                axpy(&y, h, &k1)
            }
            Scheme::Rk4 => {
                let k1 = eval(&y)?;
                let k2 = eval(&axpy(&y, 0.5 * h, &k1))?;
                let k3 = eval(&axpy(&y, 0.5 * h, &k2))?;
                let k4 = eval(&axpy(&y, h, &k3))?;
                y.iter()
                    .enumerate()
                    .map(|(i, v)| v + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                    .collect()
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(LabError::StepRejected {
                time: t,
                reason: "non-finite state".into(),
            });
        }
        if next.iter().zip(&floor).any(|(x, f)| !(x > f)) {
            return Err(extinct());
        }
        y = next;
        current = FlowState {
            t: if k == steps { t_end } else { state.t + h * k as f64 },
            data: current.with_values(&y)?,
            dt: h,
            steps: state.steps + k,
            scheme: Some(scheme),
        };
        if k % output_stride == 0 || k == steps {
            out.push(current.clone());
        }
    }
    Ok(out)
}

fn breakdown(e: LabError, t: f64) -> LabError {
    match e {
        LabError::SingularMetric { .. } => LabError::ExtinctionReached { last_time: t },
        other => other,
    }
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(y, x)| y + a * x).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub t: f64,
    pub sup_ricci: f64,
    pub sup_riemann: f64,
    /// `t^{1−σ} sup|Rc|_g`.
    pub ricci_rate: f64,
    /// `t^{1−σ} sup|Rm|_g`.
    pub riemann_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateMonitor {
    pub sigma: f64,
    pub samples: Vec<RateSample>,
    /// Smallest `K` with `t^{1−σ}|Rc| ≤ K` at every sample.
    pub k_ricci: f64,
    /// Smallest `K` with `t^{1−σ}|Rm| ≤ K` at every sample.
    pub k_riemann: f64,
}

/// Curvature suprema over the trustworthy part of each state's chart.
pub fn curvature_rate_monitor(trajectory: &[FlowState], sigma: f64) -> Result<RateMonitor> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(LabError::param("sigma", "must lie in (0, 1)"));
    }
    let mut samples = Vec::with_capacity(trajectory.len());
    for s in trajectory {
        let g = s.metric()?;
        let bundle = curvature::curvature(&g);
        let points = g.chart().interior(2 * STENCIL_REACH);
        let rc = norms::norm(&g, &bundle.ricci).max_abs_over(&points);
        let rm = norms::norm(&g, &bundle.riemann).max_abs_over(&points);
        let w = s.t.powf(1.0 - sigma);
        samples.push(RateSample {
            t: s.t,
            sup_ricci: rc,
            sup_riemann: rm,
            ricci_rate: w * rc,
            riemann_rate: w * rm,
        });
    }
    let k_ricci = samples.iter().map(|s| s.ricci_rate).fold(0.0, f64::max);
    let k_riemann = samples.iter().map(|s| s.riemann_rate).fold(0.0, f64::max);
    Ok(RateMonitor {
        sigma,
        samples,
        k_ricci,
        k_riemann,
    })
}

/// Largest `max(λ_max, 1/λ_min)` of `g(t)` relative to `g(0)` over the
/// trajectory and the trustworthy points of its chart.
pub fn uniform_equivalence(trajectory: &[FlowState]) -> Result<f64> {
    let Some(first) = trajectory.first() else {
        return Ok(1.0);
    };
    let g0 = first.metric()?;
    let points = g0.chart().interior(2 * STENCIL_REACH);
    let n = g0.dim();
    let mut worst = 1.0_f64;
    for s in trajectory {
        let g = s.metric()?;
        if g.chart() != g0.chart() {
            return Err(LabError::InvalidChart("trajectory changes chart".into()));
        }
        for &p in &points {
            let (lo, hi) = linalg::relative_eigen_range(n, g.g_at(p), g0.g_at(p));
            worst = worst.max(hi).max(1.0 / lo);
        }
    }
    Ok(worst)
}

/// Write `state` as a little-endian `f64` time followed by its metric in the
/// tensor binary layout.
pub fn write_checkpoint<W: Write>(state: &FlowState, mut w: W) -> Result<()> {
    w.write_all(&state.t.to_le_bytes())?;
    state.metric()?.field().write_binary(w)
}

/// Read a checkpoint written by [`write_checkpoint`].
pub fn read_checkpoint<R: Read>(mut r: R, chart: &Chart) -> Result<(f64, TensorField)> {
    let mut t = [0u8; 8];
    r.read_exact(&mut t)?;
    let g = TensorField::read_binary(r, chart)?;
    Ok((f64::from_le_bytes(t), g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(dim: usize) -> FlowState {
        FlowState::family(ExactFamily::ShrinkingSphere { dim, r0: 1.0 }).unwrap()
    }

    fn radius_error(state: &FlowState, dt: f64, scheme: Scheme, t_end: f64) -> f64 {
        let traj = integrate(state, t_end, dt, scheme, usize::MAX).unwrap();
        let last = traj.last().unwrap();
        let FlowData::Family { family, radius } = last.data else { unreachable!() };
        (radius * radius - family.radius(last.t).unwrap().powi(2)).abs()
    }

    #[test]
    fn sphere_radius_law() {
        let e = radius_error(&sphere(3), 1e-3, Scheme::Rk4, 0.2);
        assert!(e <= 1e-6, "{e}");
        let cyl = FlowState::family(ExactFamily::ShrinkingCylinder { dim: 3, r0: 1.0 }).unwrap();
        let e = radius_error(&cyl, 1e-3, Scheme::Rk4, 0.2);
        assert!(e <= 1e-6, "{e}");
    }

    #[test]
    fn scheme_orders() {
        let s = sphere(3);
        let rk: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| radius_error(&s, dt, Scheme::Rk4, 0.2)).collect();
        for w in rk.windows(2) {
            let r = w[0] / w[1];
            assert!((12.0..=20.0).contains(&r), "{rk:?}");
        }
        let eu: Vec<f64> = [0.004, 0.002].iter().map(|&dt| radius_error(&s, dt, Scheme::Euler, 0.2)).collect();
        let r = eu[0] / eu[1];
        assert!((1.7..=2.3).contains(&r), "{eu:?}");
    }

    #[test]
    fn flat_static_is_constant() {
        let s = FlowState::family(ExactFamily::FlatStatic { dim: 3 }).unwrap();
        let traj = integrate(&s, 0.1, 0.01, Scheme::Rk4, 1).unwrap();
        assert_eq!(traj.len(), 11);
        for st in &traj {
            assert_eq!(st.data, s.data);
        }
        let m = curvature_rate_monitor(&traj, 0.5).unwrap();
        assert_eq!(m.k_ricci, 0.0);
        assert_eq!(m.k_riemann, 0.0);
    }

    #[test]
    fn extinction_is_reported() {
        let err = integrate(&sphere(3), 0.3, 1e-3, Scheme::Rk4, 10).unwrap_err();
        let LabError::ExtinctionReached { last_time } = err else { panic!("{err:?}") };
        assert!(last_time <= 0.2505 && last_time > 0.24, "{last_time}");
    }

    #[test]
    fn monitor_matches_closed_form() {
        let fam = ExactFamily::ShrinkingSphere { dim: 3, r0: 1.0 };
        let traj = integrate(&FlowState::family(fam).unwrap(), 0.2, 1e-3, Scheme::Rk4, 50).unwrap();
        let m = curvature_rate_monitor(&traj, 0.5).unwrap();
        let want = 0.2f64.sqrt() * fam.ricci_norm(fam.radius(0.2).unwrap());
        assert!((m.k_ricci - want).abs() < 1e-3 * want, "{} vs {want}", m.k_ricci);
        assert!(uniform_equivalence(&traj).unwrap() > 4.9);
    }

    #[test]
    fn monitor_diverges_near_cylinder_extinction() {
        let fam = ExactFamily::ShrinkingCylinder { dim: 3, r0: 1.0 };
        let state = FlowState::family(fam).unwrap();
        let ks: Vec<f64> = [0.3, 0.45, 0.49]
            .iter()
            .map(|&t| {
                let traj = integrate(&state, t, 1e-3, Scheme::Rk4, usize::MAX).unwrap();
                curvature_rate_monitor(&traj, 0.5).unwrap().k_ricci
            })
            .collect();
        assert!(ks[1] > 2.0 * ks[0] && ks[2] > 4.0 * ks[1], "{ks:?}");
    }

    #[test]
    fn warped_cylinder_matches_family() {
        let p = WarpedProfile::cylinder(3, 16, 1.0).unwrap();
        let traj = integrate(&FlowState::warped(p).unwrap(), 0.2, 1e-3, Scheme::Rk4, usize::MAX).unwrap();
        let FlowData::Warped(end) = &traj.last().unwrap().data else { unreachable!() };
        let want = 0.6f64.sqrt();
        assert!(end.psi.iter().all(|s| (s - want).abs() < 1e-6));
        assert!(end.phi.iter().all(|f| (f - 1.0).abs() < 1e-9));
    }

    #[test]
    fn metric_states_are_not_integrated() {
        let g = ExactFamily::FlatStatic { dim: 2 }.metric(1.0).unwrap();
        let s = FlowState::new(0.0, FlowData::Metric(g)).unwrap();
        assert!(integrate(&s, 1.0, 0.1, Scheme::Rk4, 1).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let s = sphere(2);
        let mut buf = Vec::new();
        write_checkpoint(&s, &mut buf).unwrap();
        let (t, g) = read_checkpoint(&buf[..], &s.chart()).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(&g, s.metric().unwrap().field());
    }
}
