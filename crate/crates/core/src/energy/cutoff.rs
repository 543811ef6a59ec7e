//! The cutoff `θ_r = φ(ρ/r)` and the weight `η(x, t) = βρ²/(4(2τ − t))`.

use serde::{Deserialize, Serialize};

use crate::deriv::{self, STENCIL_REACH};
use crate::error::{LabError, Result};
use crate::field::TensorField;
use crate::metric::MetricField;
use crate::norms;

use super::distance::{self, Basepoint};
use super::profile;

/// Bound on `|∇̄ρ|_ḡ`.
pub const RHO_GRADIENT_BOUND: f64 = 2.0;
/// Bound on `(φ′)²/φ`.
pub const PROFILE_RATIO_BOUND: f64 = 10.0;
/// Bound on `r²|∇̄θ_r|²_ḡ/θ_r`.
pub const THETA_GRADIENT_BOUND: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub r: f64,
    pub l1: f64,
    pub l2: f64,
    /// Comparison constant in `ḡ ≤ γ g̃(t)`.
    pub gamma: f64,
    /// Defaults to the largest admissible value `1/(4 L₁ γ)`.
    pub beta: Option<f64>,
    /// Defaults to `T′`.
    pub tau: Option<f64>,
}

impl WeightParams {
    pub fn beta_max(&self) -> f64 {
        1.0 / (4.0 * self.l1 * self.gamma)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("r", self.r), ("l1", self.l1), ("l2", self.l2), ("gamma", self.gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(LabError::param(name, "must be positive"));
            }
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b <= self.beta_max() * (1.0 + 1e-12)) {
                return Err(LabError::param("beta", "must lie in (0, 1/(4 L1 gamma)]"));
            }
        }
        Ok(())
    }
}

/// Largest `τ` for which `η_τ(·, 0) ≥ L₂ r̄²`: `β/(8 L₂)`.
pub fn t_prime(beta: f64, l2: f64) -> f64 {
    beta / (8.0 * l2)
}

#[derive(Clone, Debug)]
pub struct CutoffWeight {
    pub params: WeightParams,
    pub basepoint: Option<Basepoint>,
    pub beta: f64,
    pub tau: f64,
    pub t_prime: f64,
    /// Graph distance `r̄`.
    pub rbar: TensorField,
    /// Smoothed distance `ρ`.
    pub rho: TensorField,
    /// `∂ρ` in coordinates.
    pub grad_rho: TensorField,
    pub theta: TensorField,
    /// Points where the fields are trustworthy.
    pub points: Vec<usize>,
    compact: bool,
}

impl CutoffWeight {
    /// `θ ≡ 1`, `η ≡ 0`, valid for all time.
    pub fn compact(gbar: &MetricField) -> Self {
        let chart = gbar.chart();
        let zero = TensorField::scalar_zeros(chart);
        CutoffWeight {
            params: WeightParams {
                r: f64::INFINITY,
                l1: 0.0,
                l2: 0.0,
                gamma: 1.0,
                beta: Some(0.0),
                tau: None,
            },
            basepoint: None,
            beta: 0.0,
            tau: f64::INFINITY,
            t_prime: f64::INFINITY,
            rbar: zero.clone(),
            rho: zero.clone(),
            grad_rho: TensorField::zeros(chart, &[crate::field::Slot::Lower]),
            theta: TensorField::scalar_from_fn(chart, |_| 1.0),
            points: chart.interior(2 * STENCIL_REACH),
            compact: true,
        }
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    /// `η(·, t)`.
    pub fn eta(&self, t: f64) -> Result<TensorField> {
        self.check_time(t)?;
        if self.compact {
            return Ok(TensorField::scalar_zeros(self.theta.chart()));
        }
        let c = self.beta / (4.0 * (2.0 * self.tau - t));
        Ok(self.rho.map(|r| c * r * r))
    }

    /// `∂η/∂t` at time `t`.
    pub fn eta_rate(&self, t: f64) -> Result<TensorField> {
        self.check_time(t)?;
        if self.compact {
            return Ok(TensorField::scalar_zeros(self.theta.chart()));
        }
        let c = self.beta / (4.0 * (2.0 * self.tau - t).powi(2));
        Ok(self.rho.map(|r| c * r * r))
    }

    /// Coordinate gradient `∂η` at time `t`.
    pub fn grad_eta(&self, t: f64) -> Result<TensorField> {
        self.check_time(t)?;
        if self.compact {
            return Ok(self.grad_rho.clone());
        }
        let c = self.beta / (2.0 * (2.0 * self.tau - t));
        Ok(TensorField::from_fn(self.rho.chart(), self.grad_rho.slots(), |p, o| {
            let s = c * self.rho.value(p);
            for (o, d) in o.iter_mut().zip(self.grad_rho.at(p)) {
                *o = s * d;
            }
        }))
    }

    /// Coordinate gradient `∂θ_r`.
    pub fn grad_theta(&self) -> TensorField {
        let r = self.params.r;
        TensorField::from_fn(self.rho.chart(), self.grad_rho.slots(), |p, o| {
            let s = if self.compact { 0.0 } else { profile::dphi(self.rho.value(p) / r) / r };
            for (o, d) in o.iter_mut().zip(self.grad_rho.at(p)) {
                *o = s * d;
            }
        })
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t <= self.tau {
            Ok(())
        } else {
            Err(LabError::OutsideValidityWindow { t, tau: self.tau })
        }
    }

    /// `−∂η/∂t + L₁|∇̃η|²_g̃ ≤ 0` for an actual `g̃(t)`.
    pub fn check_weight_inequality(&self, g_tilde: &MetricField, t: f64) -> Result<()> {
        let rate = self.eta_rate(t)?;
        let grad = norms::norm_sq(g_tilde, &self.grad_eta(t)?);
        for &p in &self.points {
            let lhs = -rate.value(p) + self.params.l1 * grad.value(p);
            if lhs > 1e-12 * rate.value(p).max(1e-300) {
                return Err(violation("weight inequality", p, format!("−∂η/∂t + L₁|∇̃η|² = {lhs:.3e} at t = {t}")));
            }
        }
        Ok(())
    }

    /// Points where `θ_r` is not locally constant.
    pub fn leakage_set(&self) -> Vec<usize> {
        let g = self.grad_theta();
        self.points.iter().copied().filter(|&p| g.at(p).iter().any(|v| *v != 0.0)).collect()
    }
}

fn violation(bound: &str, point: usize, detail: String) -> LabError {
    LabError::InvariantViolation {
        bound: bound.to_string(),
        point,
        detail,
    }
}

/// Build `ρ`, `θ_r` and `η` around `basepoint` and verify every pointwise
/// invariant on the grid.
pub fn build_cutoff_weight(gbar: &MetricField, basepoint: Basepoint, params: WeightParams) -> Result<CutoffWeight> {
    params.validate()?;
    let chart = *gbar.chart();
    if let Basepoint::Point(p) = basepoint {
        if p >= chart.len() {
            return Err(LabError::param("basepoint", "outside the chart"));
        }
    }
    let beta = params.beta.unwrap_or_else(|| params.beta_max());
    let t_prime = t_prime(beta, params.l2);
    let tau = params.tau.unwrap_or(t_prime);
    if !(tau > 0.0 && tau <= t_prime * (1.0 + 1e-12)) {
        return Err(LabError::param("tau", "must lie in (0, T']"));
    }

    let rbar = distance::graph_distance(gbar, &basepoint.sources(&chart));
    let smooth = distance::mollify(&rbar);
    let points = chart.interior(2 * STENCIL_REACH);
    let lift = points
        .iter()
        .map(|&p| rbar.value(p) - smooth.value(p))
        .fold(f64::NEG_INFINITY, f64::max);
    let rho = smooth.map(|v| v + lift);
    let grad_rho = deriv::gradient(&rho);
    let theta = rho.map(|v| profile::phi(v / params.r));

    let cw = CutoffWeight {
        params,
        basepoint: Some(basepoint),
        beta,
        tau,
        t_prime,
        rbar,
        rho,
        grad_rho,
        theta,
        points,
        compact: false,
    };
    verify(&cw, gbar)?;
    Ok(cw)
}

fn verify(cw: &CutoffWeight, gbar: &MetricField) -> Result<()> {
    let r = cw.params.r;
    let grad_rho_sq = norms::norm_sq(gbar, &cw.grad_rho);
    let grad_theta_sq = norms::norm_sq(gbar, &cw.grad_theta());
    let eta0 = cw.eta(0.0)?;
    for &p in &cw.points {
        let (rb, rho) = (cw.rbar.value(p), cw.rho.value(p));
        if !(rb <= rho + 1e-12 && rho <= rb + 1.0) {
            return Err(violation("r̄ ≤ ρ ≤ r̄ + 1", p, format!("r̄ = {rb:.6}, ρ = {rho:.6}")));
        }
        let g = grad_rho_sq.value(p).sqrt();
        if g > RHO_GRADIENT_BOUND {
            return Err(violation("|∇̄ρ| ≤ 2", p, format!("|∇̄ρ| = {g:.6}")));
        }
        let s = rho / r;
        let (f, df) = (profile::phi(s), profile::dphi(s));
        if df * df > PROFILE_RATIO_BOUND * f {
            return Err(violation("(φ′)² ≤ 10φ", p, format!("φ = {f:.3e}, φ′ = {df:.3e}")));
        }
        let th = cw.theta.value(p);
        if rb <= r && th != 1.0 {
            return Err(violation("θ_r ≡ 1 on B(x₀, r)", p, format!("θ = {th}")));
        }
        let gt = grad_theta_sq.value(p);
        if gt > THETA_GRADIENT_BOUND * th / (r * r) {
            return Err(violation("|∇̄θ_r|² ≤ 40θ_r/r²", p, format!("|∇̄θ|² = {gt:.3e}, θ = {th:.3e}")));
        }
        let lower = cw.params.l2 * rb * rb;
        if eta0.value(p) < lower {
            return Err(violation("η ≥ L₂r̄²", p, format!("η = {:.6}, L₂r̄² = {lower:.6}", eta0.value(p))));
        }
    }
    // With ḡ ≤ γ g̃, |∇̃η|²_g̃ ≤ γ|∇̄η|²_ḡ, so this covers every admissible g̃.
    for t in [0.0, 0.5 * cw.tau, cw.tau] {
        let rate = cw.eta_rate(t)?;
        let grad = norms::norm_sq(gbar, &cw.grad_eta(t)?);
        for &p in &cw.points {
            let lhs = -rate.value(p) + cw.params.l1 * cw.params.gamma * grad.value(p);
            if lhs > 1e-12 * rate.value(p) {
                return Err(violation(
                    "−∂η/∂t + L₁|∇̃η|² ≤ 0",
                    p,
                    format!("value {lhs:.3e} at t = {t}"),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::random::{sample_rng, TrigMetric};
    use std::f64::consts::TAU;

    fn params(r: f64, beta_frac: f64) -> WeightParams {
        let (l1, l2, gamma) = (1.0, 1.0, 1.5);
        WeightParams {
            r,
            l1,
            l2,
            gamma,
            beta: Some(beta_frac / (l1 * gamma)),
            tau: None,
        }
    }

    #[test]
    fn random_metric_passes_all_invariants() {
        let chart = Chart::periodic(2, 64, TAU).unwrap();
        let src = TrigMetric::random(2, &mut sample_rng(3, 0));
        let g = MetricField::from_source(&chart, &src).unwrap();
        for beta in [0.25, 0.1] {
            let cw = build_cutoff_weight(&g, Basepoint::Point(0), params(1.0, beta)).unwrap();
            assert_eq!(cw.tau, cw.beta / 8.0);
            assert!(!cw.leakage_set().is_empty());
            cw.check_weight_inequality(&g, cw.tau).unwrap();
        }
    }

    #[test]
    fn large_radius_gives_trivial_cutoff() {
        let chart = Chart::periodic(2, 32, TAU).unwrap();
        let g = MetricField::flat(&chart, 1.0).unwrap();
        let cw = build_cutoff_weight(&g, Basepoint::Point(0), params(10.0, 0.25)).unwrap();
        assert!(cw.theta.data().iter().all(|&v| v == 1.0));
        assert!(cw.leakage_set().is_empty());
    }

    #[test]
    fn square_root_window_breaks_the_lower_bound() {
        // τ = √(β/(8L₂)) exceeds β/(8L₂) whenever β/(8L₂) < 1, and then
        // η(·, 0) = βρ²/(8τ) falls below L₂r̄² away from the basepoint.
        let chart = Chart::periodic(2, 32, TAU).unwrap();
        let g = MetricField::flat(&chart, 1.0).unwrap();
        let mut p = params(1.0, 0.25);
        let beta = p.beta.unwrap();
        assert!(t_prime(beta, p.l2) < 1.0);
        p.tau = Some((beta / (8.0 * p.l2)).sqrt());
        assert!(matches!(build_cutoff_weight(&g, Basepoint::Point(0), p), Err(LabError::InvalidParameter { .. })));
        let cw = build_cutoff_weight(&g, Basepoint::Point(0), params(1.0, 0.25)).unwrap();
        let eta = cw.rho.map(|r| beta * r * r / (8.0 * (beta / (8.0 * p.l2)).sqrt()));
        let far = (0..chart.len()).max_by(|&a, &b| cw.rbar.value(a).total_cmp(&cw.rbar.value(b))).unwrap();
        assert!(eta.value(far) < p.l2 * cw.rbar.value(far).powi(2));
    }

    #[test]
    fn weight_time_checks() {
        let chart = Chart::periodic(2, 16, TAU).unwrap();
        let g = MetricField::flat(&chart, 1.0).unwrap();
        let cw = build_cutoff_weight(&g, Basepoint::Point(0), params(1.0, 0.25)).unwrap();
        assert!(matches!(cw.eta(cw.tau * 1.01), Err(LabError::OutsideValidityWindow { .. })));
        assert!(cw.eta(-0.1).is_err());
        let c = CutoffWeight::compact(&g);
        assert!(c.eta(1e6).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn excessive_beta_is_rejected() {
        let chart = Chart::periodic(2, 16, TAU).unwrap();
        let g = MetricField::flat(&chart, 1.0).unwrap();
        assert!(build_cutoff_weight(&g, Basepoint::Point(0), params(1.0, 0.3)).is_err());
    }
}
