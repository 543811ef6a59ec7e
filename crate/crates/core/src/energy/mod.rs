//! Localized weighted energies of a pair of flows and the Gronwall-type
//! certificate built from them.

pub mod cutoff;
pub mod distance;
pub mod gronwall;
pub mod profile;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::difference::{bian, MetricPair};
use crate::error::{LabError, Result};
use crate::field::TensorField;
use crate::flow::warped;
use crate::metric::MetricField;
use crate::norms;
use crate::sum::compensated_sum;

pub use cutoff::{build_cutoff_weight, CutoffWeight, WeightParams};
pub use distance::Basepoint;
pub use gronwall::{gronwall_certificate, volume_growth_check, Certificate, CertificateParams, VolumeGrowth};

/// How integrals over the manifold are evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum Quadrature {
    /// Sum over the given chart points with the Riemannian density.
    Full(Vec<usize>),
    /// A warped product on its embedded chart: sum over the equator row,
    /// each `x` sample carrying the area of its whole `(n−1)`-sphere.
    Warped,
}

impl Quadrature {
    pub fn full(pair: &MetricPair) -> Self {
        Quadrature::Full(pair.points().to_vec())
    }

    /// `∫ f dμ_g`.
    pub fn integrate(&self, g: &MetricField, f: &TensorField) -> f64 {
        match self {
            Quadrature::Full(points) => g.integral(f, points),
            Quadrature::Warped => {
                let chart = g.chart();
                let n = chart.dim();
                let sphere = if n == 2 { 2.0 * PI } else { 4.0 * PI };
                let dx = chart.spacing(0);
                compensated_sum(
                    warped::equator_row(chart)
                        .into_iter()
                        .map(|p| f.value(p) * g.volume_density().value(p) * dx * sphere),
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub t: f64,
    pub b: f64,
    pub h: f64,
    pub k: f64,
}

/// `(B_r, H_r, K_r)` at time `t`: the integrals of `|B|²`, `|h|²` and
/// `|∇̃h|²` against `θ_r e^{−η} dμ_g̃`.
pub fn energies(pair: &MetricPair, t: f64, cw: &CutoffWeight, quad: &Quadrature) -> Result<EnergySample> {
    let eta = cw.eta(t)?;
    let gt = pair.g_tilde();
    let weight = TensorField::scalar_from_fn(gt.chart(), |p| cw.theta.value(p) * (-eta.value(p)).exp());
    let weighted = |f: TensorField| -> Result<f64> { Ok(quad.integrate(gt, &f.zip_map(&weight, |a, w| a * w)?)) };
    // B through h: equal to Bian(g, ∇̃, g) up to roundoff, without the
    // cancellation of ∇̃g against ∇̃g̃ when the metrics are close.
    let b = bian(pair.g(), pair.connection_tilde(), pair.h());
    Ok(EnergySample {
        t,
        b: weighted(norms::norm_sq(gt, &b))?,
        h: weighted(norms::norm_sq(gt, pair.h()))?,
        k: weighted(norms::norm_sq(gt, pair.grad_h()))?,
    })
}

/// `E_r = a B_r/t^σ + H_r/t^{1+σ}`.
pub fn combined_energy(b: f64, h: f64, t: f64, sigma: f64, a: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LabError::NonpositiveTime(t));
    }
    Ok(a * b / t.powf(sigma) + h / t.powf(1.0 + sigma))
}

/// Default `a = 8N/σ` from a fitted constant `N`, so that `aσ/4 > N`.
pub fn default_a(n_fitted: f64, sigma: f64) -> f64 {
    8.0 * n_fitted.max(f64::MIN_POSITIVE) / sigma
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub sigma: f64,
    pub a: f64,
    pub r: f64,
    pub samples: Vec<EnergySample>,
    pub combined: Vec<f64>,
    pub certificate: Option<Certificate>,
}

impl EnergyReport {
    /// Assemble a report, evaluating `E_r` at every sample with `t > 0`.
    pub fn new(samples: Vec<EnergySample>, sigma: f64, a: f64, r: f64) -> Result<Self> {
        let combined = samples
            .iter()
            .filter(|s| s.t > 0.0)
            .map(|s| combined_energy(s.b, s.h, s.t, sigma, a))
            .collect::<Result<Vec<_>>>()?;
        let samples: Vec<EnergySample> = samples.into_iter().filter(|s| s.t > 0.0).collect();
        Ok(EnergyReport {
            sigma,
            a,
            r,
            samples,
            combined,
            certificate: None,
        })
    }

    /// CSV with header `t,B_r,H_r,K_r,E_r`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,B_r,H_r,K_r,E_r")?;
        for (s, e) in self.samples.iter().zip(&self.combined) {
            writeln!(w, "{:e},{:e},{:e},{:e},{:e}", s.t, s.b, s.h, s.k, e)?;
        }
        Ok(())
    }
}
