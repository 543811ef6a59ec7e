//! Gronwall certificate for `E_r` and the volume-growth envelope.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::TensorField;
use crate::metric::MetricField;

use super::distance::{self, Basepoint};
use super::{combined_energy, EnergySample, Quadrature};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateParams {
    pub sigma: f64,
    pub a: f64,
    /// Ellipticity constant multiplying `K_r` in the damping terms.
    pub alpha0: f64,
    /// Cutoff radius (`∞` for the compact weight, which has no leakage).
    pub r: f64,
    /// Volume growth exponent.
    pub vbar: f64,
    /// Start of the certified window.
    pub t0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub t0: f64,
    pub t1: f64,
    /// Smallest `C` with `log E(t) ≤ log E(t₀) + C(t − t₀)` on `[t₀, t₁]`.
    pub c: f64,
    /// Fitted constant in the damping factors `1 − N₃t^σ`.
    pub n3: f64,
    /// `N₃^{−1/σ}`: end of the window where the damping terms are negative.
    pub window_end: f64,
    /// `(N₃/σ)(t₁^σ − t₀^σ)e^{−r² + V̄r}`.
    pub leakage: f64,
    pub e_t0: f64,
    pub e_t1: f64,
    /// `E(t₁) ≤ E(t₀) + leakage`.
    pub decays: bool,
}

impl Certificate {
    pub fn passes(&self) -> bool {
        self.c.is_finite() && self.window_end > self.t0 && self.decays
    }
}

/// Fit the certificate constants over a time series of energies.
pub fn gronwall_certificate(samples: &[EnergySample], p: &CertificateParams) -> Result<Certificate> {
    if !(p.sigma > 0.0 && p.sigma < 1.0) {
        return Err(LabError::param("sigma", "must lie in (0, 1)"));
    }
    if !(p.t0 > 0.0) {
        return Err(LabError::NonpositiveTime(p.t0));
    }
    let series: Vec<&EnergySample> = samples.iter().filter(|s| s.t >= p.t0 * (1.0 - 1e-12)).collect();
    if series.len() < 3 {
        return Err(LabError::WindowEmpty {
            t0: p.t0,
            window_end: series.last().map_or(p.t0, |s| s.t),
        });
    }
    let e: Vec<f64> = series
        .iter()
        .map(|s| combined_energy(s.b, s.h, s.t, p.sigma, p.a))
        .collect::<Result<_>>()?;
    let t: Vec<f64> = series.iter().map(|s| s.t).collect();
    let t0 = t[0];
    let last = *t.last().unwrap();

    if e.iter().all(|&v| v == 0.0) {
        return Ok(Certificate {
            t0,
            t1: last,
            c: 0.0,
            n3: 0.0,
            window_end: f64::INFINITY,
            leakage: 0.0,
            e_t0: 0.0,
            e_t1: 0.0,
            decays: true,
        });
    }

    let s = p.sigma;
    let mut n3 = 0.0_f64;
    for i in 1..t.len() - 1 {
        let de = (e[i + 1] - e[i - 1]) / (t[i + 1] - t[i - 1]);
        let x = &series[i];
        let d = p.a * s / 4.0 * x.b / t[i].powf(1.0 + s)
            + (1.0 + s) * x.h / t[i].powf(2.0 + s)
            + p.alpha0 * x.k / t[i].powf(1.0 + s);
        if d > 0.0 {
            n3 = n3.max((de + d) / (t[i].powf(s) * d));
        }
    }
    let window_end = if n3 > 0.0 { n3.powf(-1.0 / s) } else { f64::INFINITY };
    if window_end <= t0 {
        return Err(LabError::WindowEmpty { t0, window_end });
    }
    let t1_cap = window_end.min(last);
    let i1 = t.iter().rposition(|&x| x <= t1_cap).unwrap_or(0);
    let t1 = t[i1];

    let mut c = f64::NEG_INFINITY;
    for i in 1..=i1 {
        if e[i] > 0.0 && e[0] > 0.0 {
            c = c.max((e[i].ln() - e[0].ln()) / (t[i] - t0));
        }
    }
    let leakage = if p.r.is_finite() {
        n3 / s * (t1.powf(s) - t0.powf(s)) * (-p.r * p.r + p.vbar * p.r).exp()
    } else {
        0.0
    };
    Ok(Certificate {
        t0,
        t1,
        c,
        n3,
        window_end,
        leakage,
        e_t0: e[0],
        e_t1: e[i1],
        decays: e[i1] <= e[0] + leakage,
    })
}

/// Per-halving reduction factors of a refinement sequence, and the order
/// fitted by least squares against `log₂` of the refinement level.
pub fn refinement_order(values: &[f64]) -> (Vec<f64>, f64) {
    let ratios: Vec<f64> = values.windows(2).map(|w| w[0] / w[1]).collect();
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| (i as f64, -v.log2()))
        .collect();
    (ratios, least_squares_slope(&pts))
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeGrowth {
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    /// Fitted growth exponent.
    pub vbar: f64,
    /// Fitted prefactor.
    pub n: f64,
    pub passes: bool,
}

/// Volumes of `g̃` over the `ḡ`-balls of radius `r, 2r, 3r`, and the
/// exponential envelope `N e^{V̄ R}` fitted to them.
pub fn volume_growth_check(
    g_tilde: &MetricField,
    gbar: &MetricField,
    basepoint: Basepoint,
    r: f64,
    quad: &Quadrature,
) -> Result<VolumeGrowth> {
    if !(r > 0.0) {
        return Err(LabError::param("r", "must be positive"));
    }
    let rbar = distance::graph_distance(gbar, &basepoint.sources(gbar.chart()));
    let radii = vec![r, 2.0 * r, 3.0 * r];
    let volumes: Vec<f64> = radii
        .iter()
        .map(|&rad| {
            let ball = TensorField::scalar_from_fn(gbar.chart(), |p| if rbar.value(p) <= rad { 1.0 } else { 0.0 });
            quad.integrate(g_tilde, &ball)
        })
        .collect();
    let vbar = volumes
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| (w[1] / w[0]).ln() / r)
        .fold(0.0, f64::max);
    let n = radii
        .iter()
        .zip(&volumes)
        .map(|(rad, v)| v * (-vbar * rad).exp())
        .fold(0.0, f64::max);
    let passes = vbar.is_finite()
        && radii
            .iter()
            .zip(&volumes)
            .all(|(rad, v)| *v <= n * (vbar * rad).exp() * (1.0 + 1e-12));
    Ok(VolumeGrowth {
        radii,
        volumes,
        vbar,
        n,
        passes,
    })
}
