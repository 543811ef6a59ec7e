//! Warped products `φ(x)² dx² + ψ(x)² g_{S^{n−1}}` over a periodic line.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::chart::{Axis, Chart};
use crate::curvature;
use crate::deriv::derivative_1d;
use crate::error::{LabError, Result};
use crate::field::{Slot, TensorField};
use crate::metric::MetricField;
use crate::random::sample_rng;

/// Samples on a periodic angle axis of an embedded chart.
pub const ANGLE_POINTS: usize = 8;
/// Samples on a polar-angle window of an embedded chart.
pub const WINDOW_POINTS: usize = 17;
/// Spacing of polar-angle windows.
pub const WINDOW_SPACING: f64 = 0.0025;

#[derive(Clone, Debug, PartialEq)]
pub struct WarpedProfile {
    pub dim: usize,
    /// Period of the `x` axis.
    pub period: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl WarpedProfile {
    pub fn new(dim: usize, period: f64, phi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(LabError::param("dim", "warped products need n = 2 or 3"));
        }
        if phi.len() != psi.len() || phi.len() < crate::chart::MIN_POINTS {
            return Err(LabError::param("profile", "φ and ψ need equal length of at least 8"));
        }
        if !(period > 0.0) {
            return Err(LabError::param("period", "must be positive"));
        }
        let profile = WarpedProfile { dim, period, phi, psi };
        profile.check_positive()?;
        Ok(profile)
    }

    /// Sample `φ` and `ψ` from formulas on `points` equally spaced `x` values.
    pub fn from_fn(
        dim: usize,
        period: f64,
        points: usize,
        phi: impl Fn(f64) -> f64,
        psi: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let xs: Vec<f64> = (0..points).map(|i| period * i as f64 / points as f64).collect();
        Self::new(
            dim,
            period,
            xs.iter().map(|&x| phi(x)).collect(),
            xs.iter().map(|&x| psi(x)).collect(),
        )
    }

    /// Round cylinder `R × S^{n−1}(r)`, periodic in `x` with period `2π`.
    pub fn cylinder(dim: usize, points: usize, radius: f64) -> Result<Self> {
        Self::from_fn(dim, TAU, points, |_| 1.0, |_| radius)
    }

    /// Multiply `ψ` by `1 + δ·b(x)` and `φ` by `1 + ½δ·b(x + 1)`, where `b`
    /// is a seeded sum of three low Fourier modes with `|b| ≤ 1`.
    pub fn perturbed(&self, delta: f64, seed: u64, id: u64) -> Result<Self> {
        let mut rng = sample_rng(seed, id);
        let modes: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| {
                let k = rng.gen_range(1..=3) as f64;
                (k, rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..TAU))
            })
            .collect();
        let w = TAU / self.period;
        let bump = |x: f64| -> f64 { modes.iter().map(|(k, a, ph)| a * (k * w * x + ph).cos()).sum::<f64>() / 3.0 };
        let (phi, psi) = (0..self.points())
            .map(|i| {
                let x = self.x(i);
                (self.phi[i] * (1.0 + 0.5 * delta * bump(x + 1.0)), self.psi[i] * (1.0 + delta * bump(x)))
            })
            .unzip();
        Self::new(self.dim, self.period, phi, psi)
    }

    pub fn points(&self) -> usize {
        self.phi.len()
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    pub fn min_psi(&self) -> f64 {
        self.psi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_phi(&self) -> f64 {
        self.phi.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_positive(&self) -> Result<()> {
        for (i, (&f, &s)) in self.phi.iter().zip(&self.psi).enumerate() {
            if !(f > 0.0 && s > 0.0 && f.is_finite() && s.is_finite()) {
                return Err(LabError::SingularMetric {
                    min_eigenvalue: f.min(s),
                    point: i,
                });
            }
        }
        Ok(())
    }

    /// Fraction of spectral energy of `φ` and `ψ` in the upper half of the
    /// resolved wavenumbers; small for smooth, well-resolved profiles.
    pub fn spectral_tail(&self) -> f64 {
        let n = self.points();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n);
        let mut worst = 0.0_f64;
        for f in [&self.phi, &self.psi] {
            let mut buf: Vec<Complex<f64>> = f.iter().map(|&v| Complex::new(v, 0.0)).collect();
            fft.process(&mut buf);
            let power = |k: usize| buf[k].norm_sqr() + if k > 0 { buf[n - k].norm_sqr() } else { 0.0 };
            let total: f64 = (1..=n / 2).map(power).sum();
            let tail: f64 = (n / 4 + 1..=n / 2).map(power).sum();
            if total > 0.0 {
                worst = worst.max(tail / total);
            }
        }
        worst
    }

    /// The embedded chart: `x` then one periodic angle (`n = 2`), or `x`, a
    /// polar-angle window around the equator and a periodic azimuth (`n = 3`).
    pub fn embedded_chart(&self) -> Chart {
        let x = Axis::periodic(self.points(), self.period);
        let angle = Axis::periodic(ANGLE_POINTS, TAU);
        let axes = if self.dim == 2 {
            vec![x, angle]
        } else {
            vec![x, Axis::window(WINDOW_POINTS, WINDOW_SPACING, FRAC_PI_2), angle]
        };
        Chart::new(&axes).expect("embedded chart is valid")
    }

    /// The warped metric sampled on [`Self::embedded_chart`].
    pub fn embedded_metric(&self) -> Result<MetricField> {
        let chart = self.embedded_chart();
        let n = self.dim;
        let g = TensorField::from_fn(&chart, &[Slot::Lower, Slot::Lower], |p, o| {
            let idx = chart.multi_index(p);
            let (f, s) = (self.phi[idx[0]], self.psi[idx[0]]);
            o[0] = f * f;
            o[n + 1] = s * s;
            if n == 3 {
                o[8] = s * s * chart.coords(p)[1].sin().powi(2);
            }
        });
        MetricField::new(g)
    }

    /// Points of the embedded chart on the equator, one per `x` sample.
    pub fn equator_row(&self) -> Vec<usize> {
        equator_row(&self.embedded_chart())
    }

    /// Profile derivatives `(∂φ/∂t, ∂ψ/∂t)` read off `−2Rc` of the
    /// embedded metric.
    pub fn rhs(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.embedded_metric()?;
        let rc = curvature::ricci(&g);
        let n = self.dim;
        let row = self.equator_row();
        let dphi = row
            .iter()
            .zip(&self.phi)
            .map(|(&p, f)| -rc.at(p)[0] / f)
            .collect();
        let dpsi = row
            .iter()
            .zip(&self.psi)
            .map(|(&p, s)| -rc.at(p)[n + 1] / s)
            .collect();
        Ok((dphi, dpsi))
    }

    /// Reduced equations written out by hand:
    /// `∂φ/∂t = (n−1) φ ψ_ss/ψ`, `∂ψ/∂t = ψ_ss − (n−2)(1 − ψ_s²)/ψ`,
    /// with `d/ds = φ⁻¹ d/dx`.
    pub fn rhs_closed_form(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.spacing();
        let dpsi = derivative_1d(&self.psi, h);
        let ddpsi = derivative_1d(&dpsi, h);
        let dphi = derivative_1d(&self.phi, h);
        let m = (self.dim - 1) as f64;
        let mut out_phi = Vec::with_capacity(self.points());
        let mut out_psi = Vec::with_capacity(self.points());
        for i in 0..self.points() {
            let (f, s) = (self.phi[i], self.psi[i]);
            let ps = dpsi[i] / f;
            let pss = ddpsi[i] / (f * f) - dpsi[i] * dphi[i] / (f * f * f);
            out_phi.push(m * f * pss / s);
            out_psi.push(pss - (m - 1.0) * (1.0 - ps * ps) / s);
        }
        (out_phi, out_psi)
    }
}

/// Equator points of an embedded chart: every `x`, middle of the polar
/// window, first azimuth sample.
pub fn equator_row(chart: &Chart) -> Vec<usize> {
    (0..chart.axis(0).points)
        .map(|i| {
            let mut idx = [i, 0, 0];
            if chart.dim() == 3 {
                idx[1] = chart.axis(1).center_index();
            }
            chart.index(&idx[..chart.dim()])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bumpy(dim: usize, points: usize) -> WarpedProfile {
        WarpedProfile::from_fn(
            dim,
            TAU,
            points,
            |x| 1.0 + 0.1 * (x + 0.3).sin(),
            |x| 1.0 + 0.1 * x.cos() + 0.05 * (2.0 * x).sin(),
        )
        .unwrap()
    }

    #[test]
    fn tensor_rhs_matches_closed_form() {
        for dim in [2, 3] {
            let mut err = Vec::new();
            for points in [32, 64] {
                let p = bumpy(dim, points);
                let (a_phi, a_psi) = p.rhs().unwrap();
                let (b_phi, b_psi) = p.rhs_closed_form();
                let e = a_phi
                    .iter()
                    .zip(&b_phi)
                    .chain(a_psi.iter().zip(&b_psi))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                err.push(e);
            }
            // Two different fourth-order discretizations of the same equations.
            assert!(err[0] / err[1] > 12.0 && err[1] < 1e-4, "dim {dim}: {err:?}");
        }
    }

    #[test]
    fn cylinder_rhs() {
        let p = WarpedProfile::cylinder(3, 16, 0.8).unwrap();
        let (dphi, dpsi) = p.rhs().unwrap();
        assert!(dphi.iter().all(|v| v.abs() < 1e-12));
        for v in dpsi {
            assert!((v + 1.0 / 0.8).abs() < 1e-7, "{v}");
        }
        let p = WarpedProfile::cylinder(2, 16, 0.8).unwrap();
        let (dphi, dpsi) = p.rhs().unwrap();
        assert!(dphi.iter().chain(&dpsi).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn spectral_tail_flags_rough_profiles() {
        assert!(bumpy(3, 64).spectral_tail() < 1e-20);
        let rough = WarpedProfile::from_fn(3, TAU, 64, |_| 1.0, |x| 1.0 + 0.1 * (20.0 * x).cos()).unwrap();
        assert!(rough.spectral_tail() > 0.5);
    }

    #[test]
    fn nonpositive_profiles_are_rejected() {
        let r = WarpedProfile::from_fn(2, TAU, 16, |_| 1.0, |x| x.cos());
        assert!(matches!(r, Err(LabError::SingularMetric { .. })));
    }
}
