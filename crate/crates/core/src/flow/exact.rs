//! Closed-form Ricci flows: flat, round spheres and round cylinders.
//!
//! Each family is `r(t)² ĝ` (or `dx² + r(t)² ĝ` for cylinders) for a fixed
//! model metric `ĝ`, so the state is the single number `r`. Its rate is read
//! off `−2Rc` of the sampled metric at the chart centre, and the closed-form
//! radius law is kept separately as the oracle.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::chart::{Axis, Chart};
use crate::curvature;
use crate::error::{LabError, Result};
use crate::field::{Slot, TensorField};
use crate::metric::MetricField;

use super::warped::{ANGLE_POINTS, WINDOW_POINTS, WINDOW_SPACING};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ExactFamily {
    FlatStatic { dim: usize },
    ShrinkingSphere { dim: usize, r0: f64 },
    ShrinkingCylinder { dim: usize, r0: f64 },
}

impl ExactFamily {
    pub fn validate(&self) -> Result<()> {
        let (dim, r0) = (self.dim(), self.r0());
        if !(2..=3).contains(&dim) {
            return Err(LabError::param("dim", "exact families need n = 2 or 3"));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(LabError::param("r0", "must be positive"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match *self {
            ExactFamily::FlatStatic { dim }
            | ExactFamily::ShrinkingSphere { dim, .. }
            | ExactFamily::ShrinkingCylinder { dim, .. } => dim,
        }
    }

    pub fn r0(&self) -> f64 {
        match *self {
            ExactFamily::FlatStatic { .. } => 1.0,
            ExactFamily::ShrinkingSphere { r0, .. } | ExactFamily::ShrinkingCylinder { r0, .. } => r0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExactFamily::FlatStatic { .. } => "flat-static",
            ExactFamily::ShrinkingSphere { .. } => "shrinking-sphere",
            ExactFamily::ShrinkingCylinder { .. } => "shrinking-cylinder",
        }
    }

    /// `d(r²)/dt`, constant along each family.
    pub fn radius_sq_rate(&self) -> f64 {
        let n = self.dim() as f64;
        match self {
            ExactFamily::FlatStatic { .. } => 0.0,
            ExactFamily::ShrinkingSphere { .. } => -2.0 * (n - 1.0),
            ExactFamily::ShrinkingCylinder { .. } => -2.0 * (n - 2.0),
        }
    }

    /// Closed-form `r(t)`; `None` at or after extinction.
    pub fn radius(&self, t: f64) -> Option<f64> {
        let r2 = self.r0().powi(2) + self.radius_sq_rate() * t;
        (r2 > 0.0).then(|| r2.sqrt())
    }

    /// Time at which `r` reaches zero, if it ever does.
    pub fn extinction_time(&self) -> Option<f64> {
        let rate = self.radius_sq_rate();
        (rate < 0.0).then(|| -self.r0().powi(2) / rate)
    }

    /// Closed-form `|Rc|_g` at radius `r`.
    pub fn ricci_norm(&self, r: f64) -> f64 {
        let n = self.dim() as f64;
        match self {
            ExactFamily::FlatStatic { .. } => 0.0,
            ExactFamily::ShrinkingSphere { .. } => (n - 1.0) * n.sqrt() / (r * r),
            ExactFamily::ShrinkingCylinder { .. } => (n - 2.0) * (n - 1.0).sqrt() / (r * r),
        }
    }

    /// Chart on which the family is sampled. Polar angles live on short
    /// windows around `π/2`; everything else is periodic.
    pub fn chart(&self) -> Chart {
        let angle = Axis::periodic(ANGLE_POINTS, TAU);
        let window = Axis::window(WINDOW_POINTS, WINDOW_SPACING, FRAC_PI_2);
        let axes = match (*self, self.dim()) {
            (ExactFamily::FlatStatic { dim }, _) => vec![angle; dim],
            (ExactFamily::ShrinkingSphere { .. }, 2) => vec![window, angle],
            (ExactFamily::ShrinkingSphere { .. }, _) => vec![window, window, angle],
            (ExactFamily::ShrinkingCylinder { .. }, 2) => vec![angle, angle],
            (ExactFamily::ShrinkingCylinder { .. }, _) => vec![angle, window, angle],
        };
        Chart::new(&axes).expect("family chart is valid")
    }

    /// Axis along which the scaled factor is read.
    fn radial_axis(&self) -> usize {
        match self {
            ExactFamily::ShrinkingCylinder { .. } => 1,
            _ => 0,
        }
    }

    /// The metric with radius `r`.
    pub fn metric(&self, r: f64) -> Result<MetricField> {
        if !(r > 0.0) {
            return Err(LabError::SingularMetric {
                min_eigenvalue: r,
                point: 0,
            });
        }
        let chart = self.chart();
        let n = self.dim();
        let family = *self;
        let g = TensorField::from_fn(&chart, &[Slot::Lower, Slot::Lower], |p, o| {
            let x = chart.coords(p);
            let mut diag = [1.0; 3];
            match family {
                ExactFamily::FlatStatic { .. } => diag = [r * r; 3],
                ExactFamily::ShrinkingSphere { .. } => {
                    diag[0] = r * r;
                    diag[1] = r * r * x[0].sin().powi(2);
                    if n == 3 {
                        diag[2] = diag[1] * x[1].sin().powi(2);
                    }
                }
                ExactFamily::ShrinkingCylinder { .. } => {
                    diag[1] = r * r;
                    if n == 3 {
                        diag[2] = r * r * x[1].sin().powi(2);
                    }
                }
            }
            for i in 0..n {
                o[i * n + i] = diag[i];
            }
        });
        MetricField::new(g)
    }

    /// `dr/dt` at radius `r`, from `−2Rc` of the sampled metric.
    pub fn rate(&self, r: f64) -> Result<f64> {
        let g = self.metric(r)?;
        let rc = curvature::ricci(&g);
        let p = center_point(g.chart());
        let a = self.radial_axis();
        let n = self.dim();
        let c = a * n + a;
        Ok(-rc.at(p)[c] * r / g.g_at(p)[c])
    }
}

/// Middle of every window axis, index 0 on periodic axes.
pub fn center_point(chart: &Chart) -> usize {
    let idx: Vec<usize> = chart
        .axes()
        .iter()
        .map(|a| if a.periodic { 0 } else { a.center_index() })
        .collect();
    chart.index(&idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<ExactFamily> {
        let mut out = Vec::new();
        for dim in [2, 3] {
            out.push(ExactFamily::FlatStatic { dim });
            out.push(ExactFamily::ShrinkingSphere { dim, r0: 1.0 });
            out.push(ExactFamily::ShrinkingCylinder { dim, r0: 1.0 });
        }
        out
    }

    #[test]
    fn sampled_rate_matches_radius_law() {
        // d r/dt = (d r²/dt) / (2r) at several radii.
        for f in families() {
            for r in [0.4, 0.7, 1.0, 1.3] {
                let exact = f.radius_sq_rate() / (2.0 * r);
                let got = f.rate(r).unwrap();
                assert!((got - exact).abs() < 1e-9 * (1.0 + exact.abs()), "{f:?} r={r}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn einstein_ricci_at_the_center() {
        // Rc = (n−1)/r² g on a round sphere: positive sectional curvature.
        let f = ExactFamily::ShrinkingSphere { dim: 3, r0: 1.0 };
        let g = f.metric(0.8).unwrap();
        let rc = curvature::ricci(&g);
        let p = center_point(g.chart());
        for c in 0..9 {
            let want = 2.0 / 0.64 * g.g_at(p)[c];
            assert!((rc.at(p)[c] - want).abs() < 1e-8, "{c}");
        }
    }

    #[test]
    fn radius_law_and_extinction() {
        let s = ExactFamily::ShrinkingSphere { dim: 3, r0: 1.0 };
        assert!((s.radius(0.2).unwrap().powi(2) - 0.2).abs() < 1e-15);
        assert_eq!(s.extinction_time(), Some(0.25));
        assert_eq!(s.radius(0.25), None);
        let c = ExactFamily::ShrinkingCylinder { dim: 2, r0: 1.0 };
        assert_eq!(c.extinction_time(), None);
        assert!(ExactFamily::ShrinkingSphere { dim: 4, r0: 1.0 }.validate().is_err());
    }
}
