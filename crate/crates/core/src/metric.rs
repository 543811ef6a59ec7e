//! Riemannian metrics sampled on a chart.

use crate::chart::Chart;
use crate::error::{LabError, Result};
use crate::exec;
use crate::field::{Slot, TensorField};
use crate::linalg::{self, SymMat};

/// Smallest eigenvalue accepted anywhere on the grid.
pub const SINGULAR_THRESHOLD: f64 = 1e-6;

/// A metric given by a formula in chart coordinates.
pub trait MetricSource: Send + Sync {
    fn dim(&self) -> usize;
    /// Components `g_ij` at coordinates `x` (entries beyond `dim` ignored).
    fn eval(&self, x: &[f64; 3]) -> SymMat;
}

impl<F> MetricSource for (usize, F)
where
    F: Fn(&[f64; 3]) -> SymMat + Send + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, x: &[f64; 3]) -> SymMat {
        (self.1)(x)
    }
}

/// Sample a source on a chart as a plain `(0,2)` field.
pub fn sample_metric(chart: &Chart, source: &dyn MetricSource) -> TensorField {
    let n = chart.dim();
    assert_eq!(source.dim(), n, "metric source dimension mismatch");
    TensorField::from_fn(chart, &[Slot::Lower, Slot::Lower], |p, o| {
        let m = source.eval(&chart.coords(p));
        for i in 0..n {
            for j in 0..n {
                o[i * n + j] = m[i][j];
            }
        }
    })
}

/// A symmetric positive-definite `(0,2)` field with its inverse, volume
/// density and smallest eigenvalue cached.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    g: TensorField,
    inverse: TensorField,
    volume: TensorField,
    min_eigenvalue: f64,
}

impl MetricField {
    pub fn new(g: TensorField) -> Result<Self> {
        if g.slots() != [Slot::Lower, Slot::Lower] {
            return Err(LabError::ValenceMismatch(format!(
                "metric needs slots [Lower, Lower], got {:?}",
                g.slots()
            )));
        }
        let scale = g.max_abs().max(1.0);
        let defect = g.symmetry_defect(0, 1);
        if defect > 1e-14 * scale {
            return Err(LabError::param("metric", format!("not symmetric (defect {defect:.2e})")));
        }
        let chart = *g.chart();
        let n = chart.dim();
        let nn = n * n;
        // Per point: inverse components, sqrt(det), smallest eigenvalue.
        let mut packed = vec![0.0; (nn + 2) * chart.len()];
        exec::fill_points(&mut packed, nn + 2, |p, o| {
            let m = g.at(p);
            let (inv, rest) = o.split_at_mut(nn);
            let lam = linalg::sym_eigenvalues(n, m)[0];
            rest[1] = lam;
            rest[0] = if lam > SINGULAR_THRESHOLD {
                linalg::spd_inverse(n, m, inv).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
        });
        let mut min_eigenvalue = f64::INFINITY;
        for (p, blk) in packed.chunks_exact(nn + 2).enumerate() {
            let (sd, lam) = (blk[nn], blk[nn + 1]);
            if sd.is_nan() || lam <= SINGULAR_THRESHOLD {
                return Err(LabError::SingularMetric {
                    min_eigenvalue: lam,
                    point: p,
                });
            }
            min_eigenvalue = min_eigenvalue.min(lam);
        }
        let mut inv = Vec::with_capacity(nn * chart.len());
        let mut vol = Vec::with_capacity(chart.len());
        for blk in packed.chunks_exact(nn + 2) {
            inv.extend_from_slice(&blk[..nn]);
            vol.push(blk[nn]);
        }
        Ok(MetricField {
            inverse: TensorField::from_data(&chart, &[Slot::Upper, Slot::Upper], inv)?,
            volume: TensorField::from_data(&chart, &[], vol)?,
            g,
            min_eigenvalue,
        })
    }

    pub fn from_source(chart: &Chart, source: &dyn MetricSource) -> Result<Self> {
        Self::new(sample_metric(chart, source))
    }

    /// Euclidean metric scaled by `c`.
    pub fn flat(chart: &Chart, c: f64) -> Result<Self> {
        let n = chart.dim();
        Self::new(TensorField::from_fn(chart, &[Slot::Lower, Slot::Lower], |_, o| {
            for i in 0..n {
                o[i * n + i] = c;
            }
        }))
    }

    pub fn chart(&self) -> &Chart {
        self.g.chart()
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn field(&self) -> &TensorField {
        &self.g
    }

    pub fn inverse(&self) -> &TensorField {
        &self.inverse
    }

    /// `sqrt(det g)` at every point.
    pub fn volume_density(&self) -> &TensorField {
        &self.volume
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    #[inline]
    pub fn g_at(&self, p: usize) -> &[f64] {
        self.g.at(p)
    }

    #[inline]
    pub fn inv_at(&self, p: usize) -> &[f64] {
        self.inverse.at(p)
    }

    /// Largest componentwise deviation of `g^{ik} g_{kj}` from `δ^i_j`.
    pub fn inverse_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for p in 0..self.chart().len() {
            let (g, gi) = (self.g_at(p), self.inv_at(p));
            for i in 0..n {
                for j in 0..n {
                    let v: f64 = (0..n).map(|k| gi[i * n + k] * g[k * n + j]).sum();
                    worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
        worst
    }

    /// `∫ f dμ_g` of a scalar field over the listed points.
    pub fn integral(&self, f: &TensorField, points: &[usize]) -> f64 {
        let cell = self.chart().cell_volume();
        crate::sum::compensated_sum(points.iter().map(|&p| f.value(p) * self.volume.value(p) * cell))
    }

    /// Total volume `∫ dμ_g` over the listed points.
    pub fn volume_over(&self, points: &[usize]) -> f64 {
        let cell = self.chart().cell_volume();
        crate::sum::compensated_sum(points.iter().map(|&p| self.volume.value(p) * cell))
    }
}
