//! Randomized verification of the exact identities relating two metrics,
//! with residuals tracked under grid refinement.

pub mod bounds;
pub mod identities;

use serde::{Deserialize, Serialize};

use crate::chart::{Axis, Chart};
use crate::difference::{MetricPair, HALO};
use crate::energy::gronwall::refinement_order;
use crate::error::{LabError, Result};
use crate::exec;
use crate::metric::MetricField;
use crate::random::PairSource;
use crate::tolerance::Tolerance;

pub use bounds::{verify_norm_evolution_bounds, BoundFit, CylinderBatchSpec, NormBoundsReport, TrajectoryBatch};
pub use identities::{Corruption, Identity, Measurement};

/// Smallest observed order accepted for a discretized identity.
pub const MIN_ORDER: f64 = 3.5;
/// Largest chart (in points) evaluated in one piece; bigger charts are cut
/// into slabs along the last axis.
pub const MAX_TILE_POINTS: usize = 48 * 128 * 128;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxCheck {
    pub name: String,
    pub max_residual: f64,
    pub max_tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub dim: usize,
    pub seed: u64,
    pub samples: usize,
    /// Resolution the samples were checked at.
    pub resolution: usize,
    /// Max-norm residual of every sample, by sample id.
    pub residuals: Vec<f64>,
    pub tolerances: Vec<f64>,
    /// Resolutions of the refinement study.
    pub resolutions: Vec<usize>,
    /// Largest relative residual over the refinement samples at each
    /// resolution.
    pub refinement: Vec<f64>,
    /// Least-squares order of `refinement`, recorded with three or more
    /// resolutions. Absent for identities exact to roundoff.
    pub order: Option<f64>,
    pub exact: bool,
    pub aux: Vec<AuxCheck>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn max_ratio(&self) -> f64 {
        self.residuals
            .iter()
            .zip(&self.tolerances)
            .map(|(r, t)| r / t)
            .fold(0.0, f64::max)
    }
}

/// What to run for one identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dim: usize,
    pub seed: u64,
    pub samples: usize,
    pub resolution: usize,
    /// Resolutions of the refinement study; empty to skip it.
    pub resolutions: Vec<usize>,
    /// Number of samples (ids `0..`) used in the refinement study.
    pub refinement_samples: usize,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(LabError::param("dim", "must be 2 or 3"));
        }
        if self.samples == 0 {
            return Err(LabError::param("samples", "must be positive"));
        }
        for &n in std::iter::once(&self.resolution).chain(&self.resolutions) {
            if n < 16 {
                return Err(LabError::param("resolution", "must be at least 16"));
            }
        }
        Ok(())
    }
}

/// The charts covering the `2π`-periodic cube at `points` per axis: the
/// whole chart, or slabs along the last axis with `HALO` extra layers on
/// each side.
pub fn covering_charts(dim: usize, points: usize) -> Result<Vec<Chart>> {
    let full = Chart::periodic(dim, points, std::f64::consts::TAU)?;
    if full.len() <= MAX_TILE_POINTS {
        return Ok(vec![full]);
    }
    let layer = full.len() / points;
    let slab = (MAX_TILE_POINTS / layer).saturating_sub(2 * HALO).max(1);
    let slab = (1..=slab).rev().find(|s| points % s == 0).unwrap_or(1);
    let dx = full.spacing(dim - 1);
    let mut axes: Vec<Axis> = full.axes().to_vec();
    (0..points / slab)
        .map(|k| {
            let width = slab + 2 * HALO;
            let origin = (k * slab) as f64 * dx - HALO as f64 * dx;
            let center = origin + dx * (width / 2) as f64;
            axes[dim - 1] = Axis::window(width, dx, center);
            Chart::new(&axes)
        })
        .collect()
}

/// The seeded pair `id` sampled on `chart`.
pub fn sample_pair(chart: &Chart, seed: u64, id: u64) -> Result<MetricPair> {
    let src = PairSource::random(chart.dim(), seed, id);
    MetricPair::new(
        MetricField::from_source(chart, &src.g)?,
        MetricField::from_source(chart, &src.g_tilde)?,
    )
}

/// Measure several identities on pair `id` at `points` per axis, sharing
/// the pair between them and merging slabs.
pub fn measure_sample_all(
    identities: &[Identity],
    dim: usize,
    points: usize,
    seed: u64,
    id: u64,
    corruption: Option<Corruption>,
) -> Result<Vec<Measurement>> {
    let mut total: Option<Vec<Measurement>> = None;
    for chart in covering_charts(dim, points)? {
        let pair = sample_pair(&chart, seed, id)?;
        let ms = identities
            .iter()
            .map(|i| i.measure(&pair, corruption))
            .collect::<Result<Vec<_>>>()?;
        total = Some(match total {
            None => ms,
            Some(t) => t.into_iter().zip(ms).map(|(a, b)| a.merge(b)).collect(),
        });
    }
    Ok(total.expect("at least one chart"))
}

/// As [`measure_sample_all`] for a single identity.
pub fn measure_sample(
    identity: Identity,
    dim: usize,
    points: usize,
    seed: u64,
    id: u64,
    corruption: Option<Corruption>,
) -> Result<Measurement> {
    Ok(measure_sample_all(&[identity], dim, points, seed, id, corruption)?.remove(0))
}

fn spacing(points: usize) -> f64 {
    std::f64::consts::TAU / points as f64
}

fn report(identity: Identity, cfg: &SuiteConfig, outcomes: &[Measurement], refinement: Vec<f64>) -> VerificationReport {
    let tol = identity.tolerance();
    let dx = spacing(cfg.resolution);
    let residuals: Vec<f64> = outcomes.iter().map(|m| m.residual).collect();
    let tolerances: Vec<f64> = outcomes.iter().map(|m| tol.bound(dx, m.scale)).collect();
    let mut pass = residuals.iter().zip(&tolerances).all(|(r, t)| r <= t);

    let mut aux: Vec<AuxCheck> = Vec::new();
    for (k, first) in outcomes[0].aux.iter().enumerate() {
        let mut check = AuxCheck {
            name: first.name.clone(),
            max_residual: 0.0,
            max_tolerance: 0.0,
            pass: true,
        };
        for m in outcomes {
            let a = &m.aux[k];
            let bound = a.tolerance.bound(dx, a.scale);
            check.max_residual = check.max_residual.max(a.residual);
            check.max_tolerance = check.max_tolerance.max(bound);
            check.pass &= a.residual <= bound;
        }
        pass &= check.pass;
        aux.push(check);
    }

    let exact = tol.c1 == 0.0;
    let order = if !exact && refinement.len() >= 3 {
        Some(refinement_order(&refinement).1)
    } else {
        None
    };
    if let Some(o) = order {
        pass &= o >= MIN_ORDER;
    }
    VerificationReport {
        id: identity.id().to_string(),
        dim: cfg.dim,
        seed: cfg.seed,
        samples: cfg.samples,
        resolution: cfg.resolution,
        residuals,
        tolerances,
        resolutions: if refinement.is_empty() { Vec::new() } else { cfg.resolutions.clone() },
        refinement,
        order,
        exact,
        aux,
        pass,
    }
}

/// Run the given identities over all samples, plus the refinement study;
/// one report per identity, in the order given.
pub fn verify_identities(identities: &[Identity], cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    let ids: Vec<u64> = (0..cfg.samples as u64).collect();
    // outcomes[sample][identity]
    let outcomes: Vec<Vec<Measurement>> = exec::map_items(&ids, |&id| {
        measure_sample_all(identities, cfg.dim, cfg.resolution, cfg.seed, id, None)
    })
    .into_iter()
    .collect::<Result<_>>()?;

    // refinement[identity][resolution]
    let mut refinement = vec![Vec::new(); identities.len()];
    if cfg.refinement_samples > 0 {
        for &n in &cfg.resolutions {
            let mut worst = vec![0.0_f64; identities.len()];
            for id in 0..cfg.refinement_samples as u64 {
                let ms = if n == cfg.resolution && (id as usize) < outcomes.len() {
                    outcomes[id as usize].clone()
                } else {
                    measure_sample_all(identities, cfg.dim, n, cfg.seed, id, None)?
                };
                for (w, m) in worst.iter_mut().zip(&ms) {
                    *w = w.max(m.residual / m.scale.max(f64::MIN_POSITIVE));
                }
            }
            for (r, w) in refinement.iter_mut().zip(worst) {
                r.push(w);
            }
        }
    }
    Ok(identities
        .iter()
        .zip(refinement)
        .enumerate()
        .map(|(k, (&identity, refine))| {
            let column: Vec<Measurement> = outcomes.iter().map(|ms| ms[k].clone()).collect();
            report(identity, cfg, &column, refine)
        })
        .collect())
}

pub fn verify_identity(identity: Identity, cfg: &SuiteConfig) -> Result<VerificationReport> {
    Ok(verify_identities(&[identity], cfg)?.remove(0))
}

/// Every identity with the same configuration, in [`Identity::ALL`] order.
pub fn verify_all(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    verify_identities(&Identity::ALL, cfg)
}

/// Residual of a deliberately corrupted identity relative to the passing
/// tolerance at the same sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativeControl {
    pub corruption: Corruption,
    pub residual: f64,
    pub tolerance: f64,
    pub ratio: f64,
}

pub fn negative_control(
    corruption: Corruption,
    dim: usize,
    points: usize,
    seed: u64,
    id: u64,
) -> Result<NegativeControl> {
    let identity = corruption.identity();
    let clean = measure_sample(identity, dim, points, seed, id, None)?;
    let bad = measure_sample(identity, dim, points, seed, id, Some(corruption))?;
    let tolerance = identity.tolerance().bound(spacing(points), clean.scale);
    Ok(NegativeControl {
        corruption,
        residual: bad.residual,
        tolerance,
        ratio: bad.residual / tolerance,
    })
}

/// The tolerance a set of relative residuals would need: the smallest `c₁`
/// with `residual ≤ c₁Δx⁴·scale` at every sample.
pub fn fitted_c1(samples: &[(f64, f64, f64)]) -> f64 {
    samples
        .iter()
        .map(|&(residual, scale, dx)| residual / (scale * dx.powi(4)))
        .fold(0.0, f64::max)
}

impl Identity {
    pub fn tolerance(&self) -> Tolerance {
        identities::tolerance_of(*self)
    }
}
