//! Seeded random smooth metrics on `2π`-periodic charts.

use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chart::Chart;
use crate::linalg::{self, SymMat};
use crate::metric::MetricSource;

/// Largest absolute value of any mode coefficient.
pub const MAX_COEFFICIENT: f64 = 0.15;
/// Samples whose metric has a smaller eigenvalue anywhere are redrawn.
pub const MIN_EIGENVALUE: f64 = 0.3;
/// Points per axis of the grid used for the eigenvalue screen. It does not
/// depend on the resolution a sample is later evaluated at.
const SCREEN_POINTS: usize = 32;
const MODES: usize = 4;

/// Deterministic generator for sample `id` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrigMode {
    pub k: [i32; 3],
    pub phase: f64,
    pub coeff: SymMat,
}

impl TrigMode {
    fn angle(&self, x: &[f64; 3]) -> f64 {
        self.k[0] as f64 * x[0] + self.k[1] as f64 * x[1] + self.k[2] as f64 * x[2] + self.phase
    }
}

/// `g = base + Σ C_m cos(k_m·x + φ_m)` with wave vectors in `{-1, 0, 1}^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigMetric {
    dim: usize,
    base: SymMat,
    modes: Vec<TrigMode>,
}

impl TrigMetric {
    pub fn new(dim: usize, base: SymMat, modes: Vec<TrigMode>) -> Self {
        TrigMetric { dim, base, modes }
    }

    /// Euclidean metric plus random modes, redrawn until the eigenvalue
    /// screen passes.
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        loop {
            let m = TrigMetric::new(dim, linalg::identity(), random_modes(dim, MODES, rng));
            if m.passes_screen() {
                return m;
            }
        }
    }

    pub fn modes(&self) -> &[TrigMode] {
        &self.modes
    }

    /// This metric with extra modes added.
    pub fn with_modes(&self, extra: &[TrigMode]) -> Self {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(extra);
        TrigMetric::new(self.dim, self.base, modes)
    }

    /// Smallest eigenvalue over the screening grid.
    pub fn screen_min_eigenvalue(&self) -> f64 {
        let chart = Chart::periodic(self.dim, SCREEN_POINTS, TAU).expect("screen chart");
        let n = self.dim;
        let mut worst = f64::INFINITY;
        for p in 0..chart.len() {
            let m = self.eval(&chart.coords(p));
            let mut flat = [0.0; 9];
            for i in 0..n {
                for j in 0..n {
                    flat[i * n + j] = m[i][j];
                }
            }
            worst = worst.min(linalg::sym_eigenvalues(n, &flat[..n * n])[0]);
        }
        worst
    }

    /// `g − MIN_EIGENVALUE·I` positive definite at every screening point,
    /// by leading principal minors; stops at the first failure.
    pub fn passes_screen(&self) -> bool {
        let chart = Chart::periodic(self.dim, SCREEN_POINTS, TAU).expect("screen chart");
        (0..chart.len()).all(|p| {
            let mut m = self.eval(&chart.coords(p));
            for (i, row) in m.iter_mut().enumerate() {
                row[i] -= MIN_EIGENVALUE;
            }
            let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let ok = m[0][0] > 0.0 && d2 > 0.0;
            if self.dim == 2 {
                return ok;
            }
            let d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            ok && d3 > 0.0
        })
    }
}

impl MetricSource for TrigMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64; 3]) -> SymMat {
        let mut m = self.base;
        for mode in &self.modes {
            let c = mode.angle(x).cos();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    m[i][j] += mode.coeff[i][j] * c;
                }
            }
        }
        m
    }
}

pub fn random_modes(dim: usize, count: usize, rng: &mut impl Rng) -> Vec<TrigMode> {
    (0..count)
        .map(|_| {
            let mut k = [0i32; 3];
            while k[..dim].iter().all(|&c| c == 0) {
                for c in k.iter_mut().take(dim) {
                    *c = rng.gen_range(-1..=1);
                }
            }
            let mut coeff = [[0.0; 3]; 3];
            for i in 0..dim {
                for j in i..dim {
                    let v = rng.gen_range(-MAX_COEFFICIENT..=MAX_COEFFICIENT);
                    coeff[i][j] = v;
                    coeff[j][i] = v;
                }
            }
            TrigMode {
                k,
                phase: rng.gen_range(0.0..TAU),
                coeff,
            }
        })
        .collect()
}

/// A seeded pair `(g, g̃)`: `g̃` is a random metric and `g` adds further modes.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSource {
    pub g: TrigMetric,
    pub g_tilde: TrigMetric,
}

impl PairSource {
    pub fn random(dim: usize, seed: u64, id: u64) -> Self {
        let mut rng = sample_rng(seed, id);
        let g_tilde = TrigMetric::random(dim, &mut rng);
        loop {
            let g = g_tilde.with_modes(&random_modes(dim, MODES, &mut rng));
            if g.passes_screen() {
                return PairSource { g, g_tilde };
            }
        }
    }
}

/// A scalar trigonometric polynomial `u = Σ a cos(k·x + φ)` with exact
/// derivatives, used to build conformal metrics with closed-form geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigScalar {
    pub terms: Vec<([i32; 3], f64, f64)>,
}

impl TrigScalar {
    fn parts(&self) -> impl Iterator<Item = ([f64; 3], f64, f64)> + '_ {
        self.terms
            .iter()
            .map(|&(k, a, ph)| ([k[0] as f64, k[1] as f64, k[2] as f64], a, ph))
    }

    pub fn value(&self, x: &[f64; 3]) -> f64 {
        self.parts()
            .map(|(k, a, ph)| a * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos())
            .sum()
    }

    pub fn gradient(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut d = [0.0; 3];
        for (k, a, ph) in self.parts() {
            let s = -a * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).sin();
            for i in 0..3 {
                d[i] += s * k[i];
            }
        }
        d
    }

    /// Flat Laplacian `Σ ∂²u/∂x_i²` over the first `dim` coordinates.
    pub fn laplacian(&self, x: &[f64; 3], dim: usize) -> f64 {
        self.parts()
            .map(|(k, a, ph)| {
                let k2: f64 = k[..dim].iter().map(|c| c * c).sum();
                -a * k2 * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos()
            })
            .sum()
    }
}

/// `e^{2u} δ` in dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalMetric {
    pub dim: usize,
    pub u: TrigScalar,
}

impl MetricSource for ConformalMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64; 3]) -> SymMat {
        let e = (2.0 * self.u.value(x)).exp();
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate().take(self.dim) {
            row[i] = e;
        }
        m
    }
}
