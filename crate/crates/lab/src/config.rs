//! Scenario configuration: one flat TOML table, every key optional, unknown
//! keys rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

/// Resolutions a scenario may request.
pub const RESOLUTIONS: [usize; 4] = [32, 64, 128, 256];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Exact shrinking sphere.
    Sphere,
    /// Exact shrinking cylinder.
    Cylinder,
    /// Round cylinder evolved through the warped-product equations.
    WarpedCylinder,
    /// `ψ = r₀(1 + amplitude·cos x)`, `φ = 1`.
    BumpyCylinder,
}

impl Family {
    pub fn is_exact(self) -> bool {
        matches!(self, Family::Sphere | Family::Cylinder)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Required by every randomized scenario.
    pub seed: Option<u64>,
    pub dim: usize,
    /// Grid points per axis (the `x` axis for warped families).
    pub resolution: usize,
    /// Refinement ladder of the identity suite.
    pub resolutions: Vec<usize>,
    pub samples: usize,
    pub refinement_samples: usize,

    pub family: Family,
    pub r0: f64,
    pub amplitude: f64,
    /// Relative size of the seeded perturbation of the second solution.
    pub delta: f64,

    pub sigma: f64,
    pub a: f64,
    pub r: f64,
    pub l1: f64,
    pub l2: f64,
    pub gamma: f64,
    pub beta: Option<f64>,

    pub dt: f64,
    /// Step of the second solution; defaults to `dt`.
    pub dt_tilde: Option<f64>,
    /// Step ladder of the flow halving check and the time-refinement study.
    pub dts: Vec<f64>,
    pub t_end: f64,
    /// Start of the certified window.
    pub t0: f64,
    /// Keep every `stride`-th step.
    pub stride: usize,
    /// Largest `E_r` accepted by the uniqueness scenario.
    pub energy_tolerance: f64,

    /// Output directory. Not part of the summary, so reruns into different
    /// directories stay byte-identical.
    #[serde(skip_serializing)]
    pub out: Option<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: None,
            dim: 3,
            resolution: 32,
            resolutions: vec![32, 64, 128],
            samples: 20,
            refinement_samples: 1,
            family: Family::BumpyCylinder,
            r0: 1.0,
            amplitude: 0.1,
            delta: 0.0,
            sigma: 0.5,
            a: 1.0,
            r: 1.5,
            l1: 0.25,
            l2: 0.5,
            gamma: 1.5,
            beta: None,
            dt: 1e-3,
            dt_tilde: None,
            dts: vec![0.01, 0.005, 0.0025],
            t_end: 0.1,
            t0: 0.01,
            stride: 10,
            energy_tolerance: 0.0,
            out: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Read(String),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {reason}")]
    Field { field: String, reason: String },
}

fn bad(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        reason: reason.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn dt_tilde(&self) -> f64 {
        self.dt_tilde.unwrap_or(self.dt)
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| bad("seed", "required by this scenario"))
    }

    /// Range checks shared by every scenario.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=3).contains(&self.dim) {
            return Err(bad("dim", "must be 2 or 3"));
        }
        if !RESOLUTIONS.contains(&self.resolution) {
            return Err(bad("resolution", "must be one of 32, 64, 128, 256"));
        }
        if let Some(n) = self.resolutions.iter().find(|n| !RESOLUTIONS.contains(n)) {
            return Err(bad("resolutions", format!("{n} is not one of 32, 64, 128, 256")));
        }
        if self.samples == 0 {
            return Err(bad("samples", "must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(bad("sigma", "must lie in (0, 1)"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(bad("delta", "must be nonnegative"));
        }
        if !(self.amplitude >= 0.0 && self.amplitude < 1.0) {
            return Err(bad("amplitude", "must lie in [0, 1)"));
        }
        for (name, v) in [
            ("r0", self.r0),
            ("a", self.a),
            ("r", self.r),
            ("l1", self.l1),
            ("l2", self.l2),
            ("gamma", self.gamma),
            ("dt", self.dt),
            ("dt_tilde", self.dt_tilde()),
            ("t_end", self.t_end),
            ("t0", self.t0),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(name, "must be positive"));
            }
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b <= 1.0 / (4.0 * self.l1 * self.gamma)) {
                return Err(bad("beta", "must lie in (0, 1/(4 l1 gamma)]"));
            }
        }
        if self.t0 >= self.t_end {
            return Err(bad("t0", "must precede t_end"));
        }
        if self.dts.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(bad("dts", "steps must be positive"));
        }
        if self.stride == 0 {
            return Err(bad("stride", "must be at least 1"));
        }
        if !(self.energy_tolerance >= 0.0) {
            return Err(bad("energy_tolerance", "must be nonnegative"));
        }
        if self.family.is_exact() && self.delta > 0.0 {
            return Err(bad("delta", "perturbations need a warped family"));
        }
        if self.delta > 0.0 && self.seed.is_none() {
            return Err(bad("seed", "required when delta > 0"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let c = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(ScenarioConfig::from_toml("sigmaa = 0.5"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn ranges_name_the_field() {
        let check = |text: &str, field: &str| {
            let err = ScenarioConfig::from_toml(text).unwrap().validate().unwrap_err();
            assert!(matches!(&err, ConfigError::Field { field: f, .. } if f == field), "{err}");
        };
        check("sigma = 1.5", "sigma");
        check("resolution = 48", "resolution");
        check("delta = -1e-3", "delta");
        check("delta = 1e-3", "seed");
        check("resolutions = [32, 100]", "resolutions");
        check("family = \"sphere\"\ndelta = 0.1\nseed = 1", "delta");
    }
}
