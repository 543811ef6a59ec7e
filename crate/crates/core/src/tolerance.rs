//! Tolerance model for discretized identities.
//!
//! A check at grid spacing `Δx` whose largest participating term has
//! max-norm `scale` passes when
//! `residual ≤ (c₁·Δx⁴ + c₂·10⁻¹³)·scale`.
//! The `c₁` values below were calibrated once with the ignored
//! `calibrate_tolerances` test and are frozen here.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub c1: f64,
    pub c2: f64,
}

pub const ROUNDOFF_C2: f64 = 100.0;

impl Tolerance {
    pub const fn discretized(c1: f64) -> Self {
        Tolerance { c1, c2: ROUNDOFF_C2 }
    }

    /// Identities that hold exactly for the discrete operators.
    pub const fn roundoff() -> Self {
        Tolerance { c1: 0.0, c2: ROUNDOFF_C2 }
    }

    pub fn bound(&self, dx: f64, scale: f64) -> f64 {
        (self.c1 * dx.powi(4) + self.c2 * 1e-13) * scale
    }

    pub fn passes(&self, residual: f64, dx: f64, scale: f64) -> bool {
        residual <= self.bound(dx, scale)
    }
}

/// `Γ − Γ̃` against the `∇̃g` formula for `A`, and the matching forms of `B`.
pub const CONNECTION_DIFFERENCE: Tolerance = Tolerance::roundoff();
/// `Bian(g, ∇, g) = 0`.
pub const BIAN_METRIC: Tolerance = Tolerance::roundoff();
/// `Bian(g, ∇, Rc) = 0`.
pub const BIAN_RICCI: Tolerance = Tolerance::discretized(30.0);
/// Ricci difference written through `A`.
pub const RICCI_DIFFERENCE: Tolerance = Tolerance::discretized(1.6);
/// Evolution of the Bianchi one-form.
pub const BIANCHI_EVOLUTION: Tolerance = Tolerance::discretized(170.0);
/// Evolution of `Γ̃`.
pub const GAMMA_DOT: Tolerance = Tolerance::discretized(13.0);
/// Weighted integration by parts of `⟨L(h) − 2δ*B, h⟩`.
pub const INTEGRATION_BY_PARTS: Tolerance = Tolerance::discretized(0.11);
/// Divergence and expanded forms of `L`.
pub const OPERATOR_L_FORMS: Tolerance = Tolerance::discretized(7.5);
/// `∫⟨δV, W⟩ = ∫⟨V, δ*W⟩`.
pub const ADJOINTNESS: Tolerance = Tolerance::discretized(0.22);
