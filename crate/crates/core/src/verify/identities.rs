//! Residuals of the individual identities on one pair.

use serde::{Deserialize, Serialize};

use crate::connection::christoffel;
use crate::curvature;
use crate::difference::{self, ibp_sides, IbpSides, MetricPair};
use crate::error::{LabError, Result};
use crate::field::{Slot, TensorField};
use crate::flow::euler::{euler_metric_derivative, euler_pair_derivative};
use crate::metric::MetricField;
use crate::tolerance::{self, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// `Γ − Γ̃` against the `∇̃g` formula; forms of `B` as side checks.
    ConnectionDifference,
    /// `Bian(g, ∇, Rc) = 0`, with `Bian(g, ∇, g) = 0` as side check.
    Bianchi,
    /// `Rc − R̃c` through `A` and `∇̃A`.
    RicciDifference,
    /// Evolution of `B` when both metrics move by Ricci flow.
    BianchiEvolution,
    /// Evolution of `Γ̃` under Ricci flow.
    GammaDot,
    /// Weighted integration by parts of `⟨L(h) − 2δ*B, h⟩`.
    IntegrationByParts,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::ConnectionDifference,
        Identity::Bianchi,
        Identity::RicciDifference,
        Identity::BianchiEvolution,
        Identity::GammaDot,
        Identity::IntegrationByParts,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Identity::ConnectionDifference => "connection-difference",
            Identity::Bianchi => "bianchi",
            Identity::RicciDifference => "ricci-difference",
            Identity::BianchiEvolution => "bianchi-evolution",
            Identity::GammaDot => "gamma-dot",
            Identity::IntegrationByParts => "integration-by-parts",
        }
    }

    pub fn measure(&self, pair: &MetricPair, corruption: Option<Corruption>) -> Result<Measurement> {
        if let Some(c) = corruption {
            if c.identity() != *self {
                return Err(LabError::param("corruption", format!("does not apply to {}", self.id())));
            }
        }
        match self {
            Identity::ConnectionDifference => Ok(connection_difference(pair)),
            Identity::Bianchi => Ok(bianchi(pair)),
            Identity::RicciDifference => {
                let (residual, scale) = difference::ricci_difference(pair).residual_and_scale(pair.points());
                Ok(Measurement::pointwise(residual, scale))
            }
            Identity::BianchiEvolution => {
                let factors = corruption.map_or([1.0; 3], |c| c.factors());
                bianchi_evolution(pair, pair.max_spacing().powi(2), factors)
            }
            Identity::GammaDot => gamma_dot(pair.g_tilde(), pair.points(), pair.max_spacing().powi(2)),
            Identity::IntegrationByParts => Ok(integration_by_parts(pair)),
        }
    }
}

pub(crate) fn tolerance_of(identity: Identity) -> Tolerance {
    match identity {
        Identity::ConnectionDifference => tolerance::CONNECTION_DIFFERENCE,
        Identity::Bianchi => tolerance::BIAN_RICCI,
        Identity::RicciDifference => tolerance::RICCI_DIFFERENCE,
        Identity::BianchiEvolution => tolerance::BIANCHI_EVOLUTION,
        Identity::GammaDot => tolerance::GAMMA_DOT,
        Identity::IntegrationByParts => tolerance::INTEGRATION_BY_PARTS,
    }
}

/// One of the three right-side terms of the `B` evolution multiplied by
/// `1.01`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corruption {
    RicciTerm,
    GradientTerm,
    CurvatureTerm,
}

impl Corruption {
    pub const ALL: [Corruption; 3] = [Corruption::RicciTerm, Corruption::GradientTerm, Corruption::CurvatureTerm];

    pub fn identity(&self) -> Identity {
        Identity::BianchiEvolution
    }

    fn factors(&self) -> [f64; 3] {
        match self {
            Corruption::RicciTerm => [1.01, 1.0, 1.0],
            Corruption::GradientTerm => [1.0, 1.01, 1.0],
            Corruption::CurvatureTerm => [1.0, 1.0, 1.01],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxMeasurement {
    pub name: String,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: Tolerance,
}

/// Residual and scale of one identity over the trusted points of a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub residual: f64,
    pub scale: f64,
    pub aux: Vec<AuxMeasurement>,
    /// Integrals behind an integrated identity; merging adds them.
    pub integrals: Option<IbpSides>,
}

impl Measurement {
    fn pointwise(residual: f64, scale: f64) -> Self {
        Measurement {
            residual,
            scale,
            aux: Vec::new(),
            integrals: None,
        }
    }

    /// Combine measurements over disjoint point sets.
    pub fn merge(self, other: Measurement) -> Measurement {
        let aux = self
            .aux
            .into_iter()
            .zip(other.aux)
            .map(|(a, b)| AuxMeasurement {
                residual: a.residual.max(b.residual),
                scale: a.scale.max(b.scale),
                ..a
            })
            .collect();
        match (self.integrals, other.integrals) {
            (Some(a), Some(b)) => {
                let s = a.merge(b);
                Measurement {
                    residual: s.residual(),
                    scale: s.scale,
                    aux,
                    integrals: Some(s),
                }
            }
            _ => Measurement {
                residual: self.residual.max(other.residual),
                scale: self.scale.max(other.scale),
                aux,
                integrals: None,
            },
        }
    }
}

fn max_over(fields: &[&TensorField], points: &[usize]) -> f64 {
    fields.iter().map(|f| f.max_abs_over(points)).fold(0.0, f64::max)
}

fn diff_over(a: &TensorField, b: &TensorField, points: &[usize]) -> f64 {
    a.sub(b).expect("same shape").max_abs_over(points)
}

fn connection_difference(pair: &MetricPair) -> Measurement {
    let pts = pair.points();
    let formula = difference::a_from_formula(pair);
    let gamma = difference::a_from_gamma(pair);
    let scale = max_over(&[&formula, &gamma], pts).max(pair.first_order_scale());
    let direct = pair.b();
    let from_a = difference::b_from_a(pair, &formula);
    let from_h = difference::bian(pair.g(), pair.connection_tilde(), pair.h());
    let b_scale = max_over(&[direct, &from_a, &from_h], pts).max(pair.first_order_scale());
    let aux = [("B via A", &from_a), ("B via h", &from_h)]
        .into_iter()
        .map(|(name, other)| AuxMeasurement {
            name: name.into(),
            residual: diff_over(direct, other, pts),
            scale: b_scale,
            tolerance: tolerance::CONNECTION_DIFFERENCE,
        })
        .collect();
    Measurement {
        aux,
        ..Measurement::pointwise(diff_over(&formula, &gamma, pts), scale)
    }
}

fn bianchi(pair: &MetricPair) -> Measurement {
    let pts = pair.points();
    let (r1, r2) = difference::bian_parts(pair.g(), pair.connection(), pair.ricci());
    let (g1, g2) = difference::bian_parts(pair.g(), pair.connection(), pair.g().field());
    let metric_scale = max_over(&[&g1, &g2], pts).max(pair.first_order_scale());
    Measurement {
        aux: vec![AuxMeasurement {
            name: "Bian(g, ∇, g)".into(),
            residual: diff_over(&g1, &g2, pts),
            scale: metric_scale,
            tolerance: tolerance::BIAN_METRIC,
        }],
        ..Measurement::pointwise(diff_over(&r1, &r2, pts), max_over(&[&r1, &r2], pts))
    }
}

/// The three right-side terms of `∂B/∂t`:
/// `−2R_{kp}g^{pq}B_q`,
/// `2g^{ma}g^{lb}R_{ab}(∇̃_m h_{lk} − ½∇̃_k h_{ml})` and
/// `−2g_{pk}g^{mc}g̃^{ld}g̃^{ps}h_{cd}(∇̃_m R̃_{ls} − ½∇̃_s R̃_{lm})`.
pub fn bianchi_evolution_terms(pair: &MetricPair) -> [TensorField; 3] {
    let n = pair.dim();
    let nn = n * n;
    let (g, gt) = (pair.g(), pair.g_tilde());
    let rc = pair.ricci();
    let b = pair.b();
    let dh = pair.grad_h();
    let drt = pair.connection_tilde().covariant_derivative(pair.ricci_tilde());
    let h = pair.h();
    let chart = pair.chart();
    let t1 = TensorField::from_fn(chart, &[Slot::Lower], |p, o| {
        let (r, gi, bv) = (rc.at(p), g.inv_at(p), b.at(p));
        for k in 0..n {
            let mut s = 0.0;
            for pp in 0..n {
                for q in 0..n {
                    s += r[k * n + pp] * gi[pp * n + q] * bv[q];
                }
            }
            o[k] = -2.0 * s;
        }
    });
    let t2 = TensorField::from_fn(chart, &[Slot::Lower], |p, o| {
        let (r, gi, d) = (rc.at(p), g.inv_at(p), dh.at(p));
        // R^{ml} = g^{ma} g^{lb} R_ab
        let mut rup = [0.0; 9];
        for m in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for a in 0..n {
                    for bb in 0..n {
                        s += gi[m * n + a] * gi[l * n + bb] * r[a * n + bb];
                    }
                }
                rup[m * n + l] = s;
            }
        }
        for k in 0..n {
            let mut s = 0.0;
            for m in 0..n {
                for l in 0..n {
                    s += rup[m * n + l] * (d[m * nn + l * n + k] - 0.5 * d[k * nn + m * n + l]);
                }
            }
            o[k] = 2.0 * s;
        }
    });
    let t3 = TensorField::from_fn(chart, &[Slot::Lower], |p, o| {
        let (gm, gi, gti, hp, d) = (g.g_at(p), g.inv_at(p), gt.inv_at(p), h.at(p), drt.at(p));
        // u^{ml} = g^{mc} g̃^{ld} h_cd
        let mut u = [0.0; 9];
        for m in 0..n {
            for l in 0..n {
                let mut s = 0.0;
                for c in 0..n {
                    for dd in 0..n {
                        s += gi[m * n + c] * gti[l * n + dd] * hp[c * n + dd];
                    }
                }
                u[m * n + l] = s;
            }
        }
        // w_s = u^{ml}(∇̃_m R̃_ls − ½∇̃_s R̃_lm)
        let mut w = [0.0; 3];
        for (s, ws) in w.iter_mut().enumerate().take(n) {
            for m in 0..n {
                for l in 0..n {
                    *ws += u[m * n + l] * (d[m * nn + l * n + s] - 0.5 * d[s * nn + l * n + m]);
                }
            }
        }
        for k in 0..n {
            let mut s = 0.0;
            for pp in 0..n {
                for ss in 0..n {
                    s += gm[pp * n + k] * gti[pp * n + ss] * w[ss];
                }
            }
            o[k] = -2.0 * s;
        }
    });
    [t1, t2, t3]
}

fn bianchi_evolution(pair: &MetricPair, eps: f64, factors: [f64; 3]) -> Result<Measurement> {
    let pts = pair.points();
    let lhs: TensorField = euler_pair_derivative(pair, eps, |p| Ok(p.b().clone()))?;
    let terms = bianchi_evolution_terms(pair);
    let mut rhs = terms[0].scale(factors[0]);
    for (t, f) in terms[1..].iter().zip(&factors[1..]) {
        rhs = rhs.axpy(*f, t)?;
    }
    let scale = max_over(&[&lhs, &terms[0], &terms[1], &terms[2]], pts);
    Ok(Measurement::pointwise(diff_over(&lhs, &rhs, pts), scale))
}

/// `g̃^{pq}(∇̃_q R̃_{ml} − ∇̃_m R̃_{lq} − ∇̃_l R̃_{mq})`, stored `[p][m][l]`.
pub fn gamma_dot_rhs(g_tilde: &MetricField) -> TensorField {
    let n = g_tilde.dim();
    let nn = n * n;
    let conn = christoffel(g_tilde);
    let drc = conn.covariant_derivative(&curvature::ricci_from(&conn));
    TensorField::from_fn(g_tilde.chart(), &[Slot::Upper, Slot::Lower, Slot::Lower], |p, o| {
        let (gi, d) = (g_tilde.inv_at(p), drc.at(p));
        for pp in 0..n {
            for m in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for q in 0..n {
                        s += gi[pp * n + q]
                            * (d[q * nn + m * n + l] - d[m * nn + l * n + q] - d[l * nn + m * n + q]);
                    }
                    o[(pp * n + m) * n + l] = s;
                }
            }
        }
    })
}

fn gamma_dot(g_tilde: &MetricField, points: &[usize], eps: f64) -> Result<Measurement> {
    let lhs: TensorField = euler_metric_derivative(g_tilde, eps, |m| Ok(christoffel(m).into_symbols()))?;
    let rhs = gamma_dot_rhs(g_tilde);
    Ok(Measurement::pointwise(diff_over(&lhs, &rhs, points), max_over(&[&lhs, &rhs], points)))
}

/// Smooth cutoff and weight used for the integration-by-parts check,
/// given by formulas in the coordinates so that slabs agree.
pub fn ibp_weights(chart: &crate::chart::Chart) -> (TensorField, TensorField) {
    let theta = TensorField::scalar_from_fn(chart, |p| {
        let x = chart.coords(p);
        0.6 + 0.3 * x[0].sin() * (x[1] + 2.0 * x[2]).cos()
    });
    let eta = TensorField::scalar_from_fn(chart, |p| {
        let x = chart.coords(p);
        0.4 * (x[1] - x[2]).cos() + 0.2 * x[0].sin()
    });
    (theta, eta)
}

fn integration_by_parts(pair: &MetricPair) -> Measurement {
    let (theta, eta) = ibp_weights(pair.chart());
    let s = ibp_sides(pair, &theta, &eta, pair.points());
    Measurement {
        integrals: Some(s),
        ..Measurement::pointwise(s.residual(), s.scale)
    }
}
