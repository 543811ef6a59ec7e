//! Geometry of a pair of metrics `(g, g̃)`: the difference `h`, the
//! connection difference `A`, the Bianchi one-form `B` and the operators
//! built from them.

use std::sync::OnceLock;

use crate::chart::Chart;
use crate::connection::{christoffel, covariant_derivative, Connection};
use crate::curvature::{self, riemann_from};
use crate::error::{LabError, Result};
use crate::field::{Slot, TensorField};
use crate::metric::MetricField;
use crate::norms;
use crate::sum::compensated_sum;
use crate::tolerance;

/// Window halo wide enough for every nested stencil used on a pair.
pub const HALO: usize = 8;

const LL: [Slot; 2] = [Slot::Lower, Slot::Lower];
const ULL: [Slot; 3] = [Slot::Upper, Slot::Lower, Slot::Lower];

/// Two metrics on one chart with lazily cached derived objects.
#[derive(Debug)]
pub struct MetricPair {
    g: MetricField,
    g_tilde: MetricField,
    h: TensorField,
    points: Vec<usize>,
    conn: OnceLock<Connection>,
    conn_tilde: OnceLock<Connection>,
    ricci: OnceLock<TensorField>,
    ricci_tilde: OnceLock<TensorField>,
    riemann_tilde: OnceLock<TensorField>,
    grad_g: OnceLock<TensorField>,
    grad_h: OnceLock<TensorField>,
    a: OnceLock<TensorField>,
    b: OnceLock<TensorField>,
}

impl MetricPair {
    pub fn new(g: MetricField, g_tilde: MetricField) -> Result<Self> {
        if g.chart() != g_tilde.chart() {
            return Err(LabError::InvalidChart("metric pair on different charts".into()));
        }
        let h = g.field().sub(g_tilde.field())?;
        let points = g.chart().interior(HALO);
        Ok(MetricPair {
            g,
            g_tilde,
            h,
            points,
            conn: OnceLock::new(),
            conn_tilde: OnceLock::new(),
            ricci: OnceLock::new(),
            ricci_tilde: OnceLock::new(),
            riemann_tilde: OnceLock::new(),
            grad_g: OnceLock::new(),
            grad_h: OnceLock::new(),
            a: OnceLock::new(),
            b: OnceLock::new(),
        })
    }

    pub fn g(&self) -> &MetricField {
        &self.g
    }

    pub fn g_tilde(&self) -> &MetricField {
        &self.g_tilde
    }

    pub fn chart(&self) -> &Chart {
        self.g.chart()
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// `h = g − g̃`.
    pub fn h(&self) -> &TensorField {
        &self.h
    }

    /// Points whose values are unaffected by window edges.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn connection(&self) -> &Connection {
        self.conn.get_or_init(|| christoffel(&self.g))
    }

    pub fn connection_tilde(&self) -> &Connection {
        self.conn_tilde.get_or_init(|| christoffel(&self.g_tilde))
    }

    pub fn ricci(&self) -> &TensorField {
        self.ricci.get_or_init(|| curvature::ricci_from(self.connection()))
    }

    pub fn ricci_tilde(&self) -> &TensorField {
        self.ricci_tilde.get_or_init(|| curvature::ricci_from(self.connection_tilde()))
    }

    /// `R̃_{ijk}^l` of `g̃`.
    pub fn riemann_tilde(&self) -> &TensorField {
        self.riemann_tilde.get_or_init(|| riemann_from(self.connection_tilde()))
    }

    /// `∇̃g`, stored `[i][j][k] = ∇̃_i g_{jk}`.
    pub fn grad_g(&self) -> &TensorField {
        self.grad_g
            .get_or_init(|| covariant_derivative(self.connection_tilde(), self.g.field()))
    }

    /// `∇̃h`, stored `[i][j][k] = ∇̃_i h_{jk}`.
    pub fn grad_h(&self) -> &TensorField {
        self.grad_h.get_or_init(|| covariant_derivative(self.connection_tilde(), &self.h))
    }

    /// `A` from the `∇̃g` formula.
    pub fn a(&self) -> &TensorField {
        self.a.get_or_init(|| a_from_formula(self))
    }

    /// `B = Bian(g, ∇̃, g)`.
    pub fn b(&self) -> &TensorField {
        self.b
            .get_or_init(|| bian(&self.g, self.connection_tilde(), self.g.field()))
    }

    pub fn max_spacing(&self) -> f64 {
        self.chart().max_spacing()
    }

    /// Size of the ingredients of first-order quantities (`A`, `B`) before
    /// any cancellation: `|g| |g⁻¹| max(|Γ|, |Γ̃|)`.
    pub fn first_order_scale(&self) -> f64 {
        let pts = self.points();
        let gamma = self
            .connection()
            .symbols()
            .max_abs_over(pts)
            .max(self.connection_tilde().symbols().max_abs_over(pts));
        self.g.field().max_abs_over(pts) * self.g.inverse().max_abs_over(pts) * gamma
    }
}

/// `A = Γ − Γ̃`.
pub fn a_from_gamma(pair: &MetricPair) -> TensorField {
    pair.connection()
        .symbols()
        .sub(pair.connection_tilde().symbols())
        .expect("connections share a chart")
}

/// `A^k_{ij} = ½ g^{mk}(∇̃_i g_{jm} + ∇̃_j g_{im} − ∇̃_m g_{ij})`.
pub fn a_from_formula(pair: &MetricPair) -> TensorField {
    let n = pair.dim();
    let dg = pair.grad_g();
    let g = pair.g();
    TensorField::from_fn(pair.chart(), &ULL, |p, o| {
        let d = dg.at(p);
        let gi = g.inv_at(p);
        let at = |a: usize, b: usize, c: usize| d[(a * n + b) * n + c];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += gi[m * n + k] * (at(i, j, m) + at(j, i, m) - at(m, i, j));
                    }
                    o[(k * n + i) * n + j] = 0.5 * s;
                }
            }
        }
    })
}

/// Both computations of `A`; fails if they disagree beyond roundoff.
pub fn connection_difference(pair: &MetricPair) -> Result<TensorField> {
    let formula = a_from_formula(pair);
    let gamma = a_from_gamma(pair);
    let pts = pair.points();
    let residual = formula.sub(&gamma)?.max_abs_over(pts);
    let scale = [&formula, &gamma]
        .iter()
        .map(|f| f.max_abs_over(pts))
        .fold(pair.first_order_scale(), f64::max);
    let tol = tolerance::CONNECTION_DIFFERENCE.bound(pair.max_spacing(), scale);
    if residual > tol {
        return Err(LabError::ToleranceExceeded {
            check: "connection difference".into(),
            residual,
            tolerance: tol,
        });
    }
    Ok(formula)
}

/// The two halves of `Bian(ĝ, D, V)`: `ĝ^{ij} D_i V_{jk}` and
/// `½ ĝ^{ij} D_k V_{ij}`.
pub fn bian_parts(ghat: &MetricField, conn: &Connection, v: &TensorField) -> (TensorField, TensorField) {
    assert_eq!(v.slots(), LL, "Bian needs a (0,2) tensor");
    let n = ghat.dim();
    let dv = conn.covariant_derivative(v);
    let parts = |second: bool| {
        TensorField::from_fn(ghat.chart(), &[Slot::Lower], |p, o| {
            let d = dv.at(p);
            let gi = ghat.inv_at(p);
            for k in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let term = if second {
                            0.5 * d[(k * n + i) * n + j]
                        } else {
                            d[(i * n + j) * n + k]
                        };
                        s += gi[i * n + j] * term;
                    }
                }
                o[k] = s;
            }
        })
    };
    (parts(false), parts(true))
}

/// `Bian(ĝ, D, V)_k = ĝ^{ij}(D_i V_{jk} − ½ D_k V_{ij})`.
pub fn bian(ghat: &MetricField, conn: &Connection, v: &TensorField) -> TensorField {
    let (first, second) = bian_parts(ghat, conn, v);
    first.sub(&second).expect("same shape")
}

/// `B_k = g_{pk} g^{ij} A^p_{ij}`.
pub fn b_from_a(pair: &MetricPair, a: &TensorField) -> TensorField {
    let n = pair.dim();
    let g = pair.g();
    TensorField::from_fn(pair.chart(), &[Slot::Lower], |p, o| {
        let av = a.at(p);
        let (gm, gi) = (g.g_at(p), g.inv_at(p));
        for k in 0..n {
            let mut s = 0.0;
            for q in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        s += gm[q * n + k] * gi[i * n + j] * av[(q * n + i) * n + j];
                    }
                }
            }
            o[k] = s;
        }
    })
}

/// `B` computed directly, after checking it against the contraction of `A`
/// and against `Bian(g, ∇̃, h)`.
pub fn bianchi_one_form(pair: &MetricPair) -> Result<TensorField> {
    let direct = pair.b().clone();
    let pts = pair.points();
    let from_a = b_from_a(pair, pair.a());
    let from_h = bian(pair.g(), pair.connection_tilde(), pair.h());
    let scale = [&direct, &from_a, &from_h]
        .iter()
        .map(|f| f.max_abs_over(pts))
        .fold(pair.first_order_scale(), f64::max);
    let tol = tolerance::CONNECTION_DIFFERENCE.bound(pair.max_spacing(), scale);
    for (name, other) in [("B via A", &from_a), ("B via h", &from_h)] {
        let residual = direct.sub(other)?.max_abs_over(pts);
        if residual > tol {
            return Err(LabError::ToleranceExceeded {
                check: name.into(),
                residual,
                tolerance: tol,
            });
        }
    }
    Ok(direct)
}

/// `L(V)_{ij} = ∇̃_p(g^{pq} ∇̃_q V_{ij})`, divergence form.
pub fn operator_l(pair: &MetricPair, v: &TensorField) -> TensorField {
    let n = pair.dim();
    let nn = n * n;
    let conn = pair.connection_tilde();
    let g = pair.g();
    let dv = conn.covariant_derivative(v);
    let flux = TensorField::from_fn(pair.chart(), &ULL, |p, o| {
        let d = dv.at(p);
        let gi = g.inv_at(p);
        for a in 0..n {
            for c in 0..nn {
                o[a * nn + c] = (0..n).map(|q| gi[a * n + q] * d[q * nn + c]).sum();
            }
        }
    });
    let dflux = conn.covariant_derivative(&flux);
    TensorField::from_fn(pair.chart(), &LL, |p, o| {
        let d = dflux.at(p);
        for c in 0..nn {
            o[c] = (0..n).map(|a| d[(a * n + a) * nn + c]).sum();
        }
    })
}

/// `g^{pq} ∇̃_p∇̃_q V_{ij} − g^{pr} g^{qs} ∇̃_p g_{rs} ∇̃_q V_{ij}`.
pub fn operator_l_expanded(pair: &MetricPair, v: &TensorField) -> TensorField {
    let n = pair.dim();
    let nn = n * n;
    let conn = pair.connection_tilde();
    let g = pair.g();
    let dg = pair.grad_g();
    let dv = conn.covariant_derivative(v);
    let ddv = conn.covariant_derivative(&dv);
    TensorField::from_fn(pair.chart(), &LL, |p, o| {
        let gi = g.inv_at(p);
        let (d1, d2, dgp) = (dv.at(p), ddv.at(p), dg.at(p));
        // c_q = g^{pr} g^{qs} ∇̃_p g_{rs}
        let mut coef = [0.0; 3];
        for (q, cq) in coef.iter_mut().enumerate().take(n) {
            for pp in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        *cq += gi[pp * n + r] * gi[q * n + s] * dgp[(pp * n + r) * n + s];
                    }
                }
            }
        }
        for c in 0..nn {
            let mut v = 0.0;
            for pp in 0..n {
                for q in 0..n {
                    v += gi[pp * n + q] * d2[(pp * n + q) * nn + c];
                }
            }
            for (q, cq) in coef.iter().enumerate().take(n) {
                v -= cq * d1[q * nn + c];
            }
            o[c] = v;
        }
    })
}

/// `(max |divergence form − expanded form|, max term)` of `L(V)` over the
/// trusted points.
pub fn operator_l_forms_residual(pair: &MetricPair, v: &TensorField) -> (f64, f64) {
    let pts = pair.points();
    let a = operator_l(pair, v);
    let b = operator_l_expanded(pair, v);
    let scale = a.max_abs_over(pts).max(b.max_abs_over(pts));
    (a.sub(&b).expect("same shape").max_abs_over(pts), scale)
}

/// Both forms of `L(V)` agree within tolerance; returns the residual.
pub fn check_operator_l_forms(pair: &MetricPair, v: &TensorField) -> Result<f64> {
    let (residual, scale) = operator_l_forms_residual(pair, v);
    let tol = tolerance::OPERATOR_L_FORMS.bound(pair.max_spacing(), scale);
    if residual > tol {
        return Err(LabError::ToleranceExceeded {
            check: "forms of L".into(),
            residual,
            tolerance: tol,
        });
    }
    Ok(residual)
}

/// `δ_g̃(V)_k = −g̃^{ij} ∇̃_i V_{jk}`.
pub fn divergence(g_tilde: &MetricField, conn: &Connection, v: &TensorField) -> TensorField {
    let n = g_tilde.dim();
    let dv = conn.covariant_derivative(v);
    TensorField::from_fn(g_tilde.chart(), &[Slot::Lower], |p, o| {
        let d = dv.at(p);
        let gi = g_tilde.inv_at(p);
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s -= gi[i * n + j] * d[(i * n + j) * n + k];
                }
            }
            o[k] = s;
        }
    })
}

/// `δ*_g̃(W)_{ij} = ½(∇̃_i W_j + ∇̃_j W_i)`.
pub fn divergence_adjoint(conn: &Connection, w: &TensorField) -> TensorField {
    conn.covariant_derivative(w).symmetrized(0, 1)
}

/// `(∫⟨δV, W⟩ dμ_g̃, ∫⟨V, δ*W⟩ dμ_g̃)` over `points`.
pub fn adjointness_integrals(
    g_tilde: &MetricField,
    conn: &Connection,
    v: &TensorField,
    w: &TensorField,
    points: &[usize],
) -> Result<(f64, f64)> {
    let left = norms::inner(g_tilde, &divergence(g_tilde, conn, v), w)?;
    let right = norms::inner(g_tilde, v, &divergence_adjoint(conn, w))?;
    Ok((g_tilde.integral(&left, points), g_tilde.integral(&right, points)))
}

/// `∫⟨δV, W⟩ = ∫⟨V, δ*W⟩` on a fully periodic chart within tolerance;
/// returns `(residual, scale)`.
pub fn check_adjointness(g_tilde: &MetricField, v: &TensorField, w: &TensorField) -> Result<(f64, f64)> {
    let chart = g_tilde.chart();
    if !chart.is_fully_periodic() {
        return Err(LabError::InvalidChart("adjointness needs a chart without boundary".into()));
    }
    let all: Vec<usize> = (0..chart.len()).collect();
    let (l, r) = adjointness_integrals(g_tilde, &christoffel(g_tilde), v, w, &all)?;
    let (residual, scale) = ((l - r).abs(), l.abs().max(r.abs()));
    let tol = tolerance::ADJOINTNESS.bound(chart.max_spacing(), scale);
    if residual > tol {
        return Err(LabError::ToleranceExceeded {
            check: "adjointness of δ and δ*".into(),
            residual,
            tolerance: tol,
        });
    }
    Ok((residual, scale))
}

/// Left side and the individual right-side terms of
/// `Rc − R̃c = ∇̃_l A^l_{jk} − ∇̃_j A^l_{kl} + A^l_{pl} A^p_{jk} − A^l_{jp} A^p_{kl}`.
#[derive(Clone, Debug)]
pub struct RicciDifference {
    pub lhs: TensorField,
    pub terms: [TensorField; 4],
}

impl RicciDifference {
    pub fn rhs(&self) -> TensorField {
        let mut out = self.terms[0].clone();
        for t in &self.terms[1..] {
            out = out.add(t).expect("same shape");
        }
        out
    }

    /// `(max residual, max term)` over `points`.
    pub fn residual_and_scale(&self, points: &[usize]) -> (f64, f64) {
        let residual = self.lhs.sub(&self.rhs()).expect("same shape").max_abs_over(points);
        let scale = self
            .terms
            .iter()
            .chain(std::iter::once(&self.lhs))
            .map(|t| t.max_abs_over(points))
            .fold(0.0, f64::max);
        (residual, scale)
    }
}

pub fn ricci_difference(pair: &MetricPair) -> RicciDifference {
    let n = pair.dim();
    let a = pair.a();
    let da = pair.connection_tilde().covariant_derivative(a);
    let lhs = pair.ricci().sub(pair.ricci_tilde()).expect("same chart");
    let term = |which: usize| {
        TensorField::from_fn(pair.chart(), &LL, |p, o| {
            let av = a.at(p);
            let d = da.at(p);
            let am = |k: usize, i: usize, j: usize| av[(k * n + i) * n + j];
            let dam = |r: usize, k: usize, i: usize, j: usize| d[((r * n + k) * n + i) * n + j];
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        match which {
                            0 => s += dam(l, l, j, k),
                            1 => s -= dam(j, l, k, l),
                            _ => {
                                for q in 0..n {
                                    if which == 2 {
                                        s += am(l, q, l) * am(q, j, k);
                                    } else {
                                        s -= am(l, j, q) * am(q, k, l);
                                    }
                                }
                            }
                        }
                    }
                    o[j * n + k] = s;
                }
            }
        })
    };
    RicciDifference {
        lhs,
        terms: [term(0), term(1), term(2), term(3)],
    }
}

/// Outcome of the Ricci-difference checks on one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct RicciDifferenceReport {
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    /// Smallest `c` with `|rem| ≤ c(|g⁻¹|²|∇̃h|² + |g⁻¹||R̃m||h|)` on the grid.
    pub structural_constant: f64,
}

/// Exact identity check plus the fitted constant of the structural bound.
pub fn ricci_difference_residual(pair: &MetricPair) -> Result<RicciDifferenceReport> {
    let (residual, scale) = ricci_difference(pair).residual_and_scale(pair.points());
    let tolerance = tolerance::RICCI_DIFFERENCE.bound(pair.max_spacing(), scale);
    if residual > tolerance {
        return Err(LabError::ToleranceExceeded {
            check: "Ricci difference identity".into(),
            residual,
            tolerance,
        });
    }
    Ok(RicciDifferenceReport {
        residual,
        scale,
        tolerance,
        structural_constant: structural_constant(pair),
    })
}

/// `−2(Rc − R̃c) − L(h) + 2δ*_g̃ B`.
pub fn structural_remainder(pair: &MetricPair) -> TensorField {
    let lhs = pair.ricci().sub(pair.ricci_tilde()).expect("same chart").scale(-2.0);
    let lh = operator_l(pair, pair.h());
    let db = divergence_adjoint(pair.connection_tilde(), pair.b());
    lhs.sub(&lh).and_then(|x| x.axpy(2.0, &db)).expect("same shape")
}

/// Largest ratio of the remainder to the schematic bound, ignoring points
/// where the bound is negligible.
pub fn structural_constant(pair: &MetricPair) -> f64 {
    let gt = pair.g_tilde();
    let rem = norms::norm(gt, &structural_remainder(pair));
    let ginv = norms::norm(gt, pair.g().inverse());
    let dh = norms::norm(gt, pair.grad_h());
    let rm = norms::norm(gt, pair.riemann_tilde());
    let hn = norms::norm(gt, pair.h());
    let bound: Vec<f64> = (0..pair.chart().len())
        .map(|p| {
            let gi = ginv.value(p);
            gi * gi * dh.value(p).powi(2) + gi * rm.value(p) * hn.value(p)
        })
        .collect();
    let floor = 1e-8 * pair.points().iter().map(|&p| bound[p]).fold(0.0, f64::max);
    pair.points()
        .iter()
        .filter(|&&p| bound[p] > floor)
        .map(|&p| rem.value(p) / bound[p])
        .fold(0.0, f64::max)
}

/// `X = t^{−(1+σ)/2} h`, `Y = a t^{−σ/2} B` and
/// `U^k_{ij} = t^{−(1+σ)/2}((g^{kp} − g̃^{kp})∇̃_p h_{ij} − δ^k_i B_j − δ^k_j B_i)`.
#[derive(Clone, Debug)]
pub struct ReformulationTriple {
    pub x: TensorField,
    pub y: TensorField,
    pub u: TensorField,
    pub t: f64,
    pub sigma: f64,
    pub a: f64,
}

pub fn reformulation_triple(pair: &MetricPair, t: f64, sigma: f64, a: f64) -> Result<ReformulationTriple> {
    if t <= 0.0 || !t.is_finite() {
        return Err(LabError::NonpositiveTime(t));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(LabError::param("sigma", "must lie in (0, 1)"));
    }
    if a <= 0.0 || !a.is_finite() {
        return Err(LabError::param("a", "must be positive"));
    }
    let n = pair.dim();
    let nn = n * n;
    let sx = t.powf(-(1.0 + sigma) / 2.0);
    let b = pair.b();
    let dh = pair.grad_h();
    let (g, gt) = (pair.g(), pair.g_tilde());
    let u = TensorField::from_fn(pair.chart(), &ULL, |p, o| {
        let (gi, gti) = (g.inv_at(p), gt.inv_at(p));
        let (bv, d) = (b.at(p), dh.at(p));
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for q in 0..n {
                        s += (gi[k * n + q] - gti[k * n + q]) * d[q * nn + i * n + j];
                    }
                    if k == i {
                        s -= bv[j];
                    }
                    if k == j {
                        s -= bv[i];
                    }
                    o[(k * n + i) * n + j] = sx * s;
                }
            }
        }
    });
    Ok(ReformulationTriple {
        x: pair.h().scale(sx),
        y: b.scale(a * t.powf(-sigma / 2.0)),
        u,
        t,
        sigma,
        a,
    })
}

impl ReformulationTriple {
    /// Smallest `N` with `|U| ≤ N t^σ |∇̃X| + N/(a t^{1/2}) |Y|` on `points`.
    pub fn u_bound_constant(&self, pair: &MetricPair) -> f64 {
        let gt = pair.g_tilde();
        let un = norms::norm(gt, &self.u);
        let dx = norms::norm(gt, &pair.grad_h().scale(self.t.powf(-(1.0 + self.sigma) / 2.0)));
        let yn = norms::norm(gt, &self.y);
        let ts = self.t.powf(self.sigma);
        let ya = 1.0 / (self.a * self.t.sqrt());
        let denom: Vec<f64> = pair
            .points()
            .iter()
            .map(|&p| ts * dx.value(p) + ya * yn.value(p))
            .collect();
        let floor = 1e-8 * denom.iter().copied().fold(0.0, f64::max);
        pair.points()
            .iter()
            .zip(&denom)
            .filter(|(_, &d)| d > floor)
            .map(|(&p, &d)| un.value(p) / d)
            .fold(0.0, f64::max)
    }
}

/// Both sides of the weighted integration-by-parts identity for
/// `∫⟨L(h) − 2δ*B, h⟩ θ e^{−η} dμ_g̃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IbpSides {
    pub lhs: f64,
    pub rhs: f64,
    /// Largest absolute value among the individual integrals.
    pub scale: f64,
    /// The individual integrals.
    pub terms: [f64; 7],
}

impl IbpSides {
    fn from_terms(i: [f64; 7]) -> IbpSides {
        IbpSides {
            lhs: i[0],
            rhs: -(i[1] + 2.0 * i[2] - i[3] + 2.0 * i[4]) - (i[5] - 2.0 * i[6]),
            scale: i.iter().map(|v| v.abs()).fold(0.0, f64::max),
            terms: i,
        }
    }

    /// Sides over the union of two disjoint point sets.
    pub fn merge(self, other: IbpSides) -> IbpSides {
        let mut t = self.terms;
        for (a, b) in t.iter_mut().zip(other.terms) {
            *a += b;
        }
        IbpSides::from_terms(t)
    }

    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Integrals restricted to `points`; summing over a partition of the chart
/// gives the full integrals.
pub fn ibp_sides(pair: &MetricPair, theta: &TensorField, eta: &TensorField, points: &[usize]) -> IbpSides {
    ibp_sides_for(pair, pair.h(), pair.b(), theta, eta, points)
}

/// As [`ibp_sides`] with caller-supplied `h` and `B`; `L`, `δ` and the
/// weights still come from the pair.
pub fn ibp_sides_for(
    pair: &MetricPair,
    h: &TensorField,
    b: &TensorField,
    theta: &TensorField,
    eta: &TensorField,
    points: &[usize],
) -> IbpSides {
    let n = pair.dim();
    let nn = n * n;
    let gt = pair.g_tilde();
    let g = pair.g();
    let conn = pair.connection_tilde();
    let dh = conn.covariant_derivative(h);
    let lh = operator_l(pair, h);
    let dsb = divergence_adjoint(conn, b);
    let div_h = divergence(gt, conn, h);
    let deta = crate::deriv::gradient(eta);
    let dtheta = crate::deriv::gradient(theta);
    // Per point: [⟨L(h) − 2δ*B, h⟩, g^{ij}⟨∇̃_i h, ∇̃_j h⟩, ⟨δh, B⟩,
    //             g^{ij}∇̃_iη⟨∇̃_j h, h⟩, h(∇̃η, B♯), g^{ij}∇̃_iθ⟨∇̃_j h, h⟩, h(∇̃θ, B♯)]
    const TERMS: usize = 7;
    let mut vals = vec![0.0; TERMS * pair.chart().len()];
    crate::exec::fill_points(&mut vals, TERMS, |p, o| {
        let (gi, gti) = (g.inv_at(p), gt.inv_at(p));
        let hp = h.at(p);
        // h with both indices raised by g̃.
        let mut hup = [0.0; 9];
        for a in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += gti[a * n + i] * gti[c * n + j] * hp[i * n + j];
                    }
                }
                hup[a * n + c] = s;
            }
        }
        let pair_with_h = |x: &[f64]| -> f64 { (0..nn).map(|c| x[c] * hup[c]).sum() };
        let (lhp, sbp) = (lh.at(p), dsb.at(p));
        let mut first = 0.0;
        for c in 0..nn {
            first += (lhp[c] - 2.0 * sbp[c]) * hup[c];
        }
        let d = dh.at(p);
        // ⟨∇̃_i h, ∇̃_j h⟩ and ⟨∇̃_j h, h⟩
        let mut grad_h_dot_h = [0.0; 3];
        let mut energy = 0.0;
        for i in 0..n {
            grad_h_dot_h[i] = pair_with_h(&d[i * nn..(i + 1) * nn]);
            for j in 0..n {
                // raise d_j with g̃ on both slots and pair with d_i
                let dj = &d[j * nn..(j + 1) * nn];
                let mut s = 0.0;
                for a in 0..n {
                    for c in 0..n {
                        let mut r = 0.0;
                        for ii in 0..n {
                            for jj in 0..n {
                                r += gti[a * n + ii] * gti[c * n + jj] * dj[ii * n + jj];
                            }
                        }
                        s += d[i * nn + a * n + c] * r;
                    }
                }
                energy += gi[i * n + j] * s;
            }
        }
        let bv = b.at(p);
        let dv = div_h.at(p);
        let mut div_dot_b = 0.0;
        let mut bsharp = [0.0; 3];
        for a in 0..n {
            for c in 0..n {
                div_dot_b += gti[a * n + c] * dv[a] * bv[c];
                bsharp[a] += gti[a * n + c] * bv[c];
            }
        }
        let directional = |grad: &[f64]| -> (f64, f64) {
            // (g^{ij} ∂_i f ⟨∇̃_j h, h⟩, h(∇̃f♯, B♯))
            let mut along = 0.0;
            let mut sharp = [0.0; 3];
            for i in 0..n {
                for j in 0..n {
                    along += gi[i * n + j] * grad[i] * grad_h_dot_h[j];
                    sharp[i] += gti[i * n + j] * grad[j];
                }
            }
            let mut hb = 0.0;
            for i in 0..n {
                for j in 0..n {
                    hb += hp[i * n + j] * sharp[i] * bsharp[j];
                }
            }
            (along, hb)
        };
        let (eta_along, eta_hb) = directional(deta.at(p));
        let (th_along, th_hb) = directional(dtheta.at(p));
        o.copy_from_slice(&[first, energy, div_dot_b, eta_along, eta_hb, th_along, th_hb]);
    });
    let vol = gt.volume_density();
    let cell = pair.chart().cell_volume();
    let integral = |term: usize, with_theta: bool| {
        compensated_sum(points.iter().map(|&p| {
            let w = (-eta.value(p)).exp() * if with_theta { theta.value(p) } else { 1.0 };
            vals[p * TERMS + term] * w * vol.value(p) * cell
        }))
    };
    let terms = [(0, true), (1, true), (2, true), (3, true), (4, true), (5, false), (6, false)]
        .map(|(t, w)| integral(t, w));
    IbpSides::from_terms(terms)
}
