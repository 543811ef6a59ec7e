//! Curvature of a metric from its Christoffel symbols.
//!
//! Convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z = R_{ijk}^l` with
//! `R_{ijk}^l = ∂_iΓ^l_{jk} − ∂_jΓ^l_{ik} + Γ^p_{jk}Γ^l_{ip} − Γ^p_{ik}Γ^l_{jp}`,
//! so that `(∇_i∇_j − ∇_j∇_i) W_k = −R_{ijk}^p W_p`, `R_{jk} = R_{ijk}^i`, and
//! the round sphere has positive curvature.

use crate::connection::{christoffel, Connection};
use crate::deriv;
use crate::field::{Slot, TensorField};
use crate::metric::MetricField;

pub const RIEMANN_SLOTS: [Slot; 4] = [Slot::Lower, Slot::Lower, Slot::Lower, Slot::Upper];

#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    pub connection: Connection,
    /// `R_{ijk}^l`, stored `[i][j][k][l]`.
    pub riemann: TensorField,
    pub ricci: TensorField,
    pub scalar: TensorField,
}

pub fn curvature(g: &MetricField) -> CurvatureBundle {
    let connection = christoffel(g);
    let riemann = riemann_from(&connection);
    let chart = *g.chart();
    let n = chart.dim();
    let ricci = TensorField::from_fn(&chart, &[Slot::Lower, Slot::Lower], |p, o| {
        let r = riemann.at(p);
        for j in 0..n {
            for k in 0..n {
                o[j * n + k] = (0..n).map(|i| r[((i * n + j) * n + k) * n + i]).sum();
            }
        }
    })
    .symmetrized(0, 1);
    let scalar = scalar_curvature(g, &ricci);
    CurvatureBundle {
        connection,
        riemann,
        ricci,
        scalar,
    }
}

pub fn riemann_from(conn: &Connection) -> TensorField {
    let gamma = conn.symbols();
    let chart = *gamma.chart();
    let n = chart.dim();
    let dgam = deriv::gradient(gamma);
    TensorField::from_fn(&chart, &RIEMANN_SLOTS, |p, o| {
        let g = gamma.at(p);
        let d = dgam.at(p);
        let gm = |l: usize, i: usize, j: usize| g[(l * n + i) * n + j];
        let dg = |a: usize, l: usize, j: usize, k: usize| d[((a * n + l) * n + j) * n + k];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut v = dg(i, l, j, k) - dg(j, l, i, k);
                        for q in 0..n {
                            v += gm(q, j, k) * gm(l, i, q) - gm(q, i, k) * gm(l, j, q);
                        }
                        o[((i * n + j) * n + k) * n + l] = v;
                    }
                }
            }
        }
    })
}

/// Ricci tensor without materialising the full Riemann tensor.
pub fn ricci_from(conn: &Connection) -> TensorField {
    let gamma = conn.symbols();
    let chart = *gamma.chart();
    let n = chart.dim();
    let trace = TensorField::from_fn(&chart, &[Slot::Lower], |p, o| {
        let g = gamma.at(p);
        for k in 0..n {
            o[k] = (0..n).map(|i| g[(i * n + i) * n + k]).sum();
        }
    });
    let dtrace = deriv::gradient(&trace);
    TensorField::from_fn(&chart, &[Slot::Lower, Slot::Lower], |p, o| {
        let g = gamma.at(p);
        let t = trace.at(p);
        let dt = dtrace.at(p);
        let gm = |l: usize, i: usize, j: usize| g[(l * n + i) * n + j];
        for j in 0..n {
            for k in 0..n {
                let mut v = -dt[j * n + k];
                for i in 0..n {
                    v += deriv::stencil_at(gamma, p, i, (i * n + j) * n + k);
                    v += gm(i, j, k) * t[i];
                    for q in 0..n {
                        v -= gm(q, i, k) * gm(i, j, q);
                    }
                }
                o[j * n + k] = v;
            }
        }
    })
    .symmetrized(0, 1)
}

pub fn ricci(g: &MetricField) -> TensorField {
    ricci_from(&christoffel(g))
}

pub fn scalar_curvature(g: &MetricField, ricci: &TensorField) -> TensorField {
    let n = g.dim();
    TensorField::scalar_from_fn(g.chart(), |p| {
        let gi = g.inv_at(p);
        let r = ricci.at(p);
        (0..n * n).map(|c| gi[c] * r[c]).sum()
    })
}

/// Lower the last index: `R_{ijkl} = g_{lm} R_{ijk}^m`.
pub fn lowered_riemann(g: &MetricField, riemann: &TensorField) -> TensorField {
    let n = g.dim();
    TensorField::from_fn(g.chart(), &[Slot::Lower; 4], |p, o| {
        let r = riemann.at(p);
        let gm = g.g_at(p);
        for ijk in 0..n * n * n {
            for l in 0..n {
                o[ijk * n + l] = (0..n).map(|m| gm[l * n + m] * r[ijk * n + m]).sum();
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::linalg;
    use std::f64::consts::PI;

    #[test]
    fn flat_metric_is_flat() {
        let chart = Chart::periodic(3, 8, 1.0).unwrap();
        let g = MetricField::flat(&chart, 2.0).unwrap();
        let b = curvature(&g);
        assert_eq!(b.riemann.max_abs(), 0.0);
        assert_eq!(b.ricci.max_abs(), 0.0);
        assert_eq!(b.scalar.max_abs(), 0.0);
    }

    fn conformal_ricci_error(points: usize) -> f64 {
        // Oracle: in two dimensions g = e^{2u}δ has Rc = −(u_xx + u_yy) δ.
        let chart = Chart::periodic(2, points, 2.0 * PI).unwrap();
        let src = (2, |x: &[f64; 3]| {
            let e = (0.4 * x[0].sin() * (2.0 * x[1]).cos()).exp();
            let mut m = linalg::identity();
            m[0][0] = e;
            m[1][1] = e;
            m
        });
        let lap = |x: &[f64; 3]| -0.2 * 5.0 * x[0].sin() * (2.0 * x[1]).cos();
        let g = MetricField::from_source(&chart, &src).unwrap();
        let rc = curvature(&g).ricci;
        let mut worst = 0.0_f64;
        for p in 0..chart.len() {
            let l = lap(&chart.coords(p));
            worst = worst
                .max((rc.get(p, &[0, 0]) + l).abs())
                .max((rc.get(p, &[1, 1]) + l).abs())
                .max(rc.get(p, &[0, 1]).abs());
        }
        worst
    }

    #[test]
    fn two_dimensional_conformal_ricci() {
        let e: Vec<f64> = [32, 64, 128].iter().map(|&n| conformal_ricci_error(n)).collect();
        for w in e.windows(2) {
            let r = w[0] / w[1];
            assert!((12.0..=20.0).contains(&r), "{e:?}");
        }
    }

    #[test]
    fn fast_ricci_agrees_with_contraction() {
        let chart = Chart::periodic(3, 12, 2.0 * PI).unwrap();
        let src = (3, |x: &[f64; 3]| {
            let mut m = linalg::identity();
            m[0][0] = 1.0 + 0.15 * (x[1] - x[2]).sin();
            m[0][1] = 0.1 * x[2].cos();
            m[1][0] = m[0][1];
            m[2][2] = 1.0 + 0.1 * (x[0] + x[1]).cos();
            m
        });
        let g = MetricField::from_source(&chart, &src).unwrap();
        let full = curvature(&g);
        let fast = ricci(&g);
        assert!(full.ricci.sub(&fast).unwrap().max_abs() < 1e-13);
        assert_eq!(full.ricci.symmetry_defect(0, 1), 0.0);
        // Antisymmetric in the first two slots, exactly.
        assert_eq!(full.riemann.symmetrized(0, 1).max_abs(), 0.0);
    }
}
