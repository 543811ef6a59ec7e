//! Graph distance on a chart and its mollification.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::field::TensorField;
use crate::metric::MetricField;

/// Largest coordinate step of a graph edge, in grid points.
const EDGE_REACH: i64 = 2;
/// Standard deviation of the mollifier in coordinate units.
pub const MOLLIFIER_WIDTH: f64 = 0.15;

/// What distances are measured from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basepoint {
    Point(usize),
    /// Every point whose first coordinate index equals the given one.
    Slice(usize),
}

impl Basepoint {
    pub fn sources(&self, chart: &Chart) -> Vec<usize> {
        match *self {
            Basepoint::Point(p) => vec![p],
            Basepoint::Slice(i) => (0..chart.len()).filter(|&p| chart.multi_index(p)[0] == i).collect(),
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

/// Primitive offsets in `{−2, …, 2}^n`.
fn offsets(dim: usize) -> Vec<[i64; 3]> {
    let r = EDGE_REACH;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            for c in -r..=r {
                let o = [a, b, if dim == 3 { c } else { 0 }];
                if dim == 2 && c != 0 {
                    continue;
                }
                let g = o.iter().fold(0, |acc, &x| gcd(acc, x));
                if g == 1 {
                    out.push(o);
                }
            }
        }
    }
    out
}

/// Target of the edge `p + o`, or `None` if it leaves a window axis.
fn neighbour(chart: &Chart, p: usize, o: &[i64; 3]) -> Option<usize> {
    let idx = chart.multi_index(p);
    let mut q = p;
    for a in 0..chart.dim() {
        if o[a] == 0 {
            continue;
        }
        let ax = chart.axis(a);
        let j = idx[a] as i64 + o[a];
        if !ax.periodic && (j < 0 || j >= ax.points as i64) {
            return None;
        }
        q = chart.shift(q, a, o[a] as isize);
    }
    Some(q)
}

/// Shortest-path distance from `sources` through edges of `ḡ`-length
/// `√(dᵀ ḡ d)`, with `ḡ` averaged over the two endpoints.
pub fn graph_distance(gbar: &MetricField, sources: &[usize]) -> TensorField {
    let chart = *gbar.chart();
    let n = chart.dim();
    let offs = offsets(n);
    let mut dist = vec![f64::INFINITY; chart.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Reverse((OrderedFloat(0.0), s)));
    }
    while let Some(Reverse((OrderedFloat(d), p))) = heap.pop() {
        if d > dist[p] {
            continue;
        }
        for o in &offs {
            let Some(q) = neighbour(&chart, p, o) else { continue };
            let (gp, gq) = (gbar.g_at(p), gbar.g_at(q));
            let mut len2 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let di = o[i] as f64 * chart.spacing(i);
                    let dj = o[j] as f64 * chart.spacing(j);
                    len2 += 0.5 * (gp[i * n + j] + gq[i * n + j]) * di * dj;
                }
            }
            let nd = d + len2.sqrt();
            if nd < dist[q] {
                dist[q] = nd;
                heap.push(Reverse((OrderedFloat(nd), q)));
            }
        }
    }
    TensorField::from_data(&chart, &[], dist).expect("scalar layout")
}

/// Separable Gaussian smoothing along the periodic axes.
pub fn mollify(f: &TensorField) -> TensorField {
    let chart = *f.chart();
    let mut cur = f.clone();
    for a in 0..chart.dim() {
        if !chart.axis(a).periodic {
            continue;
        }
        let width = MOLLIFIER_WIDTH / chart.spacing(a);
        let half = ((4.0 * width).ceil() as isize).min(chart.axis(a).points as isize / 2 - 1);
        let mut kernel: Vec<f64> = (-half..=half)
            .map(|k| (-0.5 * (k as f64 / width).powi(2)).exp())
            .collect();
        let total: f64 = kernel.iter().sum();
        kernel.iter_mut().for_each(|w| *w /= total);
        let src = cur.clone();
        cur = TensorField::scalar_from_fn(&chart, |p| {
            kernel
                .iter()
                .zip(-half..=half)
                .map(|(w, k)| w * src.value(chart.shift(p, a, k)))
                .sum()
        });
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn flat_distance_is_close_to_euclidean() {
        let chart = Chart::periodic(2, 64, TAU).unwrap();
        let g = MetricField::flat(&chart, 1.0).unwrap();
        let d = graph_distance(&g, &[0]);
        for p in 0..chart.len() {
            let x = chart.coords(p);
            let e = |v: f64| v.min(TAU - v);
            let exact = (e(x[0]).powi(2) + e(x[1]).powi(2)).sqrt();
            let got = d.value(p);
            assert!(got >= exact - 1e-12 && got <= exact * 1.03 + 1e-12, "{got} {exact}");
        }
    }

    #[test]
    fn scaled_metric_scales_distance() {
        let chart = Chart::periodic(2, 16, TAU).unwrap();
        let a = graph_distance(&MetricField::flat(&chart, 1.0).unwrap(), &[5]);
        let b = graph_distance(&MetricField::flat(&chart, 4.0).unwrap(), &[5]);
        for p in 0..chart.len() {
            assert!((b.value(p) - 2.0 * a.value(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn slice_distance_depends_on_first_coordinate_only() {
        let chart = Chart::periodic(2, 16, TAU).unwrap();
        let g = MetricField::flat(&chart, 1.0).unwrap();
        let d = graph_distance(&g, &Basepoint::Slice(0).sources(&chart));
        for p in 0..chart.len() {
            let i = chart.multi_index(p)[0] as f64;
            let want = (i.min(16.0 - i)) * TAU / 16.0;
            assert!((d.value(p) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mollifier_preserves_constants_and_mean() {
        let chart = Chart::periodic(2, 16, 1.0).unwrap();
        let c = TensorField::scalar_from_fn(&chart, |_| 2.5);
        assert!(mollify(&c).data().iter().all(|v| (v - 2.5).abs() < 1e-14));
        let f = TensorField::scalar_from_fn(&chart, |p| (p % 7) as f64);
        let (a, b): (f64, f64) = (f.data().iter().sum(), mollify(&f).data().iter().sum());
        assert!((a - b).abs() < 1e-9);
    }
}
