//! Pointwise inner products and norms induced by a metric on `T^k_l`.

use crate::error::Result;
use crate::field::{IndexTable, Slot, TensorField};
use crate::metric::MetricField;

/// Per-point helper that raises covariant slots and lowers contravariant ones.
pub(crate) struct Musical {
    n: usize,
    rank: usize,
    table: IndexTable,
    slots: Vec<Slot>,
}

impl Musical {
    pub(crate) fn new(n: usize, slots: &[Slot]) -> Self {
        Musical {
            n,
            rank: slots.len(),
            table: IndexTable::new(n, slots.len()),
            slots: slots.to_vec(),
        }
    }

    /// Write the fully index-flipped version of `w` into `out`, using `work`
    /// as scratch; both must have `n^rank` entries.
    pub(crate) fn flip(&self, g: &[f64], ginv: &[f64], w: &[f64], out: &mut [f64], work: &mut [f64]) {
        let n = self.n;
        out.copy_from_slice(w);
        for s in 0..self.rank {
            work.copy_from_slice(out);
            let m = match self.slots[s] {
                Slot::Lower => ginv,
                Slot::Upper => g,
            };
            for (c, o) in out.iter_mut().enumerate() {
                let a = self.table.get(c)[s];
                let mut acc = 0.0;
                for b in 0..n {
                    acc += m[a * n + b] * work[self.table.replace(c, s, b)];
                }
                *o = acc;
            }
        }
    }
}

/// `⟨V, W⟩_g` at every point.
pub fn inner(g: &MetricField, v: &TensorField, w: &TensorField) -> Result<TensorField> {
    v.same_shape(w)?;
    let musical = Musical::new(g.dim(), v.slots());
    let nc = v.components();
    Ok(TensorField::scalar_from_fn(g.chart(), |p| {
        let mut flipped = vec![0.0; nc];
        let mut work = vec![0.0; nc];
        musical.flip(g.g_at(p), g.inv_at(p), w.at(p), &mut flipped, &mut work);
        v.at(p).iter().zip(&flipped).map(|(a, b)| a * b).sum()
    }))
}

/// `|V|²_g` at every point.
pub fn norm_sq(g: &MetricField, v: &TensorField) -> TensorField {
    inner(g, v, v).expect("a field always matches itself")
}

/// `|V|_g` at every point (clamped at zero against roundoff).
pub fn norm(g: &MetricField, v: &TensorField) -> TensorField {
    norm_sq(g, v).map(|x| x.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::linalg;
    use proptest::prelude::*;

    fn wavy_metric(chart: &Chart) -> MetricField {
        let src = (2, |x: &[f64; 3]| {
            let mut m = linalg::identity();
            m[0][0] = 1.5 + 0.3 * x[1].sin();
            m[0][1] = 0.2 * x[0].cos();
            m[1][0] = m[0][1];
            m[1][1] = 0.8;
            m
        });
        MetricField::from_source(chart, &src).unwrap()
    }

    #[test]
    fn metric_has_norm_squared_n() {
        for n in [2, 3] {
            let chart = Chart::periodic(n, 8, 6.0).unwrap();
            let g = if n == 2 { wavy_metric(&chart) } else { MetricField::flat(&chart, 3.0).unwrap() };
            let nsq = norm_sq(&g, g.field());
            for p in 0..chart.len() {
                assert!((nsq.value(p) - n as f64).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn valence_mismatch_is_an_error() {
        let chart = Chart::periodic(2, 8, 1.0).unwrap();
        let g = MetricField::flat(&chart, 1.0).unwrap();
        let a = TensorField::zeros(&chart, &[Slot::Lower]);
        let b = TensorField::zeros(&chart, &[Slot::Upper]);
        assert!(inner(&g, &a, &b).is_err());
    }

    fn field_from(chart: &Chart, slots: &[Slot], coeffs: &[f64]) -> TensorField {
        TensorField::from_fn(chart, slots, |p, o| {
            let x = chart.coords(p);
            for (c, v) in o.iter_mut().enumerate() {
                *v = coeffs[c % coeffs.len()] * (x[0] + c as f64).cos() + coeffs[(c + 1) % coeffs.len()] * x[1].sin();
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn symmetric_bilinear_and_cauchy_schwarz(
            a in proptest::collection::vec(-2.0f64..2.0, 8),
            b in proptest::collection::vec(-2.0f64..2.0, 8),
            c in -3.0f64..3.0,
        ) {
            let chart = Chart::periodic(2, 8, 6.0).unwrap();
            let g = wavy_metric(&chart);
            let slots = [Slot::Upper, Slot::Lower, Slot::Lower];
            let v = field_from(&chart, &slots, &a);
            let w = field_from(&chart, &slots, &b);
            let vw = inner(&g, &v, &w).unwrap();
            let wv = inner(&g, &w, &v).unwrap();
            let vv = norm_sq(&g, &v);
            let ww = norm_sq(&g, &w);
            let cv = norm_sq(&g, &v.scale(c));
            for p in 0..chart.len() {
                let scale = vv.value(p).max(ww.value(p)).max(1e-300);
                prop_assert!((vw.value(p) - wv.value(p)).abs() <= 1e-13 * scale);
                prop_assert!(vv.value(p) >= -1e-13 * scale);
                prop_assert!(vw.value(p).powi(2) <= vv.value(p) * ww.value(p) * (1.0 + 1e-12) + 1e-24);
                prop_assert!((cv.value(p) - c * c * vv.value(p)).abs() <= 1e-12 * c * c * scale + 1e-300);
            }
        }
    }
}
