//! Fourth-order central differences with periodic wraparound.

use crate::field::{Slot, TensorField};

/// Radius of the first-derivative stencil in grid points.
pub const STENCIL_REACH: usize = 2;

const NEAR: f64 = 8.0 / 12.0;
const FAR: f64 = 1.0 / 12.0;

/// `∂_axis f` for every component of `f`.
pub fn partial_derivative(f: &TensorField, axis: usize) -> TensorField {
    let chart = *f.chart();
    let inv_h = 1.0 / chart.spacing(axis);
    let nc = f.components();
    TensorField::from_fn(&chart, f.slots(), |p, o| {
        let a1 = f.at(chart.shift(p, axis, 1));
        let b1 = f.at(chart.shift(p, axis, -1));
        let a2 = f.at(chart.shift(p, axis, 2));
        let b2 = f.at(chart.shift(p, axis, -2));
        for c in 0..nc {
            o[c] = (NEAR * (a1[c] - b1[c]) - FAR * (a2[c] - b2[c])) * inv_h;
        }
    })
}

/// All coordinate derivatives at once; the derivative index becomes a new
/// leading covariant slot: `out[a][I] = ∂_a f[I]`.
pub fn gradient(f: &TensorField) -> TensorField {
    let chart = *f.chart();
    let n = chart.dim();
    let nc = f.components();
    let mut slots = vec![Slot::Lower];
    slots.extend_from_slice(f.slots());
    let inv_h: Vec<f64> = (0..n).map(|a| 1.0 / chart.spacing(a)).collect();
    TensorField::from_fn(&chart, &slots, |p, o| {
        for a in 0..n {
            let a1 = f.at(chart.shift(p, a, 1));
            let b1 = f.at(chart.shift(p, a, -1));
            let a2 = f.at(chart.shift(p, a, 2));
            let b2 = f.at(chart.shift(p, a, -2));
            let out = &mut o[a * nc..(a + 1) * nc];
            for c in 0..nc {
                out[c] = (NEAR * (a1[c] - b1[c]) - FAR * (a2[c] - b2[c])) * inv_h[a];
            }
        }
    })
}

/// Periodic derivative of a sampled function of one variable.
pub fn derivative_1d(f: &[f64], spacing: f64) -> Vec<f64> {
    let n = f.len() as isize;
    let v = |i: isize| f[i.rem_euclid(n) as usize];
    (0..n)
        .map(|i| (NEAR * (v(i + 1) - v(i - 1)) - FAR * (v(i + 2) - v(i - 2))) / spacing)
        .collect()
}

/// Derivative of a single component at a single point.
#[inline]
pub fn stencil_at(f: &TensorField, p: usize, axis: usize, comp: usize) -> f64 {
    let chart = f.chart();
    let nc = f.components();
    let d = f.data();
    let v = |off: isize| d[chart.shift(p, axis, off) * nc + comp];
    (NEAR * (v(1) - v(-1)) - FAR * (v(2) - v(-2))) / chart.spacing(axis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use std::f64::consts::PI;

    fn sine_error(points: usize) -> f64 {
        let period = 3.0;
        let chart = Chart::periodic(2, points, period).unwrap();
        let k = 2.0 * PI / period;
        let f = TensorField::scalar_from_fn(&chart, |p| (k * chart.coords(p)[0]).sin());
        let df = partial_derivative(&f, 0);
        (0..chart.len())
            .map(|p| (df.value(p) - k * (k * chart.coords(p)[0]).cos()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_has_zero_derivative() {
        let chart = Chart::periodic(3, 8, 1.0).unwrap();
        let f = TensorField::from_fn(&chart, &[Slot::Lower], |_, o| o.fill(3.5));
        assert_eq!(gradient(&f).max_abs(), 0.0);
    }

    #[test]
    fn sine_derivative_is_fourth_order() {
        let errs: Vec<f64> = [16, 32, 64].iter().map(|&n| sine_error(n)).collect();
        // Independent oracle: the stencil's symbol error is
        // k - (8 sin(kh) - sin(2kh)) / (6h) = k^5 h^4 / 30 + O(h^6).
        let k = 2.0 * PI / 3.0;
        for (e, n) in errs.iter().zip([16, 32, 64]) {
            let h = 3.0 / n as f64;
            let bound = k.powi(5) * h.powi(4) / 30.0;
            assert!(*e <= 1.05 * bound, "N={n}: {e} > {bound}");
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn gradient_matches_partials() {
        let chart = Chart::periodic(3, 8, 2.0).unwrap();
        let f = TensorField::from_fn(&chart, &[Slot::Lower], |p, o| {
            let x = chart.coords(p);
            o[0] = (PI * x[0]).sin() * (PI * x[2]).cos();
            o[1] = x[1].cos();
            o[2] = 0.5;
        });
        let g = gradient(&f);
        for a in 0..3 {
            let d = partial_derivative(&f, a);
            for p in 0..chart.len() {
                assert_eq!(&g.at(p)[a * 3..a * 3 + 3], d.at(p));
                assert_eq!(stencil_at(&f, p, a, 0), d.at(p)[0]);
            }
        }
    }

    #[test]
    fn derivative_is_linear() {
        let chart = Chart::periodic(2, 16, 1.0).unwrap();
        let f = TensorField::scalar_from_fn(&chart, |p| (chart.coords(p)[1] * 6.0).sin());
        let g = TensorField::scalar_from_fn(&chart, |p| (p as f64).sqrt());
        let lhs = partial_derivative(&f.add(&g).unwrap(), 1);
        let rhs = partial_derivative(&f, 1).add(&partial_derivative(&g, 1)).unwrap();
        let diff = lhs.sub(&rhs).unwrap().max_abs();
        assert!(diff <= 1e-12 * lhs.max_abs(), "{diff}");
    }
}
