//! Rectangular coordinate charts.
//!
//! Every axis is sampled uniformly and stencils always wrap around. A
//! *periodic* axis really is periodic; a *window* axis is a slab cut out of a
//! larger domain, so stencil output within `reach` points of either end is
//! garbage and must be excluded through [`Chart::interior`].

use crate::error::{LabError, Result};

pub const MAX_DIM: usize = 3;
pub const MIN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub points: usize,
    pub spacing: f64,
    /// Coordinate of index 0.
    pub origin: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn periodic(points: usize, period: f64) -> Self {
        Axis {
            points,
            spacing: period / points as f64,
            origin: 0.0,
            periodic: true,
        }
    }

    /// A window of `points` samples centred on `center`.
    pub fn window(points: usize, spacing: f64, center: f64) -> Self {
        Axis {
            points,
            spacing,
            origin: center - spacing * (points / 2) as f64,
            periodic: false,
        }
    }

    pub fn period(&self) -> f64 {
        self.points as f64 * self.spacing
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.origin + self.spacing * i as f64
    }

    /// Index of the sample closest to the window centre.
    pub fn center_index(&self) -> usize {
        self.points / 2
    }
}

/// A periodic (or windowed) rectangular grid in 2 or 3 dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    dim: usize,
    axes: [Axis; MAX_DIM],
    strides: [usize; MAX_DIM],
    len: usize,
}

impl Chart {
    pub fn new(axes: &[Axis]) -> Result<Self> {
        let dim = axes.len();
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(LabError::InvalidChart(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        for (a, ax) in axes.iter().enumerate() {
            if ax.points < MIN_POINTS {
                return Err(LabError::InvalidChart(format!(
                    "axis {a} has {} points, need at least {MIN_POINTS}",
                    ax.points
                )));
            }
            if !(ax.spacing > 0.0 && ax.spacing.is_finite()) {
                return Err(LabError::InvalidChart(format!(
                    "axis {a} has non-positive period"
                )));
            }
        }
        let filler = Axis {
            points: 1,
            spacing: 1.0,
            origin: 0.0,
            periodic: true,
        };
        let mut all = [filler; MAX_DIM];
        all[..dim].copy_from_slice(axes);
        let mut strides = [0; MAX_DIM];
        let mut s = 1;
        for a in (0..dim).rev() {
            strides[a] = s;
            s *= all[a].points;
        }
        Ok(Chart {
            dim,
            axes: all,
            strides,
            len: s,
        })
    }

    /// The cube `[0, period)^dim` with `points` samples per axis.
    pub fn periodic(dim: usize, points: usize, period: f64) -> Result<Self> {
        let axes = vec![Axis::periodic(points, period); dim];
        Chart::new(&axes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes[..self.dim]
    }

    pub fn spacing(&self, a: usize) -> f64 {
        self.axes[a].spacing
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes().iter().map(|a| a.spacing).fold(0.0, f64::max)
    }

    /// Volume of one grid cell in coordinate units.
    pub fn cell_volume(&self) -> f64 {
        self.axes().iter().map(|a| a.spacing).product()
    }

    pub fn stride(&self, a: usize) -> usize {
        self.strides[a]
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.strides)
            .map(|(i, s)| i * s)
            .sum()
    }

    pub fn multi_index(&self, p: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for a in 0..self.dim {
            out[a] = (p / self.strides[a]) % self.axes[a].points;
        }
        out
    }

    pub fn coords(&self, p: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(p);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = self.axes[a].coord(idx[a]);
        }
        x
    }

    /// Point reached from `p` by moving `offset` samples along `axis`,
    /// wrapping around.
    #[inline]
    pub fn shift(&self, p: usize, axis: usize, offset: isize) -> usize {
        let n = self.axes[axis].points as isize;
        let s = self.strides[axis];
        let i = ((p / s) % n as usize) as isize;
        let j = (i + offset).rem_euclid(n);
        (p as isize + (j - i) * s as isize) as usize
    }

    /// Points at least `reach` samples away from both ends of every window
    /// axis, in ascending order.
    pub fn interior(&self, reach: usize) -> Vec<usize> {
        (0..self.len)
            .filter(|&p| {
                let idx = self.multi_index(p);
                (0..self.dim).all(|a| {
                    let ax = &self.axes[a];
                    ax.periodic || (idx[a] >= reach && idx[a] + reach < ax.points)
                })
            })
            .collect()
    }

    pub fn is_fully_periodic(&self) -> bool {
        self.axes().iter().all(|a| a.periodic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_bad_charts() {
        assert!(Chart::periodic(2, 7, 1.0).is_err());
        assert!(Chart::periodic(1, 16, 1.0).is_err());
        assert!(Chart::periodic(4, 16, 1.0).is_err());
        assert!(Chart::periodic(2, 16, -1.0).is_err());
        assert!(Chart::periodic(3, 8, 1.0).is_ok());
    }

    #[test]
    fn index_round_trip_and_wrap() {
        let c = Chart::new(&[Axis::periodic(8, 1.0), Axis::periodic(9, 2.0), Axis::periodic(10, 3.0)]).unwrap();
        assert_eq!(c.len(), 720);
        for p in [0, 1, 77, 719] {
            let idx = c.multi_index(p);
            assert_eq!(c.index(&idx[..3]), p);
        }
        let p = c.index(&[7, 0, 9]);
        assert_eq!(c.multi_index(c.shift(p, 0, 1))[0], 0);
        assert_eq!(c.multi_index(c.shift(p, 1, -2))[1], 7);
        assert_eq!(c.multi_index(c.shift(p, 2, 3))[2], 2);
        assert_eq!(c.shift(c.shift(p, 2, 5), 2, -5), p);
    }

    #[test]
    fn interior_excludes_window_halo() {
        let c = Chart::new(&[Axis::periodic(8, 1.0), Axis::window(12, 0.1, 0.0)]).unwrap();
        let inner = c.interior(3);
        assert_eq!(inner.len(), 8 * 6);
        assert!(inner.iter().all(|&p| {
            let j = c.multi_index(p)[1];
            (3..9).contains(&j)
        }));
        assert!((c.axis(1).coord(c.axis(1).center_index())).abs() < 1e-15);
    }
}
