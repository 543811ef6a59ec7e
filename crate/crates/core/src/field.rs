//! Tensor fields sampled on a [`Chart`].
//!
//! Storage is point-major: all `n^rank` components of a point are contiguous,
//! points follow the chart's row-major order, and component multi-indices are
//! row-major over the slots. Slot 0 is the leftmost index, so `A^k_{ij}` with
//! slots `[Upper, Lower, Lower]` stores `A[k][i][j]`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::chart::Chart;
use crate::error::{LabError, Result};
use crate::exec;

pub const MAX_RANK: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    Upper,
    Lower,
}

/// Multi-index decoding for `rank` slots over `dim` values.
#[derive(Clone, Debug)]
pub struct IndexTable {
    dim: usize,
    rank: usize,
    indices: Vec<[usize; MAX_RANK]>,
}

impl IndexTable {
    pub fn new(dim: usize, rank: usize) -> Self {
        assert!(rank <= MAX_RANK, "rank {rank} exceeds {MAX_RANK}");
        let count = dim.pow(rank as u32);
        let indices = (0..count)
            .map(|mut c| {
                let mut idx = [0; MAX_RANK];
                for s in (0..rank).rev() {
                    idx[s] = c % dim;
                    c /= dim;
                }
                idx
            })
            .collect();
        IndexTable { dim, rank, indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, c: usize) -> &[usize] {
        &self.indices[c][..self.rank]
    }

    pub fn encode(&self, idx: &[usize]) -> usize {
        component(self.dim, idx)
    }

    /// Component index of `c` with slot `s` replaced by `value`.
    pub fn replace(&self, c: usize, s: usize, value: usize) -> usize {
        let stride = self.dim.pow((self.rank - 1 - s) as u32);
        let old = self.indices[c][s];
        c + value * stride - old * stride
    }
}

#[inline]
pub fn component(dim: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    chart: Chart,
    slots: Vec<Slot>,
    ncomp: usize,
    data: Vec<f64>,
}

impl TensorField {
    pub fn zeros(chart: &Chart, slots: &[Slot]) -> Self {
        let ncomp = chart.dim().pow(slots.len() as u32);
        TensorField {
            chart: *chart,
            slots: slots.to_vec(),
            ncomp,
            data: vec![0.0; ncomp * chart.len()],
        }
    }

    pub fn scalar_zeros(chart: &Chart) -> Self {
        Self::zeros(chart, &[])
    }

    /// Build a field by evaluating `f(point, components)` at every point.
    pub fn from_fn<F>(chart: &Chart, slots: &[Slot], f: F) -> Self
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        let mut out = Self::zeros(chart, slots);
        exec::fill_points(&mut out.data, out.ncomp, f);
        out
    }

    pub fn scalar_from_fn<F>(chart: &Chart, f: F) -> Self
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        Self::from_fn(chart, &[], |p, o| o[0] = f(p))
    }

    pub fn from_data(chart: &Chart, slots: &[Slot], data: Vec<f64>) -> Result<Self> {
        let ncomp = chart.dim().pow(slots.len() as u32);
        if data.len() != ncomp * chart.len() {
            return Err(LabError::Format(format!(
                "expected {} values, got {}",
                ncomp * chart.len(),
                data.len()
            )));
        }
        Ok(TensorField {
            chart: *chart,
            slots: slots.to_vec(),
            ncomp,
            data,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    /// `(covariant, contravariant)` slot counts.
    pub fn valence(&self) -> (usize, usize) {
        let upper = self.slots.iter().filter(|s| **s == Slot::Upper).count();
        (self.rank() - upper, upper)
    }

    pub fn components(&self) -> usize {
        self.ncomp
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, p: usize) -> &[f64] {
        &self.data[p * self.ncomp..(p + 1) * self.ncomp]
    }

    #[inline]
    pub fn at_mut(&mut self, p: usize) -> &mut [f64] {
        let w = self.ncomp;
        &mut self.data[p * w..(p + 1) * w]
    }

    #[inline]
    pub fn get(&self, p: usize, idx: &[usize]) -> f64 {
        self.data[p * self.ncomp + component(self.dim(), idx)]
    }

    /// Value of a rank-0 field.
    #[inline]
    pub fn value(&self, p: usize) -> f64 {
        self.data[p * self.ncomp]
    }

    pub fn index_table(&self) -> IndexTable {
        IndexTable::new(self.dim(), self.rank())
    }

    pub fn same_shape(&self, other: &TensorField) -> Result<()> {
        if self.slots != other.slots {
            return Err(LabError::ValenceMismatch(format!(
                "{:?} vs {:?}",
                self.slots, other.slots
            )));
        }
        if self.chart != other.chart {
            return Err(LabError::ValenceMismatch("fields live on different charts".into()));
        }
        Ok(())
    }

    pub fn zip_map(&self, other: &TensorField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_shape(other)?;
        Ok(TensorField {
            chart: self.chart,
            slots: self.slots.clone(),
            ncomp: self.ncomp,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        TensorField {
            chart: self.chart,
            slots: self.slots.clone(),
            ncomp: self.ncomp,
            data: self.data.iter().map(|a| f(*a)).collect(),
        }
    }

    pub fn add(&self, other: &TensorField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TensorField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|a| c * a)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &TensorField) -> Result<Self> {
        self.zip_map(other, |a, b| a + c * b)
    }

    /// Largest absolute component value over the listed points.
    pub fn max_abs_over(&self, points: &[usize]) -> f64 {
        points
            .iter()
            .flat_map(|&p| self.at(p).iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest deviation from symmetry in slots `(s1, s2)`.
    pub fn symmetry_defect(&self, s1: usize, s2: usize) -> f64 {
        let table = self.index_table();
        let mut worst = 0.0_f64;
        for p in 0..self.chart.len() {
            let v = self.at(p);
            for c in 0..self.ncomp {
                let idx = table.get(c);
                let swapped = table.replace(table.replace(c, s1, idx[s2]), s2, idx[s1]);
                worst = worst.max((v[c] - v[swapped]).abs());
            }
        }
        worst
    }

    /// Average over the transposition of slots `(s1, s2)`.
    pub fn symmetrized(&self, s1: usize, s2: usize) -> Self {
        let table = self.index_table();
        let ncomp = self.ncomp;
        TensorField::from_fn(&self.chart, &self.slots, |p, o| {
            let v = self.at(p);
            for c in 0..ncomp {
                let idx = table.get(c);
                let swapped = table.replace(table.replace(c, s1, idx[s2]), s2, idx[s1]);
                o[c] = 0.5 * (v[c] + v[swapped]);
            }
        })
    }

    /// Copy of this field's components on another chart of identical shape
    /// (used when tiles share a sampling pattern).
    pub fn with_chart(mut self, chart: &Chart) -> Result<Self> {
        if chart.len() != self.chart.len() || chart.dim() != self.chart.dim() {
            return Err(LabError::InvalidChart("chart shape mismatch".into()));
        }
        self.chart = *chart;
        Ok(self)
    }

    /// Flat binary layout: little-endian `u32` header `n, N_0..N_{n-1},
    /// covariant count, contravariant count, slot mask` (bit `s` set when slot
    /// `s` is contravariant), then every value as little-endian `f64` in
    /// point-major, row-major order.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.dim();
        let mut header = Vec::with_capacity(4 * (n + 4));
        header.extend_from_slice(&(n as u32).to_le_bytes());
        for ax in self.chart.axes() {
            header.extend_from_slice(&(ax.points as u32).to_le_bytes());
        }
        let (cov, contra) = self.valence();
        header.extend_from_slice(&(cov as u32).to_le_bytes());
        header.extend_from_slice(&(contra as u32).to_le_bytes());
        let mask = self
            .slots
            .iter()
            .enumerate()
            .filter(|(_, s)| **s == Slot::Upper)
            .fold(0u32, |m, (i, _)| m | (1 << i));
        header.extend_from_slice(&mask.to_le_bytes());
        w.write_all(&header)?;
        let mut body = Vec::with_capacity(8 * self.data.len());
        for v in &self.data {
            body.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&body)?;
        Ok(())
    }

    /// Read a field written by [`TensorField::write_binary`]. The chart
    /// supplies spacings and must match the stored point counts.
    pub fn read_binary<R: Read>(mut r: R, chart: &Chart) -> Result<Self> {
        let mut word = [0u8; 4];
        let mut next = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut word)
                .map_err(|e| LabError::Format(e.to_string()))?;
            Ok(u32::from_le_bytes(word))
        };
        let n = next(&mut r)? as usize;
        if n != chart.dim() {
            return Err(LabError::Format(format!(
                "stored dimension {n}, chart dimension {}",
                chart.dim()
            )));
        }
        for a in 0..n {
            let pts = next(&mut r)? as usize;
            if pts != chart.axis(a).points {
                return Err(LabError::Format(format!(
                    "axis {a}: stored {pts} points, chart has {}",
                    chart.axis(a).points
                )));
            }
        }
        let cov = next(&mut r)? as usize;
        let contra = next(&mut r)? as usize;
        let mask = next(&mut r)?;
        let rank = cov + contra;
        if rank > MAX_RANK || mask >> rank != 0 || mask.count_ones() as usize != contra {
            return Err(LabError::Format("inconsistent valence header".into()));
        }
        let slots: Vec<Slot> = (0..rank)
            .map(|s| if mask & (1 << s) != 0 { Slot::Upper } else { Slot::Lower })
            .collect();
        let count = n.pow(rank as u32) * chart.len();
        let mut bytes = vec![0u8; 8 * count];
        r.read_exact(&mut bytes)
            .map_err(|e| LabError::Format(e.to_string()))?;
        let data = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        TensorField::from_data(chart, &slots, data)
    }
}
