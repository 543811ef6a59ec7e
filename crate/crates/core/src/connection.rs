//! Levi-Civita connections and covariant differentiation.

use crate::deriv;
use crate::field::{IndexTable, Slot, TensorField};
use crate::metric::MetricField;

/// Christoffel symbols `Γ^k_{ij}` stored with slots `[Upper, Lower, Lower]`.
#[derive(Clone, Debug)]
pub struct Connection {
    gamma: TensorField,
}

impl Connection {
    pub fn from_symbols(gamma: TensorField) -> Self {
        assert_eq!(gamma.slots(), [Slot::Upper, Slot::Lower, Slot::Lower]);
        Connection { gamma }
    }

    pub fn symbols(&self) -> &TensorField {
        &self.gamma
    }

    pub fn into_symbols(self) -> TensorField {
        self.gamma
    }

    /// Covariant derivative; the derivative index becomes a new leading
    /// covariant slot, `(∇V)_{i...} = ∇_i V_{...}`.
    pub fn covariant_derivative(&self, v: &TensorField) -> TensorField {
        covariant_derivative(self, v)
    }
}

/// `Γ^k_{ij} = ½ g^{km}(∂_i g_{jm} + ∂_j g_{im} − ∂_m g_{ij})`.
pub fn christoffel(g: &MetricField) -> Connection {
    let chart = *g.chart();
    let n = chart.dim();
    let dg = deriv::gradient(g.field());
    let gamma = TensorField::from_fn(&chart, &[Slot::Upper, Slot::Lower, Slot::Lower], |p, o| {
        let d = dg.at(p);
        let gi = g.inv_at(p);
        let at = |a: usize, i: usize, j: usize| d[(a * n + i) * n + j];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += gi[k * n + m] * (at(i, j, m) + at(j, i, m) - at(m, i, j));
                    }
                    o[(k * n + i) * n + j] = 0.5 * s;
                    o[(k * n + j) * n + i] = 0.5 * s;
                }
            }
        }
    });
    Connection { gamma }
}

pub fn covariant_derivative(conn: &Connection, v: &TensorField) -> TensorField {
    let chart = *v.chart();
    let n = chart.dim();
    let nc = v.components();
    let rank = v.rank();
    let table = IndexTable::new(n, rank);
    let swap: Vec<usize> = (0..nc)
        .flat_map(|c| {
            let table = &table;
            (0..rank).flat_map(move |s| (0..n).map(move |q| table.replace(c, s, q)))
        })
        .collect();
    let slots_in = v.slots().to_vec();
    let dv = deriv::gradient(v);
    TensorField::from_fn(&chart, dv.slots(), |p, o| {
        let gam = conn.gamma.at(p);
        let vals = v.at(p);
        let d = dv.at(p);
        for i in 0..n {
            for c in 0..nc {
                let idx = table.get(c);
                let mut acc = d[i * nc + c];
                for (s, slot) in slots_in.iter().enumerate() {
                    let base = (c * rank + s) * n;
                    match slot {
                        Slot::Upper => {
                            let top = idx[s];
                            for q in 0..n {
                                acc += gam[(top * n + i) * n + q] * vals[swap[base + q]];
                            }
                        }
                        Slot::Lower => {
                            let low = idx[s];
                            for q in 0..n {
                                acc -= gam[(q * n + i) * n + low] * vals[swap[base + q]];
                            }
                        }
                    }
                }
                o[i * nc + c] = acc;
            }
        }
    })
}
