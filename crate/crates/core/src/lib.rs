//! Tensor calculus on periodic coordinate charts, with tools for comparing
//! two Ricci flows and bounding their difference by weighted energies.

pub mod chart;
pub mod connection;
pub mod curvature;
pub mod deriv;
pub mod difference;
pub mod energy;
pub mod error;
pub mod verify;
pub mod exec;
pub mod field;
pub mod flow;
pub mod linalg;
pub mod metric;
pub mod norms;
pub mod random;
pub mod sum;
pub mod tolerance;

pub use chart::{Axis, Chart};
pub use error::{LabError, Result};
pub use field::{Slot, TensorField};
pub use metric::{MetricField, MetricSource};
