//! Scenario driver for the Ricci-flow laboratory: configuration, the six
//! scenarios and their artifacts.

pub mod config;
pub mod report;
pub mod scenario;
pub mod series;
