//! Feasibility analysis for approximate multi-metric group fairness.
//!
//! Modules:
//! - [`metrics`]: confusion-matrix rates, top-k thresholding, prevalence arithmetic.
//! - [`impossibility`]: closed-form metric relations and fairness-region area.
//! - [`region`]: discretized enumeration and joint counting of feasible models.
//! - [`planimeter`]: dot-planimeter area estimates for curve-bounded regions.
//! - [`dataset`]: CSV cohorts, group statistics and stratified sampling.
//! - [`selection`]: exact top-k selection under disparity constraints.
//! - [`export`]: CSV/PGM writers with atomic replacement.

pub mod dataset;
pub mod export;
pub mod impossibility;
pub mod metrics;
pub mod planimeter;
pub mod region;
pub mod selection;
