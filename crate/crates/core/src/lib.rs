//! Group-blind distributional repair with entropic optimal transport.
//!
//! The repair couples the pooled feature distribution `P^X` to a target `Q`
//! under a band constraint `−Λ ≤ γ'V ≤ Λ`, where `V` is built from the
//! group-conditional distributions of a reference sample. The resulting
//! coupling defines a map that is applied to samples without looking at
//! their protected attribute.

// validation negates comparisons so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod projection;
pub mod solvers;
pub mod transport;

pub use distributions::{
    empirical_distribution, empirical_from_indices, groupwise_empirical, make_simplex,
    repair_vector, tv_distance, Point, RepairVector, SimplexVector, Support,
};
pub use error::{Error, ErrorClass, Result};
pub use metrics::MetricsReport;
pub use projection::{apply_map, build_map, ProjectionMap, WeightedDataset, WeightedRow};
pub use solvers::{
    barycentre_coupling, barycentre_maps, bregman_baseline, dykstra_repair, DykstraOptions,
    DykstraSchedule, EarlyExit, SolverTrace, StopReason,
};
pub use transport::{cost_matrix, gibbs_kernel, BandConstraint, CostMatrix, Coupling};
