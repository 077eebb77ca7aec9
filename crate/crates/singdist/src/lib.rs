//! Distances from planar 3-RPR / 3-RRR configurations to their closest singular
//! configurations under extrinsic metrics, computed by homotopy continuation.

pub mod model;
pub mod polynomials;
pub mod scalar;
pub mod homotopy;
pub mod metrics;
pub mod varieties;
pub mod lagrangian;
pub mod pipeline;
pub mod kpi;
pub mod report;
