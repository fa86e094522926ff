//! Approximate John ellipsoids of centrally symmetric polytopes
//! `P = {x : -1 <= Ax <= 1}`.
//!
//! The ellipsoid is `{x : xᵀ (Aᵀ W A) x <= 1}` for nonnegative weights `w`.
//! [`fixed_point`] computes `w` by the averaged iteration `w <- w ⊙ σ(w)`,
//! [`sketched`] replaces the exact leverage scores by Gaussian sketches, and
//! [`certify`] verifies any weight vector independently of how it was found.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod fixed_point;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod sketched;
pub mod trace;

pub use certify::{
    certify, certify_with_containment, containment_check, duality_gap, duality_gap_report, oracle_solve, volume_ratio,
    CertificateReport, ContainmentResult, DualityGap, OracleSolution,
};
pub use error::{Error, Result};
pub use fixed_point::{default_iterations, fixed_point_solve, fixed_point_step, FixedPointConfig};
pub use generate::{generate, GeneratorFamily, GeneratorSpec};
pub use linalg::{
    build_instance, cholesky_of_weighted_gram, leverage_scores, objective_value, EllipsoidQuadratic, LeverageVector,
    MatrixData, PolytopeInstance, WeightVector,
};
pub use sketched::{expected_row_sum_distribution_check, sketch_step, sketched_solve, RowSumSummary, SketchConfig};
pub use trace::{SolveTrace, TraceRecord};
