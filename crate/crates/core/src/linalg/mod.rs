//! Constraint-matrix storage, the weighted Gram factorization and leverage scores.

pub mod cholesky;
pub mod instance;
pub mod leverage;

pub use cholesky::{cholesky_of_weighted_gram, pivoted_cholesky_rank, Cholesky, EllipsoidQuadratic, PIVOT_FLOOR};
pub use instance::{build_instance, CsrMatrix, MatrixData, PolytopeInstance, Row, Storage, WeightVector};
pub use leverage::{leverage_scores, leverage_scores_with, objective_value, LeverageVector};

/// Neumaier-compensated sum, evaluated left to right.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
