use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{cholesky_of_weighted_gram, leverage_scores_with, PolytopeInstance, WeightVector};

/// Absolute slack on both containment inequalities.
pub const CONTAINMENT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentResult {
    pub samples: usize,
    /// Boundary points of `(1+ε̂)^(-1/2) Q` with `‖Ax‖∞ > 1 + slack`.
    pub inner_violations: usize,
    /// Boundary points of `P` with `yᵀQy > n + slack`.
    pub outer_violations: usize,
    /// Largest `‖Ax‖∞` seen on the shrunken ellipsoid.
    pub worst_inner: f64,
    /// Largest `yᵀQy` seen on the polytope boundary.
    pub worst_outer: f64,
}

impl ContainmentResult {
    pub fn inner_pass(&self) -> bool {
        self.inner_violations == 0
    }

    pub fn outer_pass(&self) -> bool {
        self.outer_violations == 0
    }

    pub fn passed(&self) -> bool {
        self.inner_pass() && self.outer_pass()
    }
}

/// Samples the sandwich `(1+ε̂)^(-1/2) Q ⊆ P ⊆ √n Q` along random directions.
///
/// Sample `k` uses the `k`-th block of `n` normals from a ChaCha8 stream seeded
/// with `seed`, normalised to the unit sphere.
pub fn containment_check(
    inst: &PolytopeInstance,
    w: &WeightVector,
    samples: usize,
    seed: u64,
) -> Result<ContainmentResult> {
    let ell = cholesky_of_weighted_gram(inst, w)?;
    let shrink = leverage_scores_with(inst, &ell).max();
    let n = inst.cols();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs: Vec<f64> = (0..samples * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    for u in dirs.chunks_mut(n) {
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
    }

    let bound = n as f64 + CONTAINMENT_SLACK;
    let eval = |u: &[f64]| -> (f64, f64) {
        let au = inst.apply(u);
        let sup = au.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        // x = u / √((1+ε̂) uᵀQu) sits on the boundary of the shrunken ellipsoid,
        // and y = u / ‖Au‖∞ on the boundary of P.
        let inner = sup / (shrink * ell.quadratic_form(u)).sqrt();
        let outer = ell.quadratic_form(u) / (sup * sup);
        (inner, outer)
    };
    let results: Vec<(f64, f64)> = if samples * inst.nnz() >= 1 << 16 {
        dirs.par_chunks(n).map(eval).collect()
    } else {
        dirs.chunks(n).map(eval).collect()
    };

    let mut out =
        ContainmentResult { samples, inner_violations: 0, outer_violations: 0, worst_inner: 0.0, worst_outer: 0.0 };
    for (inner, outer) in results {
        // NaN counts as a violation.
        if !(inner <= 1.0 + CONTAINMENT_SLACK) {
            out.inner_violations += 1;
        }
        if !(outer <= bound) {
            out.outer_violations += 1;
        }
        out.worst_inner = out.worst_inner.max(inner);
        out.worst_outer = out.worst_outer.max(outer);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn ball_in_cube() {
        let inst = PolytopeInstance::identity(3).unwrap();
        let r = containment_check(&inst, &WeightVector::uniform(3, 1.0), 500, 1).unwrap();
        assert!(r.passed());
        assert!(r.worst_inner <= 1.0 && r.worst_outer <= 3.0 + 1e-12);
    }

    #[test]
    fn diamond_sandwich() {
        let inst = PolytopeInstance::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]).unwrap();
        let w = WeightVector::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let r = containment_check(&inst, &w, 1000, 2).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.samples, 1000);
    }

    #[test]
    fn oversized_ellipsoid_is_caught() {
        // Mass 3 > n on the square: √n Q no longer covers the corners.
        let inst = PolytopeInstance::identity(2).unwrap();
        let w = WeightVector::new(vec![1.5, 1.5]).unwrap();
        let r = containment_check(&inst, &w, 200, 3).unwrap();
        assert!(r.inner_pass());
        assert!(!r.outer_pass());
    }

    #[test]
    fn singular_gram_is_surfaced_before_sampling() {
        let inst = PolytopeInstance::identity(2).unwrap();
        let w = WeightVector::new(vec![2.0, 0.0]).unwrap();
        assert!(matches!(containment_check(&inst, &w, 10, 0), Err(Error::NotPositiveDefinite { .. })));
    }
}
