use std::ops::Deref;

use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::cholesky::{cholesky_of_weighted_gram, EllipsoidQuadratic};
use crate::linalg::instance::{PolytopeInstance, WeightVector};

/// Below this many multiply-adds the per-row loop stays on the calling thread.
const PARALLEL_WORK: usize = 1 << 18;

/// `σ_i(w) = a_iᵀ (Aᵀ W A)⁻¹ a_i` for every row.
#[derive(Debug, Clone, PartialEq)]
pub struct LeverageVector(Vec<f64>);

impl LeverageVector {
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for LeverageVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Leverage functional at `w`.
pub fn leverage_scores(inst: &PolytopeInstance, w: &WeightVector) -> Result<LeverageVector> {
    let ell = cholesky_of_weighted_gram(inst, w)?;
    Ok(leverage_scores_with(inst, &ell))
}

/// Same as [`leverage_scores`] against an already factored `Q`.
///
/// Each row costs one forward substitution with the Cholesky factor.
pub fn leverage_scores_with(inst: &PolytopeInstance, ell: &EllipsoidQuadratic) -> LeverageVector {
    let (m, n) = (inst.rows(), inst.cols());
    let score = |buf: &mut Vec<f64>, i: usize| {
        inst.row(i).scatter(buf);
        ell.inverse_form(buf)
    };
    let sigma = if m.saturating_mul(n * n) < PARALLEL_WORK {
        let mut buf = vec![0.0; n];
        (0..m).map(|i| score(&mut buf, i)).collect()
    } else {
        (0..m).into_par_iter().map_init(|| vec![0.0; n], score).collect()
    };
    LeverageVector(sigma)
}

/// Dual objective `Σ w_i - log det(Aᵀ W A) - n`.
pub fn objective_value(inst: &PolytopeInstance, w: &WeightVector) -> Result<f64> {
    let ell = cholesky_of_weighted_gram(inst, w)?;
    Ok(w.sum() - ell.logdet() - inst.cols() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn diamond() -> PolytopeInstance {
        PolytopeInstance::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]).unwrap()
    }

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_scores() {
        let inst = PolytopeInstance::identity(2).unwrap();
        assert_eq!(leverage_scores(&inst, &w(&[1.0, 1.0])).unwrap().as_slice(), &[1.0, 1.0]);
        // σ_i = 1 / w_i up to the rounding of √w_i.
        let s = leverage_scores(&inst, &w(&[2.0, 0.5])).unwrap();
        for (got, want) in s.iter().zip([0.5, 2.0]) {
            assert!((got - want).abs() <= 4.0 * f64::EPSILON * want, "{got} vs {want}");
        }
    }

    #[test]
    fn diamond_scores_at_optimum() {
        // Q = 2 I, so σ_i = ‖a_i‖² / 2.
        let s = leverage_scores(&diamond(), &w(&[0.0, 0.0, 1.0, 1.0])).unwrap();
        for (got, want) in s.iter().zip([0.5, 0.5, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
        assert!((s.max() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn objective_examples() {
        let id3 = PolytopeInstance::identity(3).unwrap();
        assert_eq!(objective_value(&id3, &WeightVector::uniform(3, 1.0)).unwrap(), 0.0);
        let got = objective_value(&diamond(), &w(&[0.0, 0.0, 1.0, 1.0])).unwrap();
        assert!((got + 4f64.ln()).abs() < 1e-14);
        let id2 = PolytopeInstance::identity(2).unwrap();
        // 4 - log det(2 I_2) - 2 = 2 - 2 ln 2
        let got = objective_value(&id2, &w(&[2.0, 2.0])).unwrap();
        assert!((got - (2.0 - 2.0 * 2f64.ln())).abs() < 1e-14, "{got}");
    }

    #[test]
    fn singular_gram_propagates() {
        let id2 = PolytopeInstance::identity(2).unwrap();
        assert!(matches!(leverage_scores(&id2, &w(&[1.0, 0.0])), Err(Error::NotPositiveDefinite { .. })));
        assert!(objective_value(&id2, &w(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn parallel_path_matches_sequential() {
        // 3000 x 10 crosses the parallel threshold.
        let (m, n) = (3000, 10);
        let data: Vec<f64> = (0..m * n).map(|k| ((k * 7919 % 101) as f64 - 50.0) / 17.0).collect();
        let inst = PolytopeInstance::from_dense(m, n, data).unwrap();
        let weights = WeightVector::uniform(m, n as f64 / m as f64);
        let par = leverage_scores(&inst, &weights).unwrap();
        let ell = cholesky_of_weighted_gram(&inst, &weights).unwrap();
        let mut buf = vec![0.0; n];
        for i in 0..m {
            inst.row(i).scatter(&mut buf);
            assert_eq!(par[i], ell.inverse_form(&mut buf));
        }
    }
}
