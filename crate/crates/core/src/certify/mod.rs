//! Standalone verification of weight vectors.
//!
//! Everything here recomputes leverage scores from the instance and the
//! weights alone; nothing is reused from a solver run.

mod containment;
mod oracle;

pub use containment::{containment_check, ContainmentResult, CONTAINMENT_SLACK};
pub use oracle::{oracle_solve, OracleSolution, SUPPORT_THRESHOLD};

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky_of_weighted_gram, leverage_scores_with, EllipsoidQuadratic, PolytopeInstance, WeightVector,
};

/// Relative slack on `Σ w = n` accepted by [`certify`].
pub const MASS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub target_epsilon: f64,
    /// `max_i σ_i(w)`.
    pub max_sigma: f64,
    pub weight_sum: f64,
    /// `max_sigma - 1`.
    pub epsilon_achieved: f64,
    /// `n ln(1 + epsilon_achieved)`.
    pub duality_gap: f64,
    /// `Σ w - log det(Aᵀ W A) - n`.
    pub objective: f64,
    /// `log det(Aᵀ W A)`.
    pub logdet: f64,
    pub sigma_pass: bool,
    pub mass_pass: bool,
    pub containment: Option<ContainmentResult>,
}

impl CertificateReport {
    /// Approximation verdict, and containment when it was sampled.
    pub fn certified(&self) -> bool {
        self.sigma_pass && self.mass_pass && self.containment.as_ref().is_none_or(ContainmentResult::passed)
    }
}

/// Checks `Σ w = n` and `σ_i(w) <= 1 + target_epsilon` for all `i`.
pub fn certify(inst: &PolytopeInstance, w: &WeightVector, target_epsilon: f64) -> Result<CertificateReport> {
    let ell = cholesky_of_weighted_gram(inst, w)?;
    let sigma = leverage_scores_with(inst, &ell);
    let n = inst.cols() as f64;
    let max_sigma = sigma.max();
    let weight_sum = w.sum();
    let epsilon_achieved = max_sigma - 1.0;
    Ok(CertificateReport {
        target_epsilon,
        max_sigma,
        weight_sum,
        epsilon_achieved,
        duality_gap: n * epsilon_achieved.ln_1p(),
        objective: weight_sum - ell.logdet() - n,
        logdet: ell.logdet(),
        sigma_pass: max_sigma <= 1.0 + target_epsilon,
        mass_pass: (weight_sum - n).abs() <= MASS_TOLERANCE * n,
        containment: None,
    })
}

/// [`certify`] followed by a sampled [`containment_check`].
pub fn certify_with_containment(
    inst: &PolytopeInstance,
    w: &WeightVector,
    target_epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    let mut report = certify(inst, w, target_epsilon)?;
    report.containment = Some(containment_check(inst, w, samples, seed)?);
    Ok(report)
}

fn max_sigma(inst: &PolytopeInstance, ell: &EllipsoidQuadratic) -> f64 {
    leverage_scores_with(inst, ell).max()
}

fn require_mass(inst: &PolytopeInstance, w: &WeightVector) -> Result<()> {
    let n = inst.cols() as f64;
    let total = w.sum();
    if (total - n).abs() > MASS_TOLERANCE * n {
        return Err(Error::Domain(format!("duality gap needs Σw = {n}, got {total}")));
    }
    Ok(())
}

/// `n ln(1 + ε̂)` with `ε̂ = max σ(w) - 1`: the gap between `w` and the
/// inscribed ellipsoid obtained by shrinking `Q` by `1 + ε̂`.
pub fn duality_gap(inst: &PolytopeInstance, w: &WeightVector) -> Result<f64> {
    require_mass(inst, w)?;
    let ell = cholesky_of_weighted_gram(inst, w)?;
    Ok(inst.cols() as f64 * (max_sigma(inst, &ell) - 1.0).ln_1p())
}

/// Both sides of the primal-dual pair behind [`duality_gap`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualityGap {
    pub epsilon_hat: f64,
    /// `n ln(1 + ε̂)`.
    pub analytic: f64,
    /// Dual objective `Σ w - log det(AᵀWA) - n`.
    pub dual_objective: f64,
    /// Primal objective `log det G'²` for `G' = ((1+ε̂) AᵀWA)^(-1/2)`.
    pub primal_objective: f64,
    /// `dual_objective - primal_objective`.
    pub exact: f64,
    /// `max_i ‖G' a_i‖²`; at most 1 when `G'` is primal feasible.
    pub primal_max_row_norm: f64,
    /// `log det(AᵀW*A) - log det(AᵀWA)` against a supplied oracle.
    pub oracle_logdet_gap: Option<f64>,
}

pub fn duality_gap_report(
    inst: &PolytopeInstance,
    w: &WeightVector,
    oracle: Option<&OracleSolution>,
) -> Result<DualityGap> {
    require_mass(inst, w)?;
    let n = inst.cols();
    let ell = cholesky_of_weighted_gram(inst, w)?;
    let epsilon_hat = max_sigma(inst, &ell) - 1.0;
    let dual_objective = w.sum() - ell.logdet() - n as f64;

    // Factor (1+ε̂) Q on its own rather than shifting log det Q.
    let scale = 1.0 + epsilon_hat;
    let scaled: Vec<f64> = ell.matrix().iter().map(|x| x * scale).collect();
    let primal = EllipsoidQuadratic::from_matrix(scaled, n)?;
    let primal_objective = -primal.logdet();
    let primal_max_row_norm = max_sigma(inst, &primal);

    let oracle_logdet_gap = match oracle {
        Some(o) => Some(cholesky_of_weighted_gram(inst, &o.w_star)?.logdet() - ell.logdet()),
        None => None,
    };
    Ok(DualityGap {
        epsilon_hat,
        analytic: n as f64 * epsilon_hat.ln_1p(),
        dual_objective,
        primal_objective,
        exact: dual_objective - primal_objective,
        primal_max_row_norm,
        oracle_logdet_gap,
    })
}

/// `vol((1+ε̂)^(-1/2) Q) / vol(Q*)` where `Q` comes from `w` and `Q*` from `w_star`.
///
/// With `vol{x : xᵀQx <= 1} ∝ det(Q)^(-1/2)` this is
/// `exp((log det Q* - log det Q - n ln(1+ε̂)) / 2)`.
pub fn volume_ratio(inst: &PolytopeInstance, w: &WeightVector, w_star: &WeightVector) -> Result<f64> {
    let ell = cholesky_of_weighted_gram(inst, w)?;
    let star = cholesky_of_weighted_gram(inst, w_star)?;
    let epsilon_hat = max_sigma(inst, &ell) - 1.0;
    let n = inst.cols() as f64;
    Ok(((star.logdet() - ell.logdet() - n * epsilon_hat.ln_1p()) / 2.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> PolytopeInstance {
        PolytopeInstance::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]).unwrap()
    }

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_certifies() {
        let inst = PolytopeInstance::identity(4).unwrap();
        let r = certify(&inst, &WeightVector::uniform(4, 1.0), 0.01).unwrap();
        assert!(r.certified());
        assert_eq!((r.max_sigma, r.weight_sum, r.epsilon_achieved), (1.0, 4.0, 0.0));
        assert_eq!(r.duality_gap, 0.0);
    }

    #[test]
    fn diamond_optimum_certifies() {
        let r = certify(&diamond(), &w(&[0.0, 0.0, 1.0, 1.0]), 0.01).unwrap();
        assert!(r.certified());
        assert!((r.max_sigma - 1.0).abs() < 1e-15);
        assert_eq!(r.weight_sum, 2.0);
        assert!(r.duality_gap.abs() < 1e-14);
    }

    #[test]
    fn lopsided_weights_fail() {
        let inst = PolytopeInstance::identity(2).unwrap();
        let r = certify(&inst, &w(&[0.5, 1.5]), 0.1).unwrap();
        assert!(!r.certified());
        assert!(!r.sigma_pass && r.mass_pass);
        assert!((r.max_sigma - 2.0).abs() < 1e-15);
        assert_eq!(r.epsilon_achieved, r.max_sigma - 1.0);
    }

    #[test]
    fn mass_failure_is_reported() {
        let inst = PolytopeInstance::identity(2).unwrap();
        let r = certify(&inst, &w(&[2.0, 2.0]), 0.1).unwrap();
        assert!(r.sigma_pass && !r.mass_pass && !r.certified());
        assert!(matches!(duality_gap(&inst, &w(&[2.0, 2.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn gap_examples() {
        let id2 = PolytopeInstance::identity(2).unwrap();
        assert_eq!(duality_gap(&id2, &WeightVector::uniform(2, 1.0)).unwrap(), 0.0);
        let gap = duality_gap(&id2, &w(&[0.5, 1.5])).unwrap();
        assert!((gap - 2.0 * 2f64.ln()).abs() < 1e-14);

        let rep = duality_gap_report(&id2, &w(&[0.5, 1.5]), None).unwrap();
        assert!((rep.exact - rep.analytic).abs() < 1e-12);
        assert!(rep.primal_max_row_norm <= 1.0 + 1e-15);
        assert_eq!(rep.oracle_logdet_gap, None);
    }

    #[test]
    fn volume_ratio_examples() {
        let id2 = PolytopeInstance::identity(2).unwrap();
        let ones = WeightVector::uniform(2, 1.0);
        assert!((volume_ratio(&id2, &ones, &ones).unwrap() - 1.0).abs() < 1e-15);
        // Q = diag(1/2, 3/2), ε̂ = 1: exp((0 - ln(3/4) - 2 ln 2) / 2) = 1/√3.
        let r = volume_ratio(&id2, &w(&[0.5, 1.5]), &ones).unwrap();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-15, "{r}");
        assert!(r >= (-1.0f64).exp());
        assert!(r <= 1.0);
    }
}
