//! Averaged fixed-point iteration `w <- w ⊙ σ(w)` from the uniform start.

use crate::error::{Error, Result};
use crate::linalg::{leverage_scores, PolytopeInstance, WeightVector};
use crate::trace::{SolveTrace, Stopwatch, TraceRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointConfig {
    pub epsilon: f64,
    /// Overrides the iteration count derived from `epsilon`.
    pub iterations: Option<usize>,
    pub record_history: bool,
}

impl FixedPointConfig {
    pub fn new(epsilon: f64) -> Self {
        FixedPointConfig { epsilon, iterations: None, record_history: false }
    }

    pub fn with_iterations(mut self, t: usize) -> Self {
        self.iterations = Some(t);
        self
    }

    pub fn with_history(mut self, on: bool) -> Self {
        self.record_history = on;
        self
    }

    /// Iteration count `T` for an `m x n` instance.
    pub fn resolve_iterations(&self, m: usize, n: usize) -> Result<usize> {
        let default = default_iterations(m, n, self.epsilon)?;
        match self.iterations {
            Some(0) => Err(Error::Domain("iteration count must be at least 1".into())),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    }
}

pub(crate) fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {x}")))
    }
}

/// `max(1, ⌈(2/ε) ln(m/n)⌉)`.
pub fn default_iterations(m: usize, n: usize, epsilon: f64) -> Result<usize> {
    if n == 0 || m < n {
        return Err(Error::Dimension(format!("need m >= n >= 1, got m = {m}, n = {n}")));
    }
    iterations_for_ratio(m as f64 / n as f64, epsilon)
}

/// `max(1, ⌈(2/ε) ln ratio⌉)` for a real aspect ratio `m/n >= 1`.
pub fn iterations_for_ratio(ratio: f64, epsilon: f64) -> Result<usize> {
    check_unit_interval("epsilon", epsilon)?;
    let t = (2.0 / epsilon * ratio.ln()).ceil();
    Ok(if t >= 1.0 { t as usize } else { 1 })
}

/// One exact update `w_i <- w_i σ_i(w)`.
pub fn fixed_point_step(inst: &PolytopeInstance, w: &WeightVector) -> Result<WeightVector> {
    let sigma = leverage_scores(inst, w)?;
    Ok(multiply(w, &sigma))
}

fn multiply(w: &WeightVector, sigma: &[f64]) -> WeightVector {
    WeightVector::from_vec_unchecked(w.iter().zip(sigma).map(|(a, b)| a * b).collect())
}

/// Runs `T` iterates from `w^(1) = (n/m) 1` and returns their average.
///
/// There is no stopping test: `T` is fixed before the first iterate.
pub fn fixed_point_solve(inst: &PolytopeInstance, cfg: &FixedPointConfig) -> Result<(WeightVector, SolveTrace)> {
    let (m, n) = (inst.rows(), inst.cols());
    let t = cfg.resolve_iterations(m, n)?;
    let clock = Stopwatch::start();
    let mut trace = SolveTrace { iterations: t, ..SolveTrace::default() };

    let mut w = WeightVector::uniform(m, n as f64 / m as f64);
    let mut acc = w.to_vec();
    for k in 1..=t {
        let last = k == t;
        if last && !cfg.record_history {
            break;
        }
        let sigma = leverage_scores(inst, &w)?;
        if cfg.record_history {
            trace.records.push(TraceRecord {
                iter: k,
                max_sigma: sigma.max(),
                weight_sum: w.sum(),
                wall_ms: clock.ms(),
            });
        }
        if last {
            break;
        }
        w = multiply(&w, &sigma);
        for (a, x) in acc.iter_mut().zip(w.iter()) {
            *a += x;
        }
    }
    let t_f = t as f64;
    let out = acc.into_iter().map(|a| a / t_f).collect();
    trace.wall_ms = clock.ms();
    Ok((WeightVector::from_vec_unchecked(out), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cholesky_of_weighted_gram, leverage_scores};

    #[test]
    fn default_iteration_counts() {
        // 20 ln 20 = 59.91...
        assert_eq!(default_iterations(200, 10, 0.1).unwrap(), 60);
        assert_eq!(default_iterations(7, 7, 0.3).unwrap(), 1);
        assert_eq!(iterations_for_ratio(std::f64::consts::E, 0.5 - 1e-9).unwrap(), 5);
    }

    #[test]
    fn epsilon_outside_unit_interval() {
        for eps in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(default_iterations(10, 2, eps), Err(Error::Domain(_))), "{eps}");
        }
        assert!(matches!(default_iterations(1, 2, 0.1), Err(Error::Dimension(_))));
        let inst = PolytopeInstance::identity(2).unwrap();
        let cfg = FixedPointConfig::new(0.1).with_iterations(0);
        assert!(matches!(fixed_point_solve(&inst, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn identity_is_a_fixed_point() {
        for n in [1, 3, 6] {
            let inst = PolytopeInstance::identity(n).unwrap();
            for t in [1, 2, 17] {
                let (w, _) = fixed_point_solve(&inst, &FixedPointConfig::new(0.2).with_iterations(t)).unwrap();
                assert!(w.iter().all(|&x| x == 1.0));
                assert_eq!(leverage_scores(&inst, &w).unwrap().max(), 1.0);
            }
        }
    }

    #[test]
    fn scaled_cube_gives_half_radius_ball() {
        let inst = PolytopeInstance::scaled_identity(3, 2.0).unwrap();
        let (w, _) = fixed_point_solve(&inst, &FixedPointConfig::new(0.1).with_iterations(5)).unwrap();
        assert!(w.iter().all(|&x| x == 1.0));
        let ell = cholesky_of_weighted_gram(&inst, &w).unwrap();
        assert_eq!(ell.matrix(), &[4.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 4.0]);
    }

    #[test]
    fn diamond_approaches_the_diagonal_weights() {
        let inst = PolytopeInstance::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]).unwrap();
        let (w, trace) = fixed_point_solve(&inst, &FixedPointConfig::new(0.1)).unwrap();
        // ⌈20 ln 2⌉
        assert_eq!(trace.iterations, 14);
        assert!(trace.records.is_empty());
        assert!(leverage_scores(&inst, &w).unwrap().max() <= 1.1);
        assert!((w.sum() - 2.0).abs() <= 1e-8);
        let q = cholesky_of_weighted_gram(&inst, &w).unwrap();
        let target = [2.0, 0.0, 0.0, 2.0];
        for (got, want) in q.matrix().iter().zip(target) {
            assert!((got - want).abs() <= 0.15 * 2.0, "{:?}", q.matrix());
        }
    }

    #[test]
    fn history_has_one_record_per_iterate() {
        let inst = PolytopeInstance::from_rows(&[[1.0, 0.2], [0.3, 1.0], [1.0, 1.0]]).unwrap();
        let cfg = FixedPointConfig::new(0.1).with_iterations(9).with_history(true);
        let (_, trace) = fixed_point_solve(&inst, &cfg).unwrap();
        assert_eq!(trace.records.len(), 9);
        assert_eq!(trace.records.iter().map(|r| r.iter).collect::<Vec<_>>(), (1..=9).collect::<Vec<_>>());
        for r in &trace.records {
            assert!((r.weight_sum - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_preserves_exact_fixed_points() {
        let inst = PolytopeInstance::identity(4).unwrap();
        let w = WeightVector::uniform(4, 1.0);
        assert_eq!(fixed_point_step(&inst, &w).unwrap(), w);
    }
}
