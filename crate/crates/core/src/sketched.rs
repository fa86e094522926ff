//! Gaussian-sketched variant of the fixed-point iteration.
//!
//! Each iterate replaces the exact `w_i σ_i(w)` by
//! `‖S B (BᵀB)⁻¹ √w_i a_i‖² / s` with a fresh `s x m` Gaussian `S`, where
//! `B = √W A`. The averaged iterate is rescaled to total mass `n`.
//!
//! Random stream: one ChaCha8 generator seeded from `seed` per solve. For
//! `k = 1..T-1` the entries of `S^(k)` are drawn row-major (all `m` columns of
//! sketch row 0, then row 1, ...), so the stream is consumed iteration-major.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixed_point::check_unit_interval;
use crate::linalg::{cholesky_of_weighted_gram, compensated_sum, leverage_scores, PolytopeInstance, WeightVector};
use crate::trace::{SolveTrace, Stopwatch, TraceRecord};

const PARALLEL_WORK: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq)]
pub struct SketchConfig {
    pub epsilon: f64,
    /// Failure probability.
    pub delta: f64,
    /// Overrides `⌈80/ε⌉`.
    pub sketch_rows: Option<usize>,
    /// Overrides `⌈(10/ε) ln(m/δ)⌉`.
    pub iterations: Option<usize>,
    pub seed: u64,
    pub record_history: bool,
}

impl SketchConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        SketchConfig { epsilon, delta, sketch_rows: None, iterations: None, seed, record_history: false }
    }

    pub fn with_sketch_rows(mut self, s: usize) -> Self {
        self.sketch_rows = Some(s);
        self
    }

    pub fn with_iterations(mut self, t: usize) -> Self {
        self.iterations = Some(t);
        self
    }

    pub fn with_history(mut self, on: bool) -> Self {
        self.record_history = on;
        self
    }

    fn validate(&self) -> Result<()> {
        check_unit_interval("epsilon", self.epsilon)?;
        check_unit_interval("delta", self.delta)?;
        if self.sketch_rows == Some(0) {
            return Err(Error::Domain("sketch row count must be at least 1".into()));
        }
        if self.iterations == Some(0) {
            return Err(Error::Domain("iteration count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn resolve_sketch_rows(&self) -> Result<usize> {
        self.validate()?;
        Ok(self.sketch_rows.unwrap_or_else(|| ceil_at_least_one(80.0 / self.epsilon)))
    }

    pub fn resolve_iterations(&self, m: usize) -> Result<usize> {
        self.validate()?;
        Ok(self.iterations.unwrap_or_else(|| ceil_at_least_one(10.0 / self.epsilon * (m as f64 / self.delta).ln())))
    }
}

fn ceil_at_least_one(x: f64) -> usize {
    let c = x.ceil();
    if c >= 1.0 {
        c as usize
    } else {
        1
    }
}

/// One sketched update from `w`, drawing `S` (`s x m`, row-major) from `rng`.
pub fn sketch_step(
    inst: &PolytopeInstance,
    w: &WeightVector,
    sketch_rows: usize,
    rng: &mut impl rand::Rng,
) -> Result<WeightVector> {
    let (m, n, s) = (inst.rows(), inst.cols(), sketch_rows);
    let ell = cholesky_of_weighted_gram(inst, w)?;
    let gauss: Vec<f64> = (0..s * m).map(|_| StandardNormal.sample(rng)).collect();
    let sqrt_w: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let parallel = s.saturating_mul(inst.nnz()) >= PARALLEL_WORK;

    // Rows of F = S B (BᵀB)⁻¹, formed as S B first and then solved against Q.
    let sketch_row = |r: usize, out: &mut [f64]| {
        out.iter_mut().for_each(|x| *x = 0.0);
        let g = &gauss[r * m..(r + 1) * m];
        for i in 0..m {
            let scale = g[i] * sqrt_w[i];
            if scale == 0.0 {
                continue;
            }
            for (j, v) in inst.row(i).iter() {
                out[j] += scale * v;
            }
        }
        ell.cholesky().solve(out);
    };
    let mut f = vec![0.0; s * n];
    if parallel {
        f.par_chunks_mut(n).enumerate().for_each(|(r, out)| sketch_row(r, out));
    } else {
        f.chunks_mut(n).enumerate().for_each(|(r, out)| sketch_row(r, out));
    }

    let inv_s = 1.0 / s as f64;
    let update = |i: usize| {
        let row = inst.row(i);
        let norm2: f64 = f
            .chunks(n)
            .map(|fr| {
                let y = row.dot(fr);
                y * y
            })
            .sum();
        w[i] * norm2 * inv_s
    };
    let next = if parallel { (0..m).into_par_iter().map(update).collect() } else { (0..m).map(update).collect() };
    Ok(WeightVector::from_vec_unchecked(next))
}

/// Scales `w` to total mass `n`, then folds the compensated-sum residual into
/// the largest entry.
pub fn rescale_to_mass(w: &[f64], n: f64) -> Result<WeightVector> {
    let total = compensated_sum(w);
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Domain(format!("cannot rescale weights with total {total}")));
    }
    let factor = n / total;
    let mut v: Vec<f64> = w.iter().map(|x| x * factor).collect();
    let residual = n - compensated_sum(&v);
    if let Some(big) = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])) {
        v[big] = (v[big] + residual).max(0.0);
    }
    WeightVector::new(v)
}

/// Runs the sketched iteration and returns the rescaled average `v`.
pub fn sketched_solve(inst: &PolytopeInstance, cfg: &SketchConfig) -> Result<(WeightVector, SolveTrace)> {
    let (m, n) = (inst.rows(), inst.cols());
    let s = cfg.resolve_sketch_rows()?;
    let t = cfg.resolve_iterations(m)?;
    let clock = Stopwatch::start();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = SolveTrace { iterations: t, ..SolveTrace::default() };

    let mut w = WeightVector::uniform(m, n as f64 / m as f64);
    let mut acc = w.to_vec();
    for k in 1..=t {
        if cfg.record_history {
            trace.records.push(TraceRecord {
                iter: k,
                max_sigma: leverage_scores(inst, &w)?.max(),
                weight_sum: w.sum(),
                wall_ms: clock.ms(),
            });
        }
        if k == t {
            break;
        }
        w = sketch_step(inst, &w, s, &mut rng)?;
        for (a, x) in acc.iter_mut().zip(w.iter()) {
            *a += x;
        }
    }
    let t_f = t as f64;
    let averaged: Vec<f64> = acc.into_iter().map(|a| a / t_f).collect();
    let v = rescale_to_mass(&averaged, n as f64)?;
    trace.wall_ms = clock.ms();
    Ok((v, trace))
}

/// Sample statistics of `Σ_i w_i^(2)` over independent one-step runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSumSummary {
    pub trials: usize,
    pub sketch_rows: usize,
    pub mean: f64,
    /// Unbiased sample variance (0 for a single trial).
    pub variance: f64,
    /// `n`, the mean of `χ²(ns)/s`.
    pub expected_mean: f64,
    /// `3 √(2n / (s · trials))`.
    pub band: f64,
    pub within_band: bool,
}

/// One sketched step from the uniform start, repeated with seeds
/// `seed, seed + 1, ...`; the total mass should follow `χ²(ns)/s`.
pub fn expected_row_sum_distribution_check(
    inst: &PolytopeInstance,
    cfg: &SketchConfig,
    trials: usize,
) -> Result<RowSumSummary> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let (m, n) = (inst.rows(), inst.cols());
    let s = cfg.resolve_sketch_rows()?;
    let start = WeightVector::uniform(m, n as f64 / m as f64);
    let mut sums = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(t as u64));
        sums.push(sketch_step(inst, &start, s, &mut rng)?.sum());
    }
    let mean = compensated_sum(&sums) / trials as f64;
    let variance = if trials > 1 {
        let sq: Vec<f64> = sums.iter().map(|x| (x - mean) * (x - mean)).collect();
        compensated_sum(&sq) / (trials - 1) as f64
    } else {
        0.0
    };
    let nf = n as f64;
    let band = 3.0 * (2.0 * nf / (s as f64 * trials as f64)).sqrt();
    Ok(RowSumSummary {
        trials,
        sketch_rows: s,
        mean,
        variance,
        expected_mean: nf,
        band,
        within_band: (mean - nf).abs() <= band,
    })
}
