//! Ground-truth weights from coordinate ascent on the D-optimal design problem.
//!
//! The iterate is a design `u` on the simplex with `M(u) = Σ u_i a_i a_iᵀ` and
//! `κ_i = a_iᵀ M(u)⁻¹ a_i`; the John weights are `w = n u` and `σ_i(w) = κ_i / n`.
//! Each step moves mass onto one coordinate, `u <- (1-τ) u + τ e_j`, with the
//! exact line-search step `τ = (κ_j - n) / (n (κ_j - 1))`. Steps toward the
//! largest `κ` alternate with away steps (negative `τ`, clipped at `u_j = 0`)
//! off the smallest `κ` on the support, which is what lets the support shrink.

use crate::error::{Error, Result};
use crate::linalg::{leverage_scores, Cholesky, PolytopeInstance, WeightVector, PIVOT_FLOOR};

/// Weights at or below this are treated as off the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

/// Rank-one updates are discarded and rebuilt from scratch this often.
const REFRESH_EVERY: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Weights scaled to `Σ w = n`.
    pub w_star: WeightVector,
    pub iterations: usize,
    /// `max(max_i σ_i - 1, max_{w_i > threshold} 1 - σ_i)` at `w_star`.
    pub max_deviation: f64,
    /// `log det(Aᵀ W A)` at the current design, one value per step taken.
    pub logdet_trace: Vec<f64>,
}

struct State<'a> {
    inst: &'a PolytopeInstance,
    u: Vec<f64>,
    kappa: Vec<f64>,
    inv: Vec<f64>,
    logdet_m: f64,
}

impl<'a> State<'a> {
    fn new(inst: &'a PolytopeInstance) -> Result<Self> {
        let m = inst.rows();
        let mut s = State { inst, u: vec![1.0 / m as f64; m], kappa: Vec::new(), inv: Vec::new(), logdet_m: 0.0 };
        s.refresh()?;
        Ok(s)
    }

    fn refresh(&mut self) -> Result<()> {
        let n = self.inst.cols();
        let gram = self.inst.gram_with(|i| self.u[i]);
        let trace: f64 = (0..n).map(|i| gram[i * n + i]).sum();
        let chol = Cholesky::factor(&gram, n, PIVOT_FLOOR * trace / n as f64)?;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for c in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[c] = 1.0;
            chol.solve(&mut e);
            for r in 0..n {
                inv[r * n + c] = e[r];
            }
        }
        self.inv = inv;
        self.logdet_m = chol.logdet();
        self.kappa = leverage_scores(self.inst, &WeightVector::from_vec_unchecked(self.u.clone()))?.into_inner();
        Ok(())
    }

    fn argmax_kappa(&self) -> usize {
        let mut best = 0;
        for i in 1..self.kappa.len() {
            if self.kappa[i] > self.kappa[best] {
                best = i;
            }
        }
        best
    }

    fn argmin_kappa_on_support(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..self.kappa.len() {
            if self.u[i] > 0.0 && best.is_none_or(|b| self.kappa[i] < self.kappa[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// `u <- (1-τ) u + τ e_j` with Sherman-Morrison updates of `M⁻¹` and `κ`.
    /// Returns false when the update lost positive definiteness.
    fn step(&mut self, j: usize, tau: f64, drop: bool) -> bool {
        let inst = self.inst;
        let n = inst.cols();
        let kj = self.kappa[j];
        let beta = tau / (1.0 - tau);
        let denom = 1.0 + beta * kj;
        if !(denom > 0.0) || !(1.0 - tau > 0.0) {
            return false;
        }

        let mut aj = vec![0.0; n];
        inst.row(j).scatter(&mut aj);
        let b: Vec<f64> = (0..n).map(|r| (0..n).map(|c| self.inv[r * n + c] * aj[c]).sum()).collect();

        let shrink = 1.0 - tau;
        for (i, k) in self.kappa.iter_mut().enumerate() {
            let c = inst.row(i).dot(&b);
            *k = (*k - beta * c * c / denom) / shrink;
        }
        for r in 0..n {
            for c in 0..n {
                self.inv[r * n + c] = (self.inv[r * n + c] - beta * b[r] * b[c] / denom) / shrink;
            }
        }
        for x in self.u.iter_mut() {
            *x *= shrink;
        }
        self.u[j] = if drop { 0.0 } else { (self.u[j] + tau).max(0.0) };
        self.logdet_m += n as f64 * shrink.ln() + denom.ln();
        true
    }
}

/// `(argmax κ, argmin κ on the support, κ_max/n - 1, 1 - κ_min/n)`.
fn gaps(state: &State<'_>, nf: f64) -> (usize, usize, f64, f64) {
    let up = state.argmax_kappa();
    let down = state.argmin_kappa_on_support().expect("support is never empty");
    (up, down, state.kappa[up] / nf - 1.0, 1.0 - state.kappa[down] / nf)
}

/// Line-search step toward (`κ > n`) or away from (`κ < n`) coordinate `j`.
fn line_search(kappa: f64, n: f64) -> f64 {
    if kappa > 1.0 {
        (kappa - n) / (n * (kappa - 1.0))
    } else {
        f64::NEG_INFINITY
    }
}

/// Solves the D-optimal design problem until `σ_i <= 1 + tol` everywhere and
/// `σ_i >= 1 - tol` on the support.
pub fn oracle_solve(inst: &PolytopeInstance, tol: f64, max_iters: usize) -> Result<OracleSolution> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("oracle tolerance must lie in (0, 1), got {tol}")));
    }
    if max_iters == 0 {
        return Err(Error::Domain("oracle needs at least one iteration".into()));
    }
    let nf = inst.cols() as f64;
    let mut state = State::new(inst)?;
    let mut logdet_trace = Vec::new();
    let mut since_refresh = 0usize;

    for iter in 0..=max_iters {
        if since_refresh == REFRESH_EVERY {
            state.refresh()?;
            since_refresh = 0;
        }
        let (mut up, mut down, mut toward_gap, mut away_gap) = gaps(&state, nf);
        if toward_gap <= tol && away_gap <= tol && since_refresh > 0 {
            // Confirm against freshly factored values before stopping.
            state.refresh()?;
            since_refresh = 0;
            (up, down, toward_gap, away_gap) = gaps(&state, nf);
        }
        if toward_gap <= tol && away_gap <= tol {
            return Ok(finish(inst, state, iter, logdet_trace));
        }
        if iter == max_iters {
            break;
        }

        let (j, tau, drop) = if toward_gap >= away_gap {
            (up, line_search(state.kappa[up], nf), false)
        } else {
            let uj = state.u[down];
            let floor = -uj / (1.0 - uj);
            let ls = line_search(state.kappa[down], nf);
            if ls > floor {
                (down, ls, false)
            } else {
                (down, floor, true)
            }
        };
        if state.step(j, tau, drop) {
            since_refresh += 1;
        } else {
            state.refresh()?;
            since_refresh = 0;
        }
        logdet_trace.push(state.logdet_m + nf * nf.ln());
    }
    Err(Error::NoConvergence(max_iters))
}

fn finish(inst: &PolytopeInstance, state: State<'_>, iterations: usize, logdet_trace: Vec<f64>) -> OracleSolution {
    let nf = inst.cols() as f64;
    let w: Vec<f64> = state.u.iter().map(|x| x * nf).collect();
    let mut max_deviation = 0.0f64;
    for (wi, k) in w.iter().zip(&state.kappa) {
        let sigma = k / nf;
        max_deviation = max_deviation.max(sigma - 1.0);
        if *wi > SUPPORT_THRESHOLD {
            max_deviation = max_deviation.max(1.0 - sigma);
        }
    }
    OracleSolution { w_star: WeightVector::from_vec_unchecked(w), iterations, max_deviation, logdet_trace }
}
