use std::time::Instant;

/// One iterate `w^(k)` as seen by a solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// 1-based iteration index `k`.
    pub iter: usize,
    /// `max_i σ_i(w^(k))`.
    pub max_sigma: f64,
    /// `Σ_i w_i^(k)`.
    pub weight_sum: f64,
    /// Milliseconds since the solve started.
    pub wall_ms: f64,
}

/// Solver bookkeeping. `records` is only filled when history was requested.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub iterations: usize,
    pub wall_ms: f64,
    pub records: Vec<TraceRecord>,
}

pub(crate) struct Stopwatch(Instant);

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Stopwatch(Instant::now())
    }

    pub(crate) fn ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}
