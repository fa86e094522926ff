use std::ops::Deref;

use crate::error::{Error, Result};
use crate::linalg::cholesky::pivoted_cholesky_rank;
use crate::linalg::compensated_sum;

/// Relative pivot tolerance (against the trace of `AᵀA`) used by the rank check.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Raw matrix entries handed to [`build_instance`].
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixData {
    /// Row-major, `m * n` values.
    Dense(Vec<f64>),
    /// Zero-based `(row, col, value)` triplets; duplicates are summed.
    Triplets(Vec<(usize, usize, f64)>),
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Dense(Vec<f64>),
    Sparse(CsrMatrix),
}

/// The polytope `{x : -1 <= Ax <= 1}` given by its constraint matrix `A` (m x n).
///
/// Instances are validated on construction: `m >= n >= 1`, every entry finite,
/// no identically-zero row, and full column rank.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeInstance {
    m: usize,
    n: usize,
    storage: Storage,
}

/// One constraint normal `a_i`.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse { cols: &'a [usize], vals: &'a [f64] },
}

pub enum RowIter<'a> {
    Dense(std::iter::Enumerate<std::slice::Iter<'a, f64>>),
    Sparse(std::iter::Zip<std::slice::Iter<'a, usize>, std::slice::Iter<'a, f64>>),
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    #[inline]
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            RowIter::Dense(it) => it.next().map(|(j, &v)| (j, v)),
            RowIter::Sparse(it) => it.next().map(|(&j, &v)| (j, v)),
        }
    }
}

impl<'a> Row<'a> {
    #[inline]
    pub fn iter(&self) -> RowIter<'a> {
        match *self {
            Row::Dense(vals) => RowIter::Dense(vals.iter().enumerate()),
            Row::Sparse { cols, vals } => RowIter::Sparse(cols.iter().zip(vals.iter())),
        }
    }

    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        match *self {
            Row::Dense(vals) => vals.iter().zip(x).map(|(a, b)| a * b).sum(),
            Row::Sparse { cols, vals } => cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum(),
        }
    }

    /// Writes the row into a dense buffer of length `n`.
    #[inline]
    pub fn scatter(&self, out: &mut [f64]) {
        match *self {
            Row::Dense(vals) => out.copy_from_slice(vals),
            Row::Sparse { cols, vals } => {
                out.iter_mut().for_each(|x| *x = 0.0);
                for (&j, &v) in cols.iter().zip(vals) {
                    out[j] = v;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(|(_, v)| v == 0.0)
    }

    pub fn norm_squared(&self) -> f64 {
        self.iter().map(|(_, v)| v * v).sum()
    }
}

/// Validates raw entries and builds a [`PolytopeInstance`].
pub fn build_instance(entries: MatrixData, m: usize, n: usize) -> Result<PolytopeInstance> {
    if n == 0 {
        return Err(Error::Dimension("the polytope needs at least one column".into()));
    }
    if m < n {
        return Err(Error::Dimension(format!("need m >= n, got m = {m}, n = {n}")));
    }
    let storage = match entries {
        MatrixData::Dense(data) => {
            let expected = m.checked_mul(n).ok_or_else(|| Error::Dimension(format!("{m} x {n} overflows")))?;
            if data.len() != expected {
                return Err(Error::Dimension(format!(
                    "dense data has {} entries, expected {m} x {n} = {expected}",
                    data.len()
                )));
            }
            Storage::Dense(data)
        }
        MatrixData::Triplets(triplets) => Storage::Sparse(csr_from_triplets(m, n, triplets)?),
    };
    let instance = PolytopeInstance { m, n, storage };
    instance.validate()?;
    Ok(instance)
}

fn csr_from_triplets(m: usize, n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<CsrMatrix> {
    if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= m || j >= n) {
        return Err(Error::Dimension(format!("entry ({i}, {j}) outside a {m} x {n} matrix")));
    }
    if triplets.len() < m {
        // Fewer entries than rows: report the first empty row before allocating m slots.
        let mut rows: Vec<usize> = triplets.iter().map(|t| t.0).collect();
        rows.sort_unstable();
        rows.dedup();
        let first = rows.iter().enumerate().find(|(k, r)| k != *r).map_or(rows.len(), |(k, _)| k);
        return Err(Error::ZeroRow(first));
    }
    triplets.sort_by_key(|&(i, j, _)| (i, j));
    let mut row_ptr = vec![0usize; m + 1];
    let mut col_idx = Vec::with_capacity(triplets.len());
    let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
    let mut last: Option<(usize, usize)> = None;
    for (i, j, v) in triplets {
        if last == Some((i, j)) {
            *values.last_mut().expect("duplicate follows an entry") += v;
            continue;
        }
        last = Some((i, j));
        row_ptr[i + 1] += 1;
        col_idx.push(j);
        values.push(v);
    }
    for i in 0..m {
        row_ptr[i + 1] += row_ptr[i];
    }
    Ok(CsrMatrix { row_ptr, col_idx, values })
}

impl PolytopeInstance {
    /// Dense instance from row-major data.
    pub fn from_dense(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        build_instance(MatrixData::Dense(data), m, n)
    }

    /// Dense instance from a list of rows, all of the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(m * n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::Dimension(format!("row {i} has {} entries, expected {n}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::from_dense(m, n, data)
    }

    /// Sparse (CSR) instance from zero-based triplets.
    pub fn from_triplets(m: usize, n: usize, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        build_instance(MatrixData::Triplets(triplets), m, n)
    }

    /// `n x n` identity: the cube `[-1, 1]^n`.
    pub fn identity(n: usize) -> Result<Self> {
        Self::scaled_identity(n, 1.0)
    }

    /// `c * I_n`: the cube `[-1/c, 1/c]^n`.
    pub fn scaled_identity(n: usize, c: f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = c;
        }
        Self::from_dense(n, n, data)
    }

    fn validate(&self) -> Result<()> {
        let bad = match &self.storage {
            Storage::Dense(d) => d.iter().any(|v| !v.is_finite()),
            Storage::Sparse(c) => c.values.iter().any(|v| !v.is_finite()),
        };
        if bad {
            return Err(Error::Domain("constraint matrix has a non-finite entry".into()));
        }
        if let Some(i) = (0..self.m).find(|&i| self.row(i).is_zero()) {
            return Err(Error::ZeroRow(i));
        }
        let gram = self.gram_with(|_| 1.0);
        let rank = pivoted_cholesky_rank(&gram, self.n, RANK_TOLERANCE);
        if rank < self.n {
            return Err(Error::RankDeficient { rank, n: self.n });
        }
        Ok(())
    }

    /// Number of constraints.
    pub fn rows(&self) -> usize {
        self.m
    }

    /// Ambient dimension.
    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Stored entries (dense instances count every entry).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.len(),
            Storage::Sparse(c) => c.values.len(),
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.storage {
            Storage::Dense(d) => Row::Dense(&d[i * self.n..(i + 1) * self.n]),
            Storage::Sparse(c) => {
                let (lo, hi) = (c.row_ptr[i], c.row_ptr[i + 1]);
                Row::Sparse { cols: &c.col_idx[lo..hi], vals: &c.values[lo..hi] }
            }
        }
    }

    /// `A x` for a dense `x` of length `n`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m).map(|i| self.row(i).dot(x)).collect()
    }

    /// Row-major dense copy of `A`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m * self.n];
        for i in 0..self.m {
            self.row(i).scatter(&mut out[i * self.n..(i + 1) * self.n]);
        }
        out
    }

    /// `Σ_i f(i) a_i a_iᵀ` as a full row-major `n x n` matrix.
    ///
    /// Rows with zero weight are skipped.
    pub(crate) fn gram_with(&self, weight: impl Fn(usize) -> f64) -> Vec<f64> {
        let n = self.n;
        let mut q = vec![0.0; n * n];
        for i in 0..self.m {
            let w = weight(i);
            if w == 0.0 {
                continue;
            }
            let row = self.row(i);
            for (j, aj) in row.iter() {
                let scaled = w * aj;
                if scaled == 0.0 {
                    continue;
                }
                let qrow = &mut q[j * n..(j + 1) * n];
                for (k, ak) in row.iter() {
                    if k > j {
                        break;
                    }
                    qrow[k] += scaled * ak;
                }
            }
        }
        for j in 0..n {
            for k in 0..j {
                q[k * n + j] = q[j * n + k];
            }
        }
        q
    }
}

/// Nonnegative dual weights `w ∈ R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!("weight {i} = {v} is not a finite nonnegative number")));
        }
        Ok(WeightVector(w))
    }

    pub fn uniform(m: usize, value: f64) -> Self {
        WeightVector(vec![value; m])
    }

    /// Crate-internal constructor for vectors already known to be valid.
    pub(crate) fn from_vec_unchecked(w: Vec<f64>) -> Self {
        debug_assert!(w.iter().all(|v| v.is_finite() && *v >= 0.0));
        WeightVector(w)
    }

    /// Compensated sum of the weights.
    pub fn sum(&self) -> f64 {
        compensated_sum(&self.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub(crate) fn check_len(&self, inst: &PolytopeInstance) -> Result<()> {
        if self.0.len() != inst.rows() {
            return Err(Error::Dimension(format!(
                "weight vector has length {}, instance has {} rows",
                self.0.len(),
                inst.rows()
            )));
        }
        Ok(())
    }
}

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}
