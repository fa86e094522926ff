use crate::error::{Error, Result};
use crate::linalg::instance::{PolytopeInstance, WeightVector};

/// Pivots at or below `PIVOT_FLOOR * trace(Q) / n` are treated as rank loss.
pub const PIVOT_FLOOR: f64 = 1e-14;

/// Numerical rank of a symmetric PSD matrix by diagonally pivoted Cholesky.
///
/// Elimination stops once the largest remaining diagonal entry falls to
/// `rel_tol * trace`.
pub fn pivoted_cholesky_rank(mat: &[f64], n: usize, rel_tol: f64) -> usize {
    assert_eq!(mat.len(), n * n);
    let mut a = mat.to_vec();
    let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
    if !(trace > 0.0) {
        return 0;
    }
    let tol = rel_tol * trace;
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        for q in k + 1..n {
            if a[perm[q] * n + perm[q]] > a[perm[p] * n + perm[p]] {
                p = q;
            }
        }
        let best = a[perm[p] * n + perm[p]];
        if !(best > tol) {
            return k;
        }
        perm.swap(k, p);
        let pk = perm[k];
        let root = best.sqrt();
        let col: Vec<f64> = perm[k + 1..].iter().map(|&i| a[i * n + pk] / root).collect();
        for (x, &i) in perm[k + 1..].iter().enumerate() {
            for (y, &j) in perm[k + 1..].iter().enumerate() {
                a[i * n + j] -= col[x] * col[y];
            }
        }
    }
    n
}

/// Lower-triangular factor `L` with `Q = L Lᵀ`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors the symmetric matrix `q` (row-major, only the lower triangle is read).
    ///
    /// Fails when a pivot drops to `floor` or below.
    pub fn factor(q: &[f64], n: usize, floor: f64) -> Result<Self> {
        assert_eq!(q.len(), n * n);
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let lj = &l[j * n..j * n + j];
            let d = q[j * n + j] - lj.iter().map(|x| x * x).sum::<f64>();
            if !(d > floor) {
                return Err(Error::NotPositiveDefinite { index: j, pivot: d, floor });
            }
            let root = d.sqrt();
            l[j * n + j] = root;
            for i in j + 1..n {
                let (head, tail) = l.split_at_mut(i * n);
                let lj = &head[j * n..j * n + j];
                let li = &tail[..j];
                let dot: f64 = li.iter().zip(lj).map(|(a, b)| a * b).sum();
                tail[j] = (q[i * n + j] - dot) / root;
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major lower factor.
    pub fn factor_matrix(&self) -> &[f64] {
        &self.l
    }

    /// `L_ii`.
    pub fn diag(&self, i: usize) -> f64 {
        self.l[i * self.n + i]
    }

    /// `2 Σ log L_ii`.
    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.diag(i).ln()).sum::<f64>()
    }

    /// In place `x <- L⁻¹ x`.
    pub fn forward_solve(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.l[i * n + i];
        }
    }

    /// In place `x <- L⁻ᵀ x`.
    pub fn backward_solve(&self, x: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let xi = x[i] / self.l[i * n + i];
            x[i] = xi;
            for (xk, lik) in x[..i].iter_mut().zip(&self.l[i * n..i * n + i]) {
                *xk -= lik * xi;
            }
        }
    }

    /// In place `x <- Q⁻¹ x`.
    pub fn solve(&self, x: &mut [f64]) {
        self.forward_solve(x);
        self.backward_solve(x);
    }

    /// `L Lᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|k| self.l[i * n + k] * self.l[j * n + k]).sum();
                out[i * n + j] = s;
                out[j * n + i] = s;
            }
        }
        out
    }
}

/// The ellipsoid `{x : xᵀ Q x <= 1}` with `Q = Aᵀ W A`.
#[derive(Debug, Clone)]
pub struct EllipsoidQuadratic {
    q: Vec<f64>,
    chol: Cholesky,
    logdet: f64,
}

impl EllipsoidQuadratic {
    /// Factors an explicit SPD matrix using the standard pivot floor.
    pub fn from_matrix(q: Vec<f64>, n: usize) -> Result<Self> {
        let trace: f64 = (0..n).map(|i| q[i * n + i]).sum();
        let floor = PIVOT_FLOOR * trace.max(0.0) / n as f64;
        let chol = Cholesky::factor(&q, n, floor)?;
        let logdet = chol.logdet();
        Ok(EllipsoidQuadratic { q, chol, logdet })
    }

    pub fn dim(&self) -> usize {
        self.chol.dim()
    }

    /// Row-major `Q`.
    pub fn matrix(&self) -> &[f64] {
        &self.q
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    /// `log det Q`.
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    /// `xᵀ Q x`, evaluated as `‖Lᵀ x‖²`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let l = self.chol.factor_matrix();
        (0..n)
            .map(|k| {
                let y: f64 = (k..n).map(|i| l[i * n + k] * x[i]).sum();
                y * y
            })
            .sum()
    }

    /// `aᵀ Q⁻¹ a`, evaluated as `‖L⁻¹ a‖²`; `buf` is overwritten with `L⁻¹ a`.
    pub fn inverse_form(&self, buf: &mut [f64]) -> f64 {
        self.chol.forward_solve(buf);
        buf.iter().map(|x| x * x).sum()
    }
}

/// Assembles `Q = Σ_i w_i a_i a_iᵀ` and factors it.
pub fn cholesky_of_weighted_gram(inst: &PolytopeInstance, w: &WeightVector) -> Result<EllipsoidQuadratic> {
    w.check_len(inst)?;
    let q = inst.gram_with(|i| w[i]);
    EllipsoidQuadratic::from_matrix(q, inst.cols())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> PolytopeInstance {
        PolytopeInstance::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]]).unwrap()
    }

    #[test]
    fn identity_gram() {
        let inst = PolytopeInstance::identity(2).unwrap();
        let e = cholesky_of_weighted_gram(&inst, &WeightVector::uniform(2, 1.0)).unwrap();
        assert_eq!(e.matrix(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(e.logdet(), 0.0);
    }

    #[test]
    fn scaled_identity_gram() {
        let inst = PolytopeInstance::scaled_identity(2, 2.0).unwrap();
        let e = cholesky_of_weighted_gram(&inst, &WeightVector::uniform(2, 1.0)).unwrap();
        assert_eq!(e.matrix(), &[4.0, 0.0, 0.0, 4.0]);
        assert!((e.logdet() - 2.0 * 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn diamond_gram_on_diagonals() {
        // (1,1)(1,1)ᵀ + (1,-1)(1,-1)ᵀ = [[2,0],[0,2]]
        let w = WeightVector::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let e = cholesky_of_weighted_gram(&diamond(), &w).unwrap();
        assert_eq!(e.matrix(), &[2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn rank_one_gram_is_not_positive_definite() {
        let inst = PolytopeInstance::identity(2).unwrap();
        let w = WeightVector::new(vec![2.0, 0.0]).unwrap();
        let err = cholesky_of_weighted_gram(&inst, &w).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { index: 1, .. }), "{err:?}");
    }

    #[test]
    fn wrong_weight_length() {
        let err = cholesky_of_weighted_gram(&diamond(), &WeightVector::uniform(3, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn solves_and_quadratic_form() {
        let q = vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let e = EllipsoidQuadratic::from_matrix(q.clone(), 3).unwrap();
        let b = [1.0, -2.0, 0.5];
        let mut x = b.to_vec();
        e.cholesky().solve(&mut x);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| q[i * 3 + j] * x[j]).sum();
            assert!((r - b[i]).abs() < 1e-13);
        }
        let direct: f64 = (0..3).map(|i| (0..3).map(|j| b[i] * q[i * 3 + j] * b[j]).sum::<f64>()).sum();
        assert!((e.quadratic_form(&b) - direct).abs() < 1e-12);
        let mut buf = b.to_vec();
        let inv = e.inverse_form(&mut buf);
        let explicit: f64 = b.iter().zip(&x).map(|(a, c)| a * c).sum();
        assert!((inv - explicit).abs() < 1e-13);
    }

    #[test]
    fn pivoted_rank() {
        assert_eq!(pivoted_cholesky_rank(&[1.0, 0.0, 0.0, 1.0], 2, 1e-10), 2);
        assert_eq!(pivoted_cholesky_rank(&[1.0, 2.0, 2.0, 4.0], 2, 1e-10), 1);
        assert_eq!(pivoted_cholesky_rank(&[0.0; 4], 2, 1e-10), 0);
        // Tiny but genuine second direction survives, below the tolerance it does not.
        assert_eq!(pivoted_cholesky_rank(&[1.0, 0.0, 0.0, 1e-9], 2, 1e-10), 2);
        assert_eq!(pivoted_cholesky_rank(&[1.0, 0.0, 0.0, 1e-11], 2, 1e-10), 1);
    }
}
