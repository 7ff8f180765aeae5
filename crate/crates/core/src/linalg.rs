//! Dense matrix primitives: Gram products, symmetric eigendecomposition,
//! power iteration for the top eigenvalue, and an SVD-based minimal-norm
//! least-squares solve.
//!
//! Matrices are dense, row-major `f64`. The eigendecomposition is cyclic
//! Jacobi and the SVD is one-sided Jacobi; both are deterministic and keep
//! full accuracy on rank-deficient inputs, which the solver's singular-design
//! guarantees depend on. Dot products accumulate in a fixed index order, so
//! sign-aliased columns produce exactly negated results.

use crate::error::{OemError, Result};

/// Dense row-major matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting length mismatches and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(OemError::ShapeMismatch {
                rows,
                cols,
                len: data.len(),
            });
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(OemError::NonFiniteEntry {
                    row: k / cols.max(1),
                    col: k % cols.max(1),
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(OemError::ShapeMismatch {
                    rows: r,
                    cols: c,
                    len: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    /// Constructor for internally computed values; skips the finiteness scan.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `self * v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self' * v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for j in 0..self.cols {
            let mut acc = 0.0;
            for i in 0..self.rows {
                acc += self.get(i, j) * v[i];
            }
            out[j] = acc;
        }
        out
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// `self * diag(s)` (rescales column j by `s[j]`).
    pub fn scale_columns(&self, s: &[f64]) -> Matrix {
        assert_eq!(s.len(), self.cols, "scale_columns dimension mismatch");
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i * self.cols + j] *= s[j];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for k in 0..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `m'm`: symmetric positive semidefinite Gram matrix of the columns.
///
/// Column-pair dot products accumulate over rows in index order and the lower
/// triangle is copied from the upper one, so the result is exactly symmetric
/// and exactly mirrors sign relations between aliased columns.
pub fn gram(m: &Matrix) -> Matrix {
    let p = m.cols;
    let mut out = Matrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let mut acc = 0.0;
            for k in 0..m.rows {
                acc += m.get(k, i) * m.get(k, j);
            }
            out.set(i, j, acc);
            out.set(j, i, acc);
        }
    }
    out
}

/// Symmetric eigendecomposition result.
///
/// `values` are sorted descending and row `i` of `vectors` is the unit
/// eigenvector of `values[i]`, so the input is reconstructed as
/// `vectors' * diag(values) * vectors`.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const SYMMETRY_REL_TOL: f64 = 1e-8;

fn check_symmetric(g: &Matrix) -> Result<()> {
    if g.rows != g.cols {
        return Err(OemError::NotSymmetric);
    }
    let scale = g.max_abs().max(1.0);
    for i in 0..g.rows {
        for j in (i + 1)..g.cols {
            if (g.get(i, j) - g.get(j, i)).abs() > SYMMETRY_REL_TOL * scale {
                return Err(OemError::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// Stable tangent of the Jacobi rotation angle for a 2x2 symmetric block.
#[inline]
fn jacobi_tangent(zeta: f64) -> f64 {
    let root = (1.0 + zeta * zeta).sqrt();
    if zeta >= 0.0 {
        1.0 / (zeta + root)
    } else {
        -1.0 / (-zeta + root)
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Eigenvector signs are normalized (largest-magnitude entry positive) so
/// repeated calls on the same input are deterministic.
pub fn sym_eigen(g: &Matrix) -> Result<EigenResult> {
    check_symmetric(g)?;
    let p = g.rows;
    // Work on the exactly symmetrized copy.
    let mut a = g.clone();
    for i in 0..p {
        for j in (i + 1)..p {
            let m = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, m);
            a.set(j, i, m);
        }
    }
    let mut v = Matrix::identity(p);
    let fro = a.frobenius_norm();
    let mut converged = fro == 0.0 || p == 1;
    if !converged {
        for _sweep in 0..100 {
            let mut off_sq = 0.0;
            for i in 0..p {
                for j in (i + 1)..p {
                    let e = a.get(i, j);
                    off_sq += 2.0 * e * e;
                }
            }
            if off_sq.sqrt() <= f64::EPSILON * fro {
                converged = true;
                break;
            }
            for i in 0..p {
                for j in (i + 1)..p {
                    let apq = a.get(i, j);
                    if apq == 0.0 {
                        continue;
                    }
                    let zeta = (a.get(j, j) - a.get(i, i)) / (2.0 * apq);
                    let t = jacobi_tangent(zeta);
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let app = a.get(i, i);
                    let aqq = a.get(j, j);
                    a.set(i, i, app - t * apq);
                    a.set(j, j, aqq + t * apq);
                    a.set(i, j, 0.0);
                    a.set(j, i, 0.0);
                    for k in 0..p {
                        if k != i && k != j {
                            let aki = a.get(k, i);
                            let akj = a.get(k, j);
                            a.set(k, i, c * aki - s * akj);
                            a.set(i, k, c * aki - s * akj);
                            a.set(k, j, s * aki + c * akj);
                            a.set(j, k, s * aki + c * akj);
                        }
                        let vki = v.get(k, i);
                        let vkj = v.get(k, j);
                        v.set(k, i, c * vki - s * vkj);
                        v.set(k, j, s * vki + c * vkj);
                    }
                }
            }
        }
    }
    if !converged {
        return Err(OemError::EigenFailed);
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| {
        a.get(y, y)
            .partial_cmp(&a.get(x, x))
            .expect("finite eigenvalues")
    });

    let mut values = Vec::with_capacity(p);
    let mut vectors = Matrix::zeros(p, p);
    for (r, &idx) in order.iter().enumerate() {
        values.push(a.get(idx, idx));
        let mut lead = 0;
        for k in 1..p {
            if v.get(k, idx).abs() > v.get(lead, idx).abs() {
                lead = k;
            }
        }
        let flip = if v.get(lead, idx) < 0.0 { -1.0 } else { 1.0 };
        for k in 0..p {
            vectors.set(r, k, flip * v.get(k, idx));
        }
    }
    Ok(EigenResult { values, vectors })
}

/// Outcome of a converged power iteration.
#[derive(Clone, Copy, Debug)]
pub struct PowerOutcome {
    pub gamma1: f64,
    pub iterations: usize,
}

/// Power iteration for the dominant eigenvalue of a symmetric PSD matrix.
///
/// Convergence is declared when the residual `||G q - gamma q||` drops below
/// `tol * gamma`, which bounds the distance from `gamma` to an exact
/// eigenvalue. The estimate is the Rayleigh quotient of the current iterate.
/// If `init` is orthogonal to the dominant eigenspace the limit can be a
/// lower eigenvalue; callers use a perturbed deterministic start to avoid
/// this.
pub fn power_method(g: &Matrix, init: &[f64], tol: f64, max_iter: usize) -> Result<PowerOutcome> {
    check_symmetric(g)?;
    if init.len() != g.rows {
        return Err(OemError::DimensionMismatch(format!(
            "power method init has length {}, matrix is {}x{}",
            init.len(),
            g.rows,
            g.cols
        )));
    }
    if !tol.is_finite() || tol <= 0.0 || max_iter == 0 {
        return Err(OemError::InvalidParameter(
            "power method needs tol > 0 and max_iter >= 1".into(),
        ));
    }
    let n0 = norm2(init);
    if n0 == 0.0 {
        return Err(OemError::ZeroVector);
    }
    let mut q: Vec<f64> = init.iter().map(|v| v / n0).collect();
    let mut gamma = 0.0;
    for k in 1..=max_iter {
        let w = g.matvec(&q);
        gamma = dot(&q, &w);
        let mut resid_sq = 0.0;
        for i in 0..q.len() {
            let r = w[i] - gamma * q[i];
            resid_sq += r * r;
        }
        if resid_sq.sqrt() <= tol * gamma.max(f64::MIN_POSITIVE) {
            return Ok(PowerOutcome {
                gamma1: gamma,
                iterations: k,
            });
        }
        let wn = norm2(&w);
        if wn == 0.0 {
            // q sits in the nullspace; for a PSD matrix the quotient is 0.
            return Ok(PowerOutcome {
                gamma1: 0.0,
                iterations: k,
            });
        }
        for i in 0..q.len() {
            q[i] = w[i] / wn;
        }
    }
    Err(OemError::PowerMethodStalled {
        estimate: gamma,
        iterations: max_iter,
    })
}

/// Relative singular-value cutoff for rank decisions in the pseudoinverse.
pub const PINV_REL_CUTOFF: f64 = 1e-12;

/// One-sided Jacobi SVD: rotates column pairs of `a` until they are mutually
/// orthogonal, accumulating the rotations. Returns `(w, v)` with `w = a v`,
/// `v` orthogonal, and the columns of `w` orthogonal; the singular values are
/// the column norms of `w`.
fn one_sided_jacobi(a: &Matrix) -> (Matrix, Matrix) {
    let m = a.rows;
    let k = a.cols;
    let mut w = a.clone();
    let mut v = Matrix::identity(k);
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..k {
            for j in (i + 1)..k {
                let mut aii = 0.0;
                let mut ajj = 0.0;
                let mut aij = 0.0;
                for r in 0..m {
                    let wi = w.get(r, i);
                    let wj = w.get(r, j);
                    aii += wi * wi;
                    ajj += wj * wj;
                    aij += wi * wj;
                }
                if aij == 0.0 || aij.abs() <= f64::EPSILON * (aii * ajj).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (2.0 * aij);
                let t = jacobi_tangent(zeta);
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for r in 0..m {
                    let wi = w.get(r, i);
                    let wj = w.get(r, j);
                    w.set(r, i, c * wi - s * wj);
                    w.set(r, j, s * wi + c * wj);
                }
                for r in 0..k {
                    let vi = v.get(r, i);
                    let vj = v.get(r, j);
                    v.set(r, i, c * vi - s * vj);
                    v.set(r, j, s * vi + c * vj);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Minimal-Euclidean-norm least-squares solution `(X'X)^+ X'Y` via the SVD.
///
/// Singular values below `PINV_REL_CUTOFF` times the largest one are treated
/// as zero. For wide matrices the factorization runs on the transpose.
pub fn pinv_least_squares(x: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != x.rows {
        return Err(OemError::DimensionMismatch(format!(
            "response has length {}, matrix has {} rows",
            y.len(),
            x.rows
        )));
    }
    // For x = u diag(sigma) v', the solution is v diag(1/sigma) u' y over the
    // retained singular values. The factorization of the tall side gives
    // w = (input) v with orthogonal columns of norm sigma_i; `coef` holds the
    // p-dimensional singular directions (times sigma for the wide case),
    // `resp` the n-dimensional ones, and sigma always comes from `w`.
    let tall = x.rows >= x.cols;
    let (w, v) = if tall {
        one_sided_jacobi(x)
    } else {
        one_sided_jacobi(&x.transpose())
    };
    let k = w.cols();
    let mut sigma_sq = Vec::with_capacity(k);
    for i in 0..k {
        let mut acc = 0.0;
        for r in 0..w.rows() {
            let t = w.get(r, i);
            acc += t * t;
        }
        sigma_sq.push(acc);
    }
    let (coef, resp) = if tall { (v, w) } else { (w, v) };
    let smax_sq = sigma_sq.iter().fold(0.0_f64, |m, s| m.max(*s));
    let cutoff_sq = PINV_REL_CUTOFF * PINV_REL_CUTOFF * smax_sq;
    let mut beta = vec![0.0; x.cols];
    for i in 0..k {
        if sigma_sq[i] <= cutoff_sq || sigma_sq[i] == 0.0 {
            continue;
        }
        let mut ry = 0.0;
        for r in 0..y.len() {
            ry += resp.get(r, i) * y[r];
        }
        let c = ry / sigma_sq[i];
        for j in 0..x.cols {
            beta[j] += c * coef.get(j, i);
        }
    }
    Ok(beta)
}
