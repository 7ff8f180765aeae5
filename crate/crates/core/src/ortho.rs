//! Active orthogonalization: embed an arbitrary regression matrix `X` into a
//! taller matrix `(X; Delta)` whose columns are mutually orthogonal.
//!
//! With a diagonal scaling `S`, let `gamma_1 >= ... >= gamma_p` be the
//! eigenvalues of `Z'Z = S^-1 X'X S^-1` and `d = inflate * gamma_1`. Then
//! `A = Delta'Delta = d S^2 - X'X` and the complete-matrix column norms are
//! `d_j = d s_j^2`. The explicit augmentation rows are `B^(1/2) V_1 S` built
//! from the eigenvectors whose eigenvalues sit strictly below `d`; they are
//! only materialized on request since the solver needs just `A` and `d_j`.

use crate::error::{OemError, Result};
use crate::linalg::{gram, power_method, sym_eigen, Matrix};

/// Relative tolerance under which two eigenvalues count as tied when
/// computing the top-eigenvalue multiplicity and when deciding which
/// eigenvectors contribute augmentation rows.
pub const EIGEN_TIE_REL_TOL: f64 = 1e-9;

/// Choice of the diagonal scaling `S`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingChoice {
    /// `S = I`, so `X'X + Delta'Delta = d I`.
    Identity,
    /// `S = diag(||x_j||)`; requires every column of `X` to be nonzero.
    ColumnNorm,
}

/// Byproducts of orthogonalizing one design matrix.
#[derive(Clone, Debug)]
pub struct OrthoExpansion {
    /// Diagonal of `S`.
    pub s_diag: Vec<f64>,
    /// Largest eigenvalue of `Z'Z`.
    pub gamma1: f64,
    /// `inflate * gamma1`; the complete Gram is `d S^2`.
    pub d_scalar: f64,
    /// `A = d S^2 - X'X`, symmetric PSD.
    pub a_matrix: Matrix,
    /// Complete-matrix column norms `d_j = d s_j^2`.
    pub d_diag: Vec<f64>,
    /// Explicit augmentation rows, when requested.
    pub delta: Option<Matrix>,
    /// Multiplicity of `gamma1` in the spectrum of `Z'Z`.
    pub multiplicity_t: usize,
}

impl OrthoExpansion {
    pub fn p(&self) -> usize {
        self.s_diag.len()
    }

    /// Raises `d` so every `d_j` is at least `min_dj`, keeping
    /// `X'X + A = d S^2` intact. The explicit `delta` is dropped because its
    /// row set depends on `d`.
    pub(crate) fn ensure_min_coordinate(&mut self, min_dj: f64) {
        let min_s2 = self
            .s_diag
            .iter()
            .map(|s| s * s)
            .fold(f64::INFINITY, f64::min);
        if min_s2 <= 0.0 || !min_s2.is_finite() {
            return;
        }
        let needed = min_dj / min_s2;
        if self.d_scalar >= needed {
            return;
        }
        let bump = needed - self.d_scalar;
        for j in 0..self.p() {
            let s2 = self.s_diag[j] * self.s_diag[j];
            let v = self.a_matrix.get(j, j) + bump * s2;
            self.a_matrix.set(j, j, v);
            self.d_diag[j] = needed * s2;
        }
        self.d_scalar = needed;
        self.delta = None;
    }
}

fn scaling_diag(x: &Matrix, scaling: ScalingChoice) -> Result<Vec<f64>> {
    match scaling {
        ScalingChoice::Identity => Ok(vec![1.0; x.cols()]),
        ScalingChoice::ColumnNorm => {
            let mut s = Vec::with_capacity(x.cols());
            for j in 0..x.cols() {
                let mut acc = 0.0;
                for i in 0..x.rows() {
                    let v = x.get(i, j);
                    acc += v * v;
                }
                if acc == 0.0 {
                    return Err(OemError::ZeroColumn(j));
                }
                s.push(acc.sqrt());
            }
            Ok(s)
        }
    }
}

fn scaled_gram(x: &Matrix, s: &[f64]) -> Matrix {
    let g = gram(x);
    let p = x.cols();
    let mut z = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            z.set(i, j, g.get(i, j) / (s[i] * s[j]));
        }
    }
    z
}

fn validate_input(x: &Matrix, inflate: f64) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(OemError::InvalidParameter(
            "design matrix must be nonempty".into(),
        ));
    }
    if !inflate.is_finite() || inflate < 1.0 {
        return Err(OemError::InvalidParameter(format!(
            "inflate must be >= 1, got {inflate}"
        )));
    }
    Ok(())
}

/// Expands `x` into an orthogonal complete matrix.
///
/// Sets `d = inflate * gamma1`. When `want_delta` is set, the augmentation
/// rows are materialized, one per eigenvalue lying strictly below `d` (by the
/// tie tolerance), ordered by descending eigenvalue; this keeps
/// `delta'delta = a_matrix` for every `inflate`.
pub fn expand(
    x: &Matrix,
    scaling: ScalingChoice,
    inflate: f64,
    want_delta: bool,
) -> Result<OrthoExpansion> {
    validate_input(x, inflate)?;
    let p = x.cols();
    let s = scaling_diag(x, scaling)?;
    let g = gram(x);
    let zg = scaled_gram(x, &s);
    let eig = sym_eigen(&zg)?;

    let gamma1 = eig.values[0].max(0.0);
    let tie = EIGEN_TIE_REL_TOL * gamma1;
    let multiplicity_t = eig
        .values
        .iter()
        .take_while(|&&v| gamma1 - v <= tie)
        .count();
    let d = inflate * gamma1;

    let mut a_matrix = Matrix::zeros(p, p);
    let mut d_diag = Vec::with_capacity(p);
    for i in 0..p {
        for j in 0..p {
            let base = if i == j { d * s[i] * s[i] } else { 0.0 };
            a_matrix.set(i, j, base - g.get(i, j));
        }
        d_diag.push(d * s[i] * s[i]);
    }

    let delta = if want_delta {
        let kept: Vec<usize> = (0..p).filter(|&j| d - eig.values[j] > tie).collect();
        let mut rows = Matrix::zeros(kept.len(), p);
        for (r, &j) in kept.iter().enumerate() {
            let w = (d - eig.values[j]).sqrt();
            for l in 0..p {
                rows.set(r, l, w * eig.vectors.get(j, l) * s[l]);
            }
        }
        Some(rows)
    } else {
        None
    };

    Ok(OrthoExpansion {
        s_diag: s,
        gamma1,
        d_scalar: d,
        a_matrix,
        d_diag,
        delta,
        multiplicity_t,
    })
}

/// Deterministic power-method start: all ones with a small index-dependent
/// perturbation so it cannot be orthogonal to a coordinate-aligned
/// eigenspace.
pub(crate) fn default_power_init(p: usize) -> Vec<f64> {
    (0..p).map(|i| 1.0 + (i as f64 + 1.0) * 1e-4).collect()
}

/// Top eigenvalue of `Z'Z` without a full eigendecomposition.
///
/// Runs the power method on the scaled Gram and falls back to `sym_eigen`
/// if the iteration stalls (near-ties just below the top eigenvalue).
pub fn gamma1_fast(x: &Matrix, scaling: ScalingChoice) -> Result<f64> {
    validate_input(x, 1.0)?;
    let s = scaling_diag(x, scaling)?;
    let zg = scaled_gram(x, &s);
    let init = default_power_init(x.cols());
    match power_method(&zg, &init, 1e-10, 10_000) {
        Ok(out) => Ok(out.gamma1),
        Err(OemError::PowerMethodStalled { .. }) => Ok(sym_eigen(&zg)?.values[0].max(0.0)),
        Err(e) => Err(e),
    }
}
