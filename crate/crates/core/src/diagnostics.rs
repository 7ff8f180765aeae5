//! Measurable solver theory: grouping-coherence checking, convergence-rate
//! quantities, and seeded simulation harnesses for iteration counts and
//! support recovery.
//!
//! All experiments draw from a ChaCha8 generator seeded from
//! `SimulationSpec::seed`, with one dedicated stream per replication (for the
//! iteration experiment, per grid-point-and-replication), so every table is
//! reproducible bit for bit. Within a replication the draws are ordered: for
//! each design row, the `p` idiosyncratic normals then the shared factor;
//! after the design, the `n` noise values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{OemError, Result};
use crate::linalg::{gram, pinv_least_squares, sym_eigen, Matrix};
use crate::ortho::{expand, OrthoExpansion, ScalingChoice};
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::solver::{fit, standardize_columns, InitStrategy, SolverOptions};

/// Entrywise tolerance for declaring two columns aliased.
pub const ALIAS_ENTRY_TOL: f64 = 1e-12;

/// One detected column alias: `x_i = x_j` when `sign = 1`,
/// `x_i = -x_j` when `sign = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AliasedPair {
    pub i: usize,
    pub j: usize,
    pub sign: i8,
}

/// Result of a grouping-coherence check.
#[derive(Clone, Debug)]
pub struct CoherenceReport {
    pub aliased_pairs: Vec<AliasedPair>,
    /// Pairs whose signed coefficient equality fails beyond the tolerance.
    pub violations: Vec<AliasedPair>,
    pub coherent: bool,
}

/// Finds every pair of identical (or negated) columns and verifies the
/// corresponding signed equality of the coefficients within `tol`.
pub fn check_coherence(x: &Matrix, beta: &[f64], tol: f64) -> CoherenceReport {
    assert_eq!(beta.len(), x.cols(), "beta length must match column count");
    let p = x.cols();
    let n = x.rows();
    let mut aliased_pairs = Vec::new();
    let mut violations = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            let mut same = true;
            let mut negated = true;
            for k in 0..n {
                let a = x.get(k, i);
                let b = x.get(k, j);
                if (a - b).abs() > ALIAS_ENTRY_TOL {
                    same = false;
                }
                if (a + b).abs() > ALIAS_ENTRY_TOL {
                    negated = false;
                }
                if !same && !negated {
                    break;
                }
            }
            if same {
                let pair = AliasedPair { i, j, sign: 1 };
                aliased_pairs.push(pair);
                if (beta[i] - beta[j]).abs() > tol {
                    violations.push(pair);
                }
            }
            if negated {
                let pair = AliasedPair { i, j, sign: -1 };
                aliased_pairs.push(pair);
                if (beta[i] + beta[j]).abs() > tol {
                    violations.push(pair);
                }
            }
        }
    }
    let coherent = violations.is_empty();
    CoherenceReport {
        aliased_pairs,
        violations,
        coherent,
    }
}

/// Unpenalized global convergence rate `R_0 = (d - gamma_p) / d`, where
/// `gamma_p` is the smallest eigenvalue of the scaled Gram the expansion was
/// built from.
pub fn rate_r0(expansion: &OrthoExpansion, x: &Matrix) -> Result<f64> {
    if x.cols() != expansion.p() {
        return Err(OemError::DimensionMismatch(format!(
            "expansion has {} coordinates, design has {} columns",
            expansion.p(),
            x.cols()
        )));
    }
    let g = gram(x);
    let p = x.cols();
    let s = &expansion.s_diag;
    let mut zg = Matrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            zg.set(i, j, g.get(i, j) / (s[i] * s[j]));
        }
    }
    let eig = sym_eigen(&zg)?;
    let gamma_min = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let d = expansion.d_scalar;
    if d <= 0.0 {
        return Ok(0.0);
    }
    Ok(((d - gamma_min) / d).clamp(0.0, 1.0))
}

/// Convergence-rate summary for one problem: the spectral bound `R_0`
/// together with an empirical tail contraction ratio and the iteration
/// counts of the unpenalized and penalized fits.
#[derive(Clone, Copy, Debug)]
pub struct RateReport {
    pub r0: f64,
    /// Median of `||b(k+1) - b*|| / ||b(k) - b*||` over the last (up to) ten
    /// pre-convergence iterations, with `b*` the final iterate.
    pub empirical_r: f64,
    pub iterations_ols: usize,
    pub iterations_penalized: usize,
}

/// Runs the unpenalized and penalized fits on the same data and measures
/// the tail contraction of the penalized iterate sequence.
pub fn rate_report(
    x: &Matrix,
    y: &[f64],
    spec: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<RateReport> {
    let (xs, _s);
    let fitting: &Matrix = if opts.standardize {
        (xs, _s) = standardize_columns(x)?;
        &xs
    } else {
        x
    };
    let expansion = expand(fitting, ScalingChoice::Identity, opts.inflate, false)?;
    let r0 = rate_r0(&expansion, fitting)?;

    let ols = fit(x, y, &PenaltySpec::none(), opts, Some(&expansion))?;
    let pen = fit(x, y, spec, opts, Some(&expansion))?;
    let k_final = pen.iterations;

    // Replay the deterministic iterate sequence by capping max_iter.
    let mut ratios = Vec::new();
    if k_final >= 2 {
        let lo = k_final.saturating_sub(10).max(1);
        let mut prev_dist: Option<f64> = None;
        for k in lo..k_final {
            let capped = fit(
                x,
                y,
                spec,
                &SolverOptions {
                    max_iter: k,
                    ..opts.clone()
                },
                Some(&expansion),
            )?;
            let dist = {
                let mut acc = 0.0;
                for j in 0..pen.beta.len() {
                    let d = capped.beta[j] - pen.beta[j];
                    acc += d * d;
                }
                acc.sqrt()
            };
            if let Some(pd) = prev_dist {
                if pd > 1e-300 {
                    ratios.push(dist / pd);
                }
            }
            prev_dist = Some(dist);
        }
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let empirical_r = if ratios.is_empty() {
        0.0
    } else {
        ratios[ratios.len() / 2]
    };

    Ok(RateReport {
        r0,
        empirical_r,
        iterations_ols: ols.iterations,
        iterations_penalized: pen.iterations,
    })
}

/// Design-generation and replication parameters for the experiments.
#[derive(Clone, Debug)]
pub struct SimulationSpec {
    pub n: usize,
    pub p: usize,
    /// Equicorrelation of the Gaussian design rows.
    pub rho: f64,
    /// Noise standard deviation.
    pub sigma: f64,
    pub beta_true: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
}

impl SimulationSpec {
    /// Alternating-sign exponentially decaying coefficients,
    /// `beta_j = (-1)^j exp(-2 (j-1) / 20)` for `j = 1..=p`.
    pub fn decaying_beta(p: usize) -> Vec<f64> {
        (1..=p)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * (-2.0 * (j as f64 - 1.0) / 20.0).exp()
            })
            .collect()
    }

    /// Sparse default for support-recovery experiments: `(3, 1.5, 2, 0, ...)`.
    pub fn sparse_beta(p: usize) -> Vec<f64> {
        let mut b = vec![0.0; p];
        for (slot, v) in b.iter_mut().zip([3.0, 1.5, 2.0]) {
            *slot = v;
        }
        b
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(OemError::InvalidParameter(
                "simulation needs n >= 1 and p >= 1".into(),
            ));
        }
        if !self.rho.is_finite() || self.rho < 0.0 || self.rho >= 1.0 {
            return Err(OemError::InvalidParameter(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(OemError::InvalidParameter(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.beta_true.len() != self.p {
            return Err(OemError::DimensionMismatch(format!(
                "beta_true has length {}, expected {}",
                self.beta_true.len(),
                self.p
            )));
        }
        if self.beta_true.iter().any(|b| !b.is_finite()) {
            return Err(OemError::InvalidParameter(
                "beta_true must be finite".into(),
            ));
        }
        if self.replications == 0 {
            return Err(OemError::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn replication_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` rows drawn from `N(0, V)` with `V_ii = 1` and `V_ij = rho`.
pub fn sample_equicorrelated_design<R: Rng>(rng: &mut R, n: usize, p: usize, rho: f64) -> Matrix {
    let idio = (1.0 - rho).sqrt();
    let shared = rho.max(0.0).sqrt();
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let start = data.len();
        for _ in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            data.push(idio * z);
        }
        let g: f64 = rng.sample(StandardNormal);
        for v in &mut data[start..] {
            *v += shared * g;
        }
    }
    Matrix::from_raw(n, p, data)
}

/// `Y = X beta + sigma * eps` with standard normal noise.
pub fn simulate_response<R: Rng>(rng: &mut R, x: &Matrix, beta: &[f64], sigma: f64) -> Vec<f64> {
    let mut y = x.matvec(beta);
    for v in &mut y {
        let e: f64 = rng.sample(StandardNormal);
        *v += sigma * e;
    }
    y
}

/// One grid point of the iteration-count experiment.
#[derive(Clone, Copy, Debug)]
pub struct IterationRow {
    pub n: usize,
    pub mean_r0: f64,
    pub mean_iter_ols: f64,
    pub mean_iter_lasso: f64,
}

/// For each `n` in the grid: draw seeded designs, fit both the unpenalized
/// model and the lasso at `lambda` with identical settings, and average the
/// iteration counts and `R_0` over replications.
///
/// Fitting happens on unit-norm columns with the response divided by
/// `sqrt(n)`, so a fixed `lambda` stays comparable across sample sizes
/// instead of washing out as the response norm grows.
pub fn run_iteration_experiment(
    spec: &SimulationSpec,
    lambda: f64,
    n_grid: &[usize],
) -> Result<Vec<IterationRow>> {
    spec.validate()?;
    let lasso = PenaltySpec::lasso(lambda)?;
    let grid: Vec<usize> = if n_grid.is_empty() {
        vec![spec.n]
    } else {
        n_grid.to_vec()
    };
    let opts = SolverOptions {
        standardize: false,
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(grid.len());
    for (ni, &n) in grid.iter().enumerate() {
        if n == 0 {
            return Err(OemError::InvalidParameter(
                "n grid entries must be positive".into(),
            ));
        }
        let sqrt_n = (n as f64).sqrt();
        let mut sum_r0 = 0.0;
        let mut sum_ols = 0.0;
        let mut sum_lasso = 0.0;
        for rep in 0..spec.replications {
            let stream = (ni * spec.replications + rep) as u64;
            let mut rng = replication_rng(spec.seed, stream);
            let x = sample_equicorrelated_design(&mut rng, n, spec.p, spec.rho);
            let y = simulate_response(&mut rng, &x, &spec.beta_true, spec.sigma);
            let (w, _norms) = standardize_columns(&x)?;
            let v: Vec<f64> = y.iter().map(|t| t / sqrt_n).collect();
            let expansion = expand(&w, ScalingChoice::Identity, 1.0, false)?;
            sum_r0 += rate_r0(&expansion, &w)?;
            let f_ols = fit(&w, &v, &PenaltySpec::none(), &opts, Some(&expansion))?;
            let f_lasso = fit(&w, &v, &lasso, &opts, Some(&expansion))?;
            sum_ols += f_ols.iterations as f64;
            sum_lasso += f_lasso.iterations as f64;
        }
        let reps = spec.replications as f64;
        rows.push(IterationRow {
            n,
            mean_r0: sum_r0 / reps,
            mean_iter_ols: sum_ols / reps,
            mean_iter_lasso: sum_lasso / reps,
        });
    }
    Ok(rows)
}

/// Outcome of the support-recovery experiment at one sample size.
#[derive(Clone, Copy, Debug)]
pub struct OracleOutcome {
    /// Fraction of replications recovering the true support exactly.
    pub support_recovery_rate: f64,
    /// Root mean squared error of the fitted nonzero block, on the original
    /// coefficient scale, pooled over replications.
    pub estimation_rmse_on_support: f64,
    /// Same quantity for least squares restricted to the true support.
    pub oracle_rmse_on_support: f64,
}

/// Support-recovery experiment for the sparse nonconvex penalties.
///
/// Each replication rescales the problem so the Gram of the design divided
/// by `n` has unit diagonal, applies the penalty at `n^exponent / n`, and
/// starts from the least-squares solution. Fitted coefficients are mapped
/// back to the original scale before comparing against the truth and the
/// support-restricted least-squares oracle.
pub fn run_oracle_experiment(
    spec: &SimulationSpec,
    penalty: &PenaltySpec,
    lambda_exponent: f64,
) -> Result<OracleOutcome> {
    spec.validate()?;
    if spec.n <= spec.p {
        return Err(OemError::InvalidParameter(format!(
            "support-recovery experiment requires n > p, got n={} p={}",
            spec.n, spec.p
        )));
    }
    if !matches!(
        penalty.kind(),
        PenaltyKind::Scad { .. } | PenaltyKind::Mcp { .. }
    ) {
        return Err(OemError::InvalidPenalty(
            "support-recovery experiment expects scad or mcp".into(),
        ));
    }
    if !lambda_exponent.is_finite() || lambda_exponent <= 0.5 || lambda_exponent >= 1.0 {
        return Err(OemError::InvalidParameter(format!(
            "lambda exponent must lie in (0.5, 1), got {lambda_exponent}"
        )));
    }

    let n = spec.n;
    let p = spec.p;
    let support: Vec<usize> = (0..p).filter(|&j| spec.beta_true[j] != 0.0).collect();
    let p1 = support.len();
    let sqrt_n = (n as f64).sqrt();
    let lambda_eff = (n as f64).powf(lambda_exponent) / n as f64;
    let pen = penalty.with_lambda(lambda_eff)?;
    let opts = SolverOptions {
        init: InitStrategy::Ols,
        standardize: false,
        ..Default::default()
    };

    let mut recovered = 0_usize;
    let mut sq_fit = 0.0;
    let mut sq_oracle = 0.0;
    for rep in 0..spec.replications {
        let mut rng = replication_rng(spec.seed, rep as u64);
        let x = sample_equicorrelated_design(&mut rng, n, p, spec.rho);
        let y = simulate_response(&mut rng, &x, &spec.beta_true, spec.sigma);

        // Unit-column problem (W, v) = (X / diag(||x_j||), Y / sqrt(n)).
        let (w, col_norms) = standardize_columns(&x)?;
        let v: Vec<f64> = y.iter().map(|t| t / sqrt_n).collect();
        let f = fit(&w, &v, &pen, &opts, None)?;

        let hit = (0..p).all(|j| (f.beta[j] != 0.0) == (spec.beta_true[j] != 0.0));
        if hit {
            recovered += 1;
        }
        for &j in &support {
            let raw = f.beta[j] * sqrt_n / col_norms[j];
            let e = raw - spec.beta_true[j];
            sq_fit += e * e;
        }

        if p1 > 0 {
            let mut sub = Vec::with_capacity(n * p1);
            for i in 0..n {
                for &j in &support {
                    sub.push(x.get(i, j));
                }
            }
            let x_s = Matrix::from_raw(n, p1, sub);
            let b_oracle = pinv_least_squares(&x_s, &y)?;
            for (k, &j) in support.iter().enumerate() {
                let e = b_oracle[k] - spec.beta_true[j];
                sq_oracle += e * e;
            }
        }
    }

    let reps = spec.replications as f64;
    let denom = (reps * p1 as f64).max(1.0);
    Ok(OracleOutcome {
        support_recovery_rate: recovered as f64 / reps,
        estimation_rmse_on_support: (sq_fit / denom).sqrt(),
        oracle_rmse_on_support: (sq_oracle / denom).sqrt(),
    })
}
