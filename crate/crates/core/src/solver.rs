//! The OEM iteration: maintain `u = X'Y + A b`, apply the per-coordinate
//! scalar solvers, and repeat until the coefficients settle.
//!
//! Fitting happens on a standardized scale by default (columns divided by
//! their norms, so the complete-data diagonal satisfies the `d_j >= 1`
//! requirement of the SCAD and MCP updates); coefficients are returned on the
//! original data scale while the recorded objective values refer to the
//! objective actually minimized. `u` is accumulated as
//! `X'Y + d .* b - (X'X) b` in fixed index order, which keeps the update
//! exactly sign-symmetric across aliased columns.

use crate::error::{OemError, Result};
use crate::linalg::{dot, gram, norm2, pinv_least_squares, Matrix};
use crate::ortho::{expand, gamma1_fast, OrthoExpansion, ScalingChoice};
use crate::penalty::{penalty_value, solve_scalar, PenaltySpec};

/// Starting point for the iteration, on the original data scale.
#[derive(Clone, Debug, PartialEq)]
pub enum InitStrategy {
    Zeros,
    /// Minimal-norm least-squares solution of the fitting problem.
    Ols,
    Custom(Vec<f64>),
}

/// Iteration controls.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Per-coefficient relative-change threshold.
    pub tol: f64,
    /// Iteration cap for plain fits, sweep cap for grouped fits.
    pub max_iter: usize,
    pub init: InitStrategy,
    /// Two-step extrapolation with an objective-descent safeguard.
    pub accelerate: bool,
    /// Number of coordinate groups; 1 is the plain algorithm.
    pub groups: usize,
    /// Record the objective after the initial point and every iteration.
    pub record_trace: bool,
    /// Fit on the unit-column-norm scale and back-transform.
    pub standardize: bool,
    /// Multiplier on the top eigenvalue when building the expansion;
    /// values above 1 make the augmentation Gram strictly positive definite.
    pub inflate: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 10_000,
            init: InitStrategy::Zeros,
            accelerate: false,
            groups: 1,
            record_trace: false,
            standardize: true,
            inflate: 1.0,
        }
    }
}

impl SolverOptions {
    fn validate(&self, p: usize) -> Result<()> {
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(OemError::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(OemError::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if !self.inflate.is_finite() || self.inflate < 1.0 {
            return Err(OemError::InvalidParameter(format!(
                "inflate must be >= 1, got {}",
                self.inflate
            )));
        }
        if self.groups == 0 || self.groups > p {
            return Err(OemError::InvalidParameter(format!(
                "groups must lie in 1..={p}, got {}",
                self.groups
            )));
        }
        if let InitStrategy::Custom(v) = &self.init {
            if v.len() != p {
                return Err(OemError::DimensionMismatch(format!(
                    "custom init has length {}, expected {p}",
                    v.len()
                )));
            }
            if let Some(k) = v.iter().position(|b| !b.is_finite()) {
                return Err(OemError::InvalidParameter(format!(
                    "custom init has a non-finite entry at {k}"
                )));
            }
        }
        Ok(())
    }
}

/// Fit outcome. `beta` is on the original data scale; `objective_trace`,
/// `final_objective` and `u_final` refer to the fitting-scale problem.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Option<Vec<f64>>,
    pub final_objective: f64,
    pub u_final: Vec<f64>,
}

/// `||Y - X beta||^2 + P(beta; lambda)`.
pub fn objective(x: &Matrix, y: &[f64], beta: &[f64], spec: &PenaltySpec) -> Result<f64> {
    if y.len() != x.rows() || beta.len() != x.cols() {
        return Err(OemError::DimensionMismatch(format!(
            "objective: X is {}x{}, y has length {}, beta has length {}",
            x.rows(),
            x.cols(),
            y.len(),
            beta.len()
        )));
    }
    let fitted = x.matvec(beta);
    let mut rss = 0.0;
    for i in 0..y.len() {
        let r = y[i] - fitted[i];
        rss += r * r;
    }
    Ok(rss + penalty_value(beta, spec)?)
}

/// One separable update: coordinate `j` of the result minimizes
/// `d_j b^2 - 2 u_j b + P_j(b)`.
pub fn oem_step(u: &[f64], expansion: &OrthoExpansion, spec: &PenaltySpec) -> Result<Vec<f64>> {
    if u.len() != expansion.p() {
        return Err(OemError::DimensionMismatch(format!(
            "u has length {}, expansion has {} coordinates",
            u.len(),
            expansion.p()
        )));
    }
    u.iter()
        .enumerate()
        .map(|(j, &uj)| solve_scalar(expansion.d_diag[j], uj, j, spec))
        .collect()
}

/// Divides each column by its Euclidean norm; returns the scaled matrix and
/// the norms. Errors on a zero column.
pub fn standardize_columns(x: &Matrix) -> Result<(Matrix, Vec<f64>)> {
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
    let inv: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    Ok((x.scale_columns(&inv), s))
}

fn validate_problem(x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(OemError::InvalidParameter(
            "design matrix must be nonempty".into(),
        ));
    }
    if y.len() != x.rows() {
        return Err(OemError::DimensionMismatch(format!(
            "response has length {}, design has {} rows",
            y.len(),
            x.rows()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(OemError::InvalidParameter(format!(
            "response contains a non-finite value at index {i}"
        )));
    }
    Ok(())
}

fn max_relative_change(old: &[f64], new: &[f64]) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..old.len() {
        worst = worst.max((new[j] - old[j]).abs() / old[j].abs().max(1.0));
    }
    worst
}

fn initial_beta(xs: &Matrix, y: &[f64], init: &InitStrategy, s: &[f64]) -> Result<Vec<f64>> {
    match init {
        InitStrategy::Zeros => Ok(vec![0.0; xs.cols()]),
        InitStrategy::Ols => pinv_least_squares(xs, y),
        InitStrategy::Custom(v) => Ok(v.iter().zip(s).map(|(b, sj)| b * sj).collect()),
    }
}

struct Engine<'a> {
    xs: &'a Matrix,
    y: &'a [f64],
    gram: Matrix,
    xty: Vec<f64>,
    d_diag: &'a [f64],
    spec: &'a PenaltySpec,
}

struct EngineRun {
    beta: Vec<f64>,
    iterations: usize,
    converged: bool,
    trace: Option<Vec<f64>>,
    final_objective: f64,
    u_final: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(xs: &'a Matrix, y: &'a [f64], d_diag: &'a [f64], spec: &'a PenaltySpec) -> Self {
        Self {
            xs,
            y,
            gram: gram(xs),
            xty: xs.tr_matvec(y),
            d_diag,
            spec,
        }
    }

    /// `u = X'Y + d .* b - (X'X) b`, accumulated per coordinate in index
    /// order. Algebraically this is `X'Y + A b`.
    fn update_u(&self, beta: &[f64], u: &mut [f64]) {
        for j in 0..beta.len() {
            u[j] = self.xty[j] + self.d_diag[j] * beta[j] - dot(self.gram.row(j), beta);
        }
    }

    fn plain_step(&self, beta: &[f64], u: &mut [f64]) -> Result<Vec<f64>> {
        self.update_u(beta, u);
        u.iter()
            .enumerate()
            .map(|(j, &uj)| solve_scalar(self.d_diag[j], uj, j, self.spec))
            .collect()
    }

    fn objective_at(&self, beta: &[f64]) -> Result<f64> {
        objective(self.xs, self.y, beta, self.spec)
    }

    /// Two-step extrapolation `b - 2 g r + g^2 v` with
    /// `r = M(b) - b`, `v = M(M(b)) - M(b) - r`, `g = -||r||/||v||`.
    /// Falls back to the plain double step whenever the extrapolated point
    /// does not improve on it (or leaves the garrote feasible set).
    fn accelerated_step(&self, beta: &[f64], u: &mut [f64]) -> Result<Vec<f64>> {
        let m1 = self.plain_step(beta, u)?;
        let m2 = self.plain_step(&m1, u)?;
        let p = beta.len();
        let mut r = vec![0.0; p];
        let mut v = vec![0.0; p];
        for j in 0..p {
            r[j] = m1[j] - beta[j];
            v[j] = m2[j] - 2.0 * m1[j] + beta[j];
        }
        let vn = norm2(&v);
        if vn == 0.0 {
            return Ok(m2);
        }
        let g = -norm2(&r) / vn;
        let mut cand = vec![0.0; p];
        for j in 0..p {
            cand[j] = beta[j] - 2.0 * g * r[j] + g * g * v[j];
        }
        let plain_obj = self.objective_at(&m2)?;
        match self.objective_at(&cand) {
            Ok(lc) if lc <= plain_obj => Ok(cand),
            Ok(_) => Ok(m2),
            Err(OemError::GarroteInfeasible { .. }) => Ok(m2),
            Err(e) => Err(e),
        }
    }

    fn run(&self, beta0: Vec<f64>, opts: &SolverOptions) -> Result<EngineRun> {
        let p = beta0.len();
        let mut beta = beta0;
        let mut trace = if opts.record_trace {
            Some(vec![self.objective_at(&beta)?])
        } else {
            None
        };
        let mut u = vec![0.0; p];
        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iter {
            iterations += 1;
            let next = if opts.accelerate {
                self.accelerated_step(&beta, &mut u)?
            } else {
                self.plain_step(&beta, &mut u)?
            };
            converged = max_relative_change(&beta, &next) < opts.tol;
            if let Some(t) = trace.as_mut() {
                t.push(self.objective_at(&next)?);
            }
            beta = next;
            if converged {
                break;
            }
        }
        self.update_u(&beta, &mut u);
        let final_objective = self.objective_at(&beta)?;
        Ok(EngineRun {
            beta,
            iterations,
            converged,
            trace,
            final_objective,
            u_final: u,
        })
    }
}

/// Penalized least-squares fit by OEM.
///
/// A supplied `expansion` must describe the matrix actually iterated on:
/// the column-standardized design when `opts.standardize` is set, the raw
/// design otherwise. With `opts.groups > 1` the grouped algorithm runs
/// instead (and no expansion may be supplied, since each group builds its
/// own).
pub fn fit(
    x: &Matrix,
    y: &[f64],
    spec: &PenaltySpec,
    opts: &SolverOptions,
    expansion: Option<&OrthoExpansion>,
) -> Result<FitResult> {
    validate_problem(x, y)?;
    opts.validate(x.cols())?;
    if opts.groups > 1 {
        if expansion.is_some() {
            return Err(OemError::InvalidParameter(
                "grouped fits build per-group expansions; do not supply one".into(),
            ));
        }
        return fit_hybrid(x, y, spec, opts);
    }

    let p = x.cols();
    let ones = vec![1.0; p];
    let standardized;
    let (xs, s): (&Matrix, &[f64]) = if opts.standardize {
        standardized = standardize_columns(x)?;
        (&standardized.0, &standardized.1)
    } else {
        (x, &ones)
    };
    let spec_s = spec.rescaled(s)?;

    let exp_owned;
    let exp: &OrthoExpansion = match expansion {
        Some(e) => {
            if e.p() != p {
                return Err(OemError::DimensionMismatch(format!(
                    "expansion has {} coordinates, design has {p} columns",
                    e.p()
                )));
            }
            if spec_s.needs_unit_scale() && e.d_diag.iter().any(|&dj| dj < 1.0) {
                let mut c = e.clone();
                c.ensure_min_coordinate(1.0);
                exp_owned = c;
                &exp_owned
            } else {
                e
            }
        }
        None => {
            let mut e = expand(xs, ScalingChoice::Identity, opts.inflate, false)?;
            if spec_s.needs_unit_scale() {
                e.ensure_min_coordinate(1.0);
            }
            exp_owned = e;
            &exp_owned
        }
    };

    let beta0 = initial_beta(xs, y, &opts.init, s)?;
    let engine = Engine::new(xs, y, &exp.d_diag, &spec_s);
    let run = engine.run(beta0, opts)?;

    let beta = run.beta.iter().zip(s).map(|(b, sj)| b / sj).collect();
    Ok(FitResult {
        beta,
        iterations: run.iterations,
        converged: run.converged,
        objective_trace: run.trace,
        final_objective: run.final_objective,
        u_final: run.u_final,
    })
}

/// Grouped OEM: sweeps over contiguous coordinate groups, solving each
/// group subproblem by OEM on the residualized response while the other
/// groups stay fixed. `groups = 1` reduces to the plain algorithm and
/// `groups = p` is coordinate descent. Stops once a full sweep changes no
/// coefficient by more than `tol`.
pub fn fit_hybrid(
    x: &Matrix,
    y: &[f64],
    spec: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<FitResult> {
    validate_problem(x, y)?;
    opts.validate(x.cols())?;
    if opts.groups == 1 {
        return fit(x, y, spec, opts, None);
    }

    let p = x.cols();
    let n = x.rows();
    let g = opts.groups;
    let ones = vec![1.0; p];
    let standardized;
    let (xs, s): (&Matrix, &[f64]) = if opts.standardize {
        standardized = standardize_columns(x)?;
        (&standardized.0, &standardized.1)
    } else {
        (x, &ones)
    };
    let spec_s = spec.rescaled(s)?;

    // Contiguous balanced groups; the remainder goes to the leading groups.
    let base = p / g;
    let extra = p % g;
    let mut bounds = Vec::with_capacity(g);
    let mut start = 0;
    for gi in 0..g {
        let size = base + usize::from(gi < extra);
        bounds.push((start, start + size));
        start += size;
    }

    struct Group {
        lo: usize,
        hi: usize,
        xg: Matrix,
        expansion: OrthoExpansion,
        spec: PenaltySpec,
    }
    let mut groups = Vec::with_capacity(g);
    for &(lo, hi) in &bounds {
        let mut data = Vec::with_capacity(n * (hi - lo));
        for i in 0..n {
            data.extend_from_slice(&xs.row(i)[lo..hi]);
        }
        let xg = Matrix::new(n, hi - lo, data)?;
        let mut expansion = expand(&xg, ScalingChoice::Identity, opts.inflate, false)?;
        if spec_s.needs_unit_scale() {
            expansion.ensure_min_coordinate(1.0);
        }
        groups.push(Group {
            lo,
            hi,
            xg,
            expansion,
            spec: spec_s.restricted(lo, hi)?,
        });
    }

    let mut beta = initial_beta(xs, y, &opts.init, s)?;
    let mut trace = if opts.record_trace {
        Some(vec![objective(xs, y, &beta, &spec_s)?])
    } else {
        None
    };
    let mut total_inner = 0;
    let mut converged = false;
    let sub_template = SolverOptions {
        groups: 1,
        record_trace: false,
        standardize: false,
        ..opts.clone()
    };

    for _sweep in 0..opts.max_iter {
        let mut sweep_change = 0.0_f64;
        let mut inner_ok = true;
        for grp in &groups {
            // Residualized response: y minus the fit of the other groups.
            let mut resid = Vec::with_capacity(n);
            for i in 0..n {
                let row = xs.row(i);
                let mut other = 0.0;
                for j in 0..p {
                    if j < grp.lo || j >= grp.hi {
                        other += row[j] * beta[j];
                    }
                }
                resid.push(y[i] - other);
            }
            let sub_opts = SolverOptions {
                init: InitStrategy::Custom(beta[grp.lo..grp.hi].to_vec()),
                ..sub_template.clone()
            };
            let sub = fit(&grp.xg, &resid, &grp.spec, &sub_opts, Some(&grp.expansion))?;
            total_inner += sub.iterations;
            inner_ok &= sub.converged;
            for (k, j) in (grp.lo..grp.hi).enumerate() {
                let change = (sub.beta[k] - beta[j]).abs() / beta[j].abs().max(1.0);
                sweep_change = sweep_change.max(change);
                beta[j] = sub.beta[k];
            }
            if let Some(t) = trace.as_mut() {
                t.push(objective(xs, y, &beta, &spec_s)?);
            }
        }
        if sweep_change < opts.tol {
            converged = inner_ok;
            break;
        }
    }

    // Full-problem quantities for the returned diagnostics.
    let mut d_full = opts.inflate * gamma1_fast(xs, ScalingChoice::Identity)?;
    if spec_s.needs_unit_scale() {
        d_full = d_full.max(1.0);
    }
    let gm = gram(xs);
    let xty = xs.tr_matvec(y);
    let mut u_final = vec![0.0; p];
    for j in 0..p {
        u_final[j] = xty[j] + d_full * beta[j] - dot(gm.row(j), &beta);
    }
    let final_objective = objective(xs, y, &beta, &spec_s)?;
    let beta_raw = beta.iter().zip(s).map(|(b, sj)| b / sj).collect();
    Ok(FitResult {
        beta: beta_raw,
        iterations: total_inner,
        converged,
        objective_trace: trace,
        final_objective,
        u_final,
    })
}
