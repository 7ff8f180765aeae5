//! Scalar penalized-quadratic solvers.
//!
//! Each OEM iteration reduces to `p` independent problems of the form
//! `min_b  d b^2 - 2 u b + P_j(b; lambda)`. For every supported penalty the
//! minimizer has a closed form except the bridge, which is handled by a
//! one-dimensional search. All closed forms are computed as
//! `sign(u) * f(|u|)` so exactly negated inputs produce exactly negated
//! outputs.

use crate::error::{OemError, Result};

/// Tagged penalty descriptor. Parameter domains are enforced by the
/// constructors, so a held value is always valid.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltySpec {
    kind: PenaltyKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PenaltyKind {
    /// No penalty: the plain iterative least-squares step.
    None,
    /// `P_j(b) = 2 lambda |b|`.
    Lasso { lambda: f64 },
    /// `P_j(b) = 2 lambda1 |b| + lambda2 b^2`.
    ElasticNet { lambda1: f64, lambda2: f64 },
    /// Smoothly clipped absolute deviation, `a > 2`.
    Scad { lambda: f64, a: f64 },
    /// Minimax concave penalty, `a > 1`.
    Mcp { lambda: f64, a: f64 },
    /// Nonnegative garrote; `base` holds the least-squares coefficients and
    /// the feasible set is `b * base_j >= 0`.
    Garrote { lambda: f64, base: Vec<f64> },
    /// Mixed L1/L2 penalty, linear below `delta` and quadratic above.
    Berhu { lambda: f64, delta: f64 },
    /// `P_j(b) = lambda |b|^a` with exponent `a` in (0, 1).
    Bridge { lambda: f64, exponent: f64 },
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(OemError::InvalidPenalty(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )))
    }
}

impl PenaltySpec {
    pub fn none() -> Self {
        Self {
            kind: PenaltyKind::None,
        }
    }

    pub fn lasso(lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            kind: PenaltyKind::Lasso { lambda },
        })
    }

    pub fn elastic_net(lambda1: f64, lambda2: f64) -> Result<Self> {
        check_lambda(lambda1)?;
        check_lambda(lambda2)?;
        Ok(Self {
            kind: PenaltyKind::ElasticNet { lambda1, lambda2 },
        })
    }

    pub fn scad(lambda: f64, a: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !a.is_finite() || a <= 2.0 {
            return Err(OemError::InvalidPenalty(format!(
                "scad requires a > 2, got {a}"
            )));
        }
        Ok(Self {
            kind: PenaltyKind::Scad { lambda, a },
        })
    }

    pub fn mcp(lambda: f64, a: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !a.is_finite() || a <= 1.0 {
            return Err(OemError::InvalidPenalty(format!(
                "mcp requires a > 1, got {a}"
            )));
        }
        Ok(Self {
            kind: PenaltyKind::Mcp { lambda, a },
        })
    }

    pub fn garrote(lambda: f64, base: Vec<f64>) -> Result<Self> {
        check_lambda(lambda)?;
        if base.is_empty() {
            return Err(OemError::InvalidPenalty(
                "garrote requires baseline coefficients".into(),
            ));
        }
        for (j, b) in base.iter().enumerate() {
            if *b == 0.0 || !b.is_finite() {
                return Err(OemError::InvalidPenalty(format!(
                    "garrote baseline coefficient {j} must be nonzero and finite, got {b}"
                )));
            }
        }
        Ok(Self {
            kind: PenaltyKind::Garrote { lambda, base },
        })
    }

    pub fn berhu(lambda: f64, delta: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !delta.is_finite() || delta <= 0.0 {
            return Err(OemError::InvalidPenalty(format!(
                "berhu requires delta > 0, got {delta}"
            )));
        }
        Ok(Self {
            kind: PenaltyKind::Berhu { lambda, delta },
        })
    }

    pub fn bridge(lambda: f64, exponent: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if !exponent.is_finite() || exponent <= 0.0 || exponent >= 1.0 {
            return Err(OemError::InvalidPenalty(format!(
                "bridge exponent must lie in (0, 1), got {exponent}"
            )));
        }
        Ok(Self {
            kind: PenaltyKind::Bridge { lambda, exponent },
        })
    }

    pub fn kind(&self) -> &PenaltyKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PenaltyKind::None => "none",
            PenaltyKind::Lasso { .. } => "lasso",
            PenaltyKind::ElasticNet { .. } => "elastic-net",
            PenaltyKind::Scad { .. } => "scad",
            PenaltyKind::Mcp { .. } => "mcp",
            PenaltyKind::Garrote { .. } => "garrote",
            PenaltyKind::Berhu { .. } => "berhu",
            PenaltyKind::Bridge { .. } => "bridge",
        }
    }

    /// True for SCAD and MCP, whose closed forms require `d_j >= 1`.
    pub fn needs_unit_scale(&self) -> bool {
        matches!(
            self.kind,
            PenaltyKind::Scad { .. } | PenaltyKind::Mcp { .. }
        )
    }

    /// Same penalty with the primary tuning value replaced (`lambda1` for the
    /// elastic net). For `none` the value is ignored.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        match &self.kind {
            PenaltyKind::None => Ok(Self::none()),
            PenaltyKind::Lasso { .. } => Self::lasso(lambda),
            PenaltyKind::ElasticNet { lambda2, .. } => Self::elastic_net(lambda, *lambda2),
            PenaltyKind::Scad { a, .. } => Self::scad(lambda, *a),
            PenaltyKind::Mcp { a, .. } => Self::mcp(lambda, *a),
            PenaltyKind::Garrote { base, .. } => Self::garrote(lambda, base.clone()),
            PenaltyKind::Berhu { delta, .. } => Self::berhu(lambda, *delta),
            PenaltyKind::Bridge { exponent, .. } => Self::bridge(lambda, *exponent),
        }
    }

    /// Rescales coefficient-space data (the garrote baseline) by `s`, as
    /// needed when the design columns are divided by `s`.
    pub(crate) fn rescaled(&self, s: &[f64]) -> Result<Self> {
        match &self.kind {
            PenaltyKind::Garrote { lambda, base } => {
                if base.len() != s.len() {
                    return Err(OemError::DimensionMismatch(format!(
                        "garrote baseline has length {}, design has {} columns",
                        base.len(),
                        s.len()
                    )));
                }
                let scaled = base.iter().zip(s).map(|(b, sj)| b * sj).collect();
                Self::garrote(*lambda, scaled)
            }
            _ => Ok(self.clone()),
        }
    }

    /// Restriction to a coordinate range, for grouped solving.
    pub(crate) fn restricted(&self, lo: usize, hi: usize) -> Result<Self> {
        match &self.kind {
            PenaltyKind::Garrote { lambda, base } => Self::garrote(*lambda, base[lo..hi].to_vec()),
            _ => Ok(self.clone()),
        }
    }
}

#[inline]
fn soft(au: f64, lambda: f64) -> f64 {
    (au - lambda).max(0.0)
}

/// Minimizer of `d b^2 - 2 u b + P_j(b; lambda)` for coordinate `j`.
///
/// `d` must be positive, and at least 1 for SCAD and MCP (their closed forms
/// assume the standardized problem); violations are errors, never clamped.
pub fn solve_scalar(d: f64, u: f64, j: usize, spec: &PenaltySpec) -> Result<f64> {
    if !d.is_finite() || d <= 0.0 {
        return Err(OemError::InvalidParameter(format!(
            "solve_scalar requires d > 0, got {d}"
        )));
    }
    if !u.is_finite() {
        return Err(OemError::InvalidParameter(format!(
            "solve_scalar requires finite u, got {u}"
        )));
    }
    if spec.needs_unit_scale() && d < 1.0 {
        return Err(OemError::InvalidParameter(format!(
            "{} update requires d >= 1, got {d}",
            spec.name()
        )));
    }
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    let au = u.abs();
    let b = match &spec.kind {
        PenaltyKind::None => u / d,
        PenaltyKind::Lasso { lambda } => sign * (soft(au, *lambda) / d),
        PenaltyKind::ElasticNet { lambda1, lambda2 } => sign * (soft(au, *lambda1) / (d + lambda2)),
        PenaltyKind::Scad { lambda, a } => {
            if au <= (d + 1.0) * lambda {
                sign * (soft(au, *lambda) / d)
            } else if au <= a * lambda * d {
                sign * (((a - 1.0) * au - a * lambda) / ((a - 1.0) * d - 1.0))
            } else {
                u / d
            }
        }
        PenaltyKind::Mcp { lambda, a } => {
            if au <= a * lambda * d {
                sign * (a * soft(au, *lambda) / (a * d - 1.0))
            } else {
                u / d
            }
        }
        PenaltyKind::Garrote { lambda, base } => {
            let bj = *base.get(j).ok_or_else(|| {
                OemError::DimensionMismatch(format!(
                    "coordinate {j} out of range for garrote baseline of length {}",
                    base.len()
                ))
            })?;
            ((u * bj - lambda) / (d * bj * bj)).max(0.0) * bj
        }
        PenaltyKind::Berhu { lambda, delta } => {
            if au < lambda + d * delta {
                sign * (soft(au, *lambda) / d)
            } else {
                u * delta / (lambda + d * delta)
            }
        }
        PenaltyKind::Bridge { lambda, exponent } => bridge_minimizer(d, u, *lambda, *exponent),
    };
    Ok(b)
}

/// Bridge scalar minimizer by one-dimensional search.
///
/// For `u != 0` the minimizer is 0 or shares the sign of `u`, with magnitude
/// at most `|u|/d`. On `t >= t_lo`, where `t_lo` is the unique minimum of the
/// derivative `h(t) = 2 d t + a lambda t^(a-1) - 2|u|`, the objective is
/// unimodal; golden-section search on `[t_lo, |u|/d]` locates the interior
/// candidate, which is then compared against 0. Exact ties return 0.
fn bridge_minimizer(d: f64, u: f64, lambda: f64, a: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return u / d;
    }
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    let au = u.abs();
    let hi = au / d;
    let obj = |t: f64| d * t * t - 2.0 * au * t + lambda * t.powf(a);
    // Derivative of the one-sided objective is smallest at t_lo.
    let t_lo = (a * lambda * (1.0 - a) / (2.0 * d)).powf(1.0 / (2.0 - a));
    if t_lo >= hi {
        return 0.0;
    }
    let t = golden_section_min(&obj, t_lo, hi);
    if obj(t) < 0.0 {
        // Strictly better than the objective value 0 attained at b = 0.
        sign * t
    } else {
        0.0
    }
}

fn golden_section_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let tol = 1e-13 * hi.abs().max(1.0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    // Bracket endpoints can be the true minimum when it sits on the boundary.
    let cands = [lo, mid, hi];
    let mut best = cands[0];
    let mut fb = f(best);
    for &c in &cands[1..] {
        let fc = f(c);
        if fc < fb {
            best = c;
            fb = fc;
        }
    }
    best
}

/// SCAD penalty primitive `P_lambda(theta)` for `theta >= 0` (without the
/// factor 2 used in the objective).
fn scad_primitive(theta: f64, lambda: f64, a: f64) -> f64 {
    if theta <= lambda {
        lambda * theta
    } else if theta <= a * lambda {
        -(theta * theta - 2.0 * a * lambda * theta + lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        (a + 1.0) * lambda * lambda / 2.0
    }
}

/// MCP penalty primitive `P_lambda(theta)` for `theta >= 0`.
fn mcp_primitive(theta: f64, lambda: f64, a: f64) -> f64 {
    if theta <= a * lambda {
        lambda * theta - theta * theta / (2.0 * a)
    } else {
        a * lambda * lambda / 2.0
    }
}

/// Total penalty contribution `P(beta; lambda)` to the objective
/// `||Y - X beta||^2 + P(beta; lambda)`.
pub fn penalty_value(beta: &[f64], spec: &PenaltySpec) -> Result<f64> {
    let mut total = 0.0;
    match &spec.kind {
        PenaltyKind::None => {}
        PenaltyKind::Lasso { lambda } => {
            total = 2.0 * lambda * beta.iter().map(|b| b.abs()).sum::<f64>();
        }
        PenaltyKind::ElasticNet { lambda1, lambda2 } => {
            for b in beta {
                total += 2.0 * lambda1 * b.abs() + lambda2 * b * b;
            }
        }
        PenaltyKind::Scad { lambda, a } => {
            for b in beta {
                total += 2.0 * scad_primitive(b.abs(), *lambda, *a);
            }
        }
        PenaltyKind::Mcp { lambda, a } => {
            for b in beta {
                total += 2.0 * mcp_primitive(b.abs(), *lambda, *a);
            }
        }
        PenaltyKind::Garrote { lambda, base } => {
            if base.len() != beta.len() {
                return Err(OemError::DimensionMismatch(format!(
                    "garrote baseline has length {}, beta has length {}",
                    base.len(),
                    beta.len()
                )));
            }
            for (j, (b, bj)) in beta.iter().zip(base).enumerate() {
                if b * bj < 0.0 {
                    return Err(OemError::GarroteInfeasible { index: j });
                }
                total += 2.0 * lambda * b / bj;
            }
        }
        PenaltyKind::Berhu { lambda, delta } => {
            for b in beta {
                let ab = b.abs();
                total += if ab < *delta {
                    2.0 * lambda * ab
                } else {
                    2.0 * lambda * (b * b + delta * delta) / (2.0 * delta)
                };
            }
        }
        PenaltyKind::Bridge { lambda, exponent } => {
            for b in beta {
                total += lambda * b.abs().powf(*exponent);
            }
        }
    }
    Ok(total)
}
