//! Shared fixtures and independent oracles for the integration suites.
//!
//! The scalar minimization oracle here deliberately re-derives every penalty
//! term on its own and minimizes by brute-force grid search plus local
//! golden-section refinement; it never calls the closed forms it is used to
//! check.

#![allow(dead_code)]

use oem_core::penalty::PenaltyKind;
use oem_core::{Matrix, PenaltySpec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 4x3 skewed design whose scaled Gram has spectrum {4, 4, 1}.
pub fn example3_x() -> Matrix {
    Matrix::from_rows(&[
        vec![0.0, 0.0, 1.5],
        vec![-4.0 / 3.0, -2.0 / 3.0, 1.0 / 6.0],
        vec![2.0 / 3.0, 4.0 / 3.0, 1.0 / 6.0],
        vec![-2.0 / 3.0, 2.0 / 3.0, -7.0 / 6.0],
    ])
    .unwrap()
}

/// Two-level design in three factors with all two-way interactions; the
/// interaction columns are fully aliased (negated) with the main effects.
pub fn design_x() -> Matrix {
    Matrix::from_rows(&[
        vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0],
        vec![-1.0, 1.0, 1.0, -1.0, -1.0, 1.0],
        vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
        vec![1.0, 1.0, -1.0, 1.0, -1.0, -1.0],
    ])
    .unwrap()
}

pub fn design_y() -> Vec<f64> {
    vec![2.0, 1.0, -4.0, 1.5]
}

/// The printed 3x6 augmentation for `design_x`.
pub fn printed_delta() -> Matrix {
    Matrix::from_rows(&[
        vec![0.0, -2.0, 0.0, 0.0, -2.0, 0.0],
        vec![0.0, 0.0, -2.0, -2.0, 0.0, 0.0],
        vec![-2.0, 0.0, 0.0, 0.0, 0.0, -2.0],
    ])
    .unwrap()
}

pub fn rand_matrix<R: Rng>(rng: &mut R, n: usize, p: usize, scale: f64) -> Matrix {
    let data: Vec<f64> = (0..n * p)
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    Matrix::new(n, p, data).unwrap()
}

pub fn rand_vec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Independent penalty term `P_j(b)`, +inf outside the feasible set.
pub fn oracle_penalty_term(b: f64, spec: &PenaltySpec, j: usize) -> f64 {
    match spec.kind() {
        PenaltyKind::None => 0.0,
        PenaltyKind::Lasso { lambda } => 2.0 * lambda * b.abs(),
        PenaltyKind::ElasticNet { lambda1, lambda2 } => 2.0 * lambda1 * b.abs() + lambda2 * b * b,
        PenaltyKind::Scad { lambda, a } => {
            let t = b.abs();
            let p = if t <= *lambda {
                lambda * t
            } else if t <= a * lambda {
                lambda * lambda
                    + (a * lambda * (t - lambda) - 0.5 * (t * t - lambda * lambda)) / (a - 1.0)
            } else {
                0.5 * (a + 1.0) * lambda * lambda
            };
            2.0 * p
        }
        PenaltyKind::Mcp { lambda, a } => {
            let t = b.abs();
            let p = if t <= a * lambda {
                lambda * t - 0.5 * t * t / a
            } else {
                0.5 * a * lambda * lambda
            };
            2.0 * p
        }
        PenaltyKind::Garrote { lambda, base } => {
            let bj = base[j];
            if b * bj < 0.0 {
                f64::INFINITY
            } else {
                2.0 * lambda * b / bj
            }
        }
        PenaltyKind::Berhu { lambda, delta } => {
            let t = b.abs();
            if t < *delta {
                2.0 * lambda * t
            } else {
                lambda * (b * b + delta * delta) / delta
            }
        }
        PenaltyKind::Bridge { lambda, exponent } => lambda * b.abs().powf(*exponent),
    }
}

pub fn oracle_scalar_objective(d: f64, u: f64, b: f64, spec: &PenaltySpec, j: usize) -> f64 {
    d * b * b - 2.0 * u * b + oracle_penalty_term(b, spec, j)
}

fn golden_refine(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..120 {
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
    0.5 * (lo + hi)
}

/// Brute-force minimizer of the scalar objective: dense grid over
/// `[-R, R]` with `R = |u|/d + 1`, golden-section refinement around the best
/// grid point, and an explicit comparison against 0.
pub fn oracle_solve_scalar(d: f64, u: f64, spec: &PenaltySpec, j: usize) -> f64 {
    let radius = u.abs() / d + 1.0;
    let steps = 4000;
    let h = 2.0 * radius / steps as f64;
    let f = |b: f64| oracle_scalar_objective(d, u, b, spec, j);
    let mut best_b = -radius;
    let mut best_f = f(best_b);
    for k in 1..=steps {
        let b = -radius + k as f64 * h;
        let fb = f(b);
        if fb < best_f {
            best_f = fb;
            best_b = b;
        }
    }
    let refined = golden_refine(&f, best_b - h, best_b + h);
    let mut out = refined;
    let mut out_f = f(refined);
    if best_f < out_f {
        out = best_b;
        out_f = best_f;
    }
    // Sparser tie-break, matching the solver's convention.
    if f(0.0) <= out_f {
        out = 0.0;
    }
    out
}

/// Max-norm of `X'X beta - X'Y`, for normal-equation checks.
pub fn normal_equation_gap(x: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    let g = oem_core::gram(x);
    let xty = x.tr_matvec(y);
    let lhs = g.matvec(beta);
    lhs.iter()
        .zip(&xty)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
}

/// Subgradient optimality gap for the elastic-net objective
/// `||y - X b||^2 + 2 l1 |b|_1 + l2 ||b||^2`; 0 at an exact minimizer.
pub fn kkt_gap(x: &Matrix, y: &[f64], beta: &[f64], lambda1: f64, lambda2: f64) -> f64 {
    let fitted = x.matvec(beta);
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let corr = x.tr_matvec(&resid);
    let mut worst = 0.0_f64;
    for j in 0..beta.len() {
        // Stationarity of coordinate j: x_j'r - l2 b_j must be l1*sign(b_j),
        // or lie within [-l1, l1] when b_j = 0.
        let s = corr[j] - lambda2 * beta[j];
        let gap = if beta[j] > 0.0 {
            (s - lambda1).abs()
        } else if beta[j] < 0.0 {
            (s + lambda1).abs()
        } else {
            (s.abs() - lambda1).max(0.0)
        };
        worst = worst.max(gap);
    }
    worst
}
