#![allow(clippy::needless_range_loop)]

//! Penalized least squares by orthogonalizing EM.
//!
//! The solver embeds an arbitrary regression matrix into a taller matrix with
//! orthogonal columns (active orthogonalization), which turns each penalized
//! least-squares update into `p` independent one-dimensional problems with
//! closed-form solutions. The same iteration handles the lasso, elastic net,
//! SCAD, MCP, nonnegative garrote, Berhu and bridge penalties as well as
//! plain least squares, where it converges to the minimal-norm solution on
//! singular designs.
//!
//! Modules:
//! - [`linalg`]: dense matrix primitives, symmetric eigen, power iteration,
//!   SVD pseudoinverse.
//! - [`ortho`]: the active orthogonalization itself.
//! - [`penalty`]: scalar penalized-quadratic solvers and penalty values.
//! - [`solver`]: the OEM iteration, acceleration, and grouped variant.
//! - [`diagnostics`]: coherence checking, convergence rates, and seeded
//!   simulation harnesses.

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod ortho;
pub mod penalty;
pub mod solver;

pub use diagnostics::{
    check_coherence, rate_r0, rate_report, run_iteration_experiment, run_oracle_experiment,
    sample_equicorrelated_design, simulate_response, AliasedPair, CoherenceReport, IterationRow,
    OracleOutcome, RateReport, SimulationSpec,
};
pub use error::{OemError, Result};
pub use linalg::{
    gram, pinv_least_squares, power_method, sym_eigen, EigenResult, Matrix, PowerOutcome,
};
pub use ortho::{expand, gamma1_fast, OrthoExpansion, ScalingChoice};
pub use penalty::{penalty_value, solve_scalar, PenaltyKind, PenaltySpec};
pub use solver::{
    fit, fit_hybrid, objective, oem_step, standardize_columns, FitResult, InitStrategy,
    SolverOptions,
};
