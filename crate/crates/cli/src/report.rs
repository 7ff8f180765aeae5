//! Human-diffable key:value report rendering and long-format experiment
//! tables.

use std::fmt::Write as _;

use oem_core::penalty::PenaltyKind;
use oem_core::{
    CoherenceReport, FitResult, InitStrategy, IterationRow, OracleOutcome, OrthoExpansion,
    PenaltySpec, SolverOptions,
};

use crate::dataset::Dataset;
use crate::path::PathResult;

fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}: {value}");
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn penalty_lines(out: &mut String, spec: &PenaltySpec) {
    push_kv(out, "penalty", spec.name());
    match spec.kind() {
        PenaltyKind::None => {}
        PenaltyKind::Lasso { lambda } => push_kv(out, "lambda", lambda),
        PenaltyKind::ElasticNet { lambda1, lambda2 } => {
            push_kv(out, "lambda", lambda1);
            push_kv(out, "lambda2", lambda2);
        }
        PenaltyKind::Scad { lambda, a } | PenaltyKind::Mcp { lambda, a } => {
            push_kv(out, "lambda", lambda);
            push_kv(out, "a", a);
        }
        PenaltyKind::Garrote { lambda, base } => {
            push_kv(out, "lambda", lambda);
            push_kv(out, "garrote_base", join(base));
        }
        PenaltyKind::Berhu { lambda, delta } => {
            push_kv(out, "lambda", lambda);
            push_kv(out, "delta", delta);
        }
        PenaltyKind::Bridge { lambda, exponent } => {
            push_kv(out, "lambda", lambda);
            push_kv(out, "a", exponent);
        }
    }
}

fn options_lines(out: &mut String, opts: &SolverOptions) {
    push_kv(out, "standardize", opts.standardize);
    push_kv(out, "tol", opts.tol);
    push_kv(out, "max_iter", opts.max_iter);
    let init = match &opts.init {
        InitStrategy::Zeros => "zeros".to_string(),
        InitStrategy::Ols => "ols".to_string(),
        InitStrategy::Custom(v) => join(v),
    };
    push_kv(out, "init", init);
    push_kv(out, "accelerate", opts.accelerate);
    push_kv(out, "groups", opts.groups);
    push_kv(out, "inflate", opts.inflate);
}

fn beta_block(out: &mut String, names: &[String], beta: &[f64]) {
    out.push_str("beta:\n");
    for (name, b) in names.iter().zip(beta) {
        let _ = writeln!(out, "  {name} {b}");
    }
}

fn fit_block(out: &mut String, names: &[String], lambda: f64, fit: &FitResult, trace: bool) {
    push_kv(out, "lambda", lambda);
    push_kv(out, "converged", fit.converged);
    push_kv(out, "iterations", fit.iterations);
    push_kv(out, "objective", fit.final_objective);
    beta_block(out, names, &fit.beta);
    if trace {
        if let Some(t) = &fit.objective_trace {
            out.push_str("objective_trace:\n");
            for v in t {
                let _ = writeln!(out, "  {v}");
            }
        }
    }
}

/// One report document for a fit or path run.
pub fn render_run_report(
    command: &str,
    data_path: &str,
    dataset: &Dataset,
    spec: &PenaltySpec,
    opts: &SolverOptions,
    result: &PathResult,
    trace: bool,
) -> String {
    let mut out = String::new();
    push_kv(&mut out, "oem", command);
    push_kv(&mut out, "data", data_path);
    push_kv(&mut out, "n", dataset.n());
    push_kv(&mut out, "p", dataset.p());
    push_kv(&mut out, "response", &dataset.response_name);
    penalty_lines(&mut out, spec);
    options_lines(&mut out, opts);
    push_kv(&mut out, "gamma1", result.gamma1);
    push_kv(&mut out, "d", result.d);
    push_kv(&mut out, "t", result.multiplicity_t);
    for step in &result.steps {
        out.push('\n');
        match &step.outcome {
            Ok(fit) => fit_block(&mut out, &dataset.column_names, step.lambda, fit, trace),
            Err(e) => {
                push_kv(&mut out, "lambda", step.lambda);
                push_kv(&mut out, "error", e);
            }
        }
    }
    out
}

/// Report for the orthogonalize command.
pub fn render_expansion_report(
    data_path: &str,
    names: &[String],
    n: usize,
    scaling: &str,
    expansion: &OrthoExpansion,
    show_delta: bool,
) -> String {
    let mut out = String::new();
    push_kv(&mut out, "oem", "orthogonalize");
    push_kv(&mut out, "data", data_path);
    push_kv(&mut out, "n", n);
    push_kv(&mut out, "p", expansion.p());
    push_kv(&mut out, "scaling", scaling);
    push_kv(&mut out, "gamma1", expansion.gamma1);
    push_kv(&mut out, "d", expansion.d_scalar);
    push_kv(&mut out, "t", expansion.multiplicity_t);
    if let Some(delta) = &expansion.delta {
        push_kv(&mut out, "rows_added", delta.rows());
    }
    out.push_str("d_diag:\n");
    for (name, d) in names.iter().zip(&expansion.d_diag) {
        let _ = writeln!(out, "  {name} {d}");
    }
    if show_delta {
        if let Some(delta) = &expansion.delta {
            out.push_str("delta:\n");
            for i in 0..delta.rows() {
                let _ = writeln!(out, "  {}", join(delta.row(i)));
            }
        }
    }
    out
}

/// Report for the coherence command.
pub fn render_coherence_report(
    data_path: &str,
    names: &[String],
    beta: &[f64],
    report: &CoherenceReport,
    tol: f64,
) -> String {
    let mut out = String::new();
    push_kv(&mut out, "oem", "coherence");
    push_kv(&mut out, "data", data_path);
    push_kv(&mut out, "tol", tol);
    beta_block(&mut out, names, beta);
    push_kv(&mut out, "aliased_pairs", report.aliased_pairs.len());
    for pair in &report.aliased_pairs {
        let rel = if pair.sign > 0 { "=" } else { "=-" };
        let _ = writeln!(out, "  {} {rel} {}", names[pair.i], names[pair.j]);
    }
    push_kv(&mut out, "violations", report.violations.len());
    for pair in &report.violations {
        let rel = if pair.sign > 0 { "=" } else { "=-" };
        let _ = writeln!(out, "  {} {rel} {}", names[pair.i], names[pair.j]);
    }
    push_kv(&mut out, "coherent", report.coherent);
    out
}

/// Long-format table: experiment,n,metric,value.
pub fn iteration_csv(rows: &[IterationRow]) -> String {
    let mut out = String::from("experiment,n,metric,value\n");
    for r in rows {
        let _ = writeln!(out, "iterations,{},mean_r0,{}", r.n, r.mean_r0);
        let _ = writeln!(out, "iterations,{},mean_iter_ols,{}", r.n, r.mean_iter_ols);
        let _ = writeln!(
            out,
            "iterations,{},mean_iter_lasso,{}",
            r.n, r.mean_iter_lasso
        );
    }
    out
}

/// Long-format table: experiment,n,metric,value.
pub fn oracle_csv(rows: &[(usize, OracleOutcome)]) -> String {
    let mut out = String::from("experiment,n,metric,value\n");
    for (n, o) in rows {
        let _ = writeln!(out, "oracle,{n},recovery_rate,{}", o.support_recovery_rate);
        let _ = writeln!(out, "oracle,{n},rmse_fit,{}", o.estimation_rmse_on_support);
        let _ = writeln!(out, "oracle,{n},rmse_oracle,{}", o.oracle_rmse_on_support);
    }
    out
}
