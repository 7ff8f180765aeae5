//! `oem`: penalized least squares from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oem_cli::dataset::{load_dataset, load_matrix, Dataset};
use oem_cli::error::CliError;
use oem_cli::path::{run_path, PathRequest};
use oem_cli::report;
use oem_core::{
    check_coherence, expand, pinv_least_squares, run_iteration_experiment, run_oracle_experiment,
    InitStrategy, PenaltySpec, ScalingChoice, SimulationSpec, SolverOptions,
};

#[derive(Parser)]
#[command(
    name = "oem",
    version,
    about = "Penalized least squares via orthogonalizing EM",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one penalized least-squares model
    Fit(FitArgs),
    /// Sweep a strictly descending lambda path with warm starts
    Path(PathArgs),
    /// Expand a matrix into an orthogonal complete matrix
    Orthogonalize(OrthogonalizeArgs),
    /// Fit a model and check grouping coherence of the solution
    Coherence(CoherenceArgs),
    /// Iteration-count experiment over growing sample sizes
    BenchIterations(BenchIterationsArgs),
    /// Support-recovery experiment for the sparse nonconvex penalties
    BenchOracle(BenchOracleArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Comma-separated input with a header row
    #[arg(long)]
    data: PathBuf,
    /// Name of the response column
    #[arg(long)]
    response: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PenaltyName {
    None,
    Lasso,
    ElasticNet,
    Scad,
    Mcp,
    Garrote,
    Berhu,
    Bridge,
}

#[derive(Args)]
struct ModelArgs {
    /// Penalty kind
    #[arg(long, value_enum, default_value_t = PenaltyName::None)]
    penalty: PenaltyName,
    /// Primary tuning value (lambda; lambda1 for the elastic net)
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Ridge part of the elastic net
    #[arg(long, default_value_t = 0.0)]
    lambda2: f64,
    /// Shape parameter: scad a (default 3.7), mcp a (default 2.5),
    /// bridge exponent (default 0.5)
    #[arg(long)]
    a: Option<f64>,
    /// Berhu knee
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Garrote baseline: "ols" or comma-separated values
    #[arg(long, default_value = "ols", allow_hyphen_values = true)]
    garrote_base: String,
    /// Per-coefficient relative-change stopping threshold
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Start point: "zeros", "ols", or comma-separated values
    #[arg(long, default_value = "zeros", allow_hyphen_values = true)]
    init: String,
    /// Two-step extrapolation with a descent safeguard
    #[arg(long)]
    accelerate: bool,
    /// Coordinate groups; 1 is the plain algorithm
    #[arg(long, default_value_t = 1)]
    groups: usize,
    /// Fit on the raw scale instead of unit-norm columns
    #[arg(long)]
    no_standardize: bool,
    /// Multiplier on the top eigenvalue of the scaled Gram
    #[arg(long, default_value_t = 1.0)]
    inflate: f64,
    /// Include the objective trace in the report
    #[arg(long, alias = "record-trace")]
    trace: bool,
    /// Exit with status 3 when any fit fails to converge or errors
    #[arg(long)]
    strict: bool,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct PathArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Strictly descending lambda values, comma-separated
    #[arg(long)]
    lambdas: String,
    /// Fit each lambda from the default init instead of the previous solution
    #[arg(long)]
    no_warm_start: bool,
}

#[derive(Args)]
struct OrthogonalizeArgs {
    /// Comma-separated input with a header row
    #[arg(long)]
    data: PathBuf,
    /// Optional column to exclude (e.g. a response)
    #[arg(long)]
    response: Option<String>,
    /// Diagonal scaling of the columns
    #[arg(long, value_enum, default_value_t = ScalingName::Identity)]
    scaling: ScalingName,
    /// Multiplier on the top eigenvalue
    #[arg(long, default_value_t = 1.0)]
    inflate: f64,
    /// Materialize and print the augmentation rows
    #[arg(long)]
    show_delta: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ScalingName {
    Identity,
    ColumnNorm,
}

#[derive(Args)]
struct CoherenceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Tolerance for the signed coefficient equalities
    #[arg(long, default_value_t = 1e-8)]
    coherence_tol: f64,
    /// Check these coefficients instead of fitting
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
}

#[derive(Args)]
struct BenchIterationsArgs {
    #[arg(long, default_value_t = 10)]
    p: usize,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Sample sizes, comma-separated
    #[arg(long, default_value = "100,400,1600,6400")]
    n_grid: String,
    #[arg(long, default_value_t = 20)]
    replications: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// True coefficients: "decaying" or comma-separated values
    #[arg(long, default_value = "decaying", allow_hyphen_values = true)]
    beta_true: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchOracleArgs {
    /// scad or mcp
    #[arg(long, value_enum, default_value_t = PenaltyName::Scad)]
    penalty: PenaltyName,
    /// Shape parameter (default 3.7 for scad, 2.5 for mcp)
    #[arg(long)]
    a: Option<f64>,
    /// Tuning grows as n^exponent; must lie in (0.5, 1)
    #[arg(long, default_value_t = 0.75)]
    lambda_exponent: f64,
    #[arg(long, default_value_t = 10)]
    p: usize,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value = "200,800,3200")]
    n_grid: String,
    #[arg(long, default_value_t = 200)]
    replications: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// True coefficients: "sparse" or comma-separated values
    #[arg(long, default_value = "sparse", allow_hyphen_values = true)]
    beta_true: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::BadRequest(format!("cannot parse {what} entry '{s}'")))
        })
        .collect()
}

fn parse_usize_list(text: &str, what: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| CliError::BadRequest(format!("cannot parse {what} entry '{s}'")))
        })
        .collect()
}

fn build_penalty(model: &ModelArgs, data: &Dataset) -> Result<PenaltySpec, CliError> {
    let spec = match model.penalty {
        PenaltyName::None => PenaltySpec::none(),
        PenaltyName::Lasso => PenaltySpec::lasso(model.lambda)?,
        PenaltyName::ElasticNet => PenaltySpec::elastic_net(model.lambda, model.lambda2)?,
        PenaltyName::Scad => PenaltySpec::scad(model.lambda, model.a.unwrap_or(3.7))?,
        PenaltyName::Mcp => PenaltySpec::mcp(model.lambda, model.a.unwrap_or(2.5))?,
        PenaltyName::Garrote => {
            let base = if model.garrote_base == "ols" {
                pinv_least_squares(&data.x, &data.y)?
            } else {
                parse_f64_list(&model.garrote_base, "--garrote-base")?
            };
            PenaltySpec::garrote(model.lambda, base)?
        }
        PenaltyName::Berhu => PenaltySpec::berhu(model.lambda, model.delta)?,
        PenaltyName::Bridge => PenaltySpec::bridge(model.lambda, model.a.unwrap_or(0.5))?,
    };
    Ok(spec)
}

fn build_options(model: &ModelArgs) -> Result<SolverOptions, CliError> {
    let init = match model.init.as_str() {
        "zeros" => InitStrategy::Zeros,
        "ols" => InitStrategy::Ols,
        list => InitStrategy::Custom(parse_f64_list(list, "--init")?),
    };
    Ok(SolverOptions {
        tol: model.tol,
        max_iter: model.max_iter,
        init,
        accelerate: model.accelerate,
        groups: model.groups,
        record_trace: model.trace,
        standardize: !model.no_standardize,
        inflate: model.inflate,
    })
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_fit_like(
    command: &str,
    data: &DataArgs,
    model: &ModelArgs,
    lambdas: Vec<f64>,
    warm_start: bool,
) -> Result<(), CliError> {
    let dataset = load_dataset(&data.data, &data.response)?;
    let spec = build_penalty(model, &dataset)?;
    let opts = build_options(model)?;
    let req = PathRequest {
        lambdas,
        warm_start,
        spec: spec.clone(),
        opts: opts.clone(),
    };
    let result = run_path(&dataset, &req)?;
    let text = report::render_run_report(
        command,
        &data.data.display().to_string(),
        &dataset,
        &spec,
        &opts,
        &result,
        model.trace,
    );
    emit(model.out.as_ref(), &text)?;
    if model.strict {
        for step in &result.steps {
            match &step.outcome {
                Ok(f) if !f.converged => {
                    return Err(CliError::NotConverged {
                        lambda: step.lambda,
                    })
                }
                Err(e) => return Err(CliError::Core(e.clone())),
                _ => {}
            }
        }
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    run_fit_like(
        "fit",
        &args.data,
        &args.model,
        vec![args.model.lambda],
        true,
    )
}

fn cmd_path(args: &PathArgs) -> Result<(), CliError> {
    let lambdas = parse_f64_list(&args.lambdas, "--lambdas")?;
    run_fit_like(
        "path",
        &args.data,
        &args.model,
        lambdas,
        !args.no_warm_start,
    )
}

fn cmd_orthogonalize(args: &OrthogonalizeArgs) -> Result<(), CliError> {
    let (x, names) = load_matrix(&args.data, args.response.as_deref())?;
    let (scaling, scaling_name) = match args.scaling {
        ScalingName::Identity => (ScalingChoice::Identity, "identity"),
        ScalingName::ColumnNorm => (ScalingChoice::ColumnNorm, "column-norm"),
    };
    let expansion = expand(&x, scaling, args.inflate, true).map_err(|e| match e {
        oem_core::OemError::ZeroColumn(j) => CliError::ZeroColumn {
            name: names[j].clone(),
        },
        other => CliError::Core(other),
    })?;
    let text = report::render_expansion_report(
        &args.data.display().to_string(),
        &names,
        x.rows(),
        scaling_name,
        &expansion,
        args.show_delta,
    );
    emit(args.out.as_ref(), &text)
}

fn cmd_coherence(args: &CoherenceArgs) -> Result<(), CliError> {
    let dataset = load_dataset(&args.data.data, &args.data.response)?;
    let beta = match &args.beta {
        Some(list) => {
            let v = parse_f64_list(list, "--beta")?;
            if v.len() != dataset.p() {
                return Err(CliError::BadRequest(format!(
                    "--beta has {} entries, design has {} columns",
                    v.len(),
                    dataset.p()
                )));
            }
            v
        }
        None => {
            let spec = build_penalty(&args.model, &dataset)?;
            let opts = build_options(&args.model)?;
            let f = oem_core::fit(&dataset.x, &dataset.y, &spec, &opts, None)?;
            if args.model.strict && !f.converged {
                return Err(CliError::NotConverged {
                    lambda: args.model.lambda,
                });
            }
            f.beta
        }
    };
    let report_data = check_coherence(&dataset.x, &beta, args.coherence_tol);
    let text = report::render_coherence_report(
        &args.data.data.display().to_string(),
        &dataset.column_names,
        &beta,
        &report_data,
        args.coherence_tol,
    );
    emit(args.model.out.as_ref(), &text)
}

fn cmd_bench_iterations(args: &BenchIterationsArgs) -> Result<(), CliError> {
    let beta_true = if args.beta_true == "decaying" {
        SimulationSpec::decaying_beta(args.p)
    } else {
        parse_f64_list(&args.beta_true, "--beta-true")?
    };
    let n_grid = parse_usize_list(&args.n_grid, "--n-grid")?;
    let first_n = *n_grid.first().ok_or_else(|| {
        CliError::BadRequest("--n-grid must hold at least one sample size".into())
    })?;
    let spec = SimulationSpec {
        n: first_n,
        p: args.p,
        rho: args.rho,
        sigma: args.sigma,
        beta_true,
        replications: args.replications,
        seed: args.seed,
    };
    let rows = run_iteration_experiment(&spec, args.lambda, &n_grid)?;
    emit(args.out.as_ref(), &report::iteration_csv(&rows))
}

fn cmd_bench_oracle(args: &BenchOracleArgs) -> Result<(), CliError> {
    let penalty = match args.penalty {
        PenaltyName::Scad => PenaltySpec::scad(0.0, args.a.unwrap_or(3.7))?,
        PenaltyName::Mcp => PenaltySpec::mcp(0.0, args.a.unwrap_or(2.5))?,
        other => {
            return Err(CliError::BadRequest(format!(
                "bench-oracle expects scad or mcp, got {other:?}"
            )))
        }
    };
    let beta_true = if args.beta_true == "sparse" {
        SimulationSpec::sparse_beta(args.p)
    } else {
        parse_f64_list(&args.beta_true, "--beta-true")?
    };
    let n_grid = parse_usize_list(&args.n_grid, "--n-grid")?;
    if n_grid.is_empty() {
        return Err(CliError::BadRequest(
            "--n-grid must hold at least one sample size".into(),
        ));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for n in n_grid {
        let spec = SimulationSpec {
            n,
            p: args.p,
            rho: args.rho,
            sigma: args.sigma,
            beta_true: beta_true.clone(),
            replications: args.replications,
            seed: args.seed,
        };
        let outcome = run_oracle_experiment(&spec, &penalty, args.lambda_exponent)?;
        rows.push((n, outcome));
    }
    emit(args.out.as_ref(), &report::oracle_csv(&rows))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Path(args) => cmd_path(args),
        Command::Orthogonalize(args) => cmd_orthogonalize(args),
        Command::Coherence(args) => cmd_coherence(args),
        Command::BenchIterations(args) => cmd_bench_iterations(args),
        Command::BenchOracle(args) => cmd_bench_oracle(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
