//! Lambda-path sweeps with warm starts over a single shared
//! orthogonalization.

use oem_core::solver::standardize_columns;
use oem_core::{
    expand, fit, FitResult, InitStrategy, OemError, PenaltySpec, ScalingChoice, SolverOptions,
};

use crate::dataset::Dataset;
use crate::error::CliError;

/// A path request: the penalty acts as a template whose primary tuning value
/// is replaced by each entry of `lambdas`.
#[derive(Clone, Debug)]
pub struct PathRequest {
    /// Strictly descending, nonnegative.
    pub lambdas: Vec<f64>,
    /// Initialize each fit from the previous solution (default on).
    pub warm_start: bool,
    pub spec: PenaltySpec,
    pub opts: SolverOptions,
}

#[derive(Debug)]
pub struct PathStep {
    pub lambda: f64,
    pub outcome: Result<FitResult, OemError>,
}

#[derive(Debug)]
pub struct PathResult {
    pub gamma1: f64,
    pub d: f64,
    pub multiplicity_t: usize,
    pub steps: Vec<PathStep>,
}

fn validate_lambdas(lambdas: &[f64]) -> Result<(), CliError> {
    if lambdas.is_empty() {
        return Err(CliError::BadRequest("lambda path must be nonempty".into()));
    }
    for l in lambdas {
        if !l.is_finite() || *l < 0.0 {
            return Err(CliError::BadRequest(format!(
                "lambda path entries must be finite and nonnegative, got {l}"
            )));
        }
    }
    for w in lambdas.windows(2) {
        if w[1] >= w[0] {
            return Err(CliError::BadRequest(format!(
                "lambda path must be strictly descending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Fits one model per lambda. The orthogonalization of the fitting matrix is
/// computed once and shared across the sweep (for ungrouped fits); per-lambda
/// failures are recorded without aborting the remaining fits.
pub fn run_path(data: &Dataset, req: &PathRequest) -> Result<PathResult, CliError> {
    validate_lambdas(&req.lambdas)?;
    let fitting = if req.opts.standardize {
        standardize_columns(&data.x)
            .map_err(|e| match e {
                OemError::ZeroColumn(j) => CliError::ZeroColumn {
                    name: data.column_names[j].clone(),
                },
                other => CliError::Core(other),
            })?
            .0
    } else {
        data.x.clone()
    };
    let expansion = expand(&fitting, ScalingChoice::Identity, req.opts.inflate, false)
        .map_err(CliError::Core)?;
    // Grouped fits build their own per-group expansions.
    let shared = (req.opts.groups == 1).then_some(&expansion);

    let mut steps = Vec::with_capacity(req.lambdas.len());
    let mut warm: Option<Vec<f64>> = None;
    for &lambda in &req.lambdas {
        let outcome = req.spec.with_lambda(lambda).and_then(|spec| {
            let mut opts = req.opts.clone();
            if let Some(prev) = warm.as_ref().filter(|_| req.warm_start) {
                opts.init = InitStrategy::Custom(prev.clone());
            }
            fit(&data.x, &data.y, &spec, &opts, shared)
        });
        if let Ok(f) = &outcome {
            if req.warm_start {
                warm = Some(f.beta.clone());
            }
        }
        steps.push(PathStep { lambda, outcome });
    }
    Ok(PathResult {
        gamma1: expansion.gamma1,
        d: expansion.d_scalar,
        multiplicity_t: expansion.multiplicity_t,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use oem_core::Matrix;

    fn toy_dataset() -> Dataset {
        let x = Matrix::from_rows(&[
            vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0],
            vec![-1.0, 1.0, 1.0, -1.0, -1.0, 1.0],
            vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
            vec![1.0, 1.0, -1.0, 1.0, -1.0, -1.0],
        ])
        .unwrap();
        Dataset {
            x,
            y: vec![2.0, 1.0, -4.0, 1.5],
            column_names: ["A", "B", "C", "AB", "AC", "BC"].map(String::from).to_vec(),
            response_name: "y".into(),
            standardization: None,
        }
    }

    #[test]
    fn single_lambda_path_equals_direct_fit() {
        let d = toy_dataset();
        let opts = SolverOptions {
            standardize: false,
            ..Default::default()
        };
        let req = PathRequest {
            lambdas: vec![1.0],
            warm_start: true,
            spec: PenaltySpec::lasso(0.0).unwrap(),
            opts: opts.clone(),
        };
        let path = run_path(&d, &req).unwrap();
        let direct = fit(&d.x, &d.y, &PenaltySpec::lasso(1.0).unwrap(), &opts, None).unwrap();
        let step = path.steps[0].outcome.as_ref().unwrap();
        assert_eq!(step.beta, direct.beta);
        assert_eq!(path.gamma1, 8.0);
        assert_eq!(path.multiplicity_t, 3);
    }

    #[test]
    fn lambda_above_max_correlation_zeroes_everything() {
        let d = toy_dataset().standardize().unwrap();
        // max_j |x_j'y| on the standardized design is 6.5/2 = 3.25.
        let req = PathRequest {
            lambdas: vec![4.0],
            warm_start: true,
            spec: PenaltySpec::lasso(0.0).unwrap(),
            opts: SolverOptions {
                standardize: false,
                ..Default::default()
            },
        };
        let path = run_path(&d, &req).unwrap();
        let step = path.steps[0].outcome.as_ref().unwrap();
        assert!(step.beta.iter().all(|b| *b == 0.0));
        assert_eq!(step.iterations, 1);
    }

    #[test]
    fn descending_path_improves_on_zero_vector() {
        let d = toy_dataset();
        let req = PathRequest {
            lambdas: vec![3.0, 1.0, 0.25],
            warm_start: true,
            spec: PenaltySpec::lasso(0.0).unwrap(),
            opts: SolverOptions {
                standardize: false,
                ..Default::default()
            },
        };
        let path = run_path(&d, &req).unwrap();
        for step in &path.steps {
            let f = step.outcome.as_ref().unwrap();
            let spec = PenaltySpec::lasso(step.lambda).unwrap();
            let at_zero = oem_core::objective(&d.x, &d.y, &[0.0; 6], &spec).unwrap();
            assert!(f.final_objective <= at_zero + 1e-12);
        }
    }

    #[test]
    fn warm_start_off_matches_independent_fits() {
        let d = toy_dataset();
        let lambdas = vec![2.0, 1.0, 0.5];
        let opts = SolverOptions {
            standardize: false,
            tol: 1e-9,
            ..Default::default()
        };
        let cold = PathRequest {
            lambdas: lambdas.clone(),
            warm_start: false,
            spec: PenaltySpec::lasso(0.0).unwrap(),
            opts: opts.clone(),
        };
        let path = run_path(&d, &cold).unwrap();
        for step in &path.steps {
            let f = step.outcome.as_ref().unwrap();
            let direct = fit(
                &d.x,
                &d.y,
                &PenaltySpec::lasso(step.lambda).unwrap(),
                &opts,
                None,
            )
            .unwrap();
            for j in 0..6 {
                assert!((f.beta[j] - direct.beta[j]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn warm_start_agrees_with_cold_on_convex_path() {
        let d = toy_dataset();
        let lambdas = vec![2.0, 1.0, 0.5];
        let opts = SolverOptions {
            standardize: false,
            tol: 1e-10,
            ..Default::default()
        };
        let run = |warm| {
            let req = PathRequest {
                lambdas: lambdas.clone(),
                warm_start: warm,
                spec: PenaltySpec::lasso(0.0).unwrap(),
                opts: opts.clone(),
            };
            run_path(&d, &req).unwrap()
        };
        let warm = run(true);
        let cold = run(false);
        for (a, b) in warm.steps.iter().zip(&cold.steps) {
            let fa = a.outcome.as_ref().unwrap();
            let fb = b.outcome.as_ref().unwrap();
            for j in 0..6 {
                assert!(
                    (fa.beta[j] - fb.beta[j]).abs() <= 1e-8,
                    "lambda {}: warm and cold disagree at {j}",
                    a.lambda
                );
            }
        }
    }

    #[test]
    fn per_lambda_failures_do_not_abort_the_sweep() {
        // A garrote-infeasible start makes the traced objective fail at
        // every lambda; each step records its error and the sweep completes.
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let d = Dataset {
            x,
            y: vec![1.0, 2.0],
            column_names: ["a", "b"].map(String::from).to_vec(),
            response_name: "y".into(),
            standardization: None,
        };
        let req = PathRequest {
            lambdas: vec![1.0, 0.5],
            warm_start: true,
            spec: PenaltySpec::garrote(0.0, vec![1.0, 2.0]).unwrap(),
            opts: SolverOptions {
                standardize: false,
                record_trace: true,
                init: InitStrategy::Custom(vec![-1.0, -1.0]),
                ..Default::default()
            },
        };
        let path = run_path(&d, &req).unwrap();
        assert_eq!(path.steps.len(), 2);
        for step in &path.steps {
            assert!(
                matches!(step.outcome, Err(OemError::GarroteInfeasible { .. })),
                "lambda {}: {:?}",
                step.lambda,
                step.outcome
            );
        }
    }

    #[test]
    fn bad_paths_are_usage_errors() {
        let d = toy_dataset();
        for lambdas in [vec![], vec![1.0, 1.0], vec![0.5, 1.0], vec![1.0, -0.5]] {
            let req = PathRequest {
                lambdas,
                warm_start: true,
                spec: PenaltySpec::lasso(0.0).unwrap(),
                opts: SolverOptions::default(),
            };
            match run_path(&d, &req) {
                Err(CliError::BadRequest(_)) => {}
                other => panic!("expected BadRequest, got {other:?}"),
            }
        }
    }
}
