//! Python bindings. The compiled module is `monosplit._monosplit`; the
//! `monosplit` package re-exports it.

use std::collections::HashMap;

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

use monosplit::diagnostics::{self, RateMetric};
use monosplit::operators::GALLERY_NAMES;
use monosplit::problems::{self, ProblemInstance, PROBLEM_NAMES};
use monosplit::splitting::{bound_formula, LinesearchParams, OperatorClass, RhoPolicy};
use monosplit::{Constants, Method, SolverConfig, SolverRun, StepPlan, Vector};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse().map_err(value_err)
}

/// A generated test problem with its reference solution.
#[pyclass(module = "monosplit._monosplit", frozen)]
struct Problem {
    inner: ProblemInstance,
}

#[pymethods]
impl Problem {
    /// Builds a gallery problem. `params` is a JSON object string.
    #[new]
    #[pyo3(signature = (name, params=None, seed=0))]
    fn new(name: &str, params: Option<&str>, seed: u64) -> PyResult<Self> {
        let params = match params {
            Some(text) => serde_json::from_str(text).map_err(value_err)?,
            None => serde_json::Value::Null,
        };
        let inner = problems::make_problem(name, &params, seed).map_err(value_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn reference_solution(&self) -> Option<Vec<f64>> {
        self.inner
            .inclusion
            .reference_solution()
            .map(|x| x.to_vec())
    }

    /// Declared constants (`l`, `l1`, `l2`, `m`), omitting unknown ones.
    #[getter]
    fn constants(&self) -> HashMap<&'static str, f64> {
        let c = self.inner.inclusion.constants();
        [("l", c.l), ("l1", c.l1), ("l2", c.l2), ("m", c.m)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k, v)))
            .collect()
    }

    fn natural_residual(&self, x: Vec<f64>, lam: f64) -> PyResult<f64> {
        if x.len() != self.inner.dim() {
            return Err(value_err(format!(
                "expected a point of length {}",
                self.inner.dim()
            )));
        }
        Ok(self
            .inner
            .inclusion
            .natural_residual(lam, Vector::from(x).view()))
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(name={:?}, dim={})",
            self.inner.name,
            self.inner.dim()
        )
    }
}

/// Result of a solver run.
#[pyclass(module = "monosplit._monosplit", frozen)]
struct Run {
    inner: SolverRun,
}

#[pymethods]
impl Run {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.name()
    }

    #[getter]
    fn status(&self) -> String {
        self.inner.status.to_string()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn final_point(&self) -> Vec<f64> {
        self.inner.final_point.to_vec()
    }

    #[getter]
    fn final_residual(&self) -> Option<f64> {
        self.inner.final_residual()
    }

    /// Stored iterates, one list per kept iteration.
    #[getter]
    fn iterates(&self) -> Vec<Vec<f64>> {
        self.inner.iterates.iter().map(|x| x.to_vec()).collect()
    }

    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambdas()
    }

    #[getter]
    fn residuals(&self) -> Vec<Option<f64>> {
        self.inner.residuals()
    }

    #[getter]
    fn dist_to_solution(&self) -> Vec<Option<f64>> {
        self.inner
            .trace
            .iter()
            .map(|r| r.dist_to_solution)
            .collect()
    }

    #[getter]
    fn backtracks(&self) -> Vec<usize> {
        self.inner.backtracks.clone()
    }

    #[getter]
    fn sampled_indices(&self) -> Vec<usize> {
        self.inner.sampled_indices.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    #[getter]
    fn oracle_calls(&self) -> HashMap<&'static str, u64> {
        let c = &self.inner.oracle_calls;
        HashMap::from([
            ("resolvent", c.resolvent),
            ("forward_B", c.forward_b),
            ("forward_Bi", c.forward_bi),
            ("forward_C", c.forward_c),
        ])
    }

    fn __repr__(&self) -> String {
        format!(
            "Run(method={:?}, status={:?}, iterations={})",
            self.inner.method.name(),
            self.inner.status.to_string(),
            self.inner.iterations()
        )
    }
}

fn step_plan(step: &Bound<'_, PyAny>, lambda_minus1: Option<f64>) -> PyResult<StepPlan> {
    if let Ok(lam) = step.extract::<f64>() {
        return Ok(StepPlan::Constant {
            lambda: lam,
            lambda_minus1: lambda_minus1.unwrap_or(lam),
        });
    }
    if let Ok(lambdas) = step.extract::<Vec<f64>>() {
        return Ok(match lambda_minus1 {
            Some(v) => StepPlan::Schedule {
                lambdas,
                lambda_minus1: v,
            },
            None => StepPlan::schedule(lambdas),
        });
    }
    if let Ok(mut spec) = step.extract::<HashMap<String, f64>>() {
        let mut take = |k: &str| {
            spec.remove(k)
                .ok_or_else(|| PyKeyError::new_err(format!("linesearch needs `{k}`")))
        };
        let mut ls = LinesearchParams::new(take("delta")?, take("sigma")?, take("lambda0")?);
        if let Some(v) = spec.remove("lambda_minus1").or(lambda_minus1) {
            ls = ls.with_lambda_minus1(v);
        }
        if let Some(v) = spec.remove("max_backtracks") {
            ls = ls.with_max_backtracks(v as usize);
        }
        if let Some(v) = spec.remove("never_increase") {
            if v != 0.0 {
                ls = ls.with_rho_policy(RhoPolicy::NeverIncrease);
            }
        }
        if let Some(k) = spec.keys().next() {
            return Err(PyKeyError::new_err(format!("unknown linesearch key `{k}`")));
        }
        return Ok(StepPlan::linesearch(ls));
    }
    Err(value_err(
        "step must be a float, a list of floats or a linesearch dict",
    ))
}

/// Runs `method` on `problem` from `x0`.
///
/// `step` is a constant step, a schedule (list, last value held) or a
/// linesearch dict with `delta`, `sigma`, `lambda0` and optionally
/// `lambda_minus1`, `max_backtracks`, `never_increase`.
#[pyfunction]
#[pyo3(signature = (problem, method, x0, step, *, x_minus1=None, lambda_minus1=None, max_iters=1000, tol=1e-10, alpha=0.0, beta=1.0, seed=0, iterate_stride=1))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &Problem,
    method: &str,
    x0: Vec<f64>,
    step: &Bound<'_, PyAny>,
    x_minus1: Option<Vec<f64>>,
    lambda_minus1: Option<f64>,
    max_iters: usize,
    tol: f64,
    alpha: f64,
    beta: f64,
    seed: u64,
    iterate_stride: usize,
) -> PyResult<Run> {
    let method = parse_method(method)?;
    let mut cfg = SolverConfig::new(Vector::from(x0), step_plan(step, lambda_minus1)?)
        .with_max_iters(max_iters)
        .with_tol(tol)
        .with_inertia(alpha, beta)
        .with_seed(seed)
        .with_energy(true)
        .with_iterate_stride((iterate_stride > 0).then_some(iterate_stride));
    if let Some(xm) = x_minus1 {
        cfg = cfg.with_x_minus1(Vector::from(xm));
    }
    let inst = &problem.inner;
    let run = py
        .detach(|| monosplit::run_method(method, &inst.inclusion, &inst.parts, &cfg))
        .map_err(value_err)?;
    Ok(Run { inner: run })
}

/// Supremum of admissible step sizes for `method` given the constants.
#[pyfunction]
#[pyo3(signature = (method, *, l=None, l1=None, l2=None, alpha=0.0, beta=1.0, cocoercive=false))]
fn max_stepsize(
    method: &str,
    l: Option<f64>,
    l1: Option<f64>,
    l2: Option<f64>,
    alpha: f64,
    beta: f64,
    cocoercive: bool,
) -> PyResult<f64> {
    let constants = Constants {
        l,
        l1,
        l2,
        ..Constants::default()
    };
    let class = if cocoercive {
        OperatorClass::Cocoercive
    } else {
        OperatorClass::Lipschitz
    };
    monosplit::max_stepsize(parse_method(method)?, &constants, alpha, beta, class)
        .map_err(value_err)
}

/// `(rho, r_squared)` of a log-linear fit over the default window.
#[pyfunction]
#[pyo3(signature = (run, metric="dist_to_solution"))]
fn estimate_rate(run: &Run, metric: &str) -> PyResult<(f64, f64)> {
    let metric = match metric {
        "dist_to_solution" => RateMetric::DistToSolution,
        "natural_residual" => RateMetric::NaturalResidual,
        other => return Err(value_err(format!("unknown metric `{other}`"))),
    };
    let est = diagnostics::estimate_rate(&run.inner, metric, None).map_err(value_err)?;
    Ok((est.rho, est.r_squared))
}

/// Number of energy-decrease violations along a FoRB run.
#[pyfunction]
fn energy_violations(run: &Run, problem: &Problem) -> PyResult<usize> {
    diagnostics::energy_forb(&run.inner, &problem.inner.inclusion)
        .map(|r| r.violations)
        .map_err(value_err)
}

/// Problems, methods with their bound formulas, and prox names.
#[pyfunction]
fn catalog() -> HashMap<&'static str, Vec<String>> {
    HashMap::from([
        (
            "problems",
            PROBLEM_NAMES.iter().map(|s| s.to_string()).collect(),
        ),
        (
            "methods",
            Method::ALL
                .iter()
                .map(|m| format!("{} bound: {}", m.name(), bound_formula(*m)))
                .collect(),
        ),
        (
            "prox",
            GALLERY_NAMES.iter().map(|s| s.to_string()).collect(),
        ),
    ])
}

#[pymodule]
fn _monosplit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Run>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(max_stepsize, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rate, m)?)?;
    m.add_function(wrap_pyfunction!(energy_violations, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    Ok(())
}
