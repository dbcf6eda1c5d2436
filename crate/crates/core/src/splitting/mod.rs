//! Splitting solvers for `0 ∈ (A + B)(x)` and `0 ∈ (A + B + C)(x)`.
//!
//! Every solver returns a [`SolverRun`]. Row `k` of the trace describes the
//! iterate `x_k` (row 0 is the starting point); its `lambda` is the step that
//! produced `x_k`, i.e. `λ_{k−1}`, with `λ_{−1}` on row 0. The natural
//! residual of row `k` is evaluated at that same step.

mod baselines;
mod bounds;
mod forb;

use std::fmt;
use std::str::FromStr;

use ndarray::Zip;
use serde::{Deserialize, Serialize};

use crate::error::{config, param, shape, Result};
use crate::linalg;
use crate::operators::{ForwardOracle, SplitInclusion, Vector};

pub use baselines::run_baseline;
pub use bounds::{bound_formula, max_stepsize, problem_bound};
pub use forb::{
    run_forb, run_forb3, run_forb_linesearch, run_relaxed_inertial, run_stochastic_forb,
};

/// Runs `method` on `p`. `parts` is read only by `stochastic_forb`.
pub fn run_method(
    method: Method,
    p: &SplitInclusion,
    parts: &[ForwardOracle],
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    match method {
        Method::Forb => run_forb(p, cfg),
        Method::ForbLinesearch => run_forb_linesearch(p, cfg),
        Method::RelaxedInertial => run_relaxed_inertial(p, cfg),
        Method::Forb3 => run_forb3(p, cfg),
        Method::StochasticForb => run_stochastic_forb(p, parts, cfg),
        _ => run_baseline(
            method.baseline().expect("remaining methods are baselines"),
            p,
            cfg,
        ),
    }
}

/// Iterate norm or residual above which a run is declared diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoPolicy {
    /// `ρ = 1/σ`: every search starts from a step larger than the last accepted one.
    AlwaysIncrease,
    /// `ρ = 1`.
    NeverIncrease,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinesearchParams {
    pub delta: f64,
    pub sigma: f64,
    pub rho_policy: RhoPolicy,
    pub lambda0: f64,
    /// `λ_{−1}`, multiplying `B(x_0) − B(x_{−1})` in the first step. Defaults to `lambda0`.
    pub lambda_minus1: f64,
    pub max_backtracks: usize,
}

impl LinesearchParams {
    pub fn new(delta: f64, sigma: f64, lambda0: f64) -> Self {
        Self {
            delta,
            sigma,
            rho_policy: RhoPolicy::AlwaysIncrease,
            lambda0,
            lambda_minus1: lambda0,
            max_backtracks: 60,
        }
    }

    pub fn with_rho_policy(mut self, policy: RhoPolicy) -> Self {
        self.rho_policy = policy;
        self
    }

    pub fn with_lambda_minus1(mut self, lambda: f64) -> Self {
        self.lambda_minus1 = lambda;
        self
    }

    pub fn with_max_backtracks(mut self, n: usize) -> Self {
        self.max_backtracks = n;
        self
    }

    pub fn rho(&self) -> f64 {
        match self.rho_policy {
            RhoPolicy::AlwaysIncrease => 1.0 / self.sigma,
            RhoPolicy::NeverIncrease => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepPlan {
    Constant {
        lambda: f64,
        lambda_minus1: f64,
    },
    /// `λ_k = lambdas[k]`; the last entry is held once the list is exhausted.
    Schedule {
        lambdas: Vec<f64>,
        lambda_minus1: f64,
    },
    Linesearch(LinesearchParams),
}

impl StepPlan {
    /// Constant step with `λ_{−1} = λ`.
    pub fn constant(lambda: f64) -> Self {
        StepPlan::Constant {
            lambda,
            lambda_minus1: lambda,
        }
    }

    pub fn schedule(lambdas: Vec<f64>) -> Self {
        let lambda_minus1 = lambdas.first().copied().unwrap_or(f64::NAN);
        StepPlan::Schedule {
            lambdas,
            lambda_minus1,
        }
    }

    pub fn linesearch(params: LinesearchParams) -> Self {
        StepPlan::Linesearch(params)
    }

    pub fn lambda_minus1(&self) -> f64 {
        match self {
            StepPlan::Constant { lambda_minus1, .. } | StepPlan::Schedule { lambda_minus1, .. } => {
                *lambda_minus1
            }
            StepPlan::Linesearch(p) => p.lambda_minus1,
        }
    }

    /// `λ_k` for the fixed plans.
    pub(crate) fn lambda_at(&self, k: usize) -> f64 {
        match self {
            StepPlan::Constant { lambda, .. } => *lambda,
            StepPlan::Schedule { lambdas, .. } => lambdas[k.min(lambdas.len() - 1)],
            StepPlan::Linesearch(p) => p.lambda0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match self {
            StepPlan::Constant {
                lambda,
                lambda_minus1,
            } => {
                if !positive(*lambda) || !positive(*lambda_minus1) {
                    return Err(param(format!(
                        "step sizes must be positive, got {lambda} and {lambda_minus1}"
                    )));
                }
            }
            StepPlan::Schedule {
                lambdas,
                lambda_minus1,
            } => {
                if lambdas.is_empty() {
                    return Err(param("step schedule is empty"));
                }
                if !lambdas.iter().all(|&v| positive(v)) || !positive(*lambda_minus1) {
                    return Err(param("schedule entries must be positive"));
                }
            }
            StepPlan::Linesearch(p) => {
                if !(p.delta > 0.0 && p.delta < 1.0) {
                    return Err(param(format!(
                        "linesearch delta must lie in (0, 1), got {}",
                        p.delta
                    )));
                }
                if !(p.sigma > 0.0 && p.sigma < 1.0) {
                    return Err(param(format!(
                        "linesearch sigma must lie in (0, 1), got {}",
                        p.sigma
                    )));
                }
                if !positive(p.lambda0) || !positive(p.lambda_minus1) {
                    return Err(param("linesearch initial steps must be positive"));
                }
                if p.max_backtracks == 0 {
                    return Err(param("max_backtracks must be at least 1"));
                }
            }
        }
        Ok(())
    }

    fn fixed(&self, method: Method) -> Result<()> {
        self.validate()?;
        if matches!(self, StepPlan::Linesearch(_)) {
            return Err(config(format!(
                "{method} takes a constant or scheduled step; use run_forb_linesearch"
            )));
        }
        Ok(())
    }

    fn constant_lambda(&self, method: Method) -> Result<(f64, f64)> {
        self.validate()?;
        match self {
            StepPlan::Constant {
                lambda,
                lambda_minus1,
            } => Ok((*lambda, *lambda_minus1)),
            _ => Err(config(format!("{method} requires a constant step"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub x0: Vector,
    /// Defaults to a copy of `x0`.
    pub x_minus1: Option<Vector>,
    pub step: StepPlan,
    pub max_iters: usize,
    /// Stop once the natural residual is at most this value; `0` disables the test.
    pub residual_tol: f64,
    /// Evaluate the residual every `residual_stride` iterations (and at the end).
    pub residual_stride: usize,
    /// Inertia `α ∈ [0, 1)` of the relaxed-inertial scheme.
    pub alpha: f64,
    /// Relaxation `β ∈ (0, 1]` of the relaxed-inertial scheme.
    pub beta: f64,
    /// Seed of the index sampler in the stochastic variant.
    pub seed: u64,
    /// Fill the trace's energy column (requires a reference solution).
    pub record_energy: bool,
    /// Keep every `s`-th iterate; `None` keeps none.
    pub iterate_stride: Option<usize>,
}

impl SolverConfig {
    pub fn new(x0: Vector, step: StepPlan) -> Self {
        Self {
            x0,
            x_minus1: None,
            step,
            max_iters: 1000,
            residual_tol: 1e-10,
            residual_stride: 1,
            alpha: 0.0,
            beta: 1.0,
            seed: 0,
            record_energy: false,
            iterate_stride: Some(1),
        }
    }

    pub fn with_x_minus1(mut self, x: Vector) -> Self {
        self.x_minus1 = Some(x);
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn with_residual_stride(mut self, stride: usize) -> Self {
        self.residual_stride = stride;
        self
    }

    pub fn with_inertia(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_energy(mut self, on: bool) -> Self {
        self.record_energy = on;
        self
    }

    pub fn with_iterate_stride(mut self, stride: Option<usize>) -> Self {
        self.iterate_stride = stride;
        self
    }

    pub fn x_minus1(&self) -> Vector {
        self.x_minus1.clone().unwrap_or_else(|| self.x0.clone())
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        if self.x0.len() != dim {
            return Err(shape(format!(
                "x0 has length {}, expected {dim}",
                self.x0.len()
            )));
        }
        if let Some(xm) = &self.x_minus1 {
            if xm.len() != dim {
                return Err(shape(format!(
                    "x_minus1 has length {}, expected {dim}",
                    xm.len()
                )));
            }
        }
        if !linalg::all_finite(self.x0.view())
            || !self
                .x_minus1
                .as_ref()
                .is_none_or(|v| linalg::all_finite(v.view()))
        {
            return Err(param("starting points must be finite"));
        }
        if self.max_iters == 0 {
            return Err(param("max_iters must be positive"));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(param("residual_tol must be nonnegative"));
        }
        if self.residual_stride == 0 || self.iterate_stride == Some(0) {
            return Err(param("strides must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(param(format!(
                "alpha must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(param(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Forb,
    ForbLinesearch,
    RelaxedInertial,
    Forb3,
    StochasticForb,
    Tseng,
    ForwardBackward,
    ProximalPoint,
    ProjectedReflectedGradient,
    Popov,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Forb,
        Method::ForbLinesearch,
        Method::RelaxedInertial,
        Method::Forb3,
        Method::StochasticForb,
        Method::Tseng,
        Method::ForwardBackward,
        Method::ProximalPoint,
        Method::ProjectedReflectedGradient,
        Method::Popov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Forb => "forb",
            Method::ForbLinesearch => "forb_linesearch",
            Method::RelaxedInertial => "relaxed_inertial",
            Method::Forb3 => "forb3",
            Method::StochasticForb => "stochastic_forb",
            Method::Tseng => "tseng",
            Method::ForwardBackward => "forward_backward",
            Method::ProximalPoint => "proximal_point",
            Method::ProjectedReflectedGradient => "projected_reflected_gradient",
            Method::Popov => "popov",
        }
    }

    pub fn baseline(self) -> Option<Baseline> {
        Baseline::ALL.into_iter().find(|b| Method::from(*b) == self)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| config(format!("unknown method `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Tseng,
    ForwardBackward,
    ProximalPoint,
    ProjectedReflectedGradient,
    Popov,
}

impl Baseline {
    pub const ALL: [Baseline; 5] = [
        Baseline::Tseng,
        Baseline::ForwardBackward,
        Baseline::ProximalPoint,
        Baseline::ProjectedReflectedGradient,
        Baseline::Popov,
    ];
}

impl From<Baseline> for Method {
    fn from(b: Baseline) -> Method {
        match b {
            Baseline::Tseng => Method::Tseng,
            Baseline::ForwardBackward => Method::ForwardBackward,
            Baseline::ProximalPoint => Method::ProximalPoint,
            Baseline::ProjectedReflectedGradient => Method::ProjectedReflectedGradient,
            Baseline::Popov => Method::Popov,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorClass {
    /// `B` monotone and `L`-Lipschitz.
    Lipschitz,
    /// `B` is `1/L`-cocoercive.
    Cocoercive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCalls {
    pub resolvent: u64,
    #[serde(rename = "forward_B")]
    pub forward_b: u64,
    #[serde(rename = "forward_Bi")]
    pub forward_bi: u64,
    #[serde(rename = "forward_C")]
    pub forward_c: u64,
}

impl OracleCalls {
    pub fn forward_total(&self) -> u64 {
        self.forward_b + self.forward_bi + self.forward_c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
    LinesearchFailed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::MaxIters => "max_iters",
            Status::Diverged => "diverged",
            Status::LinesearchFailed => "linesearch_failed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub lambda: f64,
    pub residual: Option<f64>,
    pub dist_to_solution: Option<f64>,
    pub energy: Option<f64>,
    /// Cumulative solver forward calls (B, B_i and C) after producing `x_k`.
    pub forward_calls: u64,
    pub resolvent_calls: u64,
}

#[derive(Clone, Debug)]
pub struct SolverRun {
    pub method: Method,
    pub trace: Vec<TraceRow>,
    /// `x_k` for every `k` divisible by the stride (plus the last iterate).
    pub iterates: Vec<Vector>,
    pub iterate_stride: Option<usize>,
    /// Secondary sequence: `z_k` (relaxed inertial), `y_k` (Tseng, Popov).
    pub aux_iterates: Vec<Vector>,
    /// Natural residuals of the secondary sequence, where one exists.
    pub aux_residuals: Vec<Option<f64>>,
    pub x_minus1: Vector,
    pub lambda_minus1: f64,
    /// Backtracks per outer iteration (linesearch only).
    pub backtracks: Vec<usize>,
    /// Sampled part index per iteration (stochastic variant only).
    pub sampled_indices: Vec<usize>,
    pub oracle_calls: OracleCalls,
    /// Calls made only to evaluate residuals and energies.
    pub diagnostic_calls: OracleCalls,
    pub status: Status,
    pub final_point: Vector,
    pub warnings: Vec<String>,
    pub step: StepPlan,
}

impl SolverRun {
    /// Number of iterations performed.
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }

    /// `λ_{k−1}` for each row, i.e. the step that produced `x_k`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.lambda).collect()
    }

    pub fn residuals(&self) -> Vec<Option<f64>> {
        self.trace.iter().map(|r| r.residual).collect()
    }

    pub fn energies(&self) -> Vec<Option<f64>> {
        self.trace.iter().map(|r| r.energy).collect()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.trace.last().and_then(|r| r.residual)
    }

    /// True when every iterate was stored.
    pub fn has_full_iterates(&self) -> bool {
        self.iterate_stride == Some(1) && self.iterates.len() == self.trace.len()
    }
}

/// `x − λ·b − λ'·(g − g')`. Every FoRB-type step goes through this so that
/// the reductions between methods hold bit for bit.
pub(crate) fn reflected_point(
    x: &Vector,
    b: &Vector,
    lambda: f64,
    lambda_prev: f64,
    g: &Vector,
    g_prev: &Vector,
) -> Vector {
    Zip::from(x)
        .and(b)
        .and(g)
        .and(g_prev)
        .map_collect(|&x, &b, &g, &gp| x - lambda * b - lambda_prev * (g - gp))
}

/// `p − λ·c`, in place.
pub(crate) fn subtract_scaled(p: &mut Vector, lambda: f64, c: &Vector) {
    p.zip_mut_with(c, |p, &c| *p -= lambda * c);
}

/// Bookkeeping shared by all solvers: trace rows, stored iterates, stopping.
pub(crate) struct Recorder<'a> {
    p: &'a SplitInclusion,
    cfg: &'a SolverConfig,
    method: Method,
    trace: Vec<TraceRow>,
    iterates: Vec<Vector>,
    aux_iterates: Vec<Vector>,
    aux_residuals: Vec<Option<f64>>,
    pub calls: OracleCalls,
    pub diag: OracleCalls,
    pub warnings: Vec<String>,
    pub backtracks: Vec<usize>,
    pub sampled_indices: Vec<usize>,
    last: Option<Vector>,
}

impl<'a> Recorder<'a> {
    pub fn new(p: &'a SplitInclusion, cfg: &'a SolverConfig, method: Method) -> Self {
        Self {
            p,
            cfg,
            method,
            trace: Vec::new(),
            iterates: Vec::new(),
            aux_iterates: Vec::new(),
            aux_residuals: Vec::new(),
            calls: OracleCalls::default(),
            diag: OracleCalls::default(),
            warnings: Vec::new(),
            backtracks: Vec::new(),
            sampled_indices: Vec::new(),
            last: None,
        }
    }

    fn stores(&self, k: usize) -> bool {
        self.cfg.iterate_stride.is_some_and(|s| k.is_multiple_of(s))
    }

    fn residual(&mut self, lambda: f64, x: &Vector) -> f64 {
        self.diag.resolvent += 1;
        self.diag.forward_b += 1;
        if self.p.c().is_some() {
            self.diag.forward_c += 1;
        }
        self.p.natural_residual(lambda, x.view())
    }

    /// Records `x_k` (produced with step `lambda`) and reports whether the run
    /// should stop.
    pub fn observe(&mut self, k: usize, lambda: f64, x: &Vector) -> Option<Status> {
        let finite = linalg::all_finite(x.view());
        let want_residual = k.is_multiple_of(self.cfg.residual_stride) || k == self.cfg.max_iters;
        let residual = (finite && want_residual).then(|| self.residual(lambda, x));
        let dist = self
            .p
            .reference_solution()
            .map(|s| linalg::dist(x.view(), s.view()));
        self.trace.push(TraceRow {
            k,
            lambda,
            residual,
            dist_to_solution: dist,
            energy: None,
            forward_calls: self.calls.forward_total(),
            resolvent_calls: self.calls.resolvent,
        });
        if self.stores(k) {
            self.iterates.push(x.clone());
        }
        self.last = Some(x.clone());
        let r = residual.unwrap_or(0.0);
        if !finite
            || !r.is_finite()
            || linalg::norm(x.view()) > DIVERGENCE_THRESHOLD
            || r > DIVERGENCE_THRESHOLD
        {
            return Some(Status::Diverged);
        }
        if self.cfg.residual_tol > 0.0 && residual.is_some_and(|r| r <= self.cfg.residual_tol) {
            return Some(Status::Converged);
        }
        None
    }

    /// Records the secondary iterate belonging to row `k`.
    pub fn observe_aux(&mut self, k: usize, lambda: f64, z: &Vector, with_residual: bool) {
        if self.stores(k) {
            self.aux_iterates.push(z.clone());
        }
        let r = (with_residual && linalg::all_finite(z.view())).then(|| self.residual(lambda, z));
        self.aux_residuals.push(r);
    }

    pub fn set_energy(&mut self, k: usize, value: f64) {
        if let Some(row) = self.trace.get_mut(k) {
            row.energy = Some(value);
        }
    }

    pub fn energy_wanted(&self) -> bool {
        self.cfg.record_energy && self.p.reference_solution().is_some()
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn finish(mut self, status: Status, lambda_minus1: f64) -> SolverRun {
        let last_k = self.trace.len() - 1;
        let x = self.last.clone().expect("at least one row is recorded");
        if self.trace[last_k].residual.is_none() && linalg::all_finite(x.view()) {
            let lam = self.trace[last_k].lambda;
            self.trace[last_k].residual = Some(self.residual(lam, &x));
        }
        if self.cfg.iterate_stride.is_some() && !self.stores(last_k) {
            self.iterates.push(x.clone());
        }
        SolverRun {
            method: self.method,
            trace: self.trace,
            iterates: self.iterates,
            iterate_stride: self.cfg.iterate_stride,
            aux_iterates: self.aux_iterates,
            aux_residuals: self.aux_residuals,
            x_minus1: self.cfg.x_minus1(),
            lambda_minus1,
            backtracks: self.backtracks,
            sampled_indices: self.sampled_indices,
            oracle_calls: self.calls,
            diagnostic_calls: self.diag,
            status,
            final_point: x,
            warnings: self.warnings,
            step: self.cfg.step.clone(),
        }
    }
}
