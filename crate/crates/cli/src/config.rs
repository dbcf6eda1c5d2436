//! Experiment configuration file.
//!
//! ```json
//! {
//!   "problem": {"name": "rotation", "params": {"n": 1}, "seed": 0},
//!   "x0": [1.0, 0.0],
//!   "methods": [
//!     {"alg": "forb", "step": 0.499},
//!     {"alg": "forb_linesearch", "step": {"linesearch": {"delta": 0.9, "sigma": 0.5, "lambda0": 1.0}}},
//!     {"alg": "relaxed_inertial", "step": 0.2, "alpha": 0.1, "beta": 0.9}
//!   ],
//!   "outputs": {"trace_path": "trace_{method}.csv", "report_path": "report.json", "iterate_stride": 1}
//! }
//! ```

use serde::Deserialize;
use serde_json::Value;

use monosplit::splitting::{LinesearchParams, RhoPolicy};
use monosplit::StepPlan;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    /// Starting point; defaults to the first unit vector.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub alg: String,
    pub step: StepSpec,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn one() -> f64 {
    1.0
}

fn default_iters() -> usize {
    1000
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Lambda(f64),
    Constant {
        lambda: f64,
        lambda_minus1: Option<f64>,
    },
    Schedule {
        schedule: Vec<f64>,
        lambda_minus1: Option<f64>,
    },
    Linesearch {
        linesearch: LinesearchSpec,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinesearchSpec {
    pub delta: f64,
    pub sigma: f64,
    pub lambda0: f64,
    #[serde(default)]
    pub lambda_minus1: Option<f64>,
    #[serde(default)]
    pub rho_policy: Option<RhoPolicy>,
    #[serde(default)]
    pub max_backtracks: Option<usize>,
}

impl StepSpec {
    pub fn plan(&self) -> StepPlan {
        match self {
            StepSpec::Lambda(l) => StepPlan::constant(*l),
            StepSpec::Constant {
                lambda,
                lambda_minus1,
            } => StepPlan::Constant {
                lambda: *lambda,
                lambda_minus1: lambda_minus1.unwrap_or(*lambda),
            },
            StepSpec::Schedule {
                schedule,
                lambda_minus1,
            } => match lambda_minus1 {
                Some(v) => StepPlan::Schedule {
                    lambdas: schedule.clone(),
                    lambda_minus1: *v,
                },
                None => StepPlan::schedule(schedule.clone()),
            },
            StepSpec::Linesearch { linesearch: s } => {
                let mut ls = LinesearchParams::new(s.delta, s.sigma, s.lambda0);
                if let Some(v) = s.lambda_minus1 {
                    ls = ls.with_lambda_minus1(v);
                }
                if let Some(p) = s.rho_policy {
                    ls = ls.with_rho_policy(p);
                }
                if let Some(n) = s.max_backtracks {
                    ls = ls.with_max_backtracks(n);
                }
                StepPlan::linesearch(ls)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    /// `{method}` expands to `<index>_<alg>`.
    pub trace_path: String,
    pub report_path: String,
    pub iterate_stride: usize,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            trace_path: "trace_{method}.csv".into(),
            report_path: "report.json".into(),
            iterate_stride: 1,
        }
    }
}
