//! Forward-reflected-backward splitting for monotone inclusions
//! `0 ∈ A(x) + B(x)` and `0 ∈ A(x) + B(x) + C(x)`.
//!
//! `A` is accessed through its resolvent, `B` and `C` through forward
//! evaluations. The [`splitting`] module holds the solvers, [`problems`] a set
//! of seeded test instances with reference solutions, and [`diagnostics`] the
//! energy and rate checks applied to solver traces.

// Negated comparisons are how NaN inputs get rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod splitting;

pub use error::{Error, Result};
pub use operators::{
    Constants, ForwardOracle, ResolventKind, ResolventOracle, SplitInclusion, Vector,
};
pub use splitting::{
    max_stepsize, problem_bound, run_baseline, run_forb, run_forb3, run_forb_linesearch,
    run_method, run_relaxed_inertial, run_stochastic_forb, Baseline, Method, SolverConfig,
    SolverRun, Status, StepPlan,
};
