//! Admissible step sizes.
//!
//! | method                         | class      | supremum of admissible `λ`                                           |
//! |--------------------------------|------------|-----------------------------------------------------------------------|
//! | `forb`, `stochastic_forb`      | any        | `1/(2L)`                                                              |
//! | `relaxed_inertial`             | lipschitz  | `min{(2−β−αβ−2α)/(2L), (1−α−αβ)/(βL)}`                                 |
//! | `relaxed_inertial`             | cocoercive | `min{(2−β−αβ+2α)/(2L), (1−α+αβ)/(βL)}`, needs `α < (2−β)/(2+β)`       |
//! | `forb3`                        | any        | `2/(4L1+L2)`                                                          |
//! | `tseng`                        | any        | `1/L`                                                                 |
//! | `forward_backward`             | cocoercive | `2/L` (zero for merely Lipschitz `B`)                                 |
//! | `projected_reflected_gradient`, `popov` | any | `1/(2L)`                                                         |
//! | `proximal_point`, `forb_linesearch` | any   | unbounded                                                             |
//!
//! In the cocoercive class `B` is `1/L`-cocoercive. Infeasible `(α, β)`
//! pairs give `0`.

use super::{Method, OperatorClass};
use crate::error::{config, param, Result};
use crate::operators::{Constants, ForwardOracle, SplitInclusion};

fn need(value: Option<f64>, name: &str, method: Method) -> Result<f64> {
    match value {
        Some(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(config(format!(
            "{method}: constant {name} must be nonnegative, got {v}"
        ))),
        None => Err(config(format!("{method}: constant {name} is required"))),
    }
}

/// Supremum of admissible step sizes (exclusive).
pub fn max_stepsize(
    method: Method,
    constants: &Constants,
    alpha: f64,
    beta: f64,
    class: OperatorClass,
) -> Result<f64> {
    match method {
        Method::Forb
        | Method::StochasticForb
        | Method::Popov
        | Method::ProjectedReflectedGradient => Ok(1.0 / (2.0 * need(constants.l, "L", method)?)),
        Method::RelaxedInertial => {
            if !(0.0..1.0).contains(&alpha) || !(beta > 0.0 && beta <= 1.0) {
                return Err(param(format!(
                    "need alpha in [0, 1) and beta in (0, 1], got ({alpha}, {beta})"
                )));
            }
            let l = need(constants.l, "L", method)?;
            let bound = match class {
                OperatorClass::Lipschitz => f64::min(
                    (2.0 - beta - alpha * beta - 2.0 * alpha) / (2.0 * l),
                    (1.0 - alpha - alpha * beta) / (beta * l),
                ),
                OperatorClass::Cocoercive => {
                    if alpha >= (2.0 - beta) / (2.0 + beta) {
                        return Ok(0.0);
                    }
                    f64::min(
                        (2.0 - beta - alpha * beta + 2.0 * alpha) / (2.0 * l),
                        (1.0 - alpha + alpha * beta) / (beta * l),
                    )
                }
            };
            Ok(bound.max(0.0))
        }
        Method::Forb3 => {
            let l1 = need(constants.l1, "L1", method)?;
            let l2 = need(constants.l2, "L2", method)?;
            Ok(2.0 / (4.0 * l1 + l2))
        }
        Method::Tseng => Ok(1.0 / need(constants.l, "L", method)?),
        Method::ForwardBackward => {
            let l = need(constants.l, "L", method)?;
            Ok(match class {
                OperatorClass::Cocoercive => 2.0 / l,
                OperatorClass::Lipschitz => 0.0,
            })
        }
        Method::ProximalPoint | Method::ForbLinesearch => Ok(f64::INFINITY),
    }
}

/// [`max_stepsize`] for `method` on a concrete problem, resolving the class
/// and constants the same way the solvers do for their step-size warnings:
///
/// - `relaxed_inertial` and `forward_backward` (two-operator problems) use the
///   cocoercive class when `B` declares a modulus `β`, with `L = 1/β`;
/// - `tseng` falls back to the Lipschitz constant declared on `B`;
/// - `stochastic_forb` uses the largest Lipschitz constant among `parts`.
pub fn problem_bound(
    method: Method,
    p: &SplitInclusion,
    parts: &[ForwardOracle],
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let mut constants = *p.constants();
    let mut class = OperatorClass::Lipschitz;
    match method {
        Method::RelaxedInertial | Method::ForwardBackward => {
            if let Some(coco) = p.b().cocoercivity.filter(|&c| c > 0.0 && p.c().is_none()) {
                constants.l = Some(1.0 / coco);
                class = OperatorClass::Cocoercive;
            }
        }
        Method::Tseng => constants.l = constants.l.or(p.b().lipschitz),
        Method::StochasticForb => {
            let parts_l = parts
                .iter()
                .map(|b| b.lipschitz)
                .try_fold(0.0_f64, |acc, l| l.map(|l| acc.max(l)));
            constants.l = parts_l.or(constants.l);
        }
        _ => {}
    }
    max_stepsize(method, &constants, alpha, beta, class)
}

/// Human-readable form of [`max_stepsize`] for each method.
pub fn bound_formula(method: Method) -> &'static str {
    match method {
        Method::Forb => "1/(2L)",
        Method::ForbLinesearch => "none (adaptive, delta in (0,1))",
        Method::RelaxedInertial => {
            "lipschitz: min{(2-b-a*b-2a)/(2L), (1-a-a*b)/(b*L)}; cocoercive: min{(2-b-a*b+2a)/(2L), (1-a+a*b)/(b*L)}, a < (2-b)/(2+b)"
        }
        Method::Forb3 => "2/(4*L1+L2)",
        Method::StochasticForb => "1/(2L), L common to all parts",
        Method::Tseng => "1/L",
        Method::ForwardBackward => "2/L (B 1/L-cocoercive)",
        Method::ProximalPoint => "none",
        Method::ProjectedReflectedGradient => "1/(2L) (B linear)",
        Method::Popov => "1/(2L)",
    }
}
