//! Energy inequalities, empirical rates and the fixed-point reformulation.

use std::ops::RangeInclusive;

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::linalg;
use crate::operators::{SplitInclusion, Vector};
use crate::splitting::{run_forb, Method, OperatorClass, SolverConfig, SolverRun, StepPlan};

/// Default tolerance on inequality slacks.
pub const SLACK_TOL: f64 = 1e-9;

/// Iterations skipped at the start of a default rate window.
pub const RATE_WARMUP: usize = 10;

/// `Φ_k = ‖x_k − x‖² + 2λ_{k−1}⟨B(x_k) − B(x_{k−1}), x − x_k⟩ + ½‖x_k − x_{k−1}‖²`.
pub fn lyapunov(
    x: &Vector,
    x_prev: &Vector,
    bx: &Vector,
    b_prev: &Vector,
    lambda_prev: f64,
    solution: &Vector,
) -> f64 {
    let to_sol = solution - x;
    let db = bx - b_prev;
    let step = x - x_prev;
    to_sol.dot(&to_sol) + 2.0 * lambda_prev * db.dot(&to_sol) + 0.5 * step.dot(&step)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEntry {
    pub k: usize,
    pub phi: f64,
    /// Slack of the decrease inequality from `k` to `k + 1` (absent on the last iterate).
    pub slack: Option<f64>,
    pub decrease_ok: bool,
    pub lower_bound_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub per_iteration: Vec<EnergyEntry>,
    pub epsilon_used: f64,
    /// Contraction factor `α` (strongly monotone check only).
    pub contraction: Option<f64>,
    pub violations: usize,
    pub lower_bound_violations: usize,
    pub envelope_violations: usize,
}

struct EnergyInputs<'a> {
    xs: Vec<&'a Vector>,
    bs: Vec<Vector>,
    x_minus1: &'a Vector,
    b_minus1: Vector,
    solution: &'a Vector,
}

fn energy_inputs<'a>(run: &'a SolverRun, p: &'a SplitInclusion) -> Result<EnergyInputs<'a>> {
    let solution = p
        .reference_solution()
        .ok_or_else(|| Error::DiagnosticUnavailable("problem has no reference solution".into()))?;
    if !run.has_full_iterates() {
        return Err(Error::DiagnosticUnavailable(
            "energy checks need every iterate (iterate_stride = 1)".into(),
        ));
    }
    if !matches!(run.method, Method::Forb | Method::ForbLinesearch) {
        return Err(Error::DiagnosticUnavailable(format!(
            "no FoRB energy for {}",
            run.method
        )));
    }
    let xs: Vec<&Vector> = run.iterates.iter().collect();
    let bs = xs.iter().map(|x| p.b().apply(x.view())).collect();
    Ok(EnergyInputs {
        xs,
        bs,
        x_minus1: &run.x_minus1,
        b_minus1: p.b().apply(run.x_minus1.view()),
        solution,
    })
}

impl EnergyInputs<'_> {
    fn prev(&self, k: usize) -> (&Vector, &Vector) {
        if k == 0 {
            (self.x_minus1, &self.b_minus1)
        } else {
            (self.xs[k - 1], &self.bs[k - 1])
        }
    }

    fn phi(&self, k: usize, lambda_prev: f64) -> f64 {
        let (xp, bp) = self.prev(k);
        lyapunov(self.xs[k], xp, &self.bs[k], bp, lambda_prev, self.solution)
    }

    fn step_sq(&self, k: usize) -> f64 {
        let d = linalg::dist(self.xs[k + 1].view(), self.xs[k].view());
        d * d
    }

    fn dist_sq(&self, k: usize) -> f64 {
        let d = linalg::dist(self.xs[k].view(), self.solution.view());
        d * d
    }
}

/// Checks `Φ_{k+1} + ε‖x_{k+1} − x_k‖² ≤ Φ_k` along a FoRB run, and the lower
/// bound `Φ_k ≥ ½‖x_k − x‖²`.
///
/// For fixed steps `ε = ½ − L·max(λ_{k−1}, λ_k)` at each iteration (the
/// reported value is the smallest); for linesearch runs `ε = (1 − δ)/2`.
pub fn energy_forb(run: &SolverRun, p: &SplitInclusion) -> Result<EnergyReport> {
    energy_forb_with_tol(run, p, SLACK_TOL)
}

pub fn energy_forb_with_tol(run: &SolverRun, p: &SplitInclusion, tol: f64) -> Result<EnergyReport> {
    let inputs = energy_inputs(run, p)?;
    let lambdas = run.lambdas();
    let n = inputs.xs.len();
    let eps_at = |k: usize| -> Result<f64> {
        match &run.step {
            StepPlan::Linesearch(ls) => Ok(0.5 * (1.0 - ls.delta)),
            _ => {
                let l = p
                    .constants()
                    .l
                    .ok_or_else(|| Error::DiagnosticUnavailable("constant L is required".into()))?;
                Ok(0.5 - l * lambdas[k].max(lambdas[k + 1]))
            }
        }
    };
    let phis: Vec<f64> = (0..n).map(|k| inputs.phi(k, lambdas[k])).collect();
    let mut per_iteration = Vec::with_capacity(n);
    let mut epsilon_used = f64::INFINITY;
    let (mut violations, mut lower_bound_violations) = (0, 0);
    for k in 0..n {
        let slack = if k + 1 < n {
            let eps = eps_at(k)?;
            epsilon_used = epsilon_used.min(eps);
            Some(phis[k] - phis[k + 1] - eps * inputs.step_sq(k))
        } else {
            None
        };
        let decrease_ok = slack.is_none_or(|s| s >= -tol);
        let lower_bound_ok = phis[k] >= 0.5 * inputs.dist_sq(k) - tol;
        violations += usize::from(!decrease_ok);
        lower_bound_violations += usize::from(!lower_bound_ok);
        per_iteration.push(EnergyEntry {
            k,
            phi: phis[k],
            slack,
            decrease_ok,
            lower_bound_ok,
        });
    }
    if n == 1 {
        epsilon_used = match &run.step {
            StepPlan::Linesearch(ls) => 0.5 * (1.0 - ls.delta),
            _ => p.constants().l.map_or(f64::NAN, |l| 0.5 - l * lambdas[0]),
        };
    }
    Ok(EnergyReport {
        per_iteration,
        epsilon_used,
        contraction: None,
        violations,
        lower_bound_violations,
        envelope_violations: 0,
    })
}

/// `(ε, α)` of the R-linear estimate: `ε = min{½ − λL, 5mλ}`,
/// `α = min{1 + 4mλ − 3ε/4, 1 + ε/2}`.
pub fn strong_contraction(m: f64, lambda: f64, l: f64) -> (f64, f64) {
    let eps = f64::min(0.5 - lambda * l, 5.0 * m * lambda);
    let alpha = f64::min(1.0 + 4.0 * m * lambda - 0.75 * eps, 1.0 + 0.5 * eps);
    (eps, alpha)
}

/// Checks `α(a_{k+1} + b_{k+1}) ≤ a_k + b_k` with `a_k = ½‖x_k − x‖²`,
/// `b_k = Φ_k − a_k`, the bound `b_k ≥ 0`, and the envelope
/// `‖x_k − x‖² ≤ 2(a_0 + b_0)/α^k`.
pub fn energy_strong(run: &SolverRun, p: &SplitInclusion) -> Result<EnergyReport> {
    energy_strong_with_tol(run, p, SLACK_TOL)
}

pub fn energy_strong_with_tol(
    run: &SolverRun,
    p: &SplitInclusion,
    tol: f64,
) -> Result<EnergyReport> {
    let inputs = energy_inputs(run, p)?;
    let m = p
        .constants()
        .m
        .ok_or_else(|| Error::DiagnosticUnavailable("constant m is required".into()))?;
    let l = p
        .constants()
        .l
        .ok_or_else(|| Error::DiagnosticUnavailable("constant L is required".into()))?;
    let lambdas = run.lambdas();
    let lambda = lambdas[0];
    if lambdas.iter().any(|&v| v != lambda) {
        return Err(Error::DiagnosticUnavailable(
            "strong-monotonicity check needs a constant step".into(),
        ));
    }
    let (eps, alpha) = strong_contraction(m, lambda, l);
    let n = inputs.xs.len();
    let a: Vec<f64> = (0..n).map(|k| 0.5 * inputs.dist_sq(k)).collect();
    let phi: Vec<f64> = (0..n).map(|k| inputs.phi(k, lambda)).collect();
    let total0 = phi[0];
    let mut report = EnergyReport {
        per_iteration: Vec::with_capacity(n),
        epsilon_used: eps,
        contraction: Some(alpha),
        violations: 0,
        lower_bound_violations: 0,
        envelope_violations: 0,
    };
    for k in 0..n {
        let slack = (k + 1 < n).then(|| phi[k] - alpha * phi[k + 1]);
        let decrease_ok = slack.is_none_or(|s| s >= -tol);
        let lower_bound_ok = phi[k] - a[k] >= -tol;
        let envelope = 2.0 * total0 / alpha.powi(k as i32);
        report.violations += usize::from(!decrease_ok);
        report.lower_bound_violations += usize::from(!lower_bound_ok);
        report.envelope_violations += usize::from(2.0 * a[k] > envelope + tol);
        report.per_iteration.push(EnergyEntry {
            k,
            phi: phi[k],
            slack,
            decrease_ok,
            lower_bound_ok,
        });
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMetric {
    DistToSolution,
    NaturalResidual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rho: f64,
    /// First and last iteration of the fit (inclusive).
    pub window: (usize, usize),
    pub r_squared: f64,
    pub metric: RateMetric,
}

/// Least-squares fit of `ln v_k = c + k ln ρ` over `values[window]`.
pub fn fit_rate(
    values: &[f64],
    window: RangeInclusive<usize>,
    metric: RateMetric,
) -> Result<RateEstimate> {
    let (lo, hi) = (*window.start(), *window.end());
    if hi >= values.len() || hi <= lo {
        return Err(Error::Fit(format!(
            "window {lo}..={hi} needs two points inside {} values",
            values.len()
        )));
    }
    if let Some(k) = (lo..=hi).find(|&k| !(values[k] > 0.0 && values[k].is_finite())) {
        return Err(Error::Fit(format!(
            "metric value {} at k = {k} is not positive",
            values[k]
        )));
    }
    let n = (hi - lo + 1) as f64;
    let ks = lo..=hi;
    let mean_k = ks.clone().map(|k| k as f64).sum::<f64>() / n;
    let mean_y = ks.clone().map(|k| values[k].ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for k in ks {
        let dx = k as f64 - mean_k;
        let dy = values[k].ln() - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let ss_res = (syy - slope * sxy).max(0.0);
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(RateEstimate {
        rho: slope.exp(),
        window: (lo, hi),
        r_squared,
        metric,
    })
}

/// Empirical linear rate of a run. The default window skips the first
/// [`RATE_WARMUP`] iterations (none when the run is too short for that).
pub fn estimate_rate(
    run: &SolverRun,
    metric: RateMetric,
    window: Option<RangeInclusive<usize>>,
) -> Result<RateEstimate> {
    let column: Vec<Option<f64>> = run
        .trace
        .iter()
        .map(|r| match metric {
            RateMetric::DistToSolution => r.dist_to_solution,
            RateMetric::NaturalResidual => r.residual,
        })
        .collect();
    let last = column.len() - 1;
    let window = window.unwrap_or_else(|| {
        let start = if last >= RATE_WARMUP + 2 {
            RATE_WARMUP
        } else {
            0
        };
        start..=last
    });
    let values: Vec<f64> = column.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    if (*window.start()..=(*window.end()).min(last)).any(|k| column[k].is_none()) {
        return Err(Error::DiagnosticUnavailable(format!(
            "{metric:?} is not recorded over the window"
        )));
    }
    fit_rate(&values, window, metric)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCheck {
    /// `max_k ‖x_k^{fp} − x_k^{forb}‖`.
    pub max_deviation: f64,
    /// `max_k ‖u_{k+1} − B(x_k^{forb})‖`.
    pub max_aux_deviation: f64,
}

/// Runs `(x_{k+1}, u_{k+1}) = (J_{λA}(x_k − 2λB(x_k) + λu_k), B(x_k))` with
/// `u_0 = B(x_{−1})` next to [`run_forb`] and compares the sequences.
pub fn fixed_point_form_check(
    p: &SplitInclusion,
    lambda: f64,
    x0: ArrayView1<'_, f64>,
    x_minus1: ArrayView1<'_, f64>,
    iters: usize,
) -> Result<FixedPointCheck> {
    if x0.len() != p.dim() || x_minus1.len() != p.dim() {
        return Err(shape("starting points do not match the problem dimension"));
    }
    let cfg = SolverConfig::new(x0.to_owned(), StepPlan::constant(lambda))
        .with_x_minus1(x_minus1.to_owned())
        .with_max_iters(iters)
        .with_tol(0.0);
    let run = run_forb(p, &cfg)?;
    let mut x = x0.to_owned();
    let mut u = p.b().apply(x_minus1);
    let mut out = FixedPointCheck {
        max_deviation: 0.0,
        max_aux_deviation: 0.0,
    };
    for k in 0..run.iterations() {
        let bx = p.b().apply(x.view());
        let point = &x - &(&bx * (2.0 * lambda)) + &(&u * lambda);
        let next = p.a().apply(lambda, point.view());
        u = bx;
        let b_forb = p.b().apply(run.iterates[k].view());
        out.max_aux_deviation = out
            .max_aux_deviation
            .max(linalg::dist(u.view(), b_forb.view()));
        x = next;
        out.max_deviation = out
            .max_deviation
            .max(linalg::dist(x.view(), run.iterates[k + 1].view()));
    }
    Ok(out)
}

/// Lipschitz constant of `B − ρI`: `L + ρ` in general; for `1/L`-cocoercive
/// `B`, `L − ρ` when `ρ ≤ L/2` and `ρ` otherwise.
pub fn lprime(class: OperatorClass, l: f64, rho: f64) -> f64 {
    match class {
        OperatorClass::Lipschitz => l + rho,
        OperatorClass::Cocoercive if rho <= 0.5 * l => l - rho,
        OperatorClass::Cocoercive => rho,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sequence_fit() {
        let v: Vec<f64> = (0..60).map(|k| 2f64.powi(-k)).collect();
        let r = fit_rate(&v, 0..=59, RateMetric::DistToSolution).unwrap();
        assert!((r.rho - 0.5).abs() < 1e-12);
        assert_eq!(r.r_squared, 1.0);
        let flat = vec![3.0; 5];
        let r = fit_rate(&flat, 0..=4, RateMetric::NaturalResidual).unwrap();
        assert_eq!((r.rho, r.r_squared), (1.0, 1.0));
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_rate(&[1.0, 0.0, 1.0], 0..=2, RateMetric::DistToSolution),
            Err(Error::Fit(_))
        ));
        assert!(fit_rate(&[1.0, 0.5], 0..=5, RateMetric::DistToSolution).is_err());
        assert!(fit_rate(&[1.0, 0.5], 1..=1, RateMetric::DistToSolution).is_err());
    }

    #[test]
    fn noisy_fit_has_r_squared_below_one() {
        let v: Vec<f64> = (0..40)
            .map(|k| 0.9f64.powi(k) * if k % 2 == 0 { 1.5 } else { 1.0 })
            .collect();
        let r = fit_rate(&v, 0..=39, RateMetric::DistToSolution).unwrap();
        assert!(r.r_squared < 1.0 && r.r_squared > 0.5);
        assert!((r.rho - 0.9).abs() < 0.01);
    }

    #[test]
    fn lprime_cases() {
        assert!((lprime(OperatorClass::Lipschitz, 1.0, 0.1) - 1.1).abs() < 1e-15);
        assert!((lprime(OperatorClass::Cocoercive, 1.0, 0.4) - 0.6).abs() < 1e-15);
        assert_eq!(lprime(OperatorClass::Cocoercive, 1.0, 0.8), 0.8);
        assert_eq!(lprime(OperatorClass::Cocoercive, 1.0, 0.5), 0.5);
        assert_eq!(lprime(OperatorClass::Cocoercive, 3.0, 1.5), 1.5);
    }

    #[test]
    fn strong_contraction_example() {
        let (eps, alpha) = strong_contraction(0.5, 0.2, 2.0);
        assert!((eps - 0.1).abs() < 1e-15);
        assert!((alpha - 1.05).abs() < 1e-15);
        let (_, alpha0) = strong_contraction(0.0, 0.2, 2.0);
        assert_eq!(alpha0, 1.0);
    }
}
