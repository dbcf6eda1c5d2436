use ndarray::Zip;

use super::{
    bounds, reflected_point, subtract_scaled, Method, Recorder, SolverConfig, SolverRun, Status,
    StepPlan,
};
use crate::diagnostics::lyapunov;
use crate::error::{config, shape, Result};
use crate::linalg;
use crate::operators::{ForwardOracle, SplitInclusion, Vector};
use crate::rng::SplitMix64;

fn largest_step(plan: &StepPlan) -> f64 {
    match plan {
        StepPlan::Constant { lambda, .. } => *lambda,
        StepPlan::Schedule { lambdas, .. } => lambdas.iter().copied().fold(0.0, f64::max),
        StepPlan::Linesearch(p) => p.lambda0,
    }
}

pub(super) fn warn_against_bound(
    rec: &mut Recorder<'_>,
    method: Method,
    lambda: f64,
    bound: Result<f64>,
) {
    if let Ok(b) = bound {
        if lambda >= b {
            rec.warn(format!(
                "{method}: step {lambda} is not below the admissible bound {b}"
            ));
        }
    }
}

fn no_c(p: &SplitInclusion, method: Method) -> Result<()> {
    if p.c().is_some() {
        return Err(config(format!(
            "{method} solves 0 ∈ (A + B)(x); this problem has a C term, use run_forb3"
        )));
    }
    Ok(())
}

/// Forward-reflected-backward splitting with a constant or scheduled step:
/// `x_{k+1} = J_{λ_k A}(x_k − λ_k B(x_k) − λ_{k−1}(B(x_k) − B(x_{k−1})))`.
///
/// `B(x_{k−1})` is cached, so each iteration costs one forward and one
/// resolvent evaluation; one extra forward call seeds `B(x_{−1})`.
pub fn run_forb(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::Forb;
    cfg.validate(p.dim())?;
    cfg.step.fixed(method)?;
    no_c(p, method)?;

    let mut rec = Recorder::new(p, cfg, method);
    let bound = bounds::problem_bound(method, p, &[], 0.0, 1.0);
    warn_against_bound(&mut rec, method, largest_step(&cfg.step), bound);

    let lambda_minus1 = cfg.step.lambda_minus1();
    let mut x_prev = cfg.x_minus1();
    let mut b_prev = p.b().apply(x_prev.view());
    rec.calls.forward_b += 1;
    let mut x = cfg.x0.clone();
    let mut lam_prev = lambda_minus1;
    let mut status = rec.observe(0, lambda_minus1, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let bx = p.b().apply(x.view());
        rec.calls.forward_b += 1;
        if rec.energy_wanted() {
            let sol = p.reference_solution().expect("energy requires a solution");
            rec.set_energy(k, lyapunov(&x, &x_prev, &bx, &b_prev, lam_prev, sol));
        }
        let lam = cfg.step.lambda_at(k);
        let point = reflected_point(&x, &bx, lam, lam_prev, &bx, &b_prev);
        let next = p.a().apply(lam, point.view());
        rec.calls.resolvent += 1;
        x_prev = std::mem::replace(&mut x, next);
        b_prev = bx;
        lam_prev = lam;
        k += 1;
        status = rec.observe(k, lam, &x);
    }
    if rec.energy_wanted() && linalg::all_finite(x.view()) {
        let sol = p.reference_solution().expect("energy requires a solution");
        let bx = p.b().apply(x.view());
        rec.diag.forward_b += 1;
        rec.set_energy(k, lyapunov(&x, &x_prev, &bx, &b_prev, lam_prev, sol));
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lambda_minus1))
}

/// FoRB with the backtracking linesearch: `λ_k = ρ λ_{k−1} σ^i` for the
/// smallest `i ≥ 0` with `λ_k‖B(x_{k+1}) − B(x_k)‖ ≤ (δ/2)‖x_{k+1} − x_k‖`.
///
/// The reflection term `λ_{k−1}(B(x_k) − B(x_{k−1}))` is fixed during the
/// search. Each trial costs one resolvent and one forward call; the accepted
/// `B(x_{k+1})` is reused by the next iteration. The first search starts
/// from `λ_0 = lambda0`.
pub fn run_forb_linesearch(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::ForbLinesearch;
    cfg.validate(p.dim())?;
    cfg.step.validate()?;
    let StepPlan::Linesearch(ls) = &cfg.step else {
        return Err(config("run_forb_linesearch needs a linesearch step plan"));
    };
    no_c(p, method)?;

    let mut rec = Recorder::new(p, cfg, method);
    let rho = ls.rho();
    let mut x_prev = cfg.x_minus1();
    let mut b_prev = p.b().apply(x_prev.view());
    let mut x = cfg.x0.clone();
    let mut bx = p.b().apply(x.view());
    rec.calls.forward_b += 2;
    let mut lam_prev = ls.lambda_minus1;
    let mut status = rec.observe(0, lam_prev, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        if rec.energy_wanted() {
            let sol = p.reference_solution().expect("energy requires a solution");
            rec.set_energy(k, lyapunov(&x, &x_prev, &bx, &b_prev, lam_prev, sol));
        }
        let base = if k == 0 { ls.lambda0 } else { rho * lam_prev };
        let mut accepted = None;
        for i in 0..=ls.max_backtracks {
            let lam = base * ls.sigma.powi(i as i32);
            let point = reflected_point(&x, &bx, lam, lam_prev, &bx, &b_prev);
            let trial = p.a().apply(lam, point.view());
            let b_trial = p.b().apply(trial.view());
            rec.calls.resolvent += 1;
            rec.calls.forward_b += 1;
            let lhs = lam * linalg::dist(b_trial.view(), bx.view());
            let rhs = 0.5 * ls.delta * linalg::dist(trial.view(), x.view());
            if lhs <= rhs {
                accepted = Some((i, lam, trial, b_trial));
                break;
            }
        }
        let Some((i, lam, next, b_next)) = accepted else {
            rec.backtracks.push(ls.max_backtracks + 1);
            rec.warn(format!(
                "linesearch exceeded {} backtracks at iteration {k}",
                ls.max_backtracks
            ));
            status = Some(Status::LinesearchFailed);
            break;
        };
        rec.backtracks.push(i);
        x_prev = std::mem::replace(&mut x, next);
        b_prev = std::mem::replace(&mut bx, b_next);
        lam_prev = lam;
        k += 1;
        status = rec.observe(k, lam, &x);
    }
    if rec.energy_wanted() && linalg::all_finite(x.view()) {
        let sol = p.reference_solution().expect("energy requires a solution");
        rec.set_energy(k, lyapunov(&x, &x_prev, &bx, &b_prev, lam_prev, sol));
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), ls.lambda_minus1))
}

/// Relaxed inertial FoRB with constant step:
/// `z_{k+1} = J_{λA}(x_k − λB(x_k) − (λ/β)(B(x_k) − B(x_{k−1})) + (α/β)(x_k − x_{k−1}))`,
/// `x_{k+1} = (1 − β)x_k + βz_{k+1}`.
///
/// The first iteration uses `λ_{−1}` in place of `λ` in the reflection term.
/// `z_k` is kept as the secondary sequence, with its residuals.
pub fn run_relaxed_inertial(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::RelaxedInertial;
    cfg.validate(p.dim())?;
    let (lam, lambda_minus1) = cfg.step.constant_lambda(method)?;
    no_c(p, method)?;
    let (alpha, beta) = (cfg.alpha, cfg.beta);

    let mut rec = Recorder::new(p, cfg, method);
    let bound = bounds::problem_bound(method, p, &[], alpha, beta);
    warn_against_bound(&mut rec, method, lam, bound);

    let mut x_prev = cfg.x_minus1();
    let mut b_prev = p.b().apply(x_prev.view());
    rec.calls.forward_b += 1;
    let mut x = cfg.x0.clone();
    let mut status = rec.observe(0, lambda_minus1, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let bx = p.b().apply(x.view());
        rec.calls.forward_b += 1;
        let lam_prev = if k == 0 { lambda_minus1 } else { lam };
        let mut point = reflected_point(&x, &bx, lam, lam_prev / beta, &bx, &b_prev);
        if alpha != 0.0 {
            let c = alpha / beta;
            Zip::from(&mut point)
                .and(&x)
                .and(&x_prev)
                .for_each(|p, &x, &xp| *p += c * (x - xp));
        }
        let z = p.a().apply(lam, point.view());
        rec.calls.resolvent += 1;
        let next = if beta == 1.0 {
            z.clone()
        } else {
            Zip::from(&x)
                .and(&z)
                .map_collect(|&x, &z| (1.0 - beta) * x + beta * z)
        };
        x_prev = std::mem::replace(&mut x, next);
        b_prev = bx;
        k += 1;
        status = rec.observe(k, lam, &x);
        rec.observe_aux(k, lam, &z, true);
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lambda_minus1))
}

/// Three-operator variant for `0 ∈ (A + B + C)(x)` with `C` cocoercive:
/// `x_{k+1} = J_{λ_k A}(x_k − λ_k B(x_k) − λ_{k−1}(B(x_k) − B(x_{k−1})) − λ_k C(x_k))`.
///
/// One `B`, one `C` and one resolvent evaluation per iteration.
pub fn run_forb3(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::Forb3;
    cfg.validate(p.dim())?;
    cfg.step.fixed(method)?;
    let Some(c) = p.c() else {
        return Err(config("forb3 needs a problem with a C term"));
    };

    let mut rec = Recorder::new(p, cfg, method);
    let bound = bounds::problem_bound(method, p, &[], 0.0, 1.0);
    warn_against_bound(&mut rec, method, largest_step(&cfg.step), bound);

    let lambda_minus1 = cfg.step.lambda_minus1();
    let mut b_prev = p.b().apply(cfg.x_minus1().view());
    rec.calls.forward_b += 1;
    let mut x = cfg.x0.clone();
    let mut lam_prev = lambda_minus1;
    let mut status = rec.observe(0, lambda_minus1, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let bx = p.b().apply(x.view());
        let cx = c.apply(x.view());
        rec.calls.forward_b += 1;
        rec.calls.forward_c += 1;
        let lam = cfg.step.lambda_at(k);
        let mut point = reflected_point(&x, &bx, lam, lam_prev, &bx, &b_prev);
        subtract_scaled(&mut point, lam, &cx);
        let next = p.a().apply(lam, point.view());
        rec.calls.resolvent += 1;
        x = next;
        b_prev = bx;
        lam_prev = lam;
        k += 1;
        status = rec.observe(k, lam, &x);
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lambda_minus1))
}

/// Stochastic FoRB for `B = (1/n) Σ B_i`:
/// `x_{k+1} = J_{λ_k A}(x_k − λ_k B(x_k) − λ_{k−1}(B_i(x_k) − B_i(x_{k−1})))`
/// with `i` drawn uniformly from the parts by a [`SplitMix64`] seeded with `cfg.seed`.
///
/// Per iteration: one full `B` call and two `B_i` calls. A mismatch between
/// `B(x_0)` and the average of the parts at `x_0` is reported as a warning.
pub fn run_stochastic_forb(
    p: &SplitInclusion,
    parts: &[ForwardOracle],
    cfg: &SolverConfig,
) -> Result<SolverRun> {
    let method = Method::StochasticForb;
    cfg.validate(p.dim())?;
    cfg.step.fixed(method)?;
    no_c(p, method)?;
    if parts.is_empty() {
        return Err(config("stochastic FoRB needs at least one part"));
    }
    if let Some(bad) = parts.iter().find(|b| b.dim() != p.dim()) {
        return Err(shape(format!(
            "part `{}` has dim {}, expected {}",
            bad.label(),
            bad.dim(),
            p.dim()
        )));
    }
    let n = parts.len();

    let mut rec = Recorder::new(p, cfg, method);
    let bound = bounds::problem_bound(method, p, parts, 0.0, 1.0);
    warn_against_bound(&mut rec, method, largest_step(&cfg.step), bound);

    let b0 = p.b().apply(cfg.x0.view());
    let mut mean = Vector::zeros(p.dim());
    for b in parts {
        mean += &b.apply(cfg.x0.view());
    }
    mean /= n as f64;
    rec.diag.forward_b += 1;
    rec.diag.forward_bi += n as u64;
    let gap = linalg::dist(b0.view(), mean.view());
    if gap > 1e-9 * (1.0 + linalg::norm(b0.view())) {
        rec.warn(format!(
            "B(x0) differs from the average of the parts by {gap:e}; the method assumes B = (1/n) Σ B_i"
        ));
    }

    let mut rng = SplitMix64::new(cfg.seed);
    let lambda_minus1 = cfg.step.lambda_minus1();
    let mut x_prev = cfg.x_minus1();
    let mut x = cfg.x0.clone();
    let mut lam_prev = lambda_minus1;
    let mut status = rec.observe(0, lambda_minus1, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let bx = p.b().apply(x.view());
        let i = rng.index(n);
        let gi = parts[i].apply(x.view());
        let gi_prev = parts[i].apply(x_prev.view());
        rec.calls.forward_b += 1;
        rec.calls.forward_bi += 2;
        rec.sampled_indices.push(i);
        let lam = cfg.step.lambda_at(k);
        let point = reflected_point(&x, &bx, lam, lam_prev, &gi, &gi_prev);
        let next = p.a().apply(lam, point.view());
        rec.calls.resolvent += 1;
        x_prev = std::mem::replace(&mut x, next);
        lam_prev = lam;
        k += 1;
        status = rec.observe(k, lam, &x);
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lambda_minus1))
}
