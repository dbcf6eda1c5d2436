//! Reference methods: Tseng's forward-backward-forward, forward-backward,
//! the proximal point algorithm, the projected reflected gradient method
//! and Popov's method.
//!
//! Secondary sequences: Tseng keeps the intermediate point `y_{k+1}` of each
//! iteration (with its residual); Popov keeps its base sequence `y_k` starting
//! from `y_0`, so that `x_k = 2y_k − y_{k−1}`.

use ndarray::Zip;

use super::forb::warn_against_bound;
use super::{bounds, subtract_scaled, Baseline, Method, Recorder, SolverConfig, SolverRun, Status};
use crate::error::{config, Result};
use crate::operators::{ResolventKind, SplitInclusion, Vector};

pub fn run_baseline(alg: Baseline, p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::from(alg);
    cfg.validate(p.dim())?;
    cfg.step.fixed(method)?;
    match alg {
        Baseline::Tseng => tseng(p, cfg),
        Baseline::ForwardBackward => forward_backward(p, cfg),
        Baseline::ProximalPoint => proximal_point(p, cfg),
        Baseline::ProjectedReflectedGradient => projected_reflected_gradient(p, cfg),
        Baseline::Popov => popov(p, cfg),
    }
}

fn count_forward(rec: &mut Recorder<'_>, p: &SplitInclusion) {
    rec.calls.forward_b += 1;
    if p.c().is_some() {
        rec.calls.forward_c += 1;
    }
}

fn two_operator_only(p: &SplitInclusion, method: Method) -> Result<()> {
    if p.c().is_some() {
        return Err(config(format!("{method} does not take a C term")));
    }
    Ok(())
}

/// `y_k = J_{λA}(x_k − λF(x_k))`, `x_{k+1} = y_k − λF(y_k) + λF(x_k)` with `F = B (+ C)`.
fn tseng(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::Tseng;
    let mut rec = Recorder::new(p, cfg, method);
    let bound = bounds::problem_bound(method, p, &[], 0.0, 1.0);
    warn_against_bound(&mut rec, method, cfg.step.lambda_at(0), bound);

    let lambda_minus1 = cfg.step.lambda_minus1();
    let mut x = cfg.x0.clone();
    let mut status = rec.observe(0, lambda_minus1, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let lam = cfg.step.lambda_at(k);
        let fx = p.forward_total(x.view());
        count_forward(&mut rec, p);
        let mut point = x.clone();
        subtract_scaled(&mut point, lam, &fx);
        let y = p.a().apply(lam, point.view());
        rec.calls.resolvent += 1;
        let fy = p.forward_total(y.view());
        count_forward(&mut rec, p);
        x = Zip::from(&y)
            .and(&fy)
            .and(&fx)
            .map_collect(|&y, &fy, &fx| y - lam * fy + lam * fx);
        k += 1;
        status = rec.observe(k, lam, &x);
        rec.observe_aux(k, lam, &y, true);
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lambda_minus1))
}

/// `x_{k+1} = J_{λA}(x_k − λF(x_k))` with `F = B (+ C)`.
fn forward_backward(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::ForwardBackward;
    let mut rec = Recorder::new(p, cfg, method);
    let bound = bounds::problem_bound(method, p, &[], 0.0, 1.0);
    warn_against_bound(&mut rec, method, cfg.step.lambda_at(0), bound);

    let lambda_minus1 = cfg.step.lambda_minus1();
    let mut x = cfg.x0.clone();
    let mut status = rec.observe(0, lambda_minus1, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let lam = cfg.step.lambda_at(k);
        let fx = p.forward_total(x.view());
        count_forward(&mut rec, p);
        let mut point = x.clone();
        subtract_scaled(&mut point, lam, &fx);
        x = p.a().apply(lam, point.view());
        rec.calls.resolvent += 1;
        k += 1;
        status = rec.observe(k, lam, &x);
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lambda_minus1))
}

/// `x_{k+1} = J_{λ_k A}(x_k)`; the problem's `B` must be the zero map
/// (declared Lipschitz constant 0).
fn proximal_point(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::ProximalPoint;
    two_operator_only(p, method)?;
    if p.b().lipschitz != Some(0.0) {
        return Err(config(
            "proximal_point solves 0 ∈ A(x); B must be the zero map",
        ));
    }
    let mut rec = Recorder::new(p, cfg, method);
    let lambda_minus1 = cfg.step.lambda_minus1();
    let mut x = cfg.x0.clone();
    let mut status = rec.observe(0, lambda_minus1, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let lam = cfg.step.lambda_at(k);
        x = p.a().apply(lam, x.view());
        rec.calls.resolvent += 1;
        k += 1;
        status = rec.observe(k, lam, &x);
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lambda_minus1))
}

/// `x_{k+1} = P_C(x_k − λ_k B(2x_k − x_{k−1}))`; `A` must be a normal cone (or zero).
fn projected_reflected_gradient(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::ProjectedReflectedGradient;
    two_operator_only(p, method)?;
    if p.a().kind() == ResolventKind::General {
        return Err(config(
            "projected_reflected_gradient needs A to be a normal cone (projection resolvent)",
        ));
    }
    let mut rec = Recorder::new(p, cfg, method);
    let bound = bounds::problem_bound(method, p, &[], 0.0, 1.0);
    warn_against_bound(&mut rec, method, cfg.step.lambda_at(0), bound);

    let lambda_minus1 = cfg.step.lambda_minus1();
    let mut x_prev = cfg.x_minus1();
    let mut x = cfg.x0.clone();
    let mut status = rec.observe(0, lambda_minus1, &x);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let lam = cfg.step.lambda_at(k);
        let w: Vector = Zip::from(&x)
            .and(&x_prev)
            .map_collect(|&x, &xp| 2.0 * x - xp);
        let bw = p.b().apply(w.view());
        rec.calls.forward_b += 1;
        let mut point = x.clone();
        subtract_scaled(&mut point, lam, &bw);
        let next = p.a().apply(lam, point.view());
        rec.calls.resolvent += 1;
        x_prev = std::mem::replace(&mut x, next);
        k += 1;
        status = rec.observe(k, lam, &x);
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lambda_minus1))
}

/// Popov's method for `A = 0` with constant step:
/// `y_{k+1} = y_k − λB(x_k)`, `x_{k+1} = y_{k+1} − λB(x_k)`,
/// started from `y_0 = x_0 + λB(x_{−1})`. With this start, `x_k` coincides
/// with the FoRB iterate for the same `x_0`, `x_{−1}` and `λ`.
fn popov(p: &SplitInclusion, cfg: &SolverConfig) -> Result<SolverRun> {
    let method = Method::Popov;
    two_operator_only(p, method)?;
    if p.a().kind() != ResolventKind::Identity {
        return Err(config("popov requires A = 0"));
    }
    let (lam, _) = cfg.step.constant_lambda(method)?;
    let mut rec = Recorder::new(p, cfg, method);
    let bound = bounds::problem_bound(method, p, &[], 0.0, 1.0);
    warn_against_bound(&mut rec, method, lam, bound);

    let b_minus1 = p.b().apply(cfg.x_minus1().view());
    rec.calls.forward_b += 1;
    let mut x = cfg.x0.clone();
    let mut y = Zip::from(&x)
        .and(&b_minus1)
        .map_collect(|&x, &b| x + lam * b);
    let mut status = rec.observe(0, lam, &x);
    rec.observe_aux(0, lam, &y, false);
    let mut k = 0;
    while status.is_none() && k < cfg.max_iters {
        let bx = p.b().apply(x.view());
        rec.calls.forward_b += 1;
        subtract_scaled(&mut y, lam, &bx);
        x = y.clone();
        subtract_scaled(&mut x, lam, &bx);
        k += 1;
        status = rec.observe(k, lam, &x);
        rec.observe_aux(k, lam, &y, false);
    }
    Ok(rec.finish(status.unwrap_or(Status::MaxIters), lam))
}
