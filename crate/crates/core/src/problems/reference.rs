//! Independent solvers used only to produce reference solutions.

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{ResolventOracle, SplitInclusion, Vector};

/// Natural residual (unit scale) a reference solution must reach.
pub const CERTIFY_TOL: f64 = 1e-10;
/// Natural residual at which the reference solvers stop.
pub const SOLVE_TOL: f64 = 1e-12;
pub const MAX_ORACLE_ITERS: usize = 2_000_000;

/// Extragradient with the resolvent in both half-steps:
/// `y = J_{γA}(x − γF(x))`, `x⁺ = J_{γA}(x − γF(y))`.
pub(crate) fn extragradient<F>(
    a: &ResolventOracle,
    f: F,
    gamma: f64,
    x0: Vector,
    residual: impl Fn(&Vector) -> f64,
) -> Result<Vector>
where
    F: Fn(ArrayView1<'_, f64>) -> Vector,
{
    let mut x = x0;
    for k in 0..MAX_ORACLE_ITERS {
        if k % 16 == 0 && residual(&x) <= SOLVE_TOL {
            return Ok(x);
        }
        let y = a.apply(gamma, (&x - &(f(x.view()) * gamma)).view());
        x = a.apply(gamma, (&x - &(f(y.view()) * gamma)).view());
        if !linalg::all_finite(x.view()) {
            return Err(Error::Construction("extragradient oracle diverged".into()));
        }
    }
    Err(Error::Construction(format!(
        "extragradient oracle did not reach residual {SOLVE_TOL:e} in {MAX_ORACLE_ITERS} iterations"
    )))
}

/// Proximal gradient `x⁺ = J_{γA}(x − γ∇g(x))`, stopped when `‖x⁺ − x‖ ≤ tol`.
pub(crate) fn proximal_gradient<F>(
    a: &ResolventOracle,
    grad: F,
    gamma: f64,
    x0: Vector,
) -> Result<Vector>
where
    F: Fn(ArrayView1<'_, f64>) -> Vector,
{
    let mut x = x0;
    for _ in 0..MAX_ORACLE_ITERS {
        let next = a.apply(gamma, (&x - &(grad(x.view()) * gamma)).view());
        let step = linalg::dist(next.view(), x.view());
        x = next;
        if step <= SOLVE_TOL {
            return Ok(x);
        }
        if !linalg::all_finite(x.view()) {
            return Err(Error::Construction(
                "proximal-gradient oracle diverged".into(),
            ));
        }
    }
    Err(Error::Construction(format!(
        "proximal-gradient oracle did not reach step {SOLVE_TOL:e} in {MAX_ORACLE_ITERS} iterations"
    )))
}

/// Largest componentwise violation of `−F(x) ∈ N_[lo,hi](x)`, measured as
/// `|xᵢ − clamp(xᵢ − Fᵢ, lo, hi)|`. Zero exactly at box-constrained solutions.
pub fn kkt_box_residual(x: ArrayView1<'_, f64>, f: ArrayView1<'_, f64>, lo: f64, hi: f64) -> f64 {
    x.iter()
        .zip(f.iter())
        .map(|(&x, &f)| (x - (x - f).clamp(lo, hi)).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn certify(p: &SplitInclusion, x: &Vector) -> Result<()> {
    let r = p.natural_residual(1.0, x.view());
    if !(r <= CERTIFY_TOL) {
        return Err(Error::Construction(format!(
            "reference solution has natural residual {r:e} > {CERTIFY_TOL:e}"
        )));
    }
    Ok(())
}

pub(crate) fn certify_box(p: &SplitInclusion, x: &Vector, lo: f64, hi: f64) -> Result<()> {
    certify(p, x)?;
    let f = p.forward_total(x.view());
    let kkt = kkt_box_residual(x.view(), f.view(), lo, hi);
    if !(kkt <= CERTIFY_TOL) {
        return Err(Error::Construction(format!(
            "KKT residual {kkt:e} > {CERTIFY_TOL:e}"
        )));
    }
    Ok(())
}
