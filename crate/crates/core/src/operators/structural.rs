//! Inclusions built on a product space `H1 × H2`.
//!
//! Points of the product space are stored as a single vector `(x, y)` with
//! `x` in the first `dim(H1)` coordinates.

use std::sync::Arc;

use ndarray::{s, Array1, Array2, ArrayView1};

use super::{concat, ForwardOracle, ResolventOracle, SplitInclusion, Vector};
use crate::error::{shape, Result};
use crate::linalg;

/// `(x, y) ↦ ∇Φ` component, evaluated at the split point.
pub type GradientMap =
    Arc<dyn Fn(ArrayView1<'_, f64>, ArrayView1<'_, f64>) -> Vector + Send + Sync>;

/// The skew map `(x, y) ↦ (Kᵀy, −Kx)` for `K` of shape `dim(H2) × dim(H1)`.
/// Its Lipschitz constant is `‖K‖₂`.
pub fn skew_operator(k: Array2<f64>) -> ForwardOracle {
    let (n2, n1) = k.dim();
    let l = linalg::operator_norm(k.view(), linalg::POWER_SEED);
    ForwardOracle::new(n1 + n2, "(Kᵀy, −Kx)", move |w| {
        let x = w.slice(s![..n1]);
        let y = w.slice(s![n1..]);
        let top = k.t().dot(&y);
        let bottom = -k.dot(&x);
        concat(&top, &bottom)
    })
    .with_lipschitz(l)
}

/// `0 ∈ diag(A, B⁻¹)(x, y) + (Kᵀy, −Kx)`, the primal-dual form of `0 ∈ A(x) + Kᵀ B(Kx)`.
///
/// `binv` is the resolvent of `B⁻¹`; for `B = ∂f` build it with
/// [`moreau_conjugate`](super::moreau_conjugate).
pub fn product_space_embed(
    a: &ResolventOracle,
    binv: &ResolventOracle,
    k: Array2<f64>,
) -> Result<SplitInclusion> {
    let (rows, cols) = k.dim();
    if cols != a.dim() || rows != binv.dim() {
        return Err(shape(format!(
            "K has shape {rows}x{cols}, expected {}x{}",
            binv.dim(),
            a.dim()
        )));
    }
    SplitInclusion::new(ResolventOracle::block_diag(a, binv), skew_operator(k))
}

/// First-order optimality system of `min_x max_y g(x) + Φ(x, y) − f(y)`:
/// `A = diag(∂g, ∂f)`, `B(x, y) = (∇ₓΦ, −∇ᵧΦ)`.
///
/// Convex-concavity of `Φ` is not checked.
pub fn saddle_operator(
    grad_x: GradientMap,
    grad_y: GradientMap,
    prox_g: &ResolventOracle,
    prox_f: &ResolventOracle,
) -> Result<SplitInclusion> {
    let (n1, n2) = (prox_g.dim(), prox_f.dim());
    let (x0, y0) = (Array1::<f64>::zeros(n1), Array1::<f64>::zeros(n2));
    let gx = grad_x(x0.view(), y0.view()).len();
    let gy = grad_y(x0.view(), y0.view()).len();
    if gx != n1 || gy != n2 {
        return Err(shape(format!(
            "gradient maps return lengths ({gx}, {gy}), expected ({n1}, {n2})"
        )));
    }
    let b = ForwardOracle::new(n1 + n2, "(∇ₓΦ, −∇ᵧΦ)", move |w| {
        let x = w.slice(s![..n1]);
        let y = w.slice(s![n1..]);
        concat(&grad_x(x, y), &-grad_y(x, y))
    });
    SplitInclusion::new(ResolventOracle::block_diag(prox_g, prox_f), b)
}
