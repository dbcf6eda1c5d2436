//! Closed-form resolvents.
//!
//! | name                    | operator `A`                         | `J_{λA}(x)`                                   |
//! |-------------------------|--------------------------------------|-----------------------------------------------|
//! | `zero`                  | `0`                                  | `x`                                           |
//! | `l1_norm`               | `∂(w‖·‖₁)`                           | `sign(xᵢ)·max(|xᵢ| − λw, 0)`                  |
//! | `box_indicator`         | `N_[l,u]`                            | `clamp(x, l, u)` (independent of `λ`)         |
//! | `halfspace_indicator`   | `N_{⟨a,·⟩ ≤ b}`                      | `x − max(⟨a,x⟩ − b, 0)/‖a‖² · a`              |
//! | `quadratic`             | `Qx + c` (`Q` monotone)              | solve `(I + λQ)u = x − λc`                    |
//! | `scaled_identity_shift` | `s·x + t` (`s ≥ 0`)                  | `(x − λt)/(1 + λs)`                           |
//!
//! For `B = ∂f` the resolvent of `B^{-1} = ∂f*` follows from Moreau's identity
//! `J_{λ∂f*}(x) = x − λ J_{(1/λ)∂f}(x/λ)`; see [`moreau_conjugate`].

use ndarray::{Array1, Array2};
use serde::Deserialize;
use serde_json::Value;

use super::{ResolventKind, ResolventOracle, Vector};
use crate::error::{config, param, shape, Result};
use crate::linalg;

pub const GALLERY_NAMES: [&str; 6] = [
    "zero",
    "l1_norm",
    "box_indicator",
    "halfspace_indicator",
    "quadratic",
    "scaled_identity_shift",
];

pub fn zero(dim: usize) -> ResolventOracle {
    ResolventOracle::new(dim, "0", ResolventKind::Identity, |_, x| x.to_owned())
}

/// Soft thresholding, the resolvent of `∂(weight·‖·‖₁)`.
pub fn l1_norm(dim: usize, weight: f64) -> Result<ResolventOracle> {
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(param(format!(
            "l1 weight must be nonnegative, got {weight}"
        )));
    }
    Ok(ResolventOracle::new(
        dim,
        format!("∂({weight}‖·‖₁)"),
        ResolventKind::General,
        move |lambda, x| {
            let t = lambda * weight;
            x.mapv(|v| v.signum() * (v.abs() - t).max(0.0))
        },
    ))
}

pub fn box_indicator(lower: Vector, upper: Vector) -> Result<ResolventOracle> {
    if lower.len() != upper.len() {
        return Err(shape(format!(
            "box bounds have lengths {} and {}",
            lower.len(),
            upper.len()
        )));
    }
    if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i])) {
        return Err(param(format!(
            "box lower bound exceeds upper bound at index {i}"
        )));
    }
    let dim = lower.len();
    Ok(ResolventOracle::new(
        dim,
        "N_box",
        ResolventKind::Projection,
        move |_, x| {
            let mut y = x.to_owned();
            for ((v, lo), hi) in y.iter_mut().zip(lower.iter()).zip(upper.iter()) {
                *v = v.clamp(*lo, *hi);
            }
            y
        },
    ))
}

/// Normal cone of `[lo, hi]^dim`.
pub fn box_uniform(dim: usize, lo: f64, hi: f64) -> Result<ResolventOracle> {
    box_indicator(Array1::from_elem(dim, lo), Array1::from_elem(dim, hi))
}

/// Normal cone of `{x : ⟨normal, x⟩ ≤ offset}`.
pub fn halfspace_indicator(normal: Vector, offset: f64) -> Result<ResolventOracle> {
    let nn = normal.dot(&normal);
    if !(nn > 0.0 && nn.is_finite()) || !offset.is_finite() {
        return Err(param("halfspace normal must be nonzero and finite"));
    }
    Ok(ResolventOracle::new(
        normal.len(),
        "N_halfspace",
        ResolventKind::Projection,
        move |_, x| {
            let excess = normal.dot(&x) - offset;
            if excess > 0.0 {
                &x - &(&normal * (excess / nn))
            } else {
                x.to_owned()
            }
        },
    ))
}

/// Resolvent of the affine operator `x ↦ Qx + c`; `Q` must be monotone
/// (positive semidefinite symmetric part) for this to be a resolvent.
pub fn quadratic(matrix: Array2<f64>, linear: Option<Vector>) -> Result<ResolventOracle> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(shape(format!(
            "quadratic needs a square matrix, got {:?}",
            matrix.dim()
        )));
    }
    if let Some(c) = &linear {
        if c.len() != n {
            return Err(shape(format!(
                "linear term has length {}, expected {n}",
                c.len()
            )));
        }
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(param("quadratic matrix has non-finite entries"));
    }
    Ok(ResolventOracle::new(
        n,
        "Q·x + c",
        ResolventKind::General,
        move |lambda, x| {
            let mut lhs = &matrix * lambda;
            for i in 0..n {
                lhs[[i, i]] += 1.0;
            }
            let rhs = match &linear {
                Some(c) => &x - &(c * lambda),
                None => x.to_owned(),
            };
            linalg::solve(lhs.view(), rhs.view()).unwrap_or_else(|| Array1::from_elem(n, f64::NAN))
        },
    ))
}

/// Resolvent of `x ↦ scale·x + shift`, i.e. the gradient of `(scale/2)‖x‖² + ⟨shift, x⟩`.
pub fn scaled_identity_shift(
    dim: usize,
    scale: f64,
    shift: Option<Vector>,
) -> Result<ResolventOracle> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(param(format!("scale must be nonnegative, got {scale}")));
    }
    if let Some(t) = &shift {
        if t.len() != dim {
            return Err(shape(format!(
                "shift has length {}, expected {dim}",
                t.len()
            )));
        }
    }
    Ok(ResolventOracle::new(
        dim,
        format!("{scale}·x + t"),
        ResolventKind::General,
        move |lambda, x| {
            let denom = 1.0 + lambda * scale;
            match &shift {
                Some(t) => (&x - &(t * lambda)) / denom,
                None => x.mapv(|v| v / denom),
            }
        },
    ))
}

/// Resolvent of `∂f*` from the resolvent of `∂f` (Moreau's identity).
pub fn moreau_conjugate(prox_f: &ResolventOracle) -> ResolventOracle {
    let inner = prox_f.clone();
    let kind = match prox_f.kind() {
        // f = 0 has f* = ι_{0}, whose resolvent is the projection onto {0}.
        ResolventKind::Identity => ResolventKind::Projection,
        _ => ResolventKind::General,
    };
    ResolventOracle::new(
        prox_f.dim(),
        format!("({})*", prox_f.label()),
        kind,
        move |lambda, x| {
            let scaled = x.mapv(|v| v / lambda);
            let p = inner.apply(1.0 / lambda, scaled.view());
            &x - &(p * lambda)
        },
    )
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Bound {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Bound {
    fn expand(self, dim: Option<usize>) -> Result<Vector> {
        match self {
            Bound::Vector(v) => Ok(Array1::from(v)),
            Bound::Scalar(s) => dim
                .map(|d| Array1::from_elem(d, s))
                .ok_or_else(|| param("scalar box bounds need `dim`")),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DimParams {
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct L1Params {
    dim: usize,
    #[serde(default = "one")]
    weight: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxParams {
    #[serde(default)]
    dim: Option<usize>,
    lower: Bound,
    upper: Bound,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfspaceParams {
    normal: Vec<f64>,
    offset: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticParams {
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    linear: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftParams {
    dim: usize,
    scale: f64,
    #[serde(default)]
    shift: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn parse<T: for<'de> Deserialize<'de>>(name: &str, params: &Value) -> Result<T> {
    T::deserialize(params).map_err(|e| param(format!("{name}: {e}")))
}

pub(crate) fn matrix_from_rows(rows: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(shape("ragged matrix rows"));
    }
    Array2::from_shape_vec((r, c), rows.into_iter().flatten().collect())
        .map_err(|e| shape(e.to_string()))
}

/// Builds a gallery resolvent from its name and JSON parameters.
pub fn prox_gallery(name: &str, params: &Value) -> Result<ResolventOracle> {
    match name {
        "zero" => Ok(zero(parse::<DimParams>(name, params)?.dim)),
        "l1_norm" => {
            let p: L1Params = parse(name, params)?;
            l1_norm(p.dim, p.weight)
        }
        "box_indicator" => {
            let p: BoxParams = parse(name, params)?;
            box_indicator(p.lower.expand(p.dim)?, p.upper.expand(p.dim)?)
        }
        "halfspace_indicator" => {
            let p: HalfspaceParams = parse(name, params)?;
            halfspace_indicator(Array1::from(p.normal), p.offset)
        }
        "quadratic" => {
            let p: QuadraticParams = parse(name, params)?;
            quadratic(matrix_from_rows(p.matrix)?, p.linear.map(Array1::from))
        }
        "scaled_identity_shift" => {
            let p: ShiftParams = parse(name, params)?;
            scaled_identity_shift(p.dim, p.scale, p.shift.map(Array1::from))
        }
        other => Err(config(format!(
            "unknown gallery entry `{other}`; expected one of {}",
            GALLERY_NAMES.join(", ")
        ))),
    }
}
