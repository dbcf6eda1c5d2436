//! Oracle abstractions for monotone operators.
//!
//! A set-valued operator `A` is only ever touched through its resolvent
//! `J_{λA} = (I + λA)^{-1}` ([`ResolventOracle`]); a single-valued operator
//! `B` through its values ([`ForwardOracle`]). Oracles are immutable and
//! cheap to clone (the evaluation closure is shared behind an `Arc`), so they
//! can be called from several threads at once.

mod gallery;
mod structural;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{param, shape, Error, Result};
use crate::linalg;
use crate::rng::SplitMix64;

pub use gallery::{
    box_indicator, box_uniform, halfspace_indicator, l1_norm, moreau_conjugate, prox_gallery,
    quadratic, scaled_identity_shift, zero, GALLERY_NAMES,
};
pub use structural::{product_space_embed, saddle_operator, skew_operator, GradientMap};

/// A point of the (finite-dimensional) Hilbert space.
pub type Vector = Array1<f64>;

/// Structural tag of a resolvent, used by solvers whose recursion is only
/// defined for a particular class of `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolventKind {
    /// `A = 0`; the resolvent is the identity.
    Identity,
    /// `A = N_C` for a closed convex set `C`; the resolvent is the projection onto `C`.
    Projection,
    General,
}

type ResolventFn = dyn Fn(f64, ArrayView1<'_, f64>) -> Vector + Send + Sync;
type ForwardFn = dyn Fn(ArrayView1<'_, f64>) -> Vector + Send + Sync;

/// The resolvent `(λ, x) ↦ J_{λA}(x)` of a maximally monotone operator `A`.
#[derive(Clone)]
pub struct ResolventOracle {
    dim: usize,
    label: String,
    kind: ResolventKind,
    eval: Arc<ResolventFn>,
}

impl ResolventOracle {
    pub fn new<F>(dim: usize, label: impl Into<String>, kind: ResolventKind, eval: F) -> Self
    where
        F: Fn(f64, ArrayView1<'_, f64>) -> Vector + Send + Sync + 'static,
    {
        Self {
            dim,
            label: label.into(),
            kind,
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> ResolventKind {
        self.kind
    }

    /// Checked evaluation of `J_{λA}(x)`.
    pub fn eval(&self, lambda: f64, x: ArrayView1<'_, f64>) -> Result<Vector> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(param(format!(
                "resolvent scale must be positive, got {lambda}"
            )));
        }
        check_input(self.dim, x, &self.label)?;
        let out = self.apply(lambda, x);
        check_output(self.dim, &out, &self.label)?;
        Ok(out)
    }

    /// Unchecked evaluation used inside solver loops, which do their own
    /// finiteness monitoring.
    pub(crate) fn apply(&self, lambda: f64, x: ArrayView1<'_, f64>) -> Vector {
        (self.eval)(lambda, x)
    }

    /// Resolvent of `A + mI`, via `J_{λ(A+mI)}(x) = J_{λ'A}(x / (1 + λm))`
    /// with `λ' = λ / (1 + λm)`.
    pub fn shifted(&self, m: f64) -> Result<ResolventOracle> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(param(format!("shift must be positive, got {m}")));
        }
        let inner = self.clone();
        Ok(ResolventOracle::new(
            self.dim,
            format!("{} + {m}·I", self.label),
            ResolventKind::General,
            move |lambda, x| {
                let denom = 1.0 + lambda * m;
                let scaled = x.mapv(|v| v / denom);
                inner.apply(lambda / denom, scaled.view())
            },
        ))
    }

    /// Blockwise resolvent of `diag(first, second)` on the product space.
    pub fn block_diag(first: &ResolventOracle, second: &ResolventOracle) -> ResolventOracle {
        let n1 = first.dim;
        let (a, b) = (first.clone(), second.clone());
        let kind = match (first.kind, second.kind) {
            (ResolventKind::Identity, ResolventKind::Identity) => ResolventKind::Identity,
            (ResolventKind::General, _) | (_, ResolventKind::General) => ResolventKind::General,
            _ => ResolventKind::Projection,
        };
        ResolventOracle::new(
            first.dim + second.dim,
            format!("diag({}, {})", first.label, second.label),
            kind,
            move |lambda, x| {
                let top = a.apply(lambda, x.slice(ndarray::s![..n1]));
                let bottom = b.apply(lambda, x.slice(ndarray::s![n1..]));
                concat(&top, &bottom)
            },
        )
    }
}

impl fmt::Debug for ResolventOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResolventOracle")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("kind", &self.kind)
            .finish()
    }
}

/// A single-valued operator `B`, with optional (advisory) structural constants.
#[derive(Clone)]
pub struct ForwardOracle {
    dim: usize,
    label: String,
    eval: Arc<ForwardFn>,
    /// Declared Lipschitz constant `L`.
    pub lipschitz: Option<f64>,
    /// Declared cocoercivity modulus `β`: `⟨x−y, Bx−By⟩ ≥ β‖Bx−By‖²`.
    pub cocoercivity: Option<f64>,
    /// Declared strong monotonicity modulus `m ≥ 0`.
    pub strong_monotonicity: Option<f64>,
}

impl ForwardOracle {
    pub fn new<F>(dim: usize, label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(ArrayView1<'_, f64>) -> Vector + Send + Sync + 'static,
    {
        Self {
            dim,
            label: label.into(),
            eval: Arc::new(eval),
            lipschitz: None,
            cocoercivity: None,
            strong_monotonicity: None,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, "0", move |_| Array1::zeros(dim)).with_lipschitz(0.0)
    }

    /// The affine map `x ↦ Mx + q`. The Lipschitz constant is set to `‖M‖₂`.
    pub fn affine(
        matrix: ndarray::Array2<f64>,
        offset: Option<Vector>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(shape(format!(
                "affine map needs a square matrix, got {:?}",
                matrix.dim()
            )));
        }
        if let Some(q) = &offset {
            if q.len() != n {
                return Err(shape(format!(
                    "offset has length {}, expected {n}",
                    q.len()
                )));
            }
        }
        let l = linalg::operator_norm(matrix.view(), linalg::POWER_SEED);
        Ok(Self::new(n, label, move |x| {
            let mut y = matrix.dot(&x);
            if let Some(q) = &offset {
                y += q;
            }
            y
        })
        .with_lipschitz(l))
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_cocoercivity(mut self, beta: f64) -> Self {
        self.cocoercivity = Some(beta);
        self
    }

    pub fn with_strong_monotonicity(mut self, m: f64) -> Self {
        self.strong_monotonicity = Some(m);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: ArrayView1<'_, f64>) -> Result<Vector> {
        check_input(self.dim, x, &self.label)?;
        let out = self.apply(x);
        check_output(self.dim, &out, &self.label)?;
        Ok(out)
    }

    pub(crate) fn apply(&self, x: ArrayView1<'_, f64>) -> Vector {
        (self.eval)(x)
    }

    /// Pointwise sum `B + C`; constants are combined where they are known.
    pub fn sum(first: &ForwardOracle, second: &ForwardOracle) -> Result<ForwardOracle> {
        if first.dim != second.dim {
            return Err(shape(format!(
                "cannot add operators of dims {} and {}",
                first.dim, second.dim
            )));
        }
        let (a, b) = (first.clone(), second.clone());
        let mut out = ForwardOracle::new(
            first.dim,
            format!("{} + {}", first.label, second.label),
            move |x| a.apply(x) + b.apply(x),
        );
        out.lipschitz = match (first.lipschitz, second.lipschitz) {
            (Some(x), Some(y)) => Some(x + y),
            _ => None,
        };
        Ok(out)
    }
}

impl fmt::Debug for ForwardOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForwardOracle")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("lipschitz", &self.lipschitz)
            .field("cocoercivity", &self.cocoercivity)
            .field("strong_monotonicity", &self.strong_monotonicity)
            .finish()
    }
}

/// Problem constants used by step-size formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Lipschitz constant of `B` (of `B + C` when a two-operator method is run on a three-operator problem).
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Lipschitz constant of `B` in a three-operator problem.
    #[serde(rename = "L1", default, skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    /// `C` is `1/L2`-cocoercive.
    #[serde(rename = "L2", default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    /// Strong monotonicity of `A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

/// Natural residual above which a declared reference solution is rejected.
pub const REFERENCE_RESIDUAL_TOL: f64 = 1e-8;

/// The inclusion `0 ∈ (A + B)(x)`, or `0 ∈ (A + B + C)(x)` when `C` is present.
#[derive(Clone, Debug)]
pub struct SplitInclusion {
    a: ResolventOracle,
    b: ForwardOracle,
    c: Option<ForwardOracle>,
    reference_solution: Option<Vector>,
    constants: Constants,
}

impl SplitInclusion {
    pub fn new(a: ResolventOracle, b: ForwardOracle) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(shape(format!(
                "resolvent dim {} != forward dim {}",
                a.dim(),
                b.dim()
            )));
        }
        let constants = Constants {
            l: b.lipschitz,
            ..Constants::default()
        };
        Ok(Self {
            a,
            b,
            c: None,
            reference_solution: None,
            constants,
        })
    }

    pub fn with_c(mut self, c: ForwardOracle) -> Result<Self> {
        if c.dim() != self.dim() {
            return Err(shape(format!(
                "C has dim {}, expected {}",
                c.dim(),
                self.dim()
            )));
        }
        self.c = Some(c);
        Ok(self)
    }

    pub fn with_constants(mut self, constants: Constants) -> Self {
        self.constants = constants;
        self
    }

    /// Attaches a reference solution after checking that its natural residual
    /// (at unit scale) is at most [`REFERENCE_RESIDUAL_TOL`].
    pub fn with_reference_solution(mut self, x: Vector) -> Result<Self> {
        if x.len() != self.dim() {
            return Err(shape(format!(
                "reference solution has length {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        let r = self.natural_residual(1.0, x.view());
        if !(r <= REFERENCE_RESIDUAL_TOL) {
            return Err(Error::Construction(format!(
                "reference solution has natural residual {r:e} > {REFERENCE_RESIDUAL_TOL:e}"
            )));
        }
        self.reference_solution = Some(x);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn a(&self) -> &ResolventOracle {
        &self.a
    }

    pub fn b(&self) -> &ForwardOracle {
        &self.b
    }

    pub fn c(&self) -> Option<&ForwardOracle> {
        self.c.as_ref()
    }

    pub fn reference_solution(&self) -> Option<&Vector> {
        self.reference_solution.as_ref()
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    /// `B(x)`, plus `C(x)` when present.
    pub fn forward_total(&self, x: ArrayView1<'_, f64>) -> Vector {
        let mut y = self.b.apply(x);
        if let Some(c) = &self.c {
            y += &c.apply(x);
        }
        y
    }

    /// `‖x − J_{λA}(x − λ(B + C)(x))‖`, zero exactly at solutions.
    pub fn natural_residual(&self, lambda: f64, x: ArrayView1<'_, f64>) -> f64 {
        let f = self.forward_total(x);
        let step = &x - &(f * lambda);
        let p = self.a.apply(lambda, step.view());
        linalg::dist(x, p.view())
    }
}

/// Checked `J_{λA}(x)`.
pub fn resolvent_eval(a: &ResolventOracle, lambda: f64, x: ArrayView1<'_, f64>) -> Result<Vector> {
    a.eval(lambda, x)
}

/// `J_{λ(A + mI)}(x)` computed from `A`'s resolvent with scale `λ/(1+λm)` at `x/(1+λm)`.
pub fn shifted_resolvent(
    a: &ResolventOracle,
    m: f64,
    lambda: f64,
    x: ArrayView1<'_, f64>,
) -> Result<Vector> {
    a.shifted(m)?.eval(lambda, x)
}

/// Seeded source of random points, uniform on the cube `[-radius, radius]^dim`.
#[derive(Clone, Debug)]
pub struct PointSampler {
    rng: SplitMix64,
    radius: f64,
}

impl PointSampler {
    pub fn new(seed: u64) -> Self {
        Self::with_radius(seed, 1.0)
    }

    pub fn with_radius(seed: u64, radius: f64) -> Self {
        Self {
            rng: SplitMix64::new(seed),
            radius,
        }
    }

    pub fn sample(&mut self, dim: usize) -> Vector {
        linalg::random_vector(&mut self.rng, dim, -self.radius, self.radius)
    }
}

/// Largest observed ratio `‖B(x) − B(y)‖ / ‖x − y‖` over `trials` random
/// pairs. A lower bound on the Lipschitz constant.
pub fn estimate_lipschitz(
    b: &ForwardOracle,
    sampler: &mut PointSampler,
    trials: usize,
) -> Result<f64> {
    if trials == 0 {
        return Err(param("trials must be at least 1"));
    }
    let mut best: Option<f64> = None;
    for _ in 0..trials {
        let x = sampler.sample(b.dim());
        let y = sampler.sample(b.dim());
        let dx = linalg::dist(x.view(), y.view());
        if dx == 0.0 {
            continue;
        }
        let bx = b.eval(x.view())?;
        let by = b.eval(y.view())?;
        let ratio = linalg::dist(bx.view(), by.view()) / dx;
        best = Some(best.map_or(ratio, |r: f64| r.max(ratio)));
    }
    best.ok_or_else(|| Error::Sampling("every sampled pair was degenerate".into()))
}

fn check_input(dim: usize, x: ArrayView1<'_, f64>, label: &str) -> Result<()> {
    if x.len() != dim {
        return Err(shape(format!(
            "{label}: input has length {}, expected {dim}",
            x.len()
        )));
    }
    if !linalg::all_finite(x) {
        return Err(Error::NonFinite(format!("{label} (input)")));
    }
    Ok(())
}

fn check_output(dim: usize, y: &Vector, label: &str) -> Result<()> {
    if y.len() != dim {
        return Err(shape(format!(
            "{label}: output has length {}, expected {dim}",
            y.len()
        )));
    }
    if !linalg::all_finite(y.view()) {
        return Err(Error::NonFinite(label.to_string()));
    }
    Ok(())
}

pub(crate) fn concat(a: &Vector, b: &Vector) -> Vector {
    a.iter().chain(b.iter()).copied().collect()
}
