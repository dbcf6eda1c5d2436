//! Seeded test problems with known constants and reference solutions.
//!
//! Random data is drawn from [`SplitMix64`] in a fixed order, so an instance
//! is reproduced bit for bit from its seed. Reference solutions come from
//! extragradient or proximal-gradient runs (never from the methods under
//! test) and are certified at construction.

mod reference;

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{config, param, Error, Result};
use crate::linalg::{self, random_matrix, random_vector};
use crate::operators::{
    box_uniform, l1_norm, product_space_embed, scaled_identity_shift, zero, Constants,
    ForwardOracle, SplitInclusion,
};
use crate::rng::SplitMix64;

pub use reference::{kkt_box_residual, CERTIFY_TOL};

/// Half-width of the default box constraint `[−10, 10]^n`.
pub const BOX_RADIUS: f64 = 10.0;

pub const PROBLEM_NAMES: [&str; 8] = [
    "rotation",
    "split_rotation",
    "cubic",
    "affine_vi",
    "strongly_monotone",
    "composite_min",
    "three_operator",
    "saddle_bilinear",
];

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub inclusion: SplitInclusion,
    pub name: String,
    pub dims: BTreeMap<String, usize>,
    pub generator_seed: Option<u64>,
    pub notes: String,
    /// Components `B_i` with `B = (1/n) Σ B_i`, when the problem is split.
    pub parts: Vec<ForwardOracle>,
    /// Generated data (matrices row-major) for the JSON export.
    pub data: BTreeMap<String, Value>,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.inclusion.dim()
    }

    /// JSON document with the generated data, seeds, constants and
    /// reference solution.
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "dims": self.dims,
            "generator_seed": self.generator_seed,
            "constants": self.inclusion.constants(),
            "reference_solution": self.inclusion.reference_solution().map(|v| v.to_vec()),
            "notes": self.notes,
            "data": self.data,
        })
    }
}

fn matrix_json(m: &Array2<f64>) -> Value {
    json!({
        "rows": m.nrows(),
        "cols": m.ncols(),
        "data": m.iter().copied().collect::<Vec<f64>>(),
    })
}

fn dims(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn rotation_map(n: usize, scale: f64) -> ForwardOracle {
    ForwardOracle::new(2 * n, "(z2, −z1)", move |z| {
        let mut out = Array1::zeros(2 * n);
        for i in 0..n {
            out[i] = scale * z[n + i];
            out[n + i] = -scale * z[i];
        }
        out
    })
    .with_lipschitz(scale.abs())
}

/// `A = 0`, `B(z1, z2) = (z2, −z1)` on `Rⁿ × Rⁿ`; `L = 1`, solution `0`.
pub fn make_rotation(n: usize) -> Result<ProblemInstance> {
    if n == 0 {
        return Err(param("rotation needs n ≥ 1"));
    }
    let inclusion = SplitInclusion::new(zero(2 * n), rotation_map(n, 1.0))?
        .with_reference_solution(Array1::zeros(2 * n))?;
    Ok(ProblemInstance {
        inclusion,
        name: "rotation".into(),
        dims: dims(&[("n", n), ("dim", 2 * n)]),
        generator_seed: None,
        notes: "B is skew and norm preserving: <z, Bz> = 0, |Bz| = |z|".into(),
        parts: Vec::new(),
        data: BTreeMap::new(),
    })
}

/// The rotation problem with `B = ½(B_1 + B_2)`, `B_1(z) = 2(z2, 0)`,
/// `B_2(z) = 2(0, −z1)`; each part is 2-Lipschitz.
pub fn make_split_rotation(n: usize) -> Result<ProblemInstance> {
    let mut inst = make_rotation(n)?;
    let b1 = ForwardOracle::new(2 * n, "2(z2, 0)", move |z| {
        let mut out = Array1::zeros(2 * n);
        for i in 0..n {
            out[i] = 2.0 * z[n + i];
        }
        out
    })
    .with_lipschitz(2.0);
    let b2 = ForwardOracle::new(2 * n, "2(0, −z1)", move |z| {
        let mut out = Array1::zeros(2 * n);
        for i in 0..n {
            out[n + i] = -2.0 * z[i];
        }
        out
    })
    .with_lipschitz(2.0);
    inst.name = "split_rotation".into();
    inst.notes = "B = (B1 + B2)/2 with B1 = 2(z2, 0), B2 = 2(0, -z1); parts are 2-Lipschitz".into();
    inst.parts = vec![b1, b2];
    Ok(inst)
}

/// One-dimensional `A = 0`, `B(x) = x³`: monotone and only locally Lipschitz.
pub fn make_cubic() -> Result<ProblemInstance> {
    let b = ForwardOracle::new(1, "x³", |x| x.mapv(|v| v * v * v));
    let inclusion = SplitInclusion::new(zero(1), b)?.with_reference_solution(Array1::zeros(1))?;
    Ok(ProblemInstance {
        inclusion,
        name: "cubic".into(),
        dims: dims(&[("dim", 1)]),
        generator_seed: None,
        notes: "B(x) = x^3 has no global Lipschitz constant".into(),
        parts: Vec::new(),
        data: BTreeMap::new(),
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AffineViSpec {
    pub n: usize,
    pub skew_weight: f64,
    /// Draw a random offset `q`; otherwise `q = 0`.
    pub offset: bool,
}

impl Default for AffineViSpec {
    fn default() -> Self {
        Self {
            n: 4,
            skew_weight: 0.5,
            offset: true,
        }
    }
}

/// `B(x) = Mx + q`, `M = w·S + (1 − w)·PᵀP` (`S` skew), `A = N_[−10,10]^n`.
pub fn make_affine_vi(seed: u64, n: usize, skew_weight: f64) -> Result<ProblemInstance> {
    make_affine_vi_with(
        seed,
        &AffineViSpec {
            n,
            skew_weight,
            ..AffineViSpec::default()
        },
    )
}

pub fn make_affine_vi_with(seed: u64, spec: &AffineViSpec) -> Result<ProblemInstance> {
    let (n, w) = (spec.n, spec.skew_weight);
    if n == 0 {
        return Err(param("affine VI needs n ≥ 1"));
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(param(format!("skew_weight must lie in [0, 1], got {w}")));
    }
    let mut rng = SplitMix64::new(seed);
    let g = random_matrix(&mut rng, n, n, -1.0, 1.0);
    let p = random_matrix(&mut rng, n, n, -1.0, 1.0);
    let q = if spec.offset {
        random_vector(&mut rng, n, -1.0, 1.0)
    } else {
        Array1::zeros(n)
    };
    let skew = &g - &g.t();
    let m = &skew * w + &(p.t().dot(&p) * (1.0 - w));
    let b = ForwardOracle::affine(m.clone(), Some(q.clone()), "Mx + q")?;
    let a = box_uniform(n, -BOX_RADIUS, BOX_RADIUS)?;
    let l = b.lipschitz.expect("affine maps carry their norm");
    let inclusion = SplitInclusion::new(a, b)?;
    let gamma = if l > 0.0 { 0.5 / l } else { 1.0 };
    let x = reference::extragradient(
        inclusion.a(),
        |v| inclusion.forward_total(v),
        gamma,
        Array1::zeros(n),
        |v| inclusion.natural_residual(1.0, v.view()),
    )?;
    reference::certify_box(&inclusion, &x, -BOX_RADIUS, BOX_RADIUS)?;
    let inclusion = inclusion.with_reference_solution(x)?;
    let data = BTreeMap::from([
        ("M".to_string(), matrix_json(&m)),
        ("q".to_string(), json!(q.to_vec())),
        ("box".to_string(), json!([-BOX_RADIUS, BOX_RADIUS])),
    ]);
    Ok(ProblemInstance {
        inclusion,
        name: "affine_vi".into(),
        dims: dims(&[("n", n), ("dim", n)]),
        generator_seed: Some(seed),
        notes: format!("M = {w}*(G - G^T) + {}*P^T P; L = |M|_2", 1.0 - w),
        parts: Vec::new(),
        data,
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StronglyMonotoneSpec {
    pub n: usize,
    pub m: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Include the box normal cone in `A`.
    pub constrained: bool,
    /// Draw `M` symmetric positive definite.
    pub symmetric: bool,
    pub offset: bool,
}

impl Default for StronglyMonotoneSpec {
    fn default() -> Self {
        Self {
            n: 3,
            m: 0.5,
            l: 2.0,
            constrained: true,
            symmetric: false,
            offset: true,
        }
    }
}

/// `A = N_[−10,10]^n + mI` (resolvent through the shift identity), `B(x) = Mx + q`
/// monotone with `‖M‖₂ = L`.
pub fn make_strongly_monotone(seed: u64, n: usize, m: f64, l: f64) -> Result<ProblemInstance> {
    make_strongly_monotone_with(
        seed,
        &StronglyMonotoneSpec {
            n,
            m,
            l,
            ..StronglyMonotoneSpec::default()
        },
    )
}

pub fn make_strongly_monotone_with(
    seed: u64,
    spec: &StronglyMonotoneSpec,
) -> Result<ProblemInstance> {
    let (n, m, l) = (spec.n, spec.m, spec.l);
    if n == 0 {
        return Err(param("strongly monotone problem needs n ≥ 1"));
    }
    if !(m > 0.0 && m <= l && l.is_finite()) {
        return Err(param(format!("need 0 < m ≤ L, got m = {m}, L = {l}")));
    }
    let mut rng = SplitMix64::new(seed);
    let g = random_matrix(&mut rng, n, n, -1.0, 1.0);
    let p = random_matrix(&mut rng, n, n, -1.0, 1.0);
    let q = if spec.offset {
        random_vector(&mut rng, n, -1.0, 1.0)
    } else {
        Array1::zeros(n)
    };
    let mut raw = p.t().dot(&p);
    if spec.symmetric {
        for i in 0..n {
            raw[[i, i]] += 0.1;
        }
    } else {
        raw = &raw + &(&g - &g.t());
    }
    let norm = linalg::operator_norm(raw.view(), linalg::POWER_SEED);
    if norm == 0.0 {
        return Err(Error::Construction("generated matrix vanished".into()));
    }
    let mat = raw * (l / norm);
    let b = ForwardOracle::affine(mat.clone(), Some(q.clone()), "Mx + q")?;
    let a = if spec.constrained {
        box_uniform(n, -BOX_RADIUS, BOX_RADIUS)?.shifted(m)?
    } else {
        scaled_identity_shift(n, m, None)?
    };
    let constants = Constants {
        l: Some(l),
        m: Some(m),
        ..Constants::default()
    };
    let inclusion = SplitInclusion::new(a, b)?.with_constants(constants);
    let x = reference::extragradient(
        inclusion.a(),
        |v| inclusion.forward_total(v),
        0.5 / l,
        Array1::zeros(n),
        |v| inclusion.natural_residual(1.0, v.view()),
    )?;
    reference::certify(&inclusion, &x)?;
    let inclusion = inclusion.with_reference_solution(x)?;
    let mut data = BTreeMap::from([
        ("M".to_string(), matrix_json(&mat)),
        ("q".to_string(), json!(q.to_vec())),
        ("m".to_string(), json!(m)),
    ]);
    if spec.constrained {
        data.insert("box".into(), json!([-BOX_RADIUS, BOX_RADIUS]));
    }
    Ok(ProblemInstance {
        inclusion,
        name: "strongly_monotone".into(),
        dims: dims(&[("n", n), ("dim", n)]),
        generator_seed: Some(seed),
        notes: format!("A = N_box + {m} I (or {m} I unconstrained), |M|_2 = {l}"),
        parts: Vec::new(),
        data,
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompositeSpec {
    pub rows: usize,
    pub cols: usize,
    pub tau: f64,
    /// Use `b = 0`.
    pub zero_rhs: bool,
}

impl Default for CompositeSpec {
    fn default() -> Self {
        Self {
            rows: 10,
            cols: 20,
            tau: 0.1,
            zero_rhs: false,
        }
    }
}

/// `min τ‖x‖₁ + ½‖Px − b‖²`: `A = ∂(τ‖·‖₁)`, `B = Pᵀ(P· − b)` with
/// `L = ‖P‖₂²` and cocoercivity `1/L`.
pub fn make_composite_min(
    seed: u64,
    rows: usize,
    cols: usize,
    tau: f64,
) -> Result<ProblemInstance> {
    make_composite_min_with(
        seed,
        &CompositeSpec {
            rows,
            cols,
            tau,
            ..CompositeSpec::default()
        },
    )
}

pub fn make_composite_min_with(seed: u64, spec: &CompositeSpec) -> Result<ProblemInstance> {
    let (rows, cols, tau) = (spec.rows, spec.cols, spec.tau);
    if rows == 0 || cols == 0 {
        return Err(param("composite problem needs rows, cols ≥ 1"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(param(format!("tau must be positive, got {tau}")));
    }
    let mut rng = SplitMix64::new(seed);
    let pm = random_matrix(&mut rng, rows, cols, -1.0, 1.0);
    let rhs = if spec.zero_rhs {
        Array1::zeros(rows)
    } else {
        random_vector(&mut rng, rows, -1.0, 1.0)
    };
    let gram = pm.t().dot(&pm);
    let offset = -pm.t().dot(&rhs);
    let b = ForwardOracle::affine(gram, Some(offset), "Pᵀ(Px − b)")?;
    let l = b.lipschitz.expect("affine maps carry their norm");
    let b = if l > 0.0 {
        b.with_cocoercivity(1.0 / l)
    } else {
        b
    };
    let a = l1_norm(cols, tau)?;
    let inclusion = SplitInclusion::new(a, b)?;
    let gamma = if l > 0.0 { 1.0 / l } else { 1.0 };
    let x = reference::proximal_gradient(
        inclusion.a(),
        |v| inclusion.forward_total(v),
        gamma,
        Array1::zeros(cols),
    )?;
    reference::certify(&inclusion, &x)?;
    let inclusion = inclusion.with_reference_solution(x)?;
    let data = BTreeMap::from([
        ("P".to_string(), matrix_json(&pm)),
        ("b".to_string(), json!(rhs.to_vec())),
        ("tau".to_string(), json!(tau)),
    ]);
    Ok(ProblemInstance {
        inclusion,
        name: "composite_min".into(),
        dims: dims(&[("rows", rows), ("cols", cols), ("dim", cols)]),
        generator_seed: Some(seed),
        notes: "x* = 0 whenever tau >= |P^T b|_inf".into(),
        parts: Vec::new(),
        data,
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThreeOperatorSpec {
    pub n: usize,
    /// `L1`, the scale of the rotation `B`; `0` removes `B`.
    pub coupling: f64,
    /// `L2`, the largest eigenvalue of `Q`.
    #[serde(rename = "L2")]
    pub l2: f64,
}

impl Default for ThreeOperatorSpec {
    fn default() -> Self {
        Self {
            n: 4,
            coupling: 1.0,
            l2: 4.0,
        }
    }
}

/// `A = N_[−10,10]^n`, `B = L1·(z2, −z1)`, `C(x) = Q(x − c)` with `Q ≻ 0`,
/// `λ_max(Q) = L2`, `c` inside the box.
pub fn make_three_operator(seed: u64, n: usize) -> Result<ProblemInstance> {
    make_three_operator_with(
        seed,
        &ThreeOperatorSpec {
            n,
            ..ThreeOperatorSpec::default()
        },
    )
}

pub fn make_three_operator_with(seed: u64, spec: &ThreeOperatorSpec) -> Result<ProblemInstance> {
    let n = spec.n;
    if n < 2 || !n.is_multiple_of(2) {
        return Err(param(format!(
            "three-operator problem needs even n ≥ 2, got {n}"
        )));
    }
    let (l1, l2) = (spec.coupling, spec.l2);
    if !(l1 >= 0.0 && l1.is_finite()) || !(l2 > 0.0 && l2.is_finite()) {
        return Err(param("need coupling ≥ 0 and L2 > 0"));
    }
    if !(2.0 / (4.0 * l1 + l2) > 1.0 / (2.0 * (l1 + l2))) {
        return Err(Error::Construction(
            "three-operator bound does not exceed the two-operator bound".into(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let p = random_matrix(&mut rng, n, n, -1.0, 1.0);
    let center = random_vector(&mut rng, n, -0.5 * BOX_RADIUS, 0.5 * BOX_RADIUS);
    let mut q = p.t().dot(&p);
    for i in 0..n {
        q[[i, i]] += 0.5;
    }
    let scale = l2 / linalg::operator_norm(q.view(), linalg::POWER_SEED);
    let q = q * scale;
    let qc = q.dot(&center);
    let c = ForwardOracle::affine(q.clone(), Some(-qc), "Q(x − c)")?
        .with_lipschitz(l2)
        .with_cocoercivity(1.0 / l2);
    let b = if l1 > 0.0 {
        rotation_map(n / 2, l1)
    } else {
        ForwardOracle::zero(n)
    };
    let constants = Constants {
        l: Some(l1 + l2),
        l1: Some(l1),
        l2: Some(l2),
        m: None,
    };
    let inclusion = SplitInclusion::new(box_uniform(n, -BOX_RADIUS, BOX_RADIUS)?, b)?
        .with_c(c)?
        .with_constants(constants);
    let x = reference::extragradient(
        inclusion.a(),
        |v| inclusion.forward_total(v),
        0.5 / (l1 + l2),
        Array1::zeros(n),
        |v| inclusion.natural_residual(1.0, v.view()),
    )?;
    reference::certify_box(&inclusion, &x, -BOX_RADIUS, BOX_RADIUS)?;
    let inclusion = inclusion.with_reference_solution(x)?;
    let data = BTreeMap::from([
        ("Q".to_string(), matrix_json(&q)),
        ("c".to_string(), json!(center.to_vec())),
        ("L1".to_string(), json!(l1)),
        ("L2".to_string(), json!(l2)),
        ("box".to_string(), json!([-BOX_RADIUS, BOX_RADIUS])),
    ]);
    Ok(ProblemInstance {
        inclusion,
        name: "three_operator".into(),
        dims: dims(&[("n", n), ("dim", n)]),
        generator_seed: Some(seed),
        notes: "C is the gradient of (1/2)(x-c)^T Q (x-c), 1/L2-cocoercive; with coupling 0 the solution is c".into(),
        parts: Vec::new(),
        data,
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaddleSpec {
    pub n1: usize,
    pub n2: usize,
    /// Scale of `K`; `0` decouples the players.
    pub coupling: f64,
    /// Drop the linear terms of `f` and `g`.
    pub zero_linear: bool,
}

impl Default for SaddleSpec {
    fn default() -> Self {
        Self {
            n1: 3,
            n2: 2,
            coupling: 1.0,
            zero_linear: false,
        }
    }
}

/// `min_x max_y g(x) + ⟨Kx, y⟩ − f(y)` with `g = ½‖·‖² + ⟨s_g, ·⟩` and
/// `f = ½‖·‖² + ⟨s_f, ·⟩`, posed as `0 ∈ diag(∂g, ∂f)(x, y) + (Kᵀy, −Kx)`.
pub fn make_saddle_bilinear(seed: u64, n1: usize, n2: usize) -> Result<ProblemInstance> {
    make_saddle_bilinear_with(
        seed,
        &SaddleSpec {
            n1,
            n2,
            ..SaddleSpec::default()
        },
    )
}

pub fn make_saddle_bilinear_with(seed: u64, spec: &SaddleSpec) -> Result<ProblemInstance> {
    let (n1, n2) = (spec.n1, spec.n2);
    if n1 == 0 || n2 == 0 {
        return Err(param("saddle problem needs n1, n2 ≥ 1"));
    }
    let mut rng = SplitMix64::new(seed);
    let k = random_matrix(&mut rng, n2, n1, -1.0, 1.0) * spec.coupling;
    let (sg, sf) = if spec.zero_linear {
        (Array1::zeros(n1), Array1::zeros(n2))
    } else {
        (
            random_vector(&mut rng, n1, -1.0, 1.0),
            random_vector(&mut rng, n2, -1.0, 1.0),
        )
    };
    let prox_g = scaled_identity_shift(n1, 1.0, Some(sg.clone()))?;
    let prox_f = scaled_identity_shift(n2, 1.0, Some(sf.clone()))?;
    let inclusion = product_space_embed(&prox_g, &prox_f, k.clone())?;
    let l = inclusion.constants().l.unwrap_or(0.0);
    let gamma = if l > 0.0 { 0.5 / l } else { 1.0 };
    let x = reference::extragradient(
        inclusion.a(),
        |v| inclusion.forward_total(v),
        gamma,
        Array1::zeros(n1 + n2),
        |v| inclusion.natural_residual(1.0, v.view()),
    )?;
    reference::certify(&inclusion, &x)?;
    let inclusion = inclusion.with_reference_solution(x)?;
    let data = BTreeMap::from([
        ("K".to_string(), matrix_json(&k)),
        ("s_g".to_string(), json!(sg.to_vec())),
        ("s_f".to_string(), json!(sf.to_vec())),
    ]);
    Ok(ProblemInstance {
        inclusion,
        name: "saddle_bilinear".into(),
        dims: dims(&[("n1", n1), ("n2", n2), ("dim", n1 + n2)]),
        generator_seed: Some(seed),
        notes: "forward part (K^T y, -Kx) is skew; L = |K|_2".into(),
        parts: Vec::new(),
        data,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RotationParams {
    #[serde(default = "one")]
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

fn one() -> usize {
    1
}

fn parse<T: for<'de> Deserialize<'de>>(name: &str, params: &Value) -> Result<T> {
    let params = if params.is_null() { &json!({}) } else { params };
    T::deserialize(params).map_err(|e| param(format!("{name}: {e}")))
}

/// Builds a problem by name from JSON parameters (see the `*Spec` types).
pub fn make_problem(name: &str, params: &Value, seed: u64) -> Result<ProblemInstance> {
    match name {
        "rotation" => make_rotation(parse::<RotationParams>(name, params)?.n),
        "split_rotation" => make_split_rotation(parse::<RotationParams>(name, params)?.n),
        "cubic" => {
            parse::<NoParams>(name, params)?;
            make_cubic()
        }
        "affine_vi" => make_affine_vi_with(seed, &parse(name, params)?),
        "strongly_monotone" => make_strongly_monotone_with(seed, &parse(name, params)?),
        "composite_min" => make_composite_min_with(seed, &parse(name, params)?),
        "three_operator" => make_three_operator_with(seed, &parse(name, params)?),
        "saddle_bilinear" => make_saddle_bilinear_with(seed, &parse(name, params)?),
        other => Err(config(format!(
            "unknown problem `{other}`; expected one of {}",
            PROBLEM_NAMES.join(", ")
        ))),
    }
}
