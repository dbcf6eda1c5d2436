//! Small dense helpers: norms, operator norm by power iteration and a
//! pivoted Gaussian solve. Problem sizes here are tiny, so nothing is blocked.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::rng::SplitMix64;

/// Power-iteration budget for [`operator_norm`].
pub const POWER_MAX_ITERS: usize = 10_000;
/// Relative change in the singular value estimate at which power iteration stops.
pub const POWER_REL_TOL: f64 = 1e-10;
/// Start-vector seed used when callers do not care about the seed.
pub const POWER_SEED: u64 = 0x5EED;

pub fn norm(x: ArrayView1<'_, f64>) -> f64 {
    x.dot(&x).sqrt()
}

pub fn dist(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub fn all_finite(x: ArrayView1<'_, f64>) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Largest singular value of `k`, by power iteration on `KᵀK` from a seeded
/// start vector.
pub fn operator_norm(k: ArrayView2<'_, f64>, seed: u64) -> f64 {
    let cols = k.ncols();
    if cols == 0 || k.nrows() == 0 || k.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let mut rng = SplitMix64::new(seed);
    let mut v: Array1<f64> = (0..cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let n0 = norm(v.view());
    if n0 == 0.0 {
        v.fill(1.0);
    }
    v /= norm(v.view());

    let mut sigma = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let kv = k.dot(&v);
        let next_sigma = norm(kv.view());
        let w = k.t().dot(&kv);
        let wn = norm(w.view());
        if wn == 0.0 {
            // v landed in the null space; the estimate is whatever we have.
            return next_sigma.max(sigma);
        }
        v = w / wn;
        if (next_sigma - sigma).abs() <= POWER_REL_TOL * next_sigma {
            sigma = next_sigma;
            break;
        }
        sigma = next_sigma;
    }
    // One final Rayleigh step with the converged direction.
    norm(k.dot(&v).view()).max(sigma)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a (numerically) singular matrix.
pub fn solve(a: ArrayView2<'_, f64>, b: ArrayView1<'_, f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.len(), n);
    let mut m: Array2<f64> = a.to_owned();
    let mut rhs = b.to_owned();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs()))
            .unwrap();
        if m[[pivot, col]].abs() <= 1e-14 * scale {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                m.swap([pivot, j], [col, j]);
            }
            rhs.swap(pivot, col);
        }
        for row in col + 1..n {
            let f = m[[row, col]] / m[[col, col]];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[[row, j]] -= f * m[[col, j]];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in row + 1..n {
            acc -= m[[row, j]] * x[j];
        }
        x[row] = acc / m[[row, row]];
    }
    Some(x)
}

/// Row-major matrix with entries uniform on `[lo, hi)`.
pub(crate) fn random_matrix(
    rng: &mut SplitMix64,
    rows: usize,
    cols: usize,
    lo: f64,
    hi: f64,
) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.uniform(lo, hi))
}

pub(crate) fn random_vector(rng: &mut SplitMix64, n: usize, lo: f64, hi: f64) -> Array1<f64> {
    (0..n).map(|_| rng.uniform(lo, hi)).collect()
}
