//! Small numerical building blocks shared by the geometry modules.

use nalgebra::DMatrix;

// 10-point Gauss-Legendre rule on [-1, 1], positive half.
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Fixed 10-point Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// Adaptive Gauss-Legendre quadrature: panels are bisected until the
/// one-panel and two-panel estimates agree to `tol` (absolute, split across
/// sub-panels).
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gauss_legendre(f, a, b);
    adaptive_step(f, a, b, whole, tol.max(1e-15), 48)
}

fn adaptive_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gauss_legendre(f, a, mid);
    let right = gauss_legendre(f, mid, b);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= tol {
        return refined;
    }
    adaptive_step(f, a, mid, left, 0.5 * tol, depth - 1)
        + adaptive_step(f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Bisection on a sign-changing bracket. Returns the midpoint once the bracket
/// is narrower than `xtol` or cannot shrink further in floating point.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= xtol || mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse of a symmetric positive-definite matrix, or `None` when the
/// Cholesky factorisation fails. The result is symmetrised exactly.
pub fn spd_inverse(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = g.clone().cholesky()?;
    let inv = chol.inverse();
    Some(symmetrize(&inv))
}

/// `sqrt(det g)` for a positive-definite matrix.
pub fn sqrt_det_spd(g: &DMatrix<f64>) -> Option<f64> {
    let chol = g.clone().cholesky()?;
    Some(chol.l_dirty().diagonal().iter().take(g.nrows()).product::<f64>().abs())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Max-norm of a slice.
pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Ordered sum with Neumaier compensation; deterministic for a given order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// All permutations of `0..len` with their signs, in lexicographic order.
pub fn signed_permutations(len: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..len).collect();
    permute(&mut current, 0, &mut out);
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn permute(items: &mut Vec<usize>, start: usize, out: &mut Vec<(Vec<usize>, f64)>) {
    if start == items.len() {
        out.push((items.clone(), permutation_sign(items)));
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, out);
        items.swap(start, i);
    }
}

/// Sign of a permutation given as an image list (counts inversions).
pub fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
