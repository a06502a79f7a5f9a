//! Smooth periodic test metrics and variations.
//!
//! All fields are trigonometric polynomials in the unit-period coordinates.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{PeriodicGrid, PeriodicMetricField, VariationField};
use crate::error::{GeometryError, Result};

pub const MAX_AMPLITUDE: f64 = 0.2;

fn check_amplitude(amp: f64) -> Result<()> {
    if !(amp.abs() <= MAX_AMPLITUDE) {
        return Err(GeometryError::InvalidParameter(format!("amplitude {amp} exceeds {MAX_AMPLITUDE}")));
    }
    Ok(())
}

/// Conformal factor exponent `phi(x) = amp sin(2 pi x_0)`.
pub fn conformal_exponent(x: &[f64], amp: f64) -> f64 {
    amp * (TAU * x[0]).sin()
}

/// `g = exp(2 phi) delta` with [`conformal_exponent`].
pub fn conformal(grid: PeriodicGrid, amp: f64) -> Result<PeriodicMetricField> {
    check_amplitude(amp)?;
    let d = grid.dim();
    PeriodicMetricField::from_fn(grid, |x| DMatrix::identity(d, d) * (2.0 * conformal_exponent(x, amp)).exp())
}

/// Exact scalar curvature of [`conformal`] in dimension `d`:
/// `exp(-2 phi) (-2(d-1) lap phi - (d-2)(d-1) |grad phi|^2)`.
pub fn conformal_scalar_curvature(x: &[f64], amp: f64, d: usize) -> f64 {
    let phi = conformal_exponent(x, amp);
    let dphi = amp * TAU * (TAU * x[0]).cos();
    let lap = -amp * TAU * TAU * (TAU * x[0]).sin();
    let d = d as f64;
    (-2.0 * phi).exp() * (-2.0 * (d - 1.0) * lap - (d - 2.0) * (d - 1.0) * dphi * dphi)
}

/// Volume density `exp(d phi)` of [`conformal`].
pub fn conformal_volume_density(x: &[f64], amp: f64, d: usize) -> f64 {
    (d as f64 * conformal_exponent(x, amp)).exp()
}

/// Non-conformal metric `delta + amp m(x)` with bounded trigonometric entries;
/// off-diagonal entries carry weight one half, so the metric is diagonally
/// dominant for `d <= 4`.
pub fn trigonometric(grid: PeriodicGrid, amp: f64) -> Result<PeriodicMetricField> {
    check_amplitude(amp)?;
    let d = grid.dim();
    PeriodicMetricField::from_fn(grid, |x| {
        DMatrix::from_fn(d, d, |i, j| {
            let w = if i == j { 1.0 } else { 0.5 };
            let arg = if i == j { x[i] + x[(i + 1) % d] } else { x[i] + x[j] };
            let entry = w * (TAU * arg + 0.7 * (i + j) as f64).cos();
            if i == j { 1.0 + amp * entry } else { amp * entry }
        })
    })
}

/// Deterministic smooth variation: each component `v_ij` (i <= j) is a
/// constant plus one plane wave with wave vector in `{-1,0,1}^d`.
pub fn random_variation(grid: PeriodicGrid, seed: u64, amp: f64) -> Result<VariationField> {
    let d = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for i in 0..d {
        for j in i..d {
            let wave: Vec<f64> = (0..d).map(|_| rng.random_range(-1i32..=1) as f64).collect();
            let phase = rng.random_range(0.0..TAU);
            let a = amp * rng.random_range(0.5..1.0);
            let c = amp * rng.random_range(-0.5..0.5);
            modes.push((i, j, wave, phase, a, c));
        }
    }
    VariationField::from_fn(grid, |x| {
        let mut v = DMatrix::zeros(d, d);
        for (i, j, wave, phase, a, c) in &modes {
            let arg: f64 = wave.iter().zip(x).map(|(w, xi)| w * xi).sum();
            let val = c + a * (TAU * arg + phase).sin();
            v[(*i, *j)] = val;
            v[(*j, *i)] = val;
        }
        v
    })
}
