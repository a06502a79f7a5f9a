use std::f64::consts::TAU;

use serde::Serialize;

use super::definiteness::{classify_definiteness, Definiteness};
use crate::error::{GeometryError, Result};
use crate::manifold_numerics::PeriodicGrid;
use crate::warped_geometry::{hessian_nodes_from, quotients_from, GraphHypersurface, HypersurfacePointData, WarpedProduct};

/// Index of the largest (`max = true`) or smallest value; ties go to the
/// lowest node index, i.e. the lexicographically smallest multi-index.
pub fn extremal_node(values: &[f64], max: bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if (max && v > values[best]) || (!max && v < values[best]) {
            best = i;
        }
    }
    best
}

/// Sign data of the quotient and operator at the height extrema of a graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremumDiagnostics {
    /// `(n-1-2k)(log lambda)'(r_max) H_2k - H_{2k+1}` at the highest node.
    pub at_max: f64,
    /// Same expression at the lowest node.
    pub at_min: f64,
    pub node_max: Vec<usize>,
    pub node_min: Vec<usize>,
    pub r_max: f64,
    pub r_min: f64,
    /// `(n-1-2k)(log lambda)'` at `r_max` and `r_min`.
    pub slope_at_max: f64,
    pub slope_at_min: f64,
    /// Definiteness of `-2 E_(k)` at each extremum.
    pub operator_at_max: Definiteness,
    pub operator_at_min: Definiteness,
}

impl ExtremumDiagnostics {
    /// Whether the expected signs hold within `tol`: `at_min >= -tol` and
    /// `at_max <= tol` where `-2E` is positive semi-definite, reversed where
    /// it is negative semi-definite. `None` if `-2E` is indefinite at either
    /// extremum.
    pub fn signs_hold(&self, tol: f64) -> Option<bool> {
        let at_min = match self.operator_at_min {
            Definiteness::PositiveSemi => self.at_min >= -tol,
            Definiteness::NegativeSemi => self.at_min <= tol,
            Definiteness::Indefinite => return None,
        };
        let at_max = match self.operator_at_max {
            Definiteness::PositiveSemi => self.at_max <= tol,
            Definiteness::NegativeSemi => self.at_max >= -tol,
            Definiteness::Indefinite => return None,
        };
        Some(at_min && at_max)
    }
}

fn operator_definiteness(p: &HypersurfacePointData) -> Result<Definiteness> {
    classify_definiteness(&(&p.lovelock.einstein * -2.0), &p.metric)
}

pub fn extremum_diagnostics(gh: &GraphHypersurface, k: usize) -> Result<ExtremumDiagnostics> {
    extremum_from(gh, k, &gh.evaluate(k)?)
}

fn extremum_from(gh: &GraphHypersurface, k: usize, data: &[HypersurfacePointData]) -> Result<ExtremumDiagnostics> {
    let u = gh.heights();
    let wp = gh.ambient();
    let n_term = wp.n() as f64 - 1.0 - 2.0 * k as f64;
    let slope = |node: usize| -> Result<f64> {
        let (lam, d1, _) = wp.profile(u[node])?;
        Ok(n_term * d1 / lam)
    };
    let (imax, imin) = (extremal_node(u, true), extremal_node(u, false));
    let (slope_at_max, slope_at_min) = (slope(imax)?, slope(imin)?);
    Ok(ExtremumDiagnostics {
        at_max: slope_at_max * data[imax].h2k - data[imax].h2k1,
        at_min: slope_at_min * data[imin].h2k - data[imin].h2k1,
        slope_at_max,
        slope_at_min,
        node_max: gh.grid().multi_index(imax),
        node_min: gh.grid().multi_index(imin),
        r_max: u[imax],
        r_min: u[imin],
        operator_at_max: operator_definiteness(&data[imax])?,
        operator_at_min: operator_definiteness(&data[imin])?,
    })
}

/// Max over nodes of `|-2 E^{ij} nabla_ij phi - (lambda c H_2k - lambda a H_{2k+1})|`.
///
/// When `H_{2k+1} = c H_2k` the subtracted term equals
/// `lambda (1 - a) H_{2k+1}`, so the residual vanishes for a slice with the
/// matching constant and is proportional to `|c_true - c|` otherwise.
pub fn elliptic_residual(gh: &GraphHypersurface, k: usize, c: f64) -> Result<f64> {
    let data = gh.evaluate(k)?;
    let nodes = hessian_nodes_from(gh, k, &data)?;
    let mut worst = 0.0_f64;
    for (node, (p, res)) in data.iter().zip(&nodes).enumerate() {
        let lam = gh.ambient().warping().lambda(gh.heights()[node]);
        let rhs = lam * c * p.h2k - lam * p.normal_angle * p.h2k1;
        worst = worst.max((res.operator_on_phi - rhs).abs());
    }
    Ok(worst)
}

/// Version of the perturbation library; bump when a mode changes.
pub const MODE_LIBRARY_VERSION: u32 = 1;

/// Fixed smooth periodic perturbation shapes `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    /// `cos(2 pi x_0)`.
    SingleCosine,
    /// `cos(2 pi x_0) + cos(2 pi x_1) / 2`.
    TwoMode,
}

impl PerturbationMode {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::SingleCosine => (TAU * x[0]).cos(),
            Self::TwoMode => (TAU * x[0]).cos() + 0.5 * (TAU * x.get(1).copied().unwrap_or(0.0)).cos(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::SingleCosine => "single-cosine",
            Self::TwoMode => "two-mode",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "single-cosine" => Some(Self::SingleCosine),
            "two-mode" => Some(Self::TwoMode),
            _ => None,
        }
    }
}

/// `max - min` of a nodal field.
pub fn oscillation(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub eps: f64,
    /// Oscillation of the quotient field of `u = r0 + eps psi`.
    pub oscillation: Result<f64>,
}

/// Quotient oscillation of `u = r0 + eps psi` on an `n_grid`-point fiber grid
/// for each `eps`.
pub fn perturbation_scan(
    wp: &WarpedProduct,
    r0: f64,
    mode: PerturbationMode,
    eps_list: &[f64],
    k: usize,
    n_grid: usize,
) -> Result<Vec<ScanEntry>> {
    let grid = PeriodicGrid::new(wp.n() - 1, n_grid)?;
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let oscillation = GraphHypersurface::from_fn(wp.clone(), grid.clone(), |x| r0 + eps * mode.eval(x))
                .and_then(|gh| quotients_from(&gh, &gh.evaluate(k)?))
                .map(|q| oscillation(&q));
            ScanEntry { eps, oscillation }
        })
        .collect())
}

/// `2 f(eps) - f(2 eps)` for `f(eps) = oscillation(eps) / eps`: removes the
/// linear term of `f` and estimates its limit at zero.
pub fn richardson_slope(osc_eps: f64, osc_2eps: f64, eps: f64) -> f64 {
    2.0 * osc_eps / eps - osc_2eps / (2.0 * eps)
}

/// Tolerance of the inequality `max |nabla r| <= min slack`.
pub const BERNSTEIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinReport {
    /// `(n-1-2k) lambda'/lambda - H_{2k+1}/H_2k` per node.
    pub slack: Vec<f64>,
    pub min_slack: f64,
    /// `max |nabla r|_g`.
    pub max_gradient: f64,
    pub slack_nonneg: bool,
    pub grad_bound_ok: bool,
    /// Bounds `C1 = min H_2k`, `C2 = max H_2k`.
    pub c1: f64,
    pub c2: f64,
    pub hypotheses_hold: bool,
    /// False only if both hypotheses hold but the graph is not a slice.
    pub conclusion_consistent: bool,
}

pub fn bernstein_hypothesis_check(gh: &GraphHypersurface, k: usize) -> Result<BernsteinReport> {
    let data = gh.evaluate(k)?;
    let wp = gh.ambient();
    let n_term = wp.n() as f64 - 1.0 - 2.0 * k as f64;
    let mut slack = Vec::with_capacity(data.len());
    for (node, p) in data.iter().enumerate() {
        if !(p.h2k > 0.0) || p.h2k_vanishes() {
            return Err(GeometryError::NonPositiveH2k { node: gh.grid().multi_index(node), value: p.h2k });
        }
        let (lam, d1, _) = wp.profile(gh.heights()[node])?;
        slack.push(n_term * d1 / lam - p.h2k1 / p.h2k);
    }
    let min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
    let max_gradient = data.iter().map(|p| p.gradient_norm_sq.max(0.0).sqrt()).fold(0.0, f64::max);
    let c1 = data.iter().map(|p| p.h2k).fold(f64::INFINITY, f64::min);
    let c2 = data.iter().map(|p| p.h2k).fold(f64::NEG_INFINITY, f64::max);
    let grad_bound_ok = max_gradient <= min_slack + BERNSTEIN_TOL;
    let hypotheses_hold = grad_bound_ok && c1 > 0.0;
    Ok(BernsteinReport {
        min_slack,
        max_gradient,
        slack_nonneg: min_slack >= -BERNSTEIN_TOL,
        grad_bound_ok,
        c1,
        c2,
        hypotheses_hold,
        conclusion_consistent: !hypotheses_hold || max_gradient <= BERNSTEIN_TOL,
        slack,
    })
}

pub(crate) fn extremum_with_data(gh: &GraphHypersurface, k: usize, data: &[HypersurfacePointData]) -> Result<ExtremumDiagnostics> {
    extremum_from(gh, k, data)
}

/// Separable perturbation `u = r0 + eps sum_i a_i cos(2 pi m_i x_i)` with
/// `m_i in {1, 2}`. On grids with resolution divisible by 4 its extrema sit
/// on nodes where the centred gradient vanishes exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosineGraph {
    pub r0: f64,
    pub eps: f64,
    pub amplitudes: Vec<f64>,
    pub modes: Vec<u32>,
}

impl CosineGraph {
    /// Amplitudes uniform in `[-1, 1]`, modes uniform in `{1, 2}` and
    /// `eps` uniform in `[1/4, 1] * curvature_budget / sum |a_i| (2 pi m_i)^2`,
    /// so the Hessian of `u` stays below `curvature_budget`.
    pub fn random(dim: usize, r0: f64, curvature_budget: f64, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amplitudes: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let modes: Vec<u32> = (0..dim).map(|_| rng.random_range(1..=2)).collect();
        let weight: f64 = amplitudes.iter().zip(&modes).map(|(a, &m)| a.abs() * (TAU * m as f64).powi(2)).sum();
        let eps = rng.random_range(0.25..=1.0) * curvature_budget / weight.max(f64::MIN_POSITIVE);
        Self { r0, eps, amplitudes, modes }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let s: f64 = self.amplitudes.iter().zip(&self.modes).zip(x).map(|((a, &m), xi)| a * (TAU * m as f64 * xi).cos()).sum();
        self.r0 + self.eps * s
    }

    pub fn graph(&self, wp: &WarpedProduct, n_grid: usize) -> Result<GraphHypersurface> {
        if n_grid % 4 != 0 {
            return Err(GeometryError::InvalidParameter(format!("grid resolution {n_grid} not divisible by 4")));
        }
        if self.amplitudes.len() + 1 != wp.n() {
            return Err(GeometryError::DimensionMismatch { expected: wp.n() - 1, found: self.amplitudes.len() });
        }
        GraphHypersurface::from_fn(wp.clone(), PeriodicGrid::new(wp.n() - 1, n_grid)?, |x| self.eval(x))
    }
}
