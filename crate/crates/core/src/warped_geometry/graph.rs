use nalgebra::DMatrix;
use rayon::prelude::*;

use super::ambient::WarpedProduct;
use crate::error::{GeometryError, Result};
use crate::manifold_numerics::{PeriodicGrid, PeriodicMetricField};
use crate::tensor_core::{AlgebraicCurvature, LovelockData, LovelockEvaluator, Tensor4};

/// Coordinates on the fiber `N^d(kappa)`.
///
/// For `kappa = 0` the grid coordinates are flat torus coordinates. For
/// `kappa = +-1` they parametrize a stereographic patch,
/// `g_N = exp(2 psi) delta` with `exp(psi) = 2s / (1 + kappa s^2 |x - c|^2)`,
/// `s = 1/2` and `c` the center of the unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberChart {
    kappa: i32,
}

pub const STEREOGRAPHIC_SCALE: f64 = 0.5;

impl FiberChart {
    pub fn new(kappa: i32) -> Self {
        Self { kappa }
    }

    fn centered(x: f64) -> f64 {
        x - 0.5
    }

    /// `exp(2 psi)`.
    pub fn conformal_factor(&self, x: &[f64]) -> f64 {
        if self.kappa == 0 {
            return 1.0;
        }
        let s = STEREOGRAPHIC_SCALE;
        let q: f64 = x.iter().map(|&v| Self::centered(v).powi(2)).sum();
        let e = 2.0 * s / (1.0 + self.kappa as f64 * s * s * q);
        e * e
    }

    /// `d psi / d x_a`.
    pub fn dpsi(&self, x: &[f64]) -> Vec<f64> {
        if self.kappa == 0 {
            return vec![0.0; x.len()];
        }
        let s2 = STEREOGRAPHIC_SCALE * STEREOGRAPHIC_SCALE;
        let k = self.kappa as f64;
        let q: f64 = x.iter().map(|&v| Self::centered(v).powi(2)).sum();
        x.iter().map(|&v| -2.0 * k * s2 * Self::centered(v) / (1.0 + k * s2 * q)).collect()
    }

    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::identity(x.len(), x.len()) * self.conformal_factor(x)
    }

    /// `Gamma^a_{bc} = delta^a_b psi_c + delta^a_c psi_b - delta_{bc} psi_a`,
    /// stored at `(a * d + b) * d + c`.
    pub fn christoffel(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let p = self.dpsi(x);
        let mut out = vec![0.0; d * d * d];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let mut v = 0.0;
                    if a == b {
                        v += p[c];
                    }
                    if a == c {
                        v += p[b];
                    }
                    if b == c {
                        v -= p[a];
                    }
                    out[(a * d + b) * d + c] = v;
                }
            }
        }
        out
    }
}

/// Central first derivative of a nodal scalar.
pub(crate) fn fd_gradient(grid: &PeriodicGrid, f: &[f64], node: usize) -> Vec<f64> {
    let inv2h = 0.5 / grid.spacing();
    (0..grid.dim()).map(|a| (f[grid.plus(node, a)] - f[grid.minus(node, a)]) * inv2h).collect()
}

/// Second derivatives: compact three-point stencil on the diagonal, product of
/// central differences off the diagonal.
pub(crate) fn fd_hessian(grid: &PeriodicGrid, f: &[f64], node: usize) -> DMatrix<f64> {
    let d = grid.dim();
    let h = grid.spacing();
    let mut m = DMatrix::zeros(d, d);
    for a in 0..d {
        let (p, q) = (grid.plus(node, a), grid.minus(node, a));
        m[(a, a)] = (f[p] - 2.0 * f[node] + f[q]) / (h * h);
        for b in a + 1..d {
            let v = (f[grid.plus(p, b)] - f[grid.minus(p, b)] - f[grid.plus(q, b)] + f[grid.minus(q, b)]) / (4.0 * h * h);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}

/// Graph `{(u(x), x)}` over a fiber coordinate grid.
#[derive(Debug, Clone)]
pub struct GraphHypersurface {
    ambient: WarpedProduct,
    chart: FiberChart,
    grid: PeriodicGrid,
    u: Vec<f64>,
    du: Vec<Vec<f64>>,
    ddu: Vec<DMatrix<f64>>,
    angle: Vec<f64>,
}

impl GraphHypersurface {
    pub fn new(ambient: WarpedProduct, grid: PeriodicGrid, u: Vec<f64>) -> Result<Self> {
        if grid.dim() + 1 != ambient.n() {
            return Err(GeometryError::DimensionMismatch { expected: ambient.n() - 1, found: grid.dim() });
        }
        if u.len() != grid.len() {
            return Err(GeometryError::DimensionMismatch { expected: grid.len(), found: u.len() });
        }
        for &r in &u {
            ambient.profile(r)?;
        }
        let chart = FiberChart::new(ambient.kappa());
        let du: Vec<Vec<f64>> = (0..grid.len()).map(|node| fd_gradient(&grid, &u, node)).collect();
        let ddu: Vec<DMatrix<f64>> = (0..grid.len()).map(|node| fd_hessian(&grid, &u, node)).collect();
        let mut angle = Vec::with_capacity(grid.len());
        for node in 0..grid.len() {
            let lam = ambient.warping().lambda(u[node]);
            let grad_n: f64 = du[node].iter().map(|v| v * v).sum::<f64>() / chart.conformal_factor(&grid.coords(node));
            let a = 1.0 / (1.0 + grad_n / (lam * lam)).sqrt();
            if !(a > 0.0) {
                return Err(GeometryError::NotStarShaped { node: grid.multi_index(node), angle: a });
            }
            angle.push(a);
        }
        Ok(Self { ambient, chart, grid, u, du, ddu, angle })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(ambient: WarpedProduct, grid: PeriodicGrid, f: F) -> Result<Self> {
        let u = (0..grid.len()).map(|node| f(&grid.coords(node))).collect();
        Self::new(ambient, grid, u)
    }

    /// The slice `{r0} x N`.
    pub fn slice(ambient: WarpedProduct, grid: PeriodicGrid, r0: f64) -> Result<Self> {
        let len = grid.len();
        Self::new(ambient, grid, vec![r0; len])
    }

    pub fn ambient(&self) -> &WarpedProduct {
        &self.ambient
    }

    pub fn chart(&self) -> &FiberChart {
        &self.chart
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn heights(&self) -> &[f64] {
        &self.u
    }

    /// Central-difference gradient of the height at `node`.
    pub fn height_gradient(&self, node: usize) -> &[f64] {
        &self.du[node]
    }

    /// `<d_r, nu>` at every node.
    pub fn normal_angles(&self) -> &[f64] {
        &self.angle
    }

    /// Induced metric `lambda(u)^2 g_N + du du`.
    pub fn induced_metric(&self, node: usize) -> DMatrix<f64> {
        let lam = self.ambient.warping().lambda(self.u[node]);
        let du = &self.du[node];
        let d = self.grid.dim();
        self.chart.metric(&self.grid.coords(node)) * (lam * lam) + DMatrix::from_fn(d, d, |i, j| du[i] * du[j])
    }

    pub fn induced_metric_field(&self) -> Result<PeriodicMetricField> {
        PeriodicMetricField::new(self.grid.clone(), (0..self.grid.len()).map(|n| self.induced_metric(n)).collect())
    }

    /// Second fundamental form with respect to the inner normal:
    /// `W h = lambda lambda' g_N + 2 (lambda'/lambda) du du - (D^2 u - Gamma_N du)`
    /// with `W = 1/<d_r, nu>`.
    pub fn second_fundamental_form(&self, node: usize) -> DMatrix<f64> {
        let w = self.ambient.warping();
        let r = self.u[node];
        let (lam, d1) = (w.lambda(r), w.dlambda(r));
        let x = self.grid.coords(node);
        let gamma = self.chart.christoffel(&x);
        let gn = self.chart.conformal_factor(&x);
        let du = &self.du[node];
        let ddu = &self.ddu[node];
        let d = self.grid.dim();
        let a = self.angle[node];
        DMatrix::from_fn(d, d, |i, j| {
            let mut cov = ddu[(i, j)];
            for c in 0..d {
                cov -= gamma[(c * d + i) * d + j] * du[c];
            }
            let flat = if i == j { lam * d1 * gn } else { 0.0 };
            a * (flat + 2.0 * d1 / lam * du[i] * du[j] - cov)
        })
    }

    /// Intrinsic curvature from the Gauss equation:
    /// `R = K_t (1/2) g.g + (K_r - K_t) (du du).g + (1/2) h.h`.
    pub fn intrinsic_curvature(&self, node: usize) -> Result<AlgebraicCurvature> {
        let (lam, d1, d2) = self.ambient.profile(self.u[node])?;
        let k_fiber = (self.ambient.kappa() as f64 - d1 * d1) / (lam * lam);
        let k_radial = -d2 / lam;
        let g = self.induced_metric(node);
        let h = self.second_fundamental_form(node);
        let du = &self.du[node];
        let mixed = k_radial - k_fiber;
        let riemann = Tensor4::from_fn(g.nrows(), |i, j, k, l| {
            k_fiber * (g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)])
                + mixed * (du[i] * du[k] * g[(j, l)] + du[j] * du[l] * g[(i, k)] - du[i] * du[l] * g[(j, k)] - du[j] * du[k] * g[(i, l)])
                + h[(i, k)] * h[(j, l)]
                - h[(i, l)] * h[(j, k)]
        });
        AlgebraicCurvature::new(g, riemann).map_err(|_| GeometryError::NotPositiveDefinite { node: Some(self.grid.multi_index(node)) })
    }

    /// Evaluates [`HypersurfacePointData`] at every node.
    pub fn evaluate(&self, k: usize) -> Result<Vec<HypersurfacePointData>> {
        let evaluator = LovelockEvaluator::new(self.grid.dim(), k)?.without_p();
        (0..self.grid.len()).into_par_iter().map(|node| self.point_data_with(&evaluator, node)).collect()
    }

    fn point_data_with(&self, evaluator: &LovelockEvaluator, node: usize) -> Result<HypersurfacePointData> {
        let angle = self.angle[node];
        if !(angle > 0.0) {
            return Err(GeometryError::NotStarShaped { node: self.grid.multi_index(node), angle });
        }
        let curvature = self.intrinsic_curvature(node)?;
        let h = self.second_fundamental_form(node);
        let lovelock = evaluator.evaluate(&curvature)?;
        let du = &self.du[node];
        let ginv = curvature.inverse_metric();
        let mut grad_sq = 0.0;
        for i in 0..du.len() {
            for j in 0..du.len() {
                grad_sq += ginv[(i, j)] * du[i] * du[j];
            }
        }
        let d = self.grid.dim();
        let k = evaluator.k();
        let scale = curvature.mixed().max_abs().powi(k as i32) * falling_factorial(d, 2 * k);
        Ok(HypersurfacePointData {
            metric: curvature.metric().clone(),
            normal_angle: angle,
            gradient_norm_sq: grad_sq,
            h2k: lovelock.lk,
            h2k1: lovelock.contract_with(&h),
            h2k_scale: scale,
            second_fundamental_form: h,
            curvature,
            lovelock,
        })
    }
}

fn falling_factorial(n: usize, m: usize) -> f64 {
    (0..m).map(|i| (n - i) as f64).product()
}

/// Geometry of a graph hypersurface at one node.
#[derive(Debug, Clone)]
pub struct HypersurfacePointData {
    pub metric: DMatrix<f64>,
    /// `a = <d_r, nu>`.
    pub normal_angle: f64,
    /// `|nabla r|^2_g`.
    pub gradient_norm_sq: f64,
    pub second_fundamental_form: DMatrix<f64>,
    pub curvature: AlgebraicCurvature,
    pub lovelock: LovelockData,
    /// `L_k` of the intrinsic curvature.
    pub h2k: f64,
    /// `-2 E_(k)^{ij} h_ij`.
    pub h2k1: f64,
    /// Magnitude bound for the terms summed into `h2k`; `h2k` is treated as
    /// zero below `1e-10` of this.
    pub h2k_scale: f64,
}

impl HypersurfacePointData {
    pub fn h2k_vanishes(&self) -> bool {
        self.h2k.abs() <= VANISHING_RELATIVE * self.h2k_scale
    }
}

pub const VANISHING_RELATIVE: f64 = 1e-10;

pub fn point_data(gh: &GraphHypersurface, node: usize, k: usize) -> Result<HypersurfacePointData> {
    if node >= gh.grid().len() {
        return Err(GeometryError::IndexOutOfRange { index: node, dim: gh.grid().len() });
    }
    gh.point_data_with(&LovelockEvaluator::new(gh.grid().dim(), k)?.without_p(), node)
}

/// `H_{2k+1}/H_{2k}` at every node.
pub fn quotient_field(gh: &GraphHypersurface, k: usize) -> Result<Vec<f64>> {
    quotients_from(gh, &gh.evaluate(k)?)
}

pub(crate) fn quotients_from(gh: &GraphHypersurface, data: &[HypersurfacePointData]) -> Result<Vec<f64>> {
    data.iter()
        .enumerate()
        .map(|(node, p)| {
            if p.h2k_vanishes() {
                Err(GeometryError::VanishingH2k { node: gh.grid().multi_index(node), value: p.h2k })
            } else {
                Ok(p.h2k1 / p.h2k)
            }
        })
        .collect()
}

/// Hypersurface dump: `node,u,a,H2k,H2k1,quotient`; the quotient is `nan`
/// where `H2k` vanishes.
pub fn write_hypersurface_csv<W: std::io::Write>(gh: &GraphHypersurface, k: usize, out: W) -> Result<()> {
    let data = gh.evaluate(k)?;
    let io = |e: csv::Error| GeometryError::InvalidParameter(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "u", "a", "H2k", "H2k1", "quotient"]).map_err(io)?;
    for (node, p) in data.iter().enumerate() {
        let q = if p.h2k_vanishes() { f64::NAN } else { p.h2k1 / p.h2k };
        w.write_record([
            node.to_string(),
            format!("{:.16e}", gh.heights()[node]),
            format!("{:.16e}", p.normal_angle),
            format!("{:.16e}", p.h2k),
            format!("{:.16e}", p.h2k1),
            format!("{q:.16e}"),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| GeometryError::InvalidParameter(format!("csv output failed: {e}")))?;
    Ok(())
}
