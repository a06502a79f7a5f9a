use nalgebra::DMatrix;
use rayon::prelude::*;

use super::graph::{fd_gradient, fd_hessian, GraphHypersurface, HypersurfacePointData};
use crate::error::{GeometryError, Result};
use crate::numerics::spd_inverse;

/// Residuals of the four Hessian identities at one node.
#[derive(Debug, Clone)]
pub struct NodeHessianResiduals {
    /// `nabla^2 phi - (lambda' g - <X,nu> h)`.
    pub phi: DMatrix<f64>,
    /// `nabla^2 r - (lambda'/lambda) (g - dr dr) + <d_r,nu> h`.
    pub height: DMatrix<f64>,
    /// `-2 E^{ij} nabla_ij phi - ((n-1-2k) lambda' H_2k - <X,nu> H_{2k+1})`.
    pub traced_phi: f64,
    /// `-2 E^{ij} nabla_ij r - ((n-1-2k)(lambda'/lambda) H_2k
    /// + 2 (lambda'/lambda) E^{ij} r_i r_j - <d_r,nu> H_{2k+1})`.
    pub traced_height: f64,
    /// `-2 E^{ij} nabla_ij phi` from finite differences.
    pub operator_on_phi: f64,
}

/// Max-norms of [`NodeHessianResiduals`] over the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
}

/// Intrinsic Hessians of `phi(u)` and `u` by finite differences, with the
/// Christoffel symbols of the induced metric from central differences of
/// `lambda(u)^2`, `du du` and the analytic fiber metric.
pub fn hessian_identity_nodes(gh: &GraphHypersurface, k: usize) -> Result<Vec<NodeHessianResiduals>> {
    let data = gh.evaluate(k)?;
    hessian_nodes_from(gh, k, &data)
}

pub(crate) fn hessian_nodes_from(gh: &GraphHypersurface, k: usize, data: &[HypersurfacePointData]) -> Result<Vec<NodeHessianResiduals>> {
    let grid = gh.grid();
    let d = grid.dim();
    let wp = gh.ambient();
    let u = gh.heights();
    let phi: Vec<f64> = u.par_iter().map(|&r| wp.phi(r)).collect::<Result<_>>()?;
    let lam2: Vec<f64> = u.iter().map(|&r| wp.warping().lambda(r).powi(2)).collect();
    let products: Vec<Vec<f64>> = (0..d * d)
        .map(|q| (0..grid.len()).map(|node| gh.height_gradient(node)[q / d] * gh.height_gradient(node)[q % d]).collect())
        .collect();
    let n_term = wp.n() as f64 - 1.0 - 2.0 * k as f64;
    (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let p = &data[node];
            let g = &p.metric;
            let ginv = spd_inverse(g).ok_or_else(|| GeometryError::NotPositiveDefinite { node: Some(grid.multi_index(node)) })?;
            let x = grid.coords(node);
            let chart = gh.chart();
            let gn = chart.conformal_factor(&x);
            let dpsi = chart.dpsi(&x);
            let dlam2 = fd_gradient(grid, &lam2, node);
            let dprod: Vec<Vec<f64>> = products.iter().map(|f| fd_gradient(grid, f, node)).collect();
            // dg[c][i][j] = d_c g_ij
            let dg = |c: usize, i: usize, j: usize| {
                let fiber = if i == j { dlam2[c] * gn + lam2[node] * 2.0 * dpsi[c] * gn } else { 0.0 };
                fiber + dprod[i * d + j][c]
            };
            let mut gamma = vec![0.0; d * d * d];
            for a in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = 0.0;
                        for e in 0..d {
                            v += ginv[(a, e)] * (dg(i, e, j) + dg(j, e, i) - dg(e, i, j));
                        }
                        gamma[(a * d + i) * d + j] = 0.5 * v;
                    }
                }
            }
            let covariant_hessian = |f: &[f64]| {
                let grad = fd_gradient(grid, f, node);
                let mut hess = fd_hessian(grid, f, node);
                for i in 0..d {
                    for j in 0..d {
                        for a in 0..d {
                            hess[(i, j)] -= gamma[(a * d + i) * d + j] * grad[a];
                        }
                    }
                }
                hess
            };
            let hess_phi = covariant_hessian(&phi);
            let hess_r = covariant_hessian(u);
            let (lam, d1, _) = wp.profile(u[node])?;
            let a = p.normal_angle;
            let h = &p.second_fundamental_form;
            let du = gh.height_gradient(node);
            let dudu = DMatrix::from_fn(d, d, |i, j| du[i] * du[j]);
            let phi_res = &hess_phi - (g * d1 - h * (lam * a));
            let height_res = &hess_r - ((g - &dudu) * (d1 / lam) - h * a);
            let e = &p.lovelock.einstein;
            let operator_on_phi = -2.0 * e.component_mul(&hess_phi).sum();
            let traced_phi = operator_on_phi - (n_term * d1 * p.h2k - lam * a * p.h2k1);
            let traced_height = -2.0 * e.component_mul(&hess_r).sum()
                - (n_term * d1 / lam * p.h2k + 2.0 * d1 / lam * e.component_mul(&dudu).sum() - a * p.h2k1);
            Ok(NodeHessianResiduals { phi: phi_res, height: height_res, traced_phi, traced_height, operator_on_phi })
        })
        .collect()
}

pub fn hessian_identity_residuals(gh: &GraphHypersurface, k: usize) -> Result<HessianResiduals> {
    let nodes = hessian_identity_nodes(gh, k)?;
    Ok(HessianResiduals {
        r1: nodes.iter().map(|n| n.phi.amax()).fold(0.0, f64::max),
        r2: nodes.iter().map(|n| n.height.amax()).fold(0.0, f64::max),
        r3: nodes.iter().map(|n| n.traced_phi.abs()).fold(0.0, f64::max),
        r4: nodes.iter().map(|n| n.traced_height.abs()).fold(0.0, f64::max),
    })
}
