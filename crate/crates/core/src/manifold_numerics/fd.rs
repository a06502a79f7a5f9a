use nalgebra::DMatrix;
use rayon::prelude::*;

use super::grid::{PeriodicGrid, PeriodicMetricField};
use crate::error::{GeometryError, Result};
use crate::numerics::{spd_inverse, sqrt_det_spd};
use crate::tensor_core::{AlgebraicCurvature, Tensor4};

/// Node-major storage of a fixed number of components per node.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Nodal {
    pub comps: usize,
    pub data: Vec<f64>,
}

impl Nodal {
    pub fn from_nodes(comps: usize, nodes: Vec<Vec<f64>>) -> Self {
        let mut data = Vec::with_capacity(comps * nodes.len());
        for v in nodes {
            debug_assert_eq!(v.len(), comps);
            data.extend(v);
        }
        Self { comps, data }
    }

    #[inline]
    pub fn at(&self, node: usize) -> &[f64] {
        &self.data[node * self.comps..(node + 1) * self.comps]
    }

    /// Second-order central difference along `axis`.
    pub fn d0(&self, grid: &PeriodicGrid, axis: usize) -> Nodal {
        let inv2h = 0.5 / grid.spacing();
        let c = self.comps;
        let mut data = vec![0.0; self.data.len()];
        data.par_chunks_mut(c).enumerate().for_each(|(node, out)| {
            let p = self.at(grid.plus(node, axis));
            let m = self.at(grid.minus(node, axis));
            for q in 0..c {
                out[q] = (p[q] - m[q]) * inv2h;
            }
        });
        Nodal { comps: c, data }
    }

    /// `d0` along every axis.
    pub fn gradient(&self, grid: &PeriodicGrid) -> Vec<Nodal> {
        (0..grid.dim()).map(|axis| self.d0(grid, axis)).collect()
    }
}

pub(crate) fn matrices_to_nodal(ms: &[DMatrix<f64>]) -> Nodal {
    let d = ms.first().map_or(0, |m| m.nrows());
    let mut data = Vec::with_capacity(d * d * ms.len());
    for m in ms {
        for i in 0..d {
            for j in 0..d {
                data.push(m[(i, j)]);
            }
        }
    }
    Nodal { comps: d * d, data }
}

/// Connection and curvature of a metric field computed by central differences.
#[derive(Debug, Clone)]
pub struct FdGeometry {
    dim: usize,
    inverses: Vec<DMatrix<f64>>,
    volume: Vec<f64>,
    christoffel: Nodal,
    curvature: Vec<AlgebraicCurvature>,
}

impl FdGeometry {
    pub fn new(gf: &PeriodicMetricField) -> Result<Self> {
        let grid = gf.grid();
        let d = gf.dim();
        let not_pd = |node: usize| GeometryError::NotPositiveDefinite { node: Some(grid.multi_index(node)) };
        let inverses: Vec<DMatrix<f64>> = gf
            .metrics()
            .par_iter()
            .enumerate()
            .map(|(node, g)| spd_inverse(g).ok_or_else(|| not_pd(node)))
            .collect::<Result<_>>()?;
        let volume: Vec<f64> = gf
            .metrics()
            .par_iter()
            .enumerate()
            .map(|(node, g)| sqrt_det_spd(g).ok_or_else(|| not_pd(node)))
            .collect::<Result<_>>()?;

        let dg = matrices_to_nodal(gf.metrics()).gradient(grid);
        let christoffel_nodes: Vec<Vec<f64>> = (0..grid.len())
            .into_par_iter()
            .map(|node| {
                let ginv = &inverses[node];
                let mut lowered = vec![0.0; d * d * d];
                for e in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            lowered[(e * d + b) * d + c] = 0.5
                                * (dg[b].at(node)[e * d + c] + dg[c].at(node)[e * d + b] - dg[e].at(node)[b * d + c]);
                        }
                    }
                }
                let mut gamma = vec![0.0; d * d * d];
                for a in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            let mut acc = 0.0;
                            for e in 0..d {
                                acc += ginv[(a, e)] * lowered[(e * d + b) * d + c];
                            }
                            gamma[(a * d + b) * d + c] = acc;
                        }
                    }
                }
                gamma
            })
            .collect();
        let christoffel = Nodal::from_nodes(d * d * d, christoffel_nodes);

        let dgamma = christoffel.gradient(grid);
        let curvature: Vec<AlgebraicCurvature> = (0..grid.len())
            .into_par_iter()
            .map(|node| {
                let gm = christoffel.at(node);
                let gam = |a: usize, b: usize, c: usize| gm[(a * d + b) * d + c];
                let mut up = Tensor4::zeros(d);
                for a in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            for dd in 0..d {
                                let mut v = dgamma[c].at(node)[(a * d + dd) * d + b] - dgamma[dd].at(node)[(a * d + c) * d + b];
                                for e in 0..d {
                                    v += gam(a, c, e) * gam(e, dd, b) - gam(a, dd, e) * gam(e, c, b);
                                }
                                up[[a, b, c, dd]] = v;
                            }
                        }
                    }
                }
                let g = gf.metric(node);
                let riemann = Tensor4::from_fn(d, |a, b, c, dd| (0..d).map(|e| g[(a, e)] * up[[e, b, c, dd]]).sum());
                AlgebraicCurvature::new(g.clone(), riemann).map_err(|_| not_pd(node))
            })
            .collect::<Result<_>>()?;

        Ok(Self { dim: d, inverses, volume, christoffel, curvature })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inverse_metric(&self, node: usize) -> &DMatrix<f64> {
        &self.inverses[node]
    }

    /// `sqrt(det g)` at `node`.
    pub fn volume_density(&self, node: usize) -> f64 {
        self.volume[node]
    }

    /// `Gamma^a_{bc}` at `node`.
    pub fn christoffel(&self, node: usize, a: usize, b: usize, c: usize) -> f64 {
        self.christoffel.at(node)[(a * self.dim + b) * self.dim + c]
    }

    pub fn curvature(&self) -> &[AlgebraicCurvature] {
        &self.curvature
    }

    pub fn into_curvature(self) -> Vec<AlgebraicCurvature> {
        self.curvature
    }
}

/// Per-node Riemann tensor of `gf` from central differences of the metric and
/// of the Christoffel symbols.
pub fn fd_curvature(gf: &PeriodicMetricField) -> Result<Vec<AlgebraicCurvature>> {
    Ok(FdGeometry::new(gf)?.into_curvature())
}
