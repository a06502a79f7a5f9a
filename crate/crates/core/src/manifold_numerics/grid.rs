use nalgebra::DMatrix;

use crate::error::{GeometryError, Result};
use crate::numerics::symmetrize;

/// Uniform grid on the unit-period torus `T^d` with `n` nodes per axis.
///
/// Nodes are numbered row-major with axis 0 varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
    plus: Vec<usize>,
    minus: Vec<usize>,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GeometryError::InvalidParameter("grid dimension must be positive".into()));
        }
        if n < 3 {
            return Err(GeometryError::InvalidParameter(format!("resolution {n} is below the 3-point stencil width")));
        }
        let len = n.pow(dim as u32);
        let mut plus = vec![0; dim * len];
        let mut minus = vec![0; dim * len];
        let mut grid = Self { dim, n, plus: Vec::new(), minus: Vec::new() };
        for node in 0..len {
            for axis in 0..dim {
                plus[axis * len + node] = grid.shifted(node, axis, 1);
                minus[axis * len + node] = grid.shifted(node, axis, -1);
            }
        }
        grid.plus = plus;
        grid.minus = minus;
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `h^d`, the weight of the nodal quadrature.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        let mut rest = node;
        for a in (0..self.dim).rev() {
            idx[a] = rest % self.n;
            rest /= self.n;
        }
        idx
    }

    /// Flat index of a multi-index; components wrap periodically.
    pub fn node(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i % self.n)
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(node).into_iter().map(|i| i as f64 * h).collect()
    }

    pub fn shifted(&self, node: usize, axis: usize, offset: isize) -> usize {
        let mut idx = self.multi_index(node);
        idx[axis] = (idx[axis] as isize + offset).rem_euclid(self.n as isize) as usize;
        self.node(&idx)
    }

    #[inline]
    pub fn plus(&self, node: usize, axis: usize) -> usize {
        self.plus[axis * self.len() + node]
    }

    #[inline]
    pub fn minus(&self, node: usize, axis: usize) -> usize {
        self.minus[axis * self.len() + node]
    }
}

/// Field of symmetric positive-definite metrics on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicMetricField {
    grid: PeriodicGrid,
    metrics: Vec<DMatrix<f64>>,
}

impl PeriodicMetricField {
    pub fn new(grid: PeriodicGrid, metrics: Vec<DMatrix<f64>>) -> Result<Self> {
        if metrics.len() != grid.len() {
            return Err(GeometryError::DimensionMismatch { expected: grid.len(), found: metrics.len() });
        }
        let mut checked = Vec::with_capacity(metrics.len());
        for (node, g) in metrics.into_iter().enumerate() {
            if g.nrows() != grid.dim() || g.ncols() != grid.dim() {
                return Err(GeometryError::DimensionMismatch { expected: grid.dim(), found: g.nrows() });
            }
            let g = symmetrize(&g);
            if g.iter().any(|v| !v.is_finite()) || g.clone().cholesky().is_none() {
                return Err(GeometryError::NotPositiveDefinite { node: Some(grid.multi_index(node)) });
            }
            checked.push(g);
        }
        Ok(Self { grid, metrics: checked })
    }

    pub fn from_fn<F: Fn(&[f64]) -> DMatrix<f64>>(grid: PeriodicGrid, f: F) -> Result<Self> {
        let metrics = (0..grid.len()).map(|node| f(&grid.coords(node))).collect();
        Self::new(grid, metrics)
    }

    pub fn flat(grid: PeriodicGrid) -> Self {
        let d = grid.dim();
        let metrics = vec![DMatrix::identity(d, d); grid.len()];
        Self { grid, metrics }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn metric(&self, node: usize) -> &DMatrix<f64> {
        &self.metrics[node]
    }

    pub fn metrics(&self) -> &[DMatrix<f64>] {
        &self.metrics
    }

    /// `g + t v`; fails if some node loses positive-definiteness.
    pub fn perturbed(&self, v: &VariationField, t: f64) -> Result<Self> {
        if v.grid() != &self.grid {
            return Err(GeometryError::DimensionMismatch { expected: self.grid.len(), found: v.grid().len() });
        }
        let metrics = self.metrics.iter().zip(v.values()).map(|(g, dv)| g + dv * t).collect();
        Self::new(self.grid.clone(), metrics)
    }

    /// The field pulled back by the translation `x -> x + shift * h * e_axis`.
    pub fn translated(&self, axis: usize, shift: isize) -> Self {
        let metrics = (0..self.grid.len()).map(|node| self.metrics[self.grid.shifted(node, axis, shift)].clone()).collect();
        Self { grid: self.grid.clone(), metrics }
    }
}

/// Symmetric 2-tensor field `v_{ij}` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationField {
    grid: PeriodicGrid,
    values: Vec<DMatrix<f64>>,
}

impl VariationField {
    pub fn new(grid: PeriodicGrid, values: Vec<DMatrix<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GeometryError::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        for (node, v) in values.iter().enumerate() {
            if v.nrows() != grid.dim() || v.ncols() != grid.dim() {
                return Err(GeometryError::DimensionMismatch { expected: grid.dim(), found: v.nrows() });
            }
            let scale = v.amax().max(1.0);
            if (v - v.transpose()).amax() > 1e-12 * scale {
                return Err(GeometryError::InvalidParameter(format!(
                    "variation is not symmetric at node {:?}",
                    grid.multi_index(node)
                )));
            }
        }
        let values = values.iter().map(symmetrize).collect();
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> DMatrix<f64>>(grid: PeriodicGrid, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|node| f(&grid.coords(node))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        let d = grid.dim();
        let values = vec![DMatrix::zeros(d, d); grid.len()];
        Self { grid, values }
    }

    /// `v = g`, the infinitesimal constant rescaling.
    pub fn conformal(gf: &PeriodicMetricField) -> Self {
        Self { grid: gf.grid().clone(), values: gf.metrics().to_vec() }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[DMatrix<f64>] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips_and_wraps() {
        let grid = PeriodicGrid::new(3, 5).unwrap();
        assert_eq!(grid.len(), 125);
        for node in 0..grid.len() {
            assert_eq!(grid.node(&grid.multi_index(node)), node);
            for axis in 0..3 {
                assert_eq!(grid.minus(grid.plus(node, axis), axis), node);
                assert_eq!(grid.shifted(node, axis, 5), node);
            }
        }
        assert_eq!(grid.node(&[0, 0, 4]), 4);
        assert_eq!(grid.plus(4, 2), 0);
        assert_eq!(grid.node(&[1, 0, 0]), 25);
    }

    #[test]
    fn invalid_metric_names_node() {
        let grid = PeriodicGrid::new(2, 4).unwrap();
        let mut metrics = vec![DMatrix::identity(2, 2); 16];
        metrics[6][(1, 1)] = -1.0;
        match PeriodicMetricField::new(grid, metrics) {
            Err(GeometryError::NotPositiveDefinite { node }) => assert_eq!(node, Some(vec![1, 2])),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn asymmetric_variation_rejected() {
        let grid = PeriodicGrid::new(2, 4).unwrap();
        let mut v = vec![DMatrix::zeros(2, 2); 16];
        v[3][(0, 1)] = 1.0;
        assert!(VariationField::new(grid, v).is_err());
    }

    #[test]
    fn perturbation_can_fail() {
        let grid = PeriodicGrid::new(2, 4).unwrap();
        let gf = PeriodicMetricField::flat(grid.clone());
        let v = VariationField::from_fn(grid, |_| -DMatrix::identity(2, 2)).unwrap();
        assert!(gf.perturbed(&v, 0.5).is_ok());
        assert!(matches!(gf.perturbed(&v, 2.0), Err(GeometryError::NotPositiveDefinite { .. })));
    }
}
