use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::numerics::symmetrize;

/// Eigenvalue-sign tolerance of [`classify_definiteness`].
pub const DEFINITENESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definiteness {
    PositiveSemi,
    NegativeSemi,
    Indefinite,
}

/// Eigenvalues of `E^i_l = E^{ij} g_{jl}`, ascending; computed as the spectrum
/// of `L^T E L` with `g = L L^T`.
pub fn generalized_eigenvalues(e: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<Vec<f64>> {
    if e.shape() != g.shape() || e.nrows() != e.ncols() {
        return Err(GeometryError::DimensionMismatch { expected: g.nrows(), found: e.nrows() });
    }
    let chol = symmetrize(g).cholesky().ok_or(GeometryError::NotPositiveDefinite { node: None })?;
    let l = chol.l();
    let m = symmetrize(&(l.transpose() * symmetrize(e) * &l));
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Sign pattern of the eigenvalues of `E` relative to `g`, with tolerance
/// [`DEFINITENESS_TOL`]. A spectrum inside the tolerance band counts as
/// positive semi-definite.
pub fn classify_definiteness(e: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<Definiteness> {
    let eig = generalized_eigenvalues(e, g)?;
    Ok(if eig.iter().all(|&v| v >= -DEFINITENESS_TOL) {
        Definiteness::PositiveSemi
    } else if eig.iter().all(|&v| v <= DEFINITENESS_TOL) {
        Definiteness::NegativeSemi
    } else {
        Definiteness::Indefinite
    })
}
