use nalgebra::DMatrix;

use super::curvature::shape_to_curvature;
use super::lovelock::lovelock;
use crate::error::{GeometryError, Result};
use crate::numerics::{spd_inverse, symmetrize};

/// Shape operator `S = g^{-1} h` of a hypersurface together with the metric
/// it is self-adjoint for.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOperator {
    metric: DMatrix<f64>,
    mixed: DMatrix<f64>,
}

impl ShapeOperator {
    /// Accepts a mixed `(1,1)` operator; rejects it unless `g S` is symmetric
    /// to `1e-12` relative.
    pub fn new(mixed: DMatrix<f64>, metric: DMatrix<f64>) -> Result<Self> {
        let d = metric.nrows();
        if mixed.nrows() != d || mixed.ncols() != d {
            return Err(GeometryError::DimensionMismatch { expected: d, found: mixed.nrows() });
        }
        spd_inverse(&metric).ok_or(GeometryError::NotPositiveDefinite { node: None })?;
        let lowered = &metric * &mixed;
        let asym = (&lowered - lowered.transpose()).amax();
        if asym > 1e-12 * lowered.amax().max(1.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "shape operator not self-adjoint (asymmetry {asym:e})"
            )));
        }
        Ok(Self { metric, mixed })
    }

    /// Builds `S = g^{-1} h` from a symmetric second fundamental form.
    pub fn from_second_fundamental_form(h: &DMatrix<f64>, metric: &DMatrix<f64>) -> Result<Self> {
        let ginv = spd_inverse(metric).ok_or(GeometryError::NotPositiveDefinite { node: None })?;
        let h = symmetrize(h);
        Ok(Self { metric: metric.clone(), mixed: ginv * h })
    }

    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn mixed(&self) -> &DMatrix<f64> {
        &self.mixed
    }

    /// `h = g S`, symmetrised.
    pub fn second_fundamental_form(&self) -> DMatrix<f64> {
        symmetrize(&(&self.metric * &self.mixed))
    }
}

/// `σ_j` and the Newton tensor `T_j` (mixed, same orientation as `S`).
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaNewton {
    pub sigma: f64,
    pub newton: DMatrix<f64>,
}

/// Elementary symmetric function `σ_j` of the principal curvatures and the
/// Newton tensor `T_j`, via `σ_j = tr(T_{j-1} S)/j`, `T_j = σ_j I - T_{j-1} S`.
pub fn sigma_newton(s: &ShapeOperator, j: usize) -> Result<SigmaNewton> {
    let d = s.dim();
    if j > d {
        return Err(GeometryError::InvalidOrder { k: j, dim: d, requirement: "j <= d" });
    }
    let mut sigma = 1.0;
    let mut newton = DMatrix::identity(d, d);
    for m in 1..=j {
        let ts = &newton * s.mixed();
        sigma = ts.trace() / m as f64;
        newton = DMatrix::identity(d, d) * sigma - ts;
    }
    Ok(SigmaNewton { sigma, newton })
}

/// Flat-ambient comparison of `H_{2k}`, `H_{2k+1}`, `E_(k)` with
/// `(2k)! σ_{2k}`, `(2k+1)! σ_{2k+1}` and `(2k)!/2 T_{2k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanCorrespondence {
    pub h2k: f64,
    pub h2k1: f64,
    /// `|H_{2k} - (2k)! σ_{2k}| / max(1, |(2k)! σ_{2k}|)`
    pub err_sigma2k: f64,
    /// `|H_{2k+1} - (2k+1)! σ_{2k+1}| / max(1, |(2k+1)! σ_{2k+1}|)`
    pub err_sigma2k1: f64,
    /// `max|-E_(k) - (2k)!/2 T_{2k}| / max(1, max|(2k)!/2 T_{2k}|)`, mixed components
    pub err_newton: f64,
}

impl EuclideanCorrespondence {
    pub fn max_err(&self) -> f64 {
        self.err_sigma2k.max(self.err_sigma2k1).max(self.err_newton)
    }
}

/// Deterministic random shape operator: `h` with entries uniform in
/// `[-1, 1]` over a metric drawn as in [`random_algebraic_curvature`].
///
/// [`random_algebraic_curvature`]: super::random_algebraic_curvature
pub fn random_shape_operator(d: usize, seed: u64) -> Result<ShapeOperator> {
    use rand::{Rng, SeedableRng};
    let metric = super::random_algebraic_curvature(d, seed)?.metric().clone();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let mut h = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = rng.random_range(-1.0..1.0);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    ShapeOperator::from_second_fundamental_form(&h, &metric)
}

pub fn euclidean_correspondence(s: &ShapeOperator, k: usize) -> Result<EuclideanCorrespondence> {
    let d = s.dim();
    if 2 * k + 1 > d {
        return Err(GeometryError::InvalidOrder { k, dim: d, requirement: "2k + 1 <= d" });
    }
    let ac = shape_to_curvature(s)?;
    let data = lovelock(&ac, k)?;
    let h = s.second_fundamental_form();
    let h2k = data.lk;
    let h2k1 = data.contract_with(&h);

    let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
    let even = sigma_newton(s, 2 * k)?;
    let odd = sigma_newton(s, 2 * k + 1)?;
    let ref_even = fact(2 * k) * even.sigma;
    let ref_odd = fact(2 * k + 1) * odd.sigma;
    let newton_ref = &even.newton * (fact(2 * k) / 2.0);
    let newton_err = (-&data.einstein_mixed - &newton_ref).amax() / newton_ref.amax().max(1.0);

    Ok(EuclideanCorrespondence {
        h2k,
        h2k1,
        err_sigma2k: (h2k - ref_even).abs() / ref_even.abs().max(1.0),
        err_sigma2k1: (h2k1 - ref_odd).abs() / ref_odd.abs().max(1.0),
        err_newton: newton_err,
    })
}
