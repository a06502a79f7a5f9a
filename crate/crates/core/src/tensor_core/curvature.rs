use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::shape::ShapeOperator;
use crate::error::{GeometryError, Result};
use crate::numerics::{signed_permutations, spd_inverse, symmetrize};

/// Dense rank-4 array with all four indices ranging over `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dim: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim.pow(4)] }
    }

    pub fn from_fn<F: FnMut(usize, usize, usize, usize) -> f64>(dim: usize, mut f: F) -> Self {
        let mut t = Self::zeros(dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        t[[a, b, c, d]] = f(a, b, c, d);
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, [a, b, c, d]: [usize; 4]) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * factor).collect() }
    }

    pub fn add(&self, other: &Tensor4) -> Self {
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Tensor4) -> Self {
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// Max-norm violations of the Riemann symmetries.
    pub fn symmetry_defects(&self) -> SymmetryDefects {
        let r = self;
        let n = self.dim;
        let mut d = SymmetryDefects { first_pair: 0.0, second_pair: 0.0, pair_exchange: 0.0, bianchi: 0.0 };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = r[[i, j, k, l]];
                        d.first_pair = d.first_pair.max((v + r[[j, i, k, l]]).abs());
                        d.second_pair = d.second_pair.max((v + r[[i, j, l, k]]).abs());
                        d.pair_exchange = d.pair_exchange.max((v - r[[k, l, i, j]]).abs());
                        d.bianchi = d.bianchi.max((v + r[[i, k, l, j]] + r[[i, l, j, k]]).abs());
                    }
                }
            }
        }
        d
    }

    /// Raises the last two slots with `ginv`: `T_{ab}^{cd} = T_{abef} g^{ec} g^{fd}`.
    pub fn raise_last_pair(&self, ginv: &DMatrix<f64>) -> Self {
        self.contract_slot(3, ginv).contract_slot(2, ginv)
    }

    /// Contracts slot `slot` with a symmetric matrix: `T'_{..c..} = T_{..e..} m^{ec}`.
    pub fn contract_slot(&self, slot: usize, m: &DMatrix<f64>) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut idx = [a, b, c, d];
                        let target = idx[slot];
                        let mut acc = 0.0;
                        for e in 0..n {
                            idx[slot] = e;
                            acc += self[idx] * m[(e, target)];
                        }
                        out[[a, b, c, d]] = acc;
                    }
                }
            }
        }
        out
    }
}

impl Index<[usize; 4]> for Tensor4 {
    type Output = f64;
    #[inline]
    fn index(&self, idx: [usize; 4]) -> &f64 {
        &self.data[self.offset(idx)]
    }
}

impl IndexMut<[usize; 4]> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, idx: [usize; 4]) -> &mut f64 {
        let o = self.offset(idx);
        &mut self.data[o]
    }
}

/// A metric together with a fully lowered tensor carrying the algebraic
/// symmetries of a Riemann tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicCurvature {
    metric: DMatrix<f64>,
    inverse: DMatrix<f64>,
    riemann: Tensor4,
}

/// Max-norm violations of each Riemann symmetry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryDefects {
    pub first_pair: f64,
    pub second_pair: f64,
    pub pair_exchange: f64,
    pub bianchi: f64,
}

impl SymmetryDefects {
    pub fn max(&self) -> f64 {
        self.first_pair.max(self.second_pair).max(self.pair_exchange).max(self.bianchi)
    }
}

impl AlgebraicCurvature {
    /// Validates that the metric is square, matches the tensor dimension and is
    /// positive-definite. Symmetries of `riemann` are not enforced here; see
    /// [`AlgebraicCurvature::symmetry_defects`].
    pub fn new(metric: DMatrix<f64>, riemann: Tensor4) -> Result<Self> {
        if metric.nrows() != metric.ncols() {
            return Err(GeometryError::DimensionMismatch { expected: metric.nrows(), found: metric.ncols() });
        }
        if metric.nrows() != riemann.dim() {
            return Err(GeometryError::DimensionMismatch { expected: metric.nrows(), found: riemann.dim() });
        }
        let metric = symmetrize(&metric);
        let inverse = spd_inverse(&metric).ok_or(GeometryError::NotPositiveDefinite { node: None })?;
        Ok(Self { metric, inverse, riemann })
    }

    pub fn dim(&self) -> usize {
        self.riemann.dim()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn inverse_metric(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn riemann(&self) -> &Tensor4 {
        &self.riemann
    }

    /// `R_{ab}^{cd}`, the form entering the delta contractions.
    pub fn mixed(&self) -> Tensor4 {
        self.riemann.raise_last_pair(&self.inverse)
    }

    pub fn symmetry_defects(&self) -> SymmetryDefects {
        self.riemann.symmetry_defects()
    }
}

/// `R_{ijkl} = c (g_{ik} g_{jl} - g_{il} g_{jk})`: constant sectional curvature `c`.
pub fn space_form(metric: DMatrix<f64>, c: f64) -> Result<AlgebraicCurvature> {
    let g = symmetrize(&metric);
    let r = Tensor4::from_fn(g.nrows(), |i, j, k, l| c * (g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)]));
    AlgebraicCurvature::new(g, r)
}

/// Deterministic random algebraic curvature tensor.
///
/// A uniform random array is projected onto the curvature symmetry class:
/// antisymmetrised in both pairs, symmetrised under pair exchange, and the
/// totally antisymmetric part (the obstruction to the first Bianchi identity)
/// removed. The metric is the identity plus a small symmetric perturbation.
pub fn random_algebraic_curvature(d: usize, seed: u64) -> Result<AlgebraicCurvature> {
    if d < 2 {
        return Err(GeometryError::InvalidParameter(format!("dimension {d} < 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = Tensor4::from_fn(d, |_, _, _, _| rng.random_range(-1.0..1.0));
    let riemann = project_curvature_symmetries(&raw);

    let mut metric = DMatrix::identity(d, d);
    let mut perturbation = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = rng.random_range(-0.15..0.15);
            perturbation[(i, j)] = v;
            perturbation[(j, i)] = v;
        }
    }
    // shrink until positive-definite with margin
    let mut scale = 1.0;
    loop {
        let candidate = &metric + &perturbation * scale;
        let min_eig = candidate.clone().symmetric_eigen().eigenvalues.min();
        if min_eig > 0.2 {
            metric = candidate;
            break;
        }
        scale *= 0.5;
    }
    AlgebraicCurvature::new(metric, riemann)
}

fn project_curvature_symmetries(raw: &Tensor4) -> Tensor4 {
    let n = raw.dim();
    let pairs = Tensor4::from_fn(n, |a, b, c, d| {
        let anti = |a, b, c, d| raw[[a, b, c, d]] - raw[[b, a, c, d]] - raw[[a, b, d, c]] + raw[[b, a, d, c]];
        (anti(a, b, c, d) + anti(c, d, a, b)) / 8.0
    });
    // remove the totally antisymmetric component
    let perms = signed_permutations(4);
    let alt = Tensor4::from_fn(n, |a, b, c, d| {
        let idx = [a, b, c, d];
        let mut acc = 0.0;
        for (p, s) in &perms {
            acc += s * pairs[[idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]]]];
        }
        acc / 24.0
    });
    pairs.sub(&alt)
}

/// Ricci tensor and scalar curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct Contractions {
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

/// `Ric_{ij} = g^{kl} R_{kilj}`, `Scal = g^{ij} Ric_{ij}`.
pub fn contractions(ac: &AlgebraicCurvature) -> Contractions {
    let n = ac.dim();
    let ginv = ac.inverse_metric();
    let r = ac.riemann();
    let mut ricci = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += ginv[(k, l)] * r[[k, i, l, j]];
                }
            }
            ricci[(i, j)] = acc;
        }
    }
    let scalar = ginv.component_mul(&ricci).sum();
    Contractions { ricci, scalar }
}

/// `R_{ijkl} R^{ijkl} - 4 R_{ij} R^{ij} + Scal^2`, by direct contraction.
pub fn quadratic_gauss_bonnet(ac: &AlgebraicCurvature) -> f64 {
    let ginv = ac.inverse_metric();
    let r = ac.riemann();
    let c = contractions(ac);
    let r_up = r.contract_slot(0, ginv).contract_slot(1, ginv).raise_last_pair(ginv);
    let rm2: f64 = r.as_slice().iter().zip(r_up.as_slice()).map(|(a, b)| a * b).sum();
    let ric_up = ginv * &c.ricci * ginv;
    rm2 - 4.0 * c.ricci.component_mul(&ric_up).sum() + c.scalar * c.scalar
}

/// `Ric^{ij} - Scal g^{ij} / 2`.
pub fn einstein_closed_form(ac: &AlgebraicCurvature) -> DMatrix<f64> {
    let ginv = ac.inverse_metric();
    let c = contractions(ac);
    ginv * &c.ricci * ginv - ginv * (0.5 * c.scalar)
}

/// Gauss equation in flat ambient space: `R_{ijkl} = h_{ik} h_{jl} - h_{il} h_{jk}`.
pub fn shape_to_curvature(s: &ShapeOperator) -> Result<AlgebraicCurvature> {
    let h = s.second_fundamental_form();
    let r = Tensor4::from_fn(h.nrows(), |i, j, k, l| h[(i, k)] * h[(j, l)] - h[(i, l)] * h[(j, k)]);
    AlgebraicCurvature::new(s.metric().clone(), r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_tensor_has_curvature_symmetries() {
        let ac = random_algebraic_curvature(3, 7).unwrap();
        assert!(ac.symmetry_defects().max() <= 1e-14, "{:?}", ac.symmetry_defects());
        let ac4 = random_algebraic_curvature(4, 1).unwrap();
        assert!(ac4.symmetry_defects().bianchi <= 1e-14);
        assert!(ac4.riemann().max_abs() > 0.1);
    }

    #[test]
    fn random_tensor_is_deterministic() {
        let a = random_algebraic_curvature(4, 99).unwrap();
        let b = random_algebraic_curvature(4, 99).unwrap();
        assert_eq!(a, b);
        let c = random_algebraic_curvature(4, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn projection_is_idempotent() {
        let ac = random_algebraic_curvature(4, 3).unwrap();
        let again = project_curvature_symmetries(ac.riemann());
        assert!(again.sub(ac.riemann()).max_abs() < 1e-15);
    }

    #[test]
    fn space_form_contractions() {
        let ac = space_form(DMatrix::identity(4, 4), 1.0).unwrap();
        let c = contractions(&ac);
        assert!((c.scalar - 12.0).abs() < 1e-14);
        assert!((&c.ricci - DMatrix::identity(4, 4) * 3.0).amax() < 1e-14);
        // a non-trivial metric: closed form d(d-1)c still holds
        let ac = random_algebraic_curvature(4, 5).unwrap();
        let sf = space_form(ac.metric().clone(), 0.5).unwrap();
        assert!((contractions(&sf).scalar - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_riemann_contracts_to_zero() {
        let ac = AlgebraicCurvature::new(DMatrix::identity(3, 3), Tensor4::zeros(3)).unwrap();
        let c = contractions(&ac);
        assert_eq!(c.scalar, 0.0);
        assert_eq!(c.ricci.amax(), 0.0);
    }

    #[test]
    fn singular_metric_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            AlgebraicCurvature::new(g, Tensor4::zeros(2)),
            Err(GeometryError::NotPositiveDefinite { node: None })
        );
        assert!(matches!(
            AlgebraicCurvature::new(DMatrix::identity(3, 3), Tensor4::zeros(2)),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn raising_with_identity_is_noop() {
        let ac = random_algebraic_curvature(3, 11).unwrap();
        let raised = ac.riemann().raise_last_pair(&DMatrix::identity(3, 3));
        assert_eq!(&raised, ac.riemann());
    }
}
