use nalgebra::DMatrix;

use super::curvature::{AlgebraicCurvature, Tensor4};
use super::delta::DeltaTable;
use crate::error::{GeometryError, Result};

/// Gauss-Bonnet curvature `L_k`, generalized Einstein tensor `E_(k)` and the
/// tensor `P_(k)` at one point.
///
/// `einstein` holds the contravariant components `E_(k)^{ij}`;
/// `einstein_mixed` is `E_(k)^i_l = E_(k)^{ij} g_{jl}` (row `i`, column `l`).
/// `p` holds `P_(k)^{stlj}` with all indices raised and is `None` for `k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LovelockData {
    pub k: usize,
    pub lk: f64,
    pub einstein: DMatrix<f64>,
    pub einstein_mixed: DMatrix<f64>,
    p: Option<Tensor4>,
}

impl LovelockData {
    /// `P_(k)^{stlj}`; undefined for `k = 0`.
    pub fn p(&self) -> Result<&Tensor4> {
        self.p.as_ref().ok_or(GeometryError::UndefinedForKZero)
    }

    /// `g_{ij} E^{ij} + (d - 2k)/2 L_k`, which vanishes identically.
    pub fn trace_defect(&self) -> f64 {
        let d = self.einstein.nrows() as f64;
        self.einstein_mixed.trace() + 0.5 * (d - 2.0 * self.k as f64) * self.lk
    }

    /// `-2 E^{ij} h_{ij}` for a symmetric covariant `h`.
    pub fn contract_with(&self, h: &DMatrix<f64>) -> f64 {
        -2.0 * self.einstein.component_mul(h).sum()
    }
}

/// Reusable evaluator for a fixed `(d, k)`; holds the delta tables so that
/// grid drivers do not rebuild them per node.
#[derive(Debug, Clone)]
pub struct LovelockEvaluator {
    dim: usize,
    k: usize,
    scalar_table: DeltaTable,
    einstein_table: DeltaTable,
    p_table: Option<DeltaTable>,
    with_p: bool,
}

impl LovelockEvaluator {
    pub fn new(dim: usize, k: usize) -> Result<Self> {
        if 2 * k > dim {
            return Err(GeometryError::InvalidOrder { k, dim, requirement: "2k <= d" });
        }
        Ok(Self {
            dim,
            k,
            scalar_table: DeltaTable::new(dim, 2 * k),
            einstein_table: DeltaTable::new(dim, 2 * k + 1),
            p_table: (k > 0).then(|| DeltaTable::new(dim, 2 * k)),
            with_p: true,
        })
    }

    /// Skips `P_(k)`, which dominates the cost for `k >= 2`.
    pub fn without_p(mut self) -> Self {
        self.with_p = false;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn evaluate(&self, ac: &AlgebraicCurvature) -> Result<LovelockData> {
        if ac.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch { expected: self.dim, found: ac.dim() });
        }
        let n = self.dim;
        let k = self.k;
        let ginv = ac.inverse_metric();
        if k == 0 {
            let einstein = ginv * -0.5;
            let einstein_mixed = DMatrix::identity(n, n) * -0.5;
            return Ok(LovelockData { k, lk: 1.0, einstein, einstein_mixed, p: None });
        }
        let rm = ac.mixed();
        let factor = |upper: &[usize], lower: &[usize], offset: usize, pairs: usize| -> f64 {
            let mut prod = 1.0;
            for m in 0..pairs {
                let a = offset + 2 * m;
                prod *= rm[[upper[a], upper[a + 1], lower[a], lower[a + 1]]];
                if prod == 0.0 {
                    break;
                }
            }
            prod
        };

        let mut lk = 0.0;
        self.scalar_table.for_each(|u, w, s| lk += s * factor(u, w, 0, k));
        lk /= f64::powi(2.0, k as i32);

        let mut mixed = DMatrix::zeros(n, n);
        self.einstein_table.for_each(|u, w, s| {
            mixed[(u[0], w[0])] += s * factor(u, w, 1, k);
        });
        mixed *= -1.0 / f64::powi(2.0, k as i32 + 1);
        let einstein = &mixed * ginv;
        let einstein_mixed = mixed;

        let p = match (&self.p_table, self.with_p) {
            (Some(table), true) => Some(p_tensor(table, k, &factor, ginv)),
            _ => None,
        };
        Ok(LovelockData { k, lk, einstein, einstein_mixed, p })
    }
}

// P^{st}_{ab} = 2^{-k} δ^{I s t}_{J a b} Π R_I^J, then raise (a, b) -> (l, j).
// Only s < t and l < j are summed; the rest is filled by antisymmetry so that
// both antisymmetries hold exactly.
fn p_tensor<F>(table: &DeltaTable, k: usize, factor: &F, ginv: &DMatrix<f64>) -> Tensor4
where
    F: Fn(&[usize], &[usize], usize, usize) -> f64,
{
    let n = table.dim();
    let last = 2 * k - 2;
    let mut mixed = Tensor4::zeros(n);
    table.for_each(|u, w, s| {
        if u[last] < u[last + 1] {
            mixed[[u[last], u[last + 1], w[last], w[last + 1]]] += s * factor(u, w, 0, k - 1);
        }
    });
    let scale = 1.0 / f64::powi(2.0, k as i32);
    let mut p = Tensor4::zeros(n);
    for s in 0..n {
        for t in (s + 1)..n {
            for l in 0..n {
                for j in (l + 1)..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            acc += mixed[[s, t, a, b]] * ginv[(a, l)] * ginv[(b, j)];
                        }
                    }
                    let v = acc * scale;
                    p[[s, t, l, j]] = v;
                    p[[t, s, l, j]] = -v;
                    p[[s, t, j, l]] = -v;
                    p[[t, s, j, l]] = v;
                }
            }
        }
    }
    p
}

/// `L_k`, `E_(k)` and `P_(k)` of an algebraic curvature tensor.
///
/// For `k = 0` returns `L_0 = 1`, `E_(0) = -g^{ij}/2` and no `P`.
pub fn lovelock(ac: &AlgebraicCurvature, k: usize) -> Result<LovelockData> {
    LovelockEvaluator::new(ac.dim(), k)?.evaluate(ac)
}

/// Max-norm of `E_(k)^{ms} + L_k g^{ms}/2 - k P_(k)^{ijs}_l R_{ij}^{ml}`.
pub fn einstein_decomposition_residual(ac: &AlgebraicCurvature, k: usize) -> Result<f64> {
    if k == 0 || 2 * k > ac.dim() {
        return Err(GeometryError::InvalidOrder { k, dim: ac.dim(), requirement: "1 <= 2k <= d" });
    }
    let data = lovelock(ac, k)?;
    let n = ac.dim();
    let p_lowered = data.p()?.contract_slot(3, ac.metric());
    let rm = ac.mixed();
    let ginv = ac.inverse_metric();
    let mut worst = 0.0_f64;
    for m in 0..n {
        for s in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        acc += p_lowered[[i, j, s, l]] * rm[[i, j, m, l]];
                    }
                }
            }
            let residual = data.einstein[(m, s)] + 0.5 * data.lk * ginv[(m, s)] - k as f64 * acc;
            worst = worst.max(residual.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::{contractions, random_algebraic_curvature, space_form};

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|v| v as f64).product()
    }

    #[test]
    fn k_zero_conventions() {
        let ac = random_algebraic_curvature(4, 2).unwrap();
        let data = lovelock(&ac, 0).unwrap();
        assert_eq!(data.lk, 1.0);
        assert_eq!(data.einstein, ac.inverse_metric() * -0.5);
        assert_eq!(data.p(), Err(GeometryError::UndefinedForKZero));
    }

    #[test]
    fn order_too_large_is_rejected() {
        let ac = random_algebraic_curvature(3, 2).unwrap();
        assert!(matches!(lovelock(&ac, 2), Err(GeometryError::InvalidOrder { .. })));
        assert!(einstein_decomposition_residual(&ac, 0).is_err());
    }

    #[test]
    fn space_form_closed_form() {
        let g = DMatrix::identity(4, 4);
        let ac = space_form(g, 1.0).unwrap();
        assert!((lovelock(&ac, 1).unwrap().lk - 12.0).abs() < 1e-12);
        assert!((lovelock(&ac, 2).unwrap().lk - 24.0).abs() < 1e-12);
        // E_(k) = -1/2 c^k (d-1)!/(d-1-2k)! g^{-1}; vanishes when 2k = d
        let e1 = lovelock(&ac, 1).unwrap().einstein;
        assert!((e1 + DMatrix::identity(4, 4) * 3.0).amax() < 1e-12);
        assert!(lovelock(&ac, 2).unwrap().einstein.amax() < 1e-12);
        let ac5 = space_form(random_algebraic_curvature(5, 4).unwrap().metric().clone(), -1.0).unwrap();
        let e2 = lovelock(&ac5, 2).unwrap();
        let expected = 0.5 * factorial(4) / factorial(0);
        assert!((e2.einstein_mixed - DMatrix::identity(5, 5) * -expected).amax() < 1e-11);
    }

    #[test]
    fn scalar_and_einstein_for_k_one() {
        let ac = random_algebraic_curvature(3, 7).unwrap();
        let c = contractions(&ac);
        let data = lovelock(&ac, 1).unwrap();
        assert!((data.lk - c.scalar).abs() <= 1e-12 * c.scalar.abs().max(1.0));
        let ginv = ac.inverse_metric();
        let ric_up = ginv * &c.ricci * ginv;
        let expected = ric_up - ginv * (0.5 * c.scalar);
        assert!((&data.einstein - expected).amax() <= 1e-12);
    }

    #[test]
    fn quadratic_gauss_bonnet_and_einstein_closed_forms() {
        for seed in 0..5 {
            let ac = random_algebraic_curvature(5, seed).unwrap();
            let n = ac.dim();
            let ginv = ac.inverse_metric();
            let r = ac.riemann();
            let c = contractions(&ac);
            // fully raised Riemann and Ricci
            let r_up = r.contract_slot(0, ginv).contract_slot(1, ginv).contract_slot(2, ginv).contract_slot(3, ginv);
            let ric_up = ginv * &c.ricci * ginv;
            let mut rm2 = 0.0;
            for idx in 0..n.pow(4) {
                rm2 += r.as_slice()[idx] * r_up.as_slice()[idx];
            }
            let ric2 = c.ricci.component_mul(&ric_up).sum();
            let l2 = rm2 - 4.0 * ric2 + c.scalar * c.scalar;
            let data = lovelock(&ac, 2).unwrap();
            assert!((data.lk - l2).abs() <= 1e-10 * l2.abs().max(1.0), "{} vs {}", data.lk, l2);

            // E_(2)^{ij} = 2R R^{ij} - 4R^{is}R_s^j - 4R_{sl}R^{silj} + 2R^i_{klm}R^{jklm} - L_2 g^{ij}/2
            let ric_mixed = ginv * &c.ricci;
            let mut e2 = &ric_up * (2.0 * c.scalar) - ric_mixed.clone() * &ric_up * 4.0 - ginv * (0.5 * l2);
            // R^i_{klm} R^{jklm} = g^{ia} R_{aklm} R^{jklm}
            let r_i = r.contract_slot(0, ginv);
            for i in 0..n {
                for j in 0..n {
                    let mut a = 0.0;
                    let mut b = 0.0;
                    for s in 0..n {
                        for l in 0..n {
                            a += c.ricci[(s, l)] * r_up[[s, i, l, j]];
                            for m in 0..n {
                                b += r_i[[i, s, l, m]] * r_up[[j, s, l, m]];
                            }
                        }
                    }
                    e2[(i, j)] += -4.0 * a + 2.0 * b;
                }
            }
            assert!((&data.einstein - &e2).amax() <= 1e-10 * e2.amax().max(1.0));
        }
    }

    #[test]
    fn trace_identity_and_symmetry() {
        for (d, seed) in [(3, 1), (4, 2), (5, 3), (6, 4)] {
            let ac = random_algebraic_curvature(d, seed).unwrap();
            for k in 0..=d / 2 {
                let data = lovelock(&ac, k).unwrap();
                assert!(data.trace_defect().abs() <= 1e-12 * data.lk.abs().max(1.0));
                let e = &data.einstein;
                assert!((e - e.transpose()).amax() <= 1e-12 * e.amax().max(1.0));
            }
        }
    }

    #[test]
    fn p_tensor_symmetries() {
        let ac = random_algebraic_curvature(5, 8).unwrap();
        for k in 1..=2 {
            let data = lovelock(&ac, k).unwrap();
            let p = data.p().unwrap();
            let n = 5;
            let scale = p.max_abs();
            for s in 0..n {
                for t in 0..n {
                    for j in 0..n {
                        for l in 0..n {
                            let v = p[[s, t, j, l]];
                            assert_eq!(v, -p[[t, s, j, l]]);
                            assert_eq!(v, -p[[s, t, l, j]]);
                            assert!((v - p[[j, l, s, t]]).abs() <= 1e-13 * scale);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_residuals() {
        let ac = random_algebraic_curvature(4, 21).unwrap();
        assert!(einstein_decomposition_residual(&ac, 1).unwrap() <= 1e-12);
        let ac = random_algebraic_curvature(5, 22).unwrap();
        assert!(einstein_decomposition_residual(&ac, 2).unwrap() <= 1e-10);
        let zero = AlgebraicCurvature::new(DMatrix::identity(3, 3), Tensor4::zeros(3)).unwrap();
        assert_eq!(einstein_decomposition_residual(&zero, 1).unwrap(), 0.0);
    }
}
