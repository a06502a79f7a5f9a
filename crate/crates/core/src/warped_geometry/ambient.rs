use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{GeometryError, Result};
use crate::numerics::adaptive_quad;

/// Warping function `lambda(r)` of `dr^2 + lambda(r)^2 g_N` on `[lo, hi)`.
pub trait Warping: Debug + Send + Sync {
    fn lambda(&self, r: f64) -> f64;
    fn dlambda(&self, r: f64) -> f64;
    fn ddlambda(&self, r: f64) -> f64;
    /// Half-open interval `[lo, hi)`; `hi` may be infinite.
    fn domain(&self) -> (f64, f64);
    fn name(&self) -> String;
}

/// `lambda = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linear;

impl Warping for Linear {
    fn lambda(&self, r: f64) -> f64 {
        r
    }
    fn dlambda(&self, _r: f64) -> f64 {
        1.0
    }
    fn ddlambda(&self, _r: f64) -> f64 {
        0.0
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn name(&self) -> String {
        "r".into()
    }
}

/// `lambda = exp(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential;

impl Warping for Exponential {
    fn lambda(&self, r: f64) -> f64 {
        r.exp()
    }
    fn dlambda(&self, r: f64) -> f64 {
        r.exp()
    }
    fn ddlambda(&self, r: f64) -> f64 {
        r.exp()
    }
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn name(&self) -> String {
        "exp(r)".into()
    }
}

/// `lambda = cosh(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosh;

impl Warping for Cosh {
    fn lambda(&self, r: f64) -> f64 {
        r.cosh()
    }
    fn dlambda(&self, r: f64) -> f64 {
        r.sinh()
    }
    fn ddlambda(&self, r: f64) -> f64 {
        r.cosh()
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn name(&self) -> String {
        "cosh(r)".into()
    }
}

/// `lambda = sinh(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinh;

impl Warping for Sinh {
    fn lambda(&self, r: f64) -> f64 {
        r.sinh()
    }
    fn dlambda(&self, r: f64) -> f64 {
        r.cosh()
    }
    fn ddlambda(&self, r: f64) -> f64 {
        r.sinh()
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn name(&self) -> String {
        "sinh(r)".into()
    }
}

/// Warped product `[lo, hi) x_lambda N^{n-1}(kappa)` over a space-form fiber.
#[derive(Debug, Clone)]
pub struct WarpedProduct {
    n: usize,
    kappa: i32,
    warping: Arc<dyn Warping>,
}

/// Relative tolerance of the derivative spot-check in [`WarpedProduct::new`].
pub const DERIVATIVE_CHECK_TOL: f64 = 1e-6;

impl WarpedProduct {
    pub fn new(n: usize, kappa: i32, warping: Arc<dyn Warping>) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::InvalidParameter(format!("ambient dimension {n} must be at least 2")));
        }
        if !(-1..=1).contains(&kappa) {
            return Err(GeometryError::InvalidParameter(format!("fiber curvature {kappa} not in {{-1, 0, 1}}")));
        }
        let wp = Self { n, kappa, warping };
        let (lo, hi) = wp.domain();
        let (start, span) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo, hi - lo),
            (true, false) => (lo, 2.0),
            (false, true) => (hi - 2.0, 2.0),
            (false, false) => (-1.0, 2.0),
        };
        for frac in [0.25, 0.5, 0.75] {
            let r = start + frac * span;
            let defect = wp.derivative_defect(r)?;
            if defect > DERIVATIVE_CHECK_TOL {
                return Err(GeometryError::InvalidParameter(format!(
                    "warping derivatives inconsistent at r = {r}: defect {defect:e}"
                )));
            }
        }
        Ok(wp)
    }

    /// `lambda = r` over the round sphere: flat space.
    pub fn euclid(n: usize) -> Result<Self> {
        Self::new(n, 1, Arc::new(Linear))
    }

    /// `lambda = exp(r)` over a flat fiber: hyperbolic space in horospherical form.
    pub fn hyperbolic_horo(n: usize) -> Result<Self> {
        Self::new(n, 0, Arc::new(Exponential))
    }

    /// `lambda = cosh(r)` over a flat fiber.
    pub fn hyperbolic_cosh(n: usize) -> Result<Self> {
        Self::new(n, 0, Arc::new(Cosh))
    }

    /// Same warping function over a fiber of curvature `kappa`.
    pub fn with_kappa(&self, kappa: i32) -> Result<Self> {
        Self::new(self.n, kappa, self.warping.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> i32 {
        self.kappa
    }

    pub fn warping(&self) -> &Arc<dyn Warping> {
        &self.warping
    }

    pub fn domain(&self) -> (f64, f64) {
        self.warping.domain()
    }

    /// Validates `r` and returns `(lambda, lambda', lambda'')`.
    pub fn profile(&self, r: f64) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.domain();
        if !(r >= lo && r < hi) {
            return Err(GeometryError::OutsideDomain { r, lo, hi });
        }
        let w = &self.warping;
        let lam = w.lambda(r);
        if !(lam > 0.0) {
            return Err(GeometryError::InvalidParameter(format!("warping function not positive at r = {r}")));
        }
        Ok((lam, w.dlambda(r), w.ddlambda(r)))
    }

    /// Largest relative mismatch between central differences of `lambda`,
    /// `lambda'` and the supplied derivatives.
    pub fn derivative_defect(&self, r: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        let step = 1e-5;
        let c = r.clamp(lo + 2.0 * step, if hi.is_finite() { hi - 2.0 * step } else { f64::MAX });
        let (_, d1, d2) = self.profile(c)?;
        let w = &self.warping;
        let fd1 = (w.lambda(c + step) - w.lambda(c - step)) / (2.0 * step);
        let fd2 = (w.dlambda(c + step) - w.dlambda(c - step)) / (2.0 * step);
        Ok(((fd1 - d1).abs() / d1.abs().max(1.0)).max((fd2 - d2).abs() / d2.abs().max(1.0)))
    }

    /// Primitive `phi(r) = int_base^r lambda` by adaptive quadrature, with
    /// `base` the lower domain end, or 0 when that end is infinite.
    pub fn phi(&self, r: f64) -> Result<f64> {
        self.profile(r)?;
        let lo = self.domain().0;
        let lo = if lo.is_finite() { lo } else { 0.0 };
        let w = self.warping.clone();
        Ok(adaptive_quad(&move |s: f64| w.lambda(s), lo, r, PHI_TOL))
    }

    /// Quotient `(n-1-2k) lambda'/lambda` of the slice `{r} x N`.
    pub fn slice_quotient(&self, r: f64, k: usize) -> Result<f64> {
        let (lam, d1, _) = self.profile(r)?;
        Ok((self.n as f64 - 1.0 - 2.0 * k as f64) * d1 / lam)
    }
}

/// Absolute tolerance of the quadrature behind [`WarpedProduct::phi`].
pub const PHI_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientCurvature {
    /// Sectional curvature of planes containing the radial direction, `-lambda''/lambda`.
    pub sec_radial: f64,
    /// Sectional curvature of planes tangent to the fiber, `(kappa - lambda'^2)/lambda^2`.
    pub sec_fiber: f64,
    /// `|D_r lambda - lambda'|` with `D_r` a central difference: the radial
    /// component of `nabla_{d_r} X - lambda' d_r` for `X = lambda d_r`.
    pub killing_residual: f64,
}

pub fn ambient_geometry(wp: &WarpedProduct, r: f64) -> Result<AmbientCurvature> {
    let (lam, d1, d2) = wp.profile(r)?;
    let (lo, hi) = wp.domain();
    let step = 1e-5;
    let c = r.clamp(lo + step, if hi.is_finite() { hi - step } else { f64::MAX });
    let w = wp.warping();
    let fd = (w.lambda(c + step) - w.lambda(c - step)) / (2.0 * step);
    let killing_residual = (fd - w.dlambda(c)).abs() / d1.abs().max(1.0);
    Ok(AmbientCurvature {
        sec_radial: -d2 / lam,
        sec_fiber: (wp.kappa() as f64 - d1 * d1) / (lam * lam),
        killing_residual,
    })
}
