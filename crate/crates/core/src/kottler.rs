//! Kottler-Schwarzschild warped products `dr^2 + lambda(r)^2 g_N` with
//! `lambda' = V(lambda)`, `V(rho)^2 = rho^2 + kappa - 2 m rho^{2-n}`.

use std::sync::Arc;

use crate::error::{GeometryError, Result};
use crate::numerics::{adaptive_quad, bisect, gauss_legendre};
use crate::warped_geometry::{WarpedProduct, Warping};

/// `m_c = -(n-2)^{(n-2)/2} / n^{n/2}`.
pub fn critical_mass(n: usize) -> f64 {
    let nf = n as f64;
    -(nf - 2.0).powf(0.5 * (nf - 2.0)) / nf.powf(0.5 * nf)
}

/// `rho_1 = (-(n-2) m)^{1/n}`, the critical point of `V^2` for `m < 0`.
pub fn rho_one(n: usize, m: f64) -> f64 {
    (-(n as f64 - 2.0) * m).powf(1.0 / n as f64)
}

/// `V^2(rho) = rho^2 + kappa - 2 m rho^{2-n}`.
pub fn v_squared(n: usize, kappa: i32, m: f64, rho: f64) -> f64 {
    rho * rho + kappa as f64 - 2.0 * m * rho.powf(2.0 - n as f64)
}

fn dv_squared(n: usize, m: f64, rho: f64) -> f64 {
    let nf = n as f64;
    2.0 * rho + 2.0 * (nf - 2.0) * m * rho.powf(1.0 - nf)
}

fn validate(n: usize, kappa: i32, m: f64) -> Result<()> {
    if n < 3 {
        return Err(GeometryError::InvalidParameter(format!("dimension {n} must be at least 3")));
    }
    if !(-1..=1).contains(&kappa) {
        return Err(GeometryError::InvalidParameter(format!("fiber curvature {kappa} not in {{-1, 0, 1}}")));
    }
    let critical = critical_mass(n);
    let admissible = if kappa == -1 { m >= critical } else { m > 0.0 };
    if !admissible || !m.is_finite() {
        return Err(GeometryError::NoHorizon { n, kappa, mass: m, critical });
    }
    Ok(())
}

/// Tolerance below which `V^2(rho_1)` counts as a double root.
pub const DOUBLE_ROOT_TOL: f64 = 1e-12;

/// Horizon `rho_0`: the largest positive root of `V^2`.
pub fn horizon_radius(n: usize, kappa: i32, m: f64) -> Result<f64> {
    Ok(locate_horizon(n, kappa, m)?.0)
}

/// Returns `(rho_0, double_root)`.
fn locate_horizon(n: usize, kappa: i32, m: f64) -> Result<(f64, bool)> {
    validate(n, kappa, m)?;
    let f = |rho: f64| v_squared(n, kappa, m, rho);
    let mut lo = if m < 0.0 {
        let r1 = rho_one(n, m);
        let at_min = f(r1);
        if at_min.abs() <= DOUBLE_ROOT_TOL {
            return Ok((r1, true));
        }
        if at_min > 0.0 {
            return Err(GeometryError::NoHorizon { n, kappa, mass: m, critical: critical_mass(n) });
        }
        r1
    } else {
        f64::MIN_POSITIVE.sqrt()
    };
    let mut hi = 1.0_f64;
    while f(hi) <= 0.0 {
        lo = lo.max(hi);
        hi *= 2.0;
    }
    let root = bisect(f, lo, hi, 0.0);
    for i in 1..=100 {
        let rho = root * (1.0 + i as f64 / 100.0);
        if !(f(rho) > 0.0 && dv_squared(n, m, rho) > 0.0) {
            return Err(GeometryError::InvalidParameter(format!("V^2 not increasing beyond the horizon at rho = {rho}")));
        }
    }
    Ok((root, false))
}

/// Kottler parameters with their horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct KottlerSpace {
    n: usize,
    kappa: i32,
    mass: f64,
    horizon: f64,
    degenerate: bool,
}

impl KottlerSpace {
    pub fn new(n: usize, kappa: i32, mass: f64) -> Result<Self> {
        let (horizon, degenerate) = locate_horizon(n, kappa, mass)?;
        Ok(Self { n, kappa, mass, horizon, degenerate })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> i32 {
        self.kappa
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// True when the horizon is the double root at `m = m_c`.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn v(&self, rho: f64) -> f64 {
        v_squared(self.n, self.kappa, self.mass, rho).max(0.0).sqrt()
    }

    /// `V^2(rho_0 + tau) / tau`, evaluated without cancellation near the horizon.
    fn v_squared_over_tau(&self, tau: f64) -> f64 {
        let rho0 = self.horizon;
        let nf = self.n as f64;
        let coeff = 2.0 * self.mass * rho0.powf(2.0 - nf);
        if tau == 0.0 {
            return 2.0 * rho0 - coeff * (2.0 - nf) / rho0;
        }
        let ratio = ((2.0 - nf) * (tau / rho0).ln_1p()).exp_m1() / tau;
        (2.0 * rho0 + tau) - coeff * ratio
    }
}

/// `dr/dt` under `rho = rho_0 + t^2`.
fn drdt(ks: &KottlerSpace, t: f64) -> f64 {
    2.0 / ks.v_squared_over_tau(t * t).sqrt()
}

pub const DEFAULT_PANELS: usize = 2000;

/// Tabulated warping function `lambda(r)` of a Kottler space, `r >= 0`, with
/// the even extension `lambda(-r) = lambda(r)`.
///
/// The table stores `r(t) = int_0^t 2 / sqrt(V^2/tau)` at uniform `t`; values
/// between nodes are recovered by Newton iteration on the panel quadrature.
#[derive(Debug, Clone)]
pub struct KottlerProfile {
    space: KottlerSpace,
    r_max: f64,
    tol: f64,
    t_nodes: Vec<f64>,
    r_nodes: Vec<f64>,
}

pub fn lambda_profile(ks: &KottlerSpace, r_max: f64, tol: f64) -> Result<KottlerProfile> {
    if !(r_max > 0.0 && tol > 0.0) {
        return Err(GeometryError::InvalidParameter(format!("need r_max > 0 and tol > 0, got {r_max}, {tol}")));
    }
    if ks.degenerate {
        return Err(GeometryError::DegenerateHorizon { critical: critical_mass(ks.n) });
    }
    let cover = r_max + PROFILE_MARGIN;
    let f = |t: f64| drdt(ks, t);
    let mut t_max = 1.0_f64;
    while adaptive_quad(&f, 0.0, t_max, tol) < cover {
        t_max *= 2.0;
        if t_max > 1e12 {
            return Err(GeometryError::InvalidParameter("profile table does not reach r_max".into()));
        }
    }
    let panels = DEFAULT_PANELS;
    let dt = t_max / panels as f64;
    let t_nodes: Vec<f64> = (0..=panels).map(|i| i as f64 * dt).collect();
    let mut r_nodes = Vec::with_capacity(panels + 1);
    let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
    r_nodes.push(0.0);
    for w in t_nodes.windows(2) {
        let x = gauss_legendre(&f, w[0], w[1]);
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
        r_nodes.push(sum + comp);
    }
    Ok(KottlerProfile { space: ks.clone(), r_max, tol, t_nodes, r_nodes })
}

/// Extra coverage of the table beyond `r_max`, used by difference stencils.
pub const PROFILE_MARGIN: f64 = 0.25;

impl KottlerProfile {
    pub fn space(&self) -> &KottlerSpace {
        &self.space
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Parameter `t = sqrt(lambda(r) - rho_0)` for `r >= 0`.
    fn parameter(&self, r: f64) -> f64 {
        let r = r.abs();
        let last = *self.r_nodes.last().unwrap_or(&0.0);
        if r <= 0.0 {
            return 0.0;
        }
        let r = r.min(last);
        let i = match self.r_nodes.binary_search_by(|v| v.total_cmp(&r)) {
            Ok(i) => return self.t_nodes[i],
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.t_nodes[i], self.t_nodes[i + 1]);
        let (r0, r1) = (self.r_nodes[i], self.r_nodes[i + 1]);
        let (s0, s1) = (drdt(&self.space, t0), drdt(&self.space, t1));
        // Cubic Hermite guess for t(r) using dt/dr = 1/s at the panel ends.
        let hr = r1 - r0;
        let x = (r - r0) / hr;
        let (h00, h10, h01, h11) =
            (2.0 * x.powi(3) - 3.0 * x * x + 1.0, x.powi(3) - 2.0 * x * x + x, -2.0 * x.powi(3) + 3.0 * x * x, x.powi(3) - x * x);
        let mut t = (h00 * t0 + h10 * hr / s0 + h01 * t1 + h11 * hr / s1).clamp(t0, t1);
        let (mut lo, mut hi) = (t0, t1);
        for _ in 0..60 {
            let g = r0 + gauss_legendre(&|s: f64| drdt(&self.space, s), t0, t) - r;
            if g > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - g / drdt(&self.space, t);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 4.0 * f64::EPSILON * t.max(1e-300) {
                return next;
            }
            t = next;
        }
        t
    }

    pub fn lambda(&self, r: f64) -> f64 {
        let t = self.parameter(r);
        self.space.horizon + t * t
    }

    /// `lambda' = V(lambda)`, odd in `r`.
    pub fn dlambda(&self, r: f64) -> f64 {
        let t = self.parameter(r);
        let v = t * self.space.v_squared_over_tau(t * t).sqrt();
        if r < 0.0 { -v } else { v }
    }

    /// `lambda'' = lambda + (n-2) m lambda^{1-n}`.
    pub fn ddlambda(&self, r: f64) -> f64 {
        let lam = self.lambda(r);
        let nf = self.space.n as f64;
        lam + (nf - 2.0) * self.space.mass * lam.powf(1.0 - nf)
    }

    /// The warped product `[0, r_max) x_lambda N^{n-1}(kappa)`.
    pub fn warped_product(&self) -> Result<WarpedProduct> {
        WarpedProduct::new(self.space.n, self.space.kappa, Arc::new(self.clone()))
    }
}

impl Warping for KottlerProfile {
    fn lambda(&self, r: f64) -> f64 {
        KottlerProfile::lambda(self, r)
    }
    fn dlambda(&self, r: f64) -> f64 {
        KottlerProfile::dlambda(self, r)
    }
    fn ddlambda(&self, r: f64) -> f64 {
        KottlerProfile::ddlambda(self, r)
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, self.r_max)
    }
    fn name(&self) -> String {
        format!("kottler(n={}, kappa={}, m={})", self.space.n, self.space.kappa, self.space.mass)
    }
}

/// Step of the difference stencils in [`logconvexity_report`].
pub const REPORT_STEP: f64 = 0.01;

const D1: [f64; 7] = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D2: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, -49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogConvexitySample {
    pub r: f64,
    pub lambda: f64,
    /// Closed forms `V(lambda)` and `lambda + (n-2) m lambda^{1-n}`.
    pub dlambda: f64,
    pub ddlambda: f64,
    /// `lambda lambda'' - lambda'^2`.
    pub defect: f64,
    /// `-kappa + n m lambda^{2-n}`.
    pub closed_form: f64,
    pub residual: f64,
    /// The defect from sixth-order central differences of the tabulated
    /// `lambda` with step [`REPORT_STEP`], and its distance to `closed_form`.
    pub fd_defect: f64,
    pub fd_residual: f64,
}

/// Log-convexity defect of the profile at each sample against its closed form.
pub fn logconvexity_report(profile: &KottlerProfile, samples: &[f64]) -> Result<Vec<LogConvexitySample>> {
    let ks = profile.space();
    let nf = ks.n as f64;
    samples
        .iter()
        .map(|&r| {
            if !(r >= 0.0 && r <= profile.r_max) {
                return Err(GeometryError::OutsideDomain { r, lo: 0.0, hi: profile.r_max });
            }
            let vals: Vec<f64> = (-3..=3).map(|j| profile.lambda(r + j as f64 * REPORT_STEP)).collect();
            let d1: f64 = D1.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / REPORT_STEP;
            let d2: f64 = D2.iter().zip(&vals).map(|(c, v)| c * v).sum::<f64>() / (REPORT_STEP * REPORT_STEP);
            let lam = vals[3];
            let (dl, ddl) = (profile.dlambda(r), profile.ddlambda(r));
            let defect = lam * ddl - dl * dl;
            let fd_defect = lam * d2 - d1 * d1;
            let closed_form = -(ks.kappa as f64) + nf * ks.mass * lam.powf(2.0 - nf);
            Ok(LogConvexitySample {
                r,
                lambda: lam,
                dlambda: dl,
                ddlambda: ddl,
                defect,
                closed_form,
                residual: (defect - closed_form).abs(),
                fd_defect,
                fd_residual: (fd_defect - closed_form).abs(),
            })
        })
        .collect()
}

/// Report CSV: `r,lambda,dlambda,ddlambda,defect,closed_form,residual`.
pub fn write_logconvexity_csv<W: std::io::Write>(samples: &[LogConvexitySample], out: W) -> Result<()> {
    let io = |e: csv::Error| GeometryError::InvalidParameter(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "lambda", "dlambda", "ddlambda", "defect", "closed_form", "residual"]).map_err(io)?;
    for s in samples {
        w.write_record(
            [s.r, s.lambda, s.dlambda, s.ddlambda, s.defect, s.closed_form, s.residual].map(|v| format!("{v:.16e}")),
        )
        .map_err(io)?;
    }
    w.flush().map_err(|e| GeometryError::InvalidParameter(format!("csv output failed: {e}")))?;
    Ok(())
}
