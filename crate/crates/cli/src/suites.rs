//! Suite runners. Each appends checks and a data section to the report.

use std::f64::consts::TAU;

use gbq_core::kottler::{critical_mass, lambda_profile, logconvexity_report, write_logconvexity_csv, KottlerSpace, LogConvexitySample};
use gbq_core::manifold_numerics::{
    curvature_evolution_residual, divergence_free_check, first_variation_check, metrics, total_lk, PeriodicGrid,
    VariationField,
};
use gbq_core::rigidity::{
    analyze_graph, bernstein_hypothesis_check, elliptic_residual, perturbation_scan, richardson_slope, Check,
    CosineGraph, Definiteness, PerturbationMode, RigidityReport, MODE_LIBRARY_VERSION,
};
use gbq_core::tensor_core::{
    einstein_closed_form, einstein_decomposition_residual, euclidean_correspondence, lovelock, quadratic_gauss_bonnet,
    random_algebraic_curvature, random_shape_operator, space_form,
};
use gbq_core::warped_geometry::{
    hessian_identity_residuals, quotient_field, write_hypersurface_csv, GraphHypersurface, HessianResiduals,
    WarpedProduct,
};
use gbq_core::GeometryError;
use serde_json::{json, Value};

use crate::{preset_ambient, write_dump, CliError, Opts, Result, Suite};

/// Number of random curvature tensors in the identity suite.
pub const IDENTITY_SAMPLES: usize = 200;
/// Number of random shape operators in the identity suite.
pub const SHAPE_SAMPLES: usize = 100;

/// The documented perturbation case: `lambda = cosh r`, round fiber.
pub const SCAN_N: usize = 4;
pub const SCAN_KAPPA: i32 = 1;
pub const SCAN_K: usize = 1;
pub const SCAN_R0: f64 = 0.3;
pub const SCAN_GRID: usize = 32;
pub const SCAN_EPS: [f64; 3] = [0.01, 0.02, 0.05];
/// Oscillations of the documented case at [`SCAN_EPS`], from the first
/// verified run (mode library version 1).
pub const SCAN_GOLDEN: [f64; 3] = [3.383410824744268e-1, 6.840997276178656e-1, 1.9120193808163197];
pub const GOLDEN_REL_TOL: f64 = 1e-9;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

fn param_error(msg: impl Into<String>) -> CliError {
    CliError::Parameter(msg.into())
}

fn hessian_max(r: &HessianResiduals) -> f64 {
    r.r1.max(r.r2).max(r.r3).max(r.r4)
}

fn hessian_json(r: &HessianResiduals) -> Value {
    json!({ "r1": r.r1, "r2": r.r2, "r3": r.r3, "r4": r.r4 })
}

pub fn verify(o: &Opts, report: &mut RigidityReport) -> Result<()> {
    let suite = o.suite.unwrap_or(Suite::All);
    report.param("suite", suite.name())?;
    let all = suite == Suite::All;
    if all || suite == Suite::Identities {
        identities(o, report)?;
    }
    if all || suite == Suite::Variation {
        variation(o, report)?;
    }
    if all || suite == Suite::Hypersurface {
        hypersurface(report)?;
    }
    if all || suite == Suite::Kottler {
        kottler_suite(report)?;
    }
    if all || suite == Suite::Perturb {
        perturb_suite(report)?;
    }
    Ok(())
}

#[derive(Default)]
struct Worst {
    trace: f64,
    einstein_symmetry: f64,
    l1_scalar: f64,
    e1_closed_form: f64,
    l2_quadratic: f64,
    decomposition: f64,
    p_antisymmetry: f64,
    p_pair_exchange: f64,
}

fn identities(o: &Opts, report: &mut RigidityReport) -> Result<()> {
    let seed0 = o.seed.unwrap_or(0);
    let dims: Vec<usize> = match o.dim {
        Some(d) if !(2..=6).contains(&d) => return Err(param_error(format!("--dim {d} outside 2..=6"))),
        Some(d) => vec![d],
        None => vec![3, 4, 5],
    };
    if let Some(k) = o.k {
        if dims.iter().any(|&d| 2 * k > d) {
            return Err(param_error(format!("--k {k} needs 2k <= dim")));
        }
    }
    let mut w = Worst::default();
    for i in 0..IDENTITY_SAMPLES {
        let d = dims[i % dims.len()];
        let ac = random_algebraic_curvature(d, seed0 + i as u64)?;
        let orders: Vec<usize> = match o.k {
            Some(k) => vec![k],
            None => (0..=d / 2).collect(),
        };
        for k in orders {
            let data = lovelock(&ac, k)?;
            w.trace = w.trace.max(data.trace_defect().abs() / data.lk.abs().max(1.0));
            let e = &data.einstein;
            w.einstein_symmetry = w.einstein_symmetry.max((e - e.transpose()).amax() / e.amax().max(1.0));
            if k >= 1 {
                let p = data.p()?;
                let defects = p.symmetry_defects();
                w.p_antisymmetry = w.p_antisymmetry.max(defects.first_pair).max(defects.second_pair);
                w.p_pair_exchange = w.p_pair_exchange.max(defects.pair_exchange / p.max_abs().max(1.0));
                w.decomposition = w.decomposition.max(einstein_decomposition_residual(&ac, k)?);
            }
            if k == 1 {
                let scal = gbq_core::tensor_core::contractions(&ac).scalar;
                w.l1_scalar = w.l1_scalar.max((data.lk - scal).abs() / scal.abs().max(1.0));
                let e1 = einstein_closed_form(&ac);
                w.e1_closed_form = w.e1_closed_form.max((e - &e1).amax() / e1.amax().max(1.0));
            }
            if k == 2 {
                let q = quadratic_gauss_bonnet(&ac);
                w.l2_quadratic = w.l2_quadratic.max((data.lk - q).abs() / q.abs().max(1.0));
            }
        }
    }
    report
        .push(Check::at_most("identities.trace_identity", w.trace, 1e-12))
        .push(Check::at_most("identities.einstein_symmetry", w.einstein_symmetry, 1e-12))
        .push(Check::at_most("identities.l1_equals_scalar", w.l1_scalar, 1e-12))
        .push(Check::at_most("identities.e1_closed_form", w.e1_closed_form, 1e-12))
        .push(Check::at_most("identities.l2_quadratic_formula", w.l2_quadratic, 1e-10))
        .push(Check::at_most("identities.einstein_decomposition", w.decomposition, 1e-10))
        .push(Check::at_most("identities.p_antisymmetry", w.p_antisymmetry, 0.0))
        .push(Check::at_most("identities.p_pair_exchange", w.p_pair_exchange, 1e-13));

    let mut space = 0.0_f64;
    for d in 2..=5 {
        let metric = random_algebraic_curvature(d, seed0 + d as u64)?.metric().clone();
        for c in [-1.0, 0.5, 1.0] {
            let ac = space_form(metric.clone(), c)?;
            for k in 0..=(d / 2).min(2) {
                let expected = factorial(d) / factorial(d - 2 * k) * c.powi(k as i32);
                space = space.max((lovelock(&ac, k)?.lk - expected).abs() / expected.abs().max(1.0));
            }
        }
    }
    report.push(Check::at_most("identities.space_form", space, 1e-12));

    let mut corr = 0.0_f64;
    for i in 0..SHAPE_SAMPLES {
        let s = random_shape_operator(5, seed0 + i as u64)?;
        for k in 0..=2 {
            corr = corr.max(euclidean_correspondence(&s, k)?.max_err());
        }
    }
    report.push(Check::at_most("identities.euclidean_correspondence", corr, 1e-10));
    report.section(
        "identities",
        &json!({
            "curvature_samples": IDENTITY_SAMPLES,
            "dims": dims,
            "k": o.k,
            "seed": seed0,
            "shape_samples": SHAPE_SAMPLES,
        }),
    )?;
    Ok(())
}

fn variation(o: &Opts, report: &mut RigidityReport) -> Result<()> {
    let d = 3;
    let k = o.k.unwrap_or(1);
    if 2 * k > d {
        return Err(param_error(format!("--k {k} needs 2k <= 3 in the variation suite")));
    }
    let n_fv = o.grid.unwrap_or(24);
    let seed_v = o.seed.unwrap_or(7);
    let seed_e = o.seed.unwrap_or(11);
    let step = 1e-4;
    let grid = |n: usize| PeriodicGrid::new(d, n);
    let fv_err = |n: usize| -> Result<f64> {
        let g = grid(n)?;
        let gf = metrics::conformal(g.clone(), 0.1)?;
        let v = metrics::random_variation(g, seed_v, 0.5)?;
        Ok(first_variation_check(&gf, &v, k, step)?.rel_err)
    };
    let fv = fv_err(n_fv)?;
    let (e16, e32) = (fv_err(16)?, fv_err(32)?);

    let gf = metrics::conformal(grid(n_fv)?, 0.1)?;
    let conf = first_variation_check(&gf, &VariationField::conformal(&gf), k, step)?;
    let expected = (0.5 * d as f64 - k as f64) * total_lk(&gf, k)?;
    let conf_err = (conf.fd - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);

    let levels = [16, 32, 64];
    let mut evo = Vec::new();
    for n in levels {
        let g = grid(n)?;
        let gf = metrics::conformal(g.clone(), 0.1)?;
        let v = metrics::random_variation(g, seed_e, 0.5)?;
        evo.push(curvature_evolution_residual(&gf, &v, step)?);
    }
    let orders: Vec<f64> = evo.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let constant = levels
        .iter()
        .zip(&evo)
        .map(|(&n, r)| r / ((1.0 / n as f64).powi(2) + step * step))
        .fold(0.0, f64::max);

    let div = |n: usize| -> Result<f64> { Ok(divergence_free_check(&metrics::conformal(grid(n)?, 0.1)?, 1)?.einstein) };
    let (d16, d32) = (div(16)?, div(32)?);

    report
        .push(Check::at_most("variation.first_variation_rel_err", fv, 1e-3))
        .push(Check::at_most("variation.conformal_identity", conf_err, 1e-4))
        .push(Check::within("variation.first_variation_ratio", e16 / e32, 4.0, 1.0))
        .push(Check::at_least("variation.evolution_order_16_32", orders[0], 1.8))
        .push(Check::at_least("variation.evolution_order_32_64", orders[1], 1.8))
        .push(Check::within("variation.divergence_ratio", d16 / d32, 4.0, 1.0));
    report.section(
        "variation",
        &json!({
            "dim": d,
            "k": k,
            "first_variation": { "grid": n_fv, "seed": seed_v, "step": step, "rel_err": fv, "rel_err_16": e16, "rel_err_32": e32 },
            "conformal": { "fd": conf.fd, "expected": expected },
            "evolution": { "grids": levels, "seed": seed_e, "residuals": evo, "orders": orders, "constant": constant },
            "divergence": { "grids": [16, 32], "einstein": [d16, d32] },
        }),
    )?;
    Ok(())
}

struct SliceCase {
    label: &'static str,
    ambient: WarpedProduct,
    r0: f64,
    orders: &'static [usize],
}

fn slice_cases() -> Result<Vec<SliceCase>> {
    Ok(vec![
        SliceCase { label: "euclid", ambient: WarpedProduct::euclid(5)?, r0: 1.0, orders: &[0, 1] },
        SliceCase { label: "hyperbolic-horo", ambient: WarpedProduct::hyperbolic_horo(4)?, r0: 0.5, orders: &[0] },
        SliceCase { label: "hyperbolic-cosh", ambient: WarpedProduct::hyperbolic_cosh(4)?, r0: 0.5, orders: &[0] },
        SliceCase {
            label: "hyperbolic-horo-round",
            ambient: WarpedProduct::hyperbolic_horo(4)?.with_kappa(1)?,
            r0: 0.5,
            orders: &[0, 1],
        },
        SliceCase {
            label: "hyperbolic-cosh-hyperbolic",
            ambient: WarpedProduct::hyperbolic_cosh(4)?.with_kappa(-1)?,
            r0: 0.5,
            orders: &[0, 1],
        },
        SliceCase { label: "kottler", ambient: preset_ambient("kottler", 4, Some(-1), 0.3, 2.0)?, r0: 0.5, orders: &[0, 1] },
        SliceCase { label: "kottler-round", ambient: preset_ambient("kottler", 4, Some(1), 0.2, 2.0)?, r0: 0.5, orders: &[0, 1] },
    ])
}

fn hypersurface(report: &mut RigidityReport) -> Result<()> {
    let mut rows = Vec::new();
    for case in slice_cases()? {
        let grid = PeriodicGrid::new(case.ambient.n() - 1, 4)?;
        let gh = GraphHypersurface::slice(case.ambient.clone(), grid, case.r0)?;
        for &k in case.orders {
            let expected = case.ambient.slice_quotient(case.r0, k)?;
            let q = quotient_field(&gh, k)?;
            let err = q.iter().map(|v| (v - expected).abs()).fold(0.0, f64::max);
            let hess = hessian_identity_residuals(&gh, k)?;
            report
                .push(Check::at_most(format!("hypersurface.{}.k{k}.slice_quotient", case.label), err, 1e-9))
                .push(Check::at_most(format!("hypersurface.{}.k{k}.hessian_identities", case.label), hessian_max(&hess), 1e-8));
            rows.push(json!({
                "model": case.label, "n": case.ambient.n(), "kappa": case.ambient.kappa(), "r0": case.r0, "k": k,
                "expected": expected, "quotient": q[0], "hessian": hessian_json(&hess),
            }));
        }
        if case.ambient.kappa() == 0 {
            let flat = matches!(quotient_field(&gh, 1), Err(GeometryError::VanishingH2k { .. }));
            report.push(Check::flag(format!("hypersurface.{}.k1.flat_slice_detected", case.label), flat));
        }
    }
    let sphere = GraphHypersurface::slice(WarpedProduct::euclid(5)?, PeriodicGrid::new(4, 4)?, 1.0)?;
    let q = quotient_field(&sphere, 1)?;
    report.push(Check::at_most("hypersurface.unit_sphere_quotient", q.iter().map(|v| (v - 2.0).abs()).fold(0.0, f64::max), 1e-9));

    let wp = WarpedProduct::euclid(4)?;
    let bumped = |n: usize| -> Result<HessianResiduals> {
        let gh = GraphHypersurface::from_fn(wp.clone(), PeriodicGrid::new(3, n)?, |x| 1.0 + 0.05 * (TAU * x[0]).sin())?;
        Ok(hessian_identity_residuals(&gh, 1)?)
    };
    let (a, b) = (bumped(16)?, bumped(32)?);
    let ratios = [a.r1 / b.r1, a.r2 / b.r2, a.r3 / b.r3, a.r4 / b.r4];
    for (i, ratio) in ratios.iter().enumerate() {
        report.push(Check::within(format!("hypersurface.hessian_ratio_r{}", i + 1), *ratio, 4.0, 1.0));
    }
    report.section(
        "hypersurface",
        &json!({
            "slices": rows,
            "perturbed": { "model": "euclid", "n": 4, "k": 1, "graph": "1 + 0.05 sin(2 pi x0)", "grids": [16, 32],
                           "coarse": hessian_json(&a), "fine": hessian_json(&b) },
        }),
    )?;
    Ok(())
}

fn samples(r_max: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| r_max * i as f64 / count as f64).collect()
}

fn kottler_suite(report: &mut RigidityReport) -> Result<()> {
    let tol = 1e-8;
    let profile = lambda_profile(&KottlerSpace::new(3, -1, 0.0)?, 3.0, tol)?;
    let cosh_err = samples(3.0, 300).iter().map(|&r| (profile.lambda(r) - r.cosh()).abs()).fold(0.0, f64::max);
    report.push(Check::at_most("kottler.cosh_profile", cosh_err, 1e-8));

    let mut cases = Vec::new();
    for n in 3..=7 {
        let mc = critical_mass(n);
        cases.extend([(n, 0, 0.1), (n, 0, 1.0), (n, -1, mc * (1.0 - 1e-6)), (n, -1, 0.3)]);
    }
    let (mut residual, mut fd_residual, mut min_defect) = (0.0_f64, 0.0_f64, f64::INFINITY);
    let mut rows = Vec::new();
    for &(n, kappa, m) in &cases {
        let ks = KottlerSpace::new(n, kappa, m)?;
        let rep = logconvexity_report(&lambda_profile(&ks, 3.0, tol)?, &samples(3.0, 30))?;
        let case_min = rep.iter().map(|s| s.defect).fold(f64::INFINITY, f64::min);
        residual = residual.max(rep.iter().map(|s| s.residual).fold(0.0, f64::max));
        fd_residual = fd_residual.max(rep.iter().map(|s| s.fd_residual).fold(0.0, f64::max));
        min_defect = min_defect.min(case_min);
        rows.push(json!({ "n": n, "kappa": kappa, "mass": m, "horizon": ks.horizon(), "min_defect": case_min }));
    }
    let round = logconvexity_report(&lambda_profile(&KottlerSpace::new(3, 1, 0.5)?, 3.0, tol)?, &samples(3.0, 30))?;
    let round_min = round.iter().map(|s| s.defect).fold(f64::INFINITY, f64::min);
    report
        .push(Check::at_most("kottler.logconvexity_residual", residual, 1e-7))
        .push(Check::at_most("kottler.logconvexity_fd_residual", fd_residual, 1e-7))
        .push(Check::at_least("kottler.min_defect", min_defect, -1e-8))
        .push(Check::flag("kottler.round_fiber_negative_defect", round_min < 0.0));
    report.section(
        "kottler",
        &json!({ "cases": rows, "round_fiber": { "n": 3, "kappa": 1, "mass": 0.5, "min_defect": round_min } }),
    )?;
    Ok(())
}

/// `(model, r0 range, log-convex)` for the randomized extremum cases.
fn extremum_models() -> Result<Vec<(&'static str, WarpedProduct, f64, f64, bool)>> {
    Ok(vec![
        ("hyperbolic-cosh-round", WarpedProduct::hyperbolic_cosh(4)?.with_kappa(1)?, 0.2, 0.8, true),
        ("hyperbolic-horo-round", WarpedProduct::hyperbolic_horo(4)?.with_kappa(1)?, -1.0, 1.0, true),
        ("euclid", WarpedProduct::euclid(5)?, 0.8, 1.5, false),
        ("hyperbolic-cosh-hyperbolic", WarpedProduct::hyperbolic_cosh(4)?.with_kappa(-1)?, 0.2, 1.0, true),
        ("hyperbolic-horo-round", WarpedProduct::hyperbolic_horo(5)?.with_kappa(1)?, -1.0, 1.0, true),
    ])
}

/// Number of randomized graphs in the extremum check.
pub const EXTREMUM_CASES: u64 = 10;
pub const EXTREMUM_TOL: f64 = 1e-6;

fn perturb_suite(report: &mut RigidityReport) -> Result<()> {
    let wp = WarpedProduct::hyperbolic_cosh(SCAN_N)?.with_kappa(SCAN_KAPPA)?;
    let mut eps = vec![0.0];
    eps.extend(SCAN_EPS);
    let scan = perturbation_scan(&wp, SCAN_R0, PerturbationMode::SingleCosine, &eps, SCAN_K, SCAN_GRID)?;
    let osc: Vec<f64> = scan.iter().map(|e| e.oscillation.clone()).collect::<gbq_core::Result<_>>()?;
    let increasing = osc.windows(2).all(|w| w[1] > w[0]);
    report
        .push(Check::at_most("perturb.oscillation_at_zero", osc[0], 1e-9))
        .push(Check::flag("perturb.strictly_increasing", increasing))
        .push(Check::at_least("perturb.oscillation_at_0.05", osc[3], 1e-4));
    let mut golden = serde_json::Map::new();
    for (i, (&e, &g)) in SCAN_EPS.iter().zip(&SCAN_GOLDEN).enumerate() {
        let rel = (osc[i + 1] - g).abs() / g;
        report.push(Check::at_most(format!("perturb.golden_eps_{e}"), rel, GOLDEN_REL_TOL));
        golden.insert(format!("perturb.oscillation_eps_{e}"), json!({ "golden": g, "value": osc[i + 1], "rel_err": rel }));
    }
    report.sections.insert("golden_refs".into(), Value::Object(golden));

    let mut rows = Vec::new();
    let (mut signs_ok, mut definite, mut chain) = (true, true, 0.0_f64);
    let models = extremum_models()?;
    for t in 0..EXTREMUM_CASES {
        let (label, wp, lo, hi, log_convex) = &models[t as usize % models.len()];
        let k = if t % 4 == 3 { 0 } else { 1 };
        let r0 = lo + (hi - lo) * (t as f64 * 0.618).fract();
        let cg = CosineGraph::random(wp.n() - 1, r0, 0.3, 100 + t);
        let an = analyze_graph(&cg.graph(wp, 16)?, k)?;
        let ex = &an.extremum;
        definite &= ex.operator_at_max != Definiteness::Indefinite && ex.operator_at_min != Definiteness::Indefinite;
        signs_ok &= ex.signs_hold(EXTREMUM_TOL) == Some(true);
        if *log_convex {
            chain = chain.max(an.chain_violation());
        }
        rows.push(json!({ "model": label, "n": wp.n(), "k": k, "seed": 100 + t, "graph": cg, "analysis": an }));
    }
    report
        .push(Check::flag("perturb.extremum_definiteness_verified", definite))
        .push(Check::flag("perturb.extremum_signs", signs_ok))
        .push(Check::at_most("perturb.claim_chain", chain, EXTREMUM_TOL));

    let slice = GraphHypersurface::slice(wp.clone(), PeriodicGrid::new(SCAN_N - 1, 4)?, SCAN_R0)?;
    let b_slice = bernstein_hypothesis_check(&slice, SCAN_K)?;
    let bumped = CosineGraph { r0: SCAN_R0, eps: 0.01, amplitudes: vec![1.0, 0.0, 0.0], modes: vec![1, 1, 1] }.graph(&wp, 16)?;
    let b_bump = bernstein_hypothesis_check(&bumped, SCAN_K)?;
    let c = wp.slice_quotient(SCAN_R0, SCAN_K)?;
    report
        .push(Check::flag("perturb.bernstein_slice_consistent", b_slice.hypotheses_hold && b_slice.conclusion_consistent))
        .push(Check::flag("perturb.bernstein_perturbed_flags_violation", !b_bump.hypotheses_hold))
        .push(Check::at_most("perturb.elliptic_slice", elliptic_residual(&slice, SCAN_K, c)?, 1e-8));
    report.section(
        "perturb",
        &json!({
            "scan": {
                "model": "hyperbolic-cosh", "n": SCAN_N, "kappa": SCAN_KAPPA, "k": SCAN_K, "r0": SCAN_R0, "grid": SCAN_GRID,
                "mode": PerturbationMode::SingleCosine.name(), "mode_library_version": MODE_LIBRARY_VERSION,
                "eps": eps, "oscillation": osc, "richardson_slope": richardson_slope(osc[1], osc[2], SCAN_EPS[0]),
            },
            "extremum_cases": rows,
            "bernstein": {
                "slice": { "min_slack": b_slice.min_slack, "max_gradient": b_slice.max_gradient, "c1": b_slice.c1, "c2": b_slice.c2 },
                "perturbed": { "min_slack": b_bump.min_slack, "max_gradient": b_bump.max_gradient, "c1": b_bump.c1, "c2": b_bump.c2,
                               "grad_bound_ok": b_bump.grad_bound_ok },
            },
        }),
    )?;
    Ok(())
}

fn validate_order(n: usize, k: usize) -> Result<()> {
    if n < 3 {
        return Err(param_error(format!("--n {n} must be at least 3")));
    }
    if 2 * k + 1 > n - 1 {
        return Err(param_error(format!("--k {k} needs 2k + 1 <= n - 1 = {}", n - 1)));
    }
    Ok(())
}

pub fn slice(o: &Opts, report: &mut RigidityReport) -> Result<()> {
    let preset = o.preset.clone().unwrap_or_else(|| "euclid".into());
    let (n, k, r0) = (o.n.unwrap_or(5), o.k.unwrap_or(1), o.r0.unwrap_or(1.0));
    let grid_n = o.grid.unwrap_or(6);
    let tol = o.tol.unwrap_or(1e-9);
    let mass = o.mass.unwrap_or(0.0);
    validate_order(n, k)?;
    let wp = preset_ambient(&preset, n, o.kappa, mass, r0 + 1.0)?;
    report
        .param("preset", &preset)?
        .param("n", n)?
        .param("k", k)?
        .param("kappa", wp.kappa())?
        .param("r0", r0)?
        .param("grid", grid_n)?
        .param("tol", tol)?;
    if preset == "kottler" {
        report.param("mass", mass)?;
    }
    let gh = GraphHypersurface::slice(wp.clone(), PeriodicGrid::new(n - 1, grid_n)?, r0)?;
    let expected = wp.slice_quotient(r0, k)?;
    let an = analyze_graph(&gh, k)?;
    let err = (an.quotient.min - expected).abs().max((an.quotient.max - expected).abs());
    let hess = hessian_identity_residuals(&gh, k)?;
    let ell = elliptic_residual(&gh, k, expected)?;
    report
        .push(Check::at_most("slice.quotient", err, tol))
        .push(Check::at_most("slice.oscillation", an.quotient.oscillation, tol))
        .push(Check::at_most("slice.extremum_at_max", an.extremum.at_max.abs(), 1e-8))
        .push(Check::at_most("slice.extremum_at_min", an.extremum.at_min.abs(), 1e-8))
        .push(Check::at_most("slice.elliptic_residual", ell, 1e-8))
        .push(Check::at_most("slice.hessian_identities", hessian_max(&hess), 1e-8));
    report.section(
        "slice",
        &json!({ "closed_form": expected, "analysis": an, "hessian": hessian_json(&hess), "elliptic_residual": ell }),
    )?;
    write_dump(o, |buf| write_hypersurface_csv(&gh, k, buf))
}

pub fn kottler(o: &Opts, report: &mut RigidityReport) -> Result<()> {
    let (n, kappa, mass) = (o.n.unwrap_or(3), o.kappa.unwrap_or(-1), o.mass.unwrap_or(0.0));
    let r_max = o.r0.unwrap_or(3.0);
    let tol = o.tol.unwrap_or(1e-8);
    if !(r_max > 0.0) {
        return Err(param_error(format!("--r0 {r_max} must be positive")));
    }
    report
        .param("n", n)?
        .param("kappa", kappa)?
        .param("mass", mass)?
        .param("r_max", r_max)?
        .param("tol", tol)?
        .param("check_logconvex", o.check_logconvex)?;
    let ks = KottlerSpace::new(n, kappa, mass)?;
    let profile = lambda_profile(&ks, r_max, tol)?;
    let rep: Vec<LogConvexitySample> = logconvexity_report(&profile, &samples(r_max, 60))?;
    let max_of = |f: fn(&LogConvexitySample) -> f64| rep.iter().map(f).fold(0.0, f64::max);
    let min_defect = rep.iter().map(|s| s.defect).fold(f64::INFINITY, f64::min);
    let max_defect = rep.iter().map(|s| s.defect).fold(f64::NEG_INFINITY, f64::max);
    report
        .push(Check::at_most("kottler.residual", max_of(|s| s.residual), 10.0 * tol))
        .push(Check::at_most("kottler.fd_residual", max_of(|s| s.fd_residual), 10.0 * tol));
    if o.check_logconvex {
        report.push(Check::at_least("kottler.min_defect", min_defect, -tol));
    }
    if mass == 0.0 && kappa == -1 {
        let lam = rep.iter().map(|s| (s.lambda - s.r.cosh()).abs()).fold(0.0, f64::max);
        let def = rep.iter().map(|s| (s.defect - 1.0).abs()).fold(0.0, f64::max);
        report.push(Check::at_most("kottler.cosh_profile", lam, tol)).push(Check::at_most("kottler.cosh_defect", def, tol));
    }
    report.section(
        "kottler",
        &json!({
            "horizon": ks.horizon(), "critical_mass": critical_mass(n), "degenerate": ks.is_degenerate(),
            "samples": rep.len(), "min_defect": min_defect, "max_defect": max_defect,
        }),
    )?;
    write_dump(o, |buf| write_logconvexity_csv(&rep, buf))
}

pub fn perturb(o: &Opts, report: &mut RigidityReport) -> Result<()> {
    let (preset, kappa) = match &o.preset {
        Some(p) => (p.clone(), o.kappa),
        None => ("hyperbolic-cosh".to_string(), Some(o.kappa.unwrap_or(SCAN_KAPPA))),
    };
    let (n, k, r0) = (o.n.unwrap_or(SCAN_N), o.k.unwrap_or(SCAN_K), o.r0.unwrap_or(SCAN_R0));
    let grid_n = o.grid.unwrap_or(16);
    let mass = o.mass.unwrap_or(0.0);
    let mode_name = o.mode.clone().unwrap_or_else(|| "single-cosine".into());
    let mode = PerturbationMode::parse(&mode_name).ok_or_else(|| param_error(format!("unknown mode `{mode_name}`")))?;
    let mut eps = o.eps.clone().unwrap_or_else(|| SCAN_EPS.to_vec());
    if eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(param_error("--eps must be positive and strictly increasing"));
    }
    validate_order(n, k)?;
    let wp = preset_ambient(&preset, n, kappa, mass, r0 + 1.0)?;
    report
        .param("preset", &preset)?
        .param("n", n)?
        .param("k", k)?
        .param("kappa", wp.kappa())?
        .param("r0", r0)?
        .param("grid", grid_n)?
        .param("eps", &eps)?
        .param("mode", mode.name())?
        .param("mode_library_version", MODE_LIBRARY_VERSION)?;
    eps.insert(0, 0.0);
    let scan = perturbation_scan(&wp, r0, mode, &eps, k, grid_n)?;
    let mut rows = Vec::new();
    let mut osc = Vec::new();
    for e in &scan {
        match &e.oscillation {
            Ok(v) => {
                osc.push(*v);
                rows.push(json!({ "eps": e.eps, "oscillation": v }));
            }
            Err(err) => rows.push(json!({ "eps": e.eps, "error": err.to_string() })),
        }
    }
    let complete = osc.len() == scan.len();
    report.push(Check::flag("perturb.all_eps_evaluated", complete));
    if complete {
        report
            .push(Check::at_most("perturb.oscillation_at_zero", osc[0], 1e-9))
            .push(Check::flag("perturb.strictly_increasing", osc.windows(2).all(|w| w[1] > w[0])))
            .push(Check::at_least("perturb.oscillation_at_max_eps", *osc.last().unwrap_or(&0.0), 1e-4));
    }
    let slopes: Vec<Value> = eps
        .windows(2)
        .zip(osc.windows(2))
        .filter(|(e, _)| e[0] > 0.0 && (e[1] - 2.0 * e[0]).abs() <= 1e-12 * e[1])
        .map(|(e, o)| json!({ "eps": e[0], "slope": richardson_slope(o[0], o[1], e[0]) }))
        .collect();
    report.section("perturb", &json!({ "scan": rows, "richardson": slopes }))?;
    write_dump(o, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        let io = |e: csv::Error| GeometryError::InvalidParameter(format!("csv output failed: {e}"));
        w.write_record(["eps", "oscillation"]).map_err(io)?;
        for e in &scan {
            let v = e.oscillation.as_ref().map(|v| format!("{v:.16e}")).unwrap_or_else(|_| "nan".into());
            w.write_record([format!("{:.16e}", e.eps), v]).map_err(io)?;
        }
        w.flush().map_err(|e| GeometryError::InvalidParameter(format!("csv output failed: {e}")))
    })
}
