//! Acceptance criteria, one line per criterion. Every tolerance is pinned here.

use std::f64::consts::TAU;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gbq_core::kottler::{critical_mass, lambda_profile, logconvexity_report, KottlerSpace};
use gbq_core::manifold_numerics::{
    curvature_evolution_residual, divergence_free_check, first_variation_check, metrics, total_lk, PeriodicGrid,
    VariationField,
};
use gbq_core::rigidity::{analyze_graph, perturbation_scan, CosineGraph, Definiteness, PerturbationMode};
use gbq_core::tensor_core::{
    contractions, einstein_closed_form, einstein_decomposition_residual, euclidean_correspondence, lovelock,
    quadratic_gauss_bonnet, random_algebraic_curvature, random_shape_operator, space_form,
};
use gbq_core::warped_geometry::{hessian_identity_residuals, quotient_field, GraphHypersurface, WarpedProduct};

type Outcome = Result<String, String>;

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

const TRACE_TOL: f64 = 1e-12;
const L1_TOL: f64 = 1e-12;
const E1_TOL: f64 = 1e-12;
const L2_TOL: f64 = 1e-10;
const DECOMPOSITION_TOL: f64 = 1e-10;
const IDENTITY_BUDGET: Duration = Duration::from_secs(30);

fn algebraic_identities() -> Outcome {
    let start = Instant::now();
    let (mut trace, mut l1, mut e1, mut l2, mut dec) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut p_exact = true;
    for i in 0..200u64 {
        let d = 3 + (i % 3) as usize;
        let ac = random_algebraic_curvature(d, 1000 + i).map_err(|e| e.to_string())?;
        for k in 0..=d / 2 {
            let data = lovelock(&ac, k).map_err(|e| e.to_string())?;
            trace = trace.max(data.trace_defect().abs() / data.lk.abs().max(1.0));
            if k >= 1 {
                let p = data.p().map_err(|e| e.to_string())?;
                let s = p.symmetry_defects();
                p_exact &= s.first_pair == 0.0 && s.second_pair == 0.0 && s.pair_exchange <= 1e-13 * p.max_abs().max(1.0);
                dec = dec.max(einstein_decomposition_residual(&ac, k).map_err(|e| e.to_string())?);
            }
            if k == 1 {
                let scal = contractions(&ac).scalar;
                l1 = l1.max((data.lk - scal).abs() / scal.abs().max(1.0));
                let closed = einstein_closed_form(&ac);
                e1 = e1.max((&data.einstein - &closed).amax() / closed.amax().max(1.0));
            }
            if k == 2 {
                let q = quadratic_gauss_bonnet(&ac);
                l2 = l2.max((data.lk - q).abs() / q.abs().max(1.0));
            }
        }
    }
    let elapsed = start.elapsed();
    require(
        trace <= TRACE_TOL && l1 <= L1_TOL && e1 <= E1_TOL && l2 <= L2_TOL && dec <= DECOMPOSITION_TOL && p_exact && elapsed < IDENTITY_BUDGET,
        format!("trace {trace:.1e}, L1 {l1:.1e}, E1 {e1:.1e}, L2 {l2:.1e}, decomposition {dec:.1e}, P symmetric {p_exact}, {:.2}s", elapsed.as_secs_f64()),
    )
}

const SPACE_FORM_TOL: f64 = 1e-12;

fn space_form_closed_form() -> Outcome {
    let mut worst = 0.0_f64;
    for d in 2..=5 {
        let metric = random_algebraic_curvature(d, 50 + d as u64).map_err(|e| e.to_string())?.metric().clone();
        for c in [-1.0, 0.5, 1.0] {
            let ac = space_form(metric.clone(), c).map_err(|e| e.to_string())?;
            for k in 0..=(d / 2).min(2) {
                let expected = factorial(d) / factorial(d - 2 * k) * c.powi(k as i32);
                let lk = lovelock(&ac, k).map_err(|e| e.to_string())?.lk;
                worst = worst.max((lk - expected).abs() / expected.abs().max(1.0));
            }
        }
    }
    require(worst <= SPACE_FORM_TOL, format!("max relative error {worst:.1e}"))
}

const CORRESPONDENCE_TOL: f64 = 1e-10;

fn euclidean_correspondence_check() -> Outcome {
    let mut worst = 0.0_f64;
    for seed in 0..100u64 {
        let s = random_shape_operator(5, 2000 + seed).map_err(|e| e.to_string())?;
        for k in 0..=2 {
            worst = worst.max(euclidean_correspondence(&s, k).map_err(|e| e.to_string())?.max_err());
        }
    }
    require(worst <= CORRESPONDENCE_TOL, format!("max relative error {worst:.1e}"))
}

const FIRST_VARIATION_TOL: f64 = 1e-3;
const CONFORMAL_TOL: f64 = 1e-4;
const RATIO_RANGE: (f64, f64) = (3.0, 5.0);
const VARIATION_STEP: f64 = 1e-4;

fn first_variation() -> Outcome {
    let rel_err = |n: usize| -> Result<f64, String> {
        let g = PeriodicGrid::new(3, n).map_err(|e| e.to_string())?;
        let gf = metrics::conformal(g.clone(), 0.1).map_err(|e| e.to_string())?;
        let v = metrics::random_variation(g, 7, 0.5).map_err(|e| e.to_string())?;
        Ok(first_variation_check(&gf, &v, 1, VARIATION_STEP).map_err(|e| e.to_string())?.rel_err)
    };
    let e24 = rel_err(24)?;
    let ratio = rel_err(16)? / rel_err(32)?;
    let gf = metrics::conformal(PeriodicGrid::new(3, 24).map_err(|e| e.to_string())?, 0.1).map_err(|e| e.to_string())?;
    let conf = first_variation_check(&gf, &VariationField::conformal(&gf), 1, VARIATION_STEP).map_err(|e| e.to_string())?;
    let expected = 0.5 * total_lk(&gf, 1).map_err(|e| e.to_string())?;
    let conf_err = (conf.fd - expected).abs() / expected.abs();
    require(
        e24 <= FIRST_VARIATION_TOL && conf_err <= CONFORMAL_TOL && (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio),
        format!("rel_err(N=24) {e24:.2e}, conformal {conf_err:.1e}, ratio 16/32 {ratio:.2}"),
    )
}

const EVOLUTION_MIN_ORDER: f64 = 1.8;

fn curvature_evolution() -> Outcome {
    let mut res = Vec::new();
    for n in [16, 32, 64] {
        let g = PeriodicGrid::new(3, n).map_err(|e| e.to_string())?;
        let gf = metrics::conformal(g.clone(), 0.1).map_err(|e| e.to_string())?;
        let v = metrics::random_variation(g, 11, 0.5).map_err(|e| e.to_string())?;
        res.push(curvature_evolution_residual(&gf, &v, VARIATION_STEP).map_err(|e| e.to_string())?);
    }
    let o1 = (res[0] / res[1]).log2();
    let o2 = (res[1] / res[2]).log2();
    let c = [16.0, 32.0, 64.0].iter().zip(&res).map(|(n, r)| r / (1.0 / (n * n) + VARIATION_STEP * VARIATION_STEP)).fold(0.0, f64::max);
    require(
        o1 >= EVOLUTION_MIN_ORDER && o2 >= EVOLUTION_MIN_ORDER,
        format!("residuals {:.2e} {:.2e} {:.2e}, orders {o1:.2} {o2:.2}, C {c:.1}", res[0], res[1], res[2]),
    )
}

fn divergence_free() -> Outcome {
    let div = |n: usize| -> Result<f64, String> {
        let gf = metrics::conformal(PeriodicGrid::new(3, n).map_err(|e| e.to_string())?, 0.1).map_err(|e| e.to_string())?;
        Ok(divergence_free_check(&gf, 1).map_err(|e| e.to_string())?.einstein)
    };
    let (a, b) = (div(16)?, div(32)?);
    let ratio = a / b;
    require((RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio), format!("|div E| {a:.2e} -> {b:.2e}, ratio {ratio:.2}"))
}

const SLICE_HESSIAN_TOL: f64 = 1e-8;

fn slice_models() -> Result<Vec<WarpedProduct>, String> {
    let e = |r: gbq_core::Result<WarpedProduct>| r.map_err(|e| e.to_string());
    Ok(vec![
        e(WarpedProduct::euclid(4))?,
        e(WarpedProduct::hyperbolic_horo(4))?,
        e(WarpedProduct::hyperbolic_cosh(4))?,
        e(WarpedProduct::hyperbolic_horo(4).and_then(|w| w.with_kappa(1)))?,
        e(WarpedProduct::hyperbolic_cosh(4).and_then(|w| w.with_kappa(-1)))?,
        e(lambda_profile(&KottlerSpace::new(4, -1, 0.3).map_err(|e| e.to_string())?, 2.0, 1e-8)
            .and_then(|p| p.warped_product()))?,
    ])
}

fn hessian_identities() -> Outcome {
    let mut slice_worst = 0.0_f64;
    for wp in slice_models()? {
        let gh = GraphHypersurface::slice(wp, PeriodicGrid::new(3, 6).map_err(|e| e.to_string())?, 0.7).map_err(|e| e.to_string())?;
        for k in 0..=1 {
            let r = hessian_identity_residuals(&gh, k).map_err(|e| e.to_string())?;
            slice_worst = slice_worst.max(r.r1).max(r.r2).max(r.r3).max(r.r4);
        }
    }
    let wp = WarpedProduct::euclid(4).map_err(|e| e.to_string())?;
    let bumped = |n: usize| -> Result<[f64; 4], String> {
        let grid = PeriodicGrid::new(3, n).map_err(|e| e.to_string())?;
        let gh = GraphHypersurface::from_fn(wp.clone(), grid, |x| 1.0 + 0.05 * (TAU * x[0]).sin()).map_err(|e| e.to_string())?;
        let r = hessian_identity_residuals(&gh, 1).map_err(|e| e.to_string())?;
        Ok([r.r1, r.r2, r.r3, r.r4])
    };
    let (a, b) = (bumped(16)?, bumped(32)?);
    let ratios: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x / y).collect();
    let ok = slice_worst <= SLICE_HESSIAN_TOL && ratios.iter().all(|r| (RATIO_RANGE.0..=RATIO_RANGE.1).contains(r));
    require(ok, format!("slices {slice_worst:.1e}, perturbed ratios {:.2} {:.2} {:.2} {:.2}", ratios[0], ratios[1], ratios[2], ratios[3]))
}

const SLICE_QUOTIENT_TOL: f64 = 1e-9;

fn slice_quotients() -> Outcome {
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for wp in slice_models()? {
        let gh = GraphHypersurface::slice(wp.clone(), PeriodicGrid::new(3, 4).map_err(|e| e.to_string())?, 0.7).map_err(|e| e.to_string())?;
        // slices over a flat fiber are flat, so only k = 0 is defined there
        let orders: &[usize] = if wp.kappa() == 0 { &[0] } else { &[0, 1] };
        for &k in orders {
            let expected = wp.slice_quotient(0.7, k).map_err(|e| e.to_string())?;
            for q in quotient_field(&gh, k).map_err(|e| e.to_string())? {
                worst = worst.max((q - expected).abs());
            }
            cases += 1;
        }
    }
    let sphere = GraphHypersurface::slice(WarpedProduct::euclid(5).map_err(|e| e.to_string())?, PeriodicGrid::new(4, 4).map_err(|e| e.to_string())?, 1.0)
        .map_err(|e| e.to_string())?;
    let sphere_err = quotient_field(&sphere, 1).map_err(|e| e.to_string())?.iter().map(|q| (q - 2.0).abs()).fold(0.0, f64::max);
    require(
        worst <= SLICE_QUOTIENT_TOL && sphere_err <= SLICE_QUOTIENT_TOL,
        format!("{cases} preset cases max error {worst:.1e}, unit sphere n=5 k=1 error {sphere_err:.1e}"),
    )
}

const COSH_TOL: f64 = 1e-8;
const LOGCONVEX_RESIDUAL_TOL: f64 = 1e-7;
const DEFECT_FLOOR: f64 = -1e-8;

fn kottler_suite() -> Outcome {
    let samples = |r_max: f64, count: usize| -> Vec<f64> { (0..=count).map(|i| r_max * i as f64 / count as f64).collect() };
    let profile = lambda_profile(&KottlerSpace::new(3, -1, 0.0).map_err(|e| e.to_string())?, 3.0, 1e-8).map_err(|e| e.to_string())?;
    let cosh_err = samples(3.0, 300).iter().map(|&r| (profile.lambda(r) - r.cosh()).abs()).fold(0.0, f64::max);
    let (mut residual, mut min_defect) = (0.0_f64, f64::INFINITY);
    let mut count = 0;
    for n in 3..=7 {
        let mc = critical_mass(n);
        for (kappa, m) in [(0, 0.1), (0, 1.0), (-1, mc * (1.0 - 1e-6)), (-1, 0.3)] {
            let ks = KottlerSpace::new(n, kappa, m).map_err(|e| e.to_string())?;
            let p = lambda_profile(&ks, 3.0, 1e-8).map_err(|e| e.to_string())?;
            for s in logconvexity_report(&p, &samples(3.0, 30)).map_err(|e| e.to_string())? {
                residual = residual.max(s.residual);
                min_defect = min_defect.min(s.defect);
            }
            count += 1;
        }
    }
    let round = lambda_profile(&KottlerSpace::new(3, 1, 0.5).map_err(|e| e.to_string())?, 3.0, 1e-8).map_err(|e| e.to_string())?;
    let round_min = logconvexity_report(&round, &samples(3.0, 30)).map_err(|e| e.to_string())?.iter().map(|s| s.defect).fold(f64::INFINITY, f64::min);
    require(
        cosh_err <= COSH_TOL && residual <= LOGCONVEX_RESIDUAL_TOL && min_defect >= DEFECT_FLOOR && round_min < 0.0 && count == 20,
        format!("cosh {cosh_err:.1e}, residual {residual:.1e}, min defect {min_defect:.2e} over {count} cases, kappa=+1 min defect {round_min:.3}"),
    )
}

const OSC_ZERO_TOL: f64 = 1e-9;
const OSC_FLOOR: f64 = 1e-4;
const GOLDEN: [f64; 3] = [3.383410824744268e-1, 6.840997276178656e-1, 1.9120193808163197];
const GOLDEN_REL_TOL: f64 = 1e-9;

fn perturbation_scan_check() -> Outcome {
    let wp = WarpedProduct::hyperbolic_cosh(4).and_then(|w| w.with_kappa(1)).map_err(|e| e.to_string())?;
    let scan = perturbation_scan(&wp, 0.3, PerturbationMode::SingleCosine, &[0.0, 0.01, 0.02, 0.05], 1, 32).map_err(|e| e.to_string())?;
    let osc: Vec<f64> = scan.iter().map(|e| e.oscillation.clone()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let increasing = osc.windows(2).all(|w| w[1] > w[0]);
    let golden = osc[1..].iter().zip(GOLDEN).all(|(o, g)| (o - g).abs() <= GOLDEN_REL_TOL * g);
    require(
        osc[0] <= OSC_ZERO_TOL && increasing && osc[3] >= OSC_FLOOR && golden,
        format!("oscillation {:.1e}, {:.6}, {:.6}, {:.6}; golden match {golden}", osc[0], osc[1], osc[2], osc[3]),
    )
}

const EXTREMUM_TOL: f64 = 1e-6;

fn extremum_diagnostics_check() -> Outcome {
    let e = |r: gbq_core::Result<WarpedProduct>| r.map_err(|e| e.to_string());
    let models = [
        (e(WarpedProduct::hyperbolic_cosh(4).and_then(|w| w.with_kappa(1)))?, 0.2, 0.8),
        (e(WarpedProduct::hyperbolic_horo(4).and_then(|w| w.with_kappa(1)))?, -1.0, 1.0),
        (e(WarpedProduct::euclid(5))?, 0.8, 1.5),
        (e(WarpedProduct::hyperbolic_cosh(4).and_then(|w| w.with_kappa(-1)))?, 0.2, 1.0),
        (e(WarpedProduct::hyperbolic_horo(5).and_then(|w| w.with_kappa(1)))?, -1.0, 1.0),
    ];
    let (mut definite, mut signs, mut worst) = (0, 0, f64::INFINITY);
    for t in 0..10u64 {
        let (wp, lo, hi) = &models[t as usize % models.len()];
        let k = if t % 4 == 3 { 0 } else { 1 };
        let r0 = lo + (hi - lo) * (t as f64 * 0.618).fract();
        let gh = CosineGraph::random(wp.n() - 1, r0, 0.3, 100 + t).graph(wp, 16).map_err(|e| e.to_string())?;
        let ex = analyze_graph(&gh, k).map_err(|e| e.to_string())?.extremum;
        if ex.operator_at_max != Definiteness::Indefinite && ex.operator_at_min != Definiteness::Indefinite {
            definite += 1;
        }
        if ex.signs_hold(EXTREMUM_TOL) == Some(true) {
            signs += 1;
        }
        worst = worst.min(ex.at_max.abs().min(ex.at_min.abs()));
    }
    require(definite == 10 && signs == 10, format!("{definite}/10 definite, {signs}/10 signs hold, smallest |value| {worst:.2e}"))
}

const CLI_BUDGET: Duration = Duration::from_secs(300);

fn cli_reproducible() -> Outcome {
    let dir = std::env::temp_dir().join(format!("gbq-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    let mut times = Vec::new();
    for tag in ["a", "b"] {
        let path = dir.join(format!("{tag}.json"));
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_gbq"))
            .args(["verify", "--suite", "all", "--seed", "0", "--report"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        times.push(start.elapsed());
        if !status.success() {
            return Err(format!("exit status {status}"));
        }
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    let slowest = times.iter().max().copied().unwrap_or_default();
    require(
        outputs[0] == outputs[1] && slowest < CLI_BUDGET,
        format!("exit 0, identical {} bytes: {}, slowest run {:.1}s", outputs[0].len(), outputs[0] == outputs[1], slowest.as_secs_f64()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("algebraic identity suite", algebraic_identities),
        ("space-form closed form", space_form_closed_form),
        ("euclidean correspondence", euclidean_correspondence_check),
        ("first variation", first_variation),
        ("curvature evolution residual", curvature_evolution),
        ("divergence-free generalized Einstein tensor", divergence_free),
        ("hessian identities", hessian_identities),
        ("slice quotient", slice_quotients),
        ("kottler suite", kottler_suite),
        ("perturbation scan", perturbation_scan_check),
        ("extremum diagnostics", extremum_diagnostics_check),
        ("cli verify --suite all", cli_reproducible),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
