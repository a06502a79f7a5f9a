use nalgebra::DMatrix;
use rayon::prelude::*;

use super::fd::{matrices_to_nodal, FdGeometry, Nodal};
use super::grid::{PeriodicGrid, PeriodicMetricField, VariationField};
use crate::error::{GeometryError, Result};
use crate::numerics::compensated_sum;
use crate::tensor_core::{LovelockData, LovelockEvaluator, Tensor4};

/// Per-node Lovelock data of a metric field together with its connection.
#[derive(Debug, Clone)]
pub struct LovelockField {
    pub geometry: FdGeometry,
    pub data: Vec<LovelockData>,
}

/// Evaluates `L_k`, `E_(k)` and optionally `P_(k)` at every node.
pub fn lovelock_field(gf: &PeriodicMetricField, k: usize, with_p: bool) -> Result<LovelockField> {
    let mut evaluator = LovelockEvaluator::new(gf.dim(), k)?;
    if !with_p {
        evaluator = evaluator.without_p();
    }
    let geometry = FdGeometry::new(gf)?;
    let data = geometry.curvature().par_iter().map(|ac| evaluator.evaluate(ac)).collect::<Result<Vec<_>>>()?;
    Ok(LovelockField { geometry, data })
}

/// `sum_nodes L_k sqrt(det g) h^d`.
pub fn total_lk(gf: &PeriodicMetricField, k: usize) -> Result<f64> {
    let field = lovelock_field(gf, k, false)?;
    let w = gf.grid().cell_volume();
    Ok(compensated_sum(field.data.iter().enumerate().map(|(node, ld)| ld.lk * field.geometry.volume_density(node) * w)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVariation {
    pub fd: f64,
    pub predicted: f64,
    pub rel_err: f64,
}

/// Compares the central difference of [`total_lk`] along `g + t v` with
/// `sum_nodes -E_(k)^{ij} v_ij sqrt(det g) h^d`.
pub fn first_variation_check(gf: &PeriodicMetricField, vf: &VariationField, k: usize, step: f64) -> Result<FirstVariation> {
    if !(step > 0.0) {
        return Err(GeometryError::InvalidParameter(format!("step {step} must be positive")));
    }
    let plus = total_lk(&gf.perturbed(vf, step)?, k)?;
    let minus = total_lk(&gf.perturbed(vf, -step)?, k)?;
    let fd = (plus - minus) / (2.0 * step);
    let field = lovelock_field(gf, k, false)?;
    let w = gf.grid().cell_volume();
    let predicted = compensated_sum(field.data.iter().zip(vf.values()).enumerate().map(|(node, (ld, v))| {
        -ld.einstein.component_mul(v).sum() * field.geometry.volume_density(node) * w
    }));
    let rel_err = (fd - predicted).abs() / fd.abs().max(predicted.abs()).max(1e-300);
    Ok(FirstVariation { fd, predicted, rel_err })
}

/// Covariant derivative `(nabla v)_{c a b}` of a symmetric 2-tensor field,
/// stored at `(c * d + a) * d + b`.
fn covariant_derivative_2(grid: &PeriodicGrid, geo: &FdGeometry, v: &Nodal) -> Nodal {
    let d = grid.dim();
    let dv = v.gradient(grid);
    let nodes = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let vv = v.at(node);
            let mut out = vec![0.0; d * d * d];
            for c in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        let mut x = dv[c].at(node)[a * d + b];
                        for e in 0..d {
                            x -= geo.christoffel(node, e, c, a) * vv[e * d + b] + geo.christoffel(node, e, c, b) * vv[a * d + e];
                        }
                        out[(c * d + a) * d + b] = x;
                    }
                }
            }
            out
        })
        .collect();
    Nodal::from_nodes(d * d * d, nodes)
}

/// Covariant derivative of a covariant 3-tensor, output slot order
/// `(p, c, a, b)` for `nabla_p T_{cab}`.
fn covariant_derivative_3(grid: &PeriodicGrid, geo: &FdGeometry, t: &Nodal) -> Nodal {
    let d = grid.dim();
    let dt = t.gradient(grid);
    let at = |c: usize, a: usize, b: usize| (c * d + a) * d + b;
    let nodes = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let tt = t.at(node);
            let mut out = vec![0.0; d * d * d * d];
            for p in 0..d {
                for c in 0..d {
                    for a in 0..d {
                        for b in 0..d {
                            let mut x = dt[p].at(node)[at(c, a, b)];
                            for e in 0..d {
                                x -= geo.christoffel(node, e, p, c) * tt[at(e, a, b)]
                                    + geo.christoffel(node, e, p, a) * tt[at(c, e, b)]
                                    + geo.christoffel(node, e, p, b) * tt[at(c, a, e)];
                            }
                            out[((p * d + c) * d + a) * d + b] = x;
                        }
                    }
                }
            }
            out
        })
        .collect();
    Nodal::from_nodes(d * d * d * d, nodes)
}

/// Max-norm over nodes and components of the difference between the central
/// `t`-difference of `R_{ijsl}(g + t v)` and
/// `-1/2 (nabla_i nabla_s v_jl - nabla_i nabla_l v_js - nabla_j nabla_s v_il
/// + nabla_j nabla_l v_is - R_{ijsm} v^m_l - R_{ijml} v^m_s)`.
pub fn curvature_evolution_residual(gf: &PeriodicMetricField, vf: &VariationField, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(GeometryError::InvalidParameter(format!("step {step} must be positive")));
    }
    let grid = gf.grid();
    let d = grid.dim();
    let plus = FdGeometry::new(&gf.perturbed(vf, step)?)?;
    let minus = FdGeometry::new(&gf.perturbed(vf, -step)?)?;
    let geo = FdGeometry::new(gf)?;
    let v = matrices_to_nodal(vf.values());
    let hess = covariant_derivative_3(grid, &geo, &covariant_derivative_2(grid, &geo, &v));
    let residuals: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let r = geo.curvature()[node].riemann();
            let ginv = geo.inverse_metric(node);
            let vn = &vf.values()[node];
            let mixed = ginv * vn;
            let h = hess.at(node);
            let hs = |p: usize, c: usize, a: usize, b: usize| h[((p * d + c) * d + a) * d + b];
            let rp = plus.curvature()[node].riemann();
            let rm = minus.curvature()[node].riemann();
            let mut worst = 0.0_f64;
            for i in 0..d {
                for j in 0..d {
                    for s in 0..d {
                        for l in 0..d {
                            let mut curv = 0.0;
                            for m in 0..d {
                                curv += r[[i, j, s, m]] * mixed[(m, l)] + r[[i, j, m, l]] * mixed[(m, s)];
                            }
                            let formula = -0.5
                                * (hs(i, s, j, l) - hs(i, l, j, s) - hs(j, s, i, l) + hs(j, l, i, s) - curv);
                            let fd = (rp[[i, j, s, l]] - rm[[i, j, s, l]]) / (2.0 * step);
                            worst = worst.max((fd - formula).abs());
                        }
                    }
                }
            }
            worst
        })
        .collect();
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceReport {
    /// `max |nabla_j E_(k)^{ij}|`.
    pub einstein: f64,
    /// `max |nabla_s P_(k)^{stlj}|`; `None` for `k = 0`.
    pub p_first_slot: Option<f64>,
}

/// Finite-difference covariant divergence of `E_(k)` and of `P_(k)` in its
/// first slot.
pub fn divergence_free_check(gf: &PeriodicMetricField, k: usize) -> Result<DivergenceReport> {
    let grid = gf.grid();
    let d = grid.dim();
    let field = lovelock_field(gf, k, k > 0)?;
    let geo = &field.geometry;
    let e = matrices_to_nodal(&field.data.iter().map(|ld| ld.einstein.clone()).collect::<Vec<_>>());
    let de = e.gradient(grid);
    let einstein = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let en = e.at(node);
            let mut worst = 0.0_f64;
            for i in 0..d {
                let mut div = 0.0;
                for j in 0..d {
                    div += de[j].at(node)[i * d + j];
                    for m in 0..d {
                        div += geo.christoffel(node, i, j, m) * en[m * d + j] + geo.christoffel(node, j, j, m) * en[i * d + m];
                    }
                }
                worst = worst.max(div.abs());
            }
            worst
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    if k == 0 {
        return Ok(DivergenceReport { einstein, p_first_slot: None });
    }
    let p_nodes: Vec<Vec<f64>> = field.data.iter().map(|ld| ld.p().map(|t: &Tensor4| t.as_slice().to_vec())).collect::<Result<_>>()?;
    let p = Nodal::from_nodes(d.pow(4), p_nodes);
    let dp = p.gradient(grid);
    let at = |s: usize, t: usize, l: usize, j: usize| ((s * d + t) * d + l) * d + j;
    let p_div = (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let pn = p.at(node);
            let mut worst = 0.0_f64;
            for t in 0..d {
                for l in 0..d {
                    for j in 0..d {
                        let mut div = 0.0;
                        for s in 0..d {
                            div += dp[s].at(node)[at(s, t, l, j)];
                            for m in 0..d {
                                let g = |a: usize| geo.christoffel(node, a, s, m);
                                div += g(s) * pn[at(m, t, l, j)]
                                    + g(t) * pn[at(s, m, l, j)]
                                    + g(l) * pn[at(s, t, m, j)]
                                    + g(j) * pn[at(s, t, l, m)];
                            }
                        }
                        worst = worst.max(div.abs());
                    }
                }
            }
            worst
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DivergenceReport { einstein, p_first_slot: Some(p_div) })
}

/// Writes the field dump: multi-index, metric upper triangle (row-major),
/// `L_k` and the upper triangle of `E_(k)^{ij}`.
pub fn write_field_csv<W: std::io::Write>(gf: &PeriodicMetricField, k: usize, out: W) -> Result<()> {
    let field = lovelock_field(gf, k, false)?;
    let d = gf.dim();
    let io = |e: csv::Error| GeometryError::InvalidParameter(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..d).map(|a| format!("i{a}")).collect();
    let upper: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    header.extend(upper.iter().map(|(i, j)| format!("g{i}{j}")));
    header.push("L".into());
    header.extend(upper.iter().map(|(i, j)| format!("E{i}{j}")));
    w.write_record(&header).map_err(io)?;
    for (node, ld) in field.data.iter().enumerate() {
        let g: &DMatrix<f64> = gf.metric(node);
        let mut row: Vec<String> = gf.grid().multi_index(node).iter().map(|i| i.to_string()).collect();
        row.extend(upper.iter().map(|&(i, j)| format!("{:.16e}", g[(i, j)])));
        row.push(format!("{:.16e}", ld.lk));
        row.extend(upper.iter().map(|&(i, j)| format!("{:.16e}", ld.einstein[(i, j)])));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| GeometryError::InvalidParameter(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold_numerics::metrics;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(3, n).unwrap()
    }

    #[test]
    fn flat_totals() {
        let gf = PeriodicMetricField::flat(grid(8));
        assert_eq!(total_lk(&gf, 1).unwrap(), 0.0);
        assert!((total_lk(&gf, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn order_is_checked() {
        let gf = PeriodicMetricField::flat(grid(8));
        assert!(matches!(total_lk(&gf, 2), Err(GeometryError::InvalidOrder { .. })));
    }

    #[test]
    fn flat_metric_is_critical() {
        let g = grid(10);
        let gf = PeriodicMetricField::flat(g.clone());
        let v = metrics::random_variation(g, 3, 0.5).unwrap();
        let fv = first_variation_check(&gf, &v, 1, 1e-4).unwrap();
        assert_eq!(fv.predicted, 0.0);
        assert!(fv.fd.abs() < 1e-7, "{fv:?}");
    }

    #[test]
    fn conformal_rescaling_identity() {
        let gf = metrics::trigonometric(grid(12), 0.15).unwrap();
        for k in [0, 1] {
            let fv = first_variation_check(&gf, &VariationField::conformal(&gf), k, 1e-4).unwrap();
            let expected = (1.5 - k as f64) * total_lk(&gf, k).unwrap();
            assert!((fv.predicted - expected).abs() <= 1e-12 * expected.abs().max(1.0));
            assert!((fv.fd - expected).abs() <= 1e-4 * expected.abs().max(1e-3), "{fv:?} {expected}");
        }
    }

    #[test]
    fn zero_variation_has_zero_residual() {
        let g = grid(8);
        let gf = metrics::conformal(g.clone(), 0.1).unwrap();
        let r = curvature_evolution_residual(&gf, &VariationField::zeros(g), 1e-4).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn flat_metric_evolution_error_is_quadratic_in_step() {
        let g = grid(10);
        let gf = PeriodicMetricField::flat(g.clone());
        let v = metrics::random_variation(g, 5, 0.5).unwrap();
        let coarse = curvature_evolution_residual(&gf, &v, 1e-4).unwrap();
        let fine = curvature_evolution_residual(&gf, &v, 2.5e-5).unwrap();
        assert!(coarse <= 1e-6, "{coarse:e}");
        let ratio = coarse / fine;
        assert!((12.0..=20.0).contains(&ratio), "{coarse:e} {fine:e}");
    }

    #[test]
    fn constant_variation_of_flat_metric() {
        let g = grid(8);
        let gf = PeriodicMetricField::flat(g.clone());
        let c = DMatrix::from_row_slice(3, 3, &[0.3, 0.1, 0.0, 0.1, -0.2, 0.05, 0.0, 0.05, 0.4]);
        let v = VariationField::from_fn(g, |_| c.clone()).unwrap();
        assert!(curvature_evolution_residual(&gf, &v, 1e-4).unwrap() <= 1e-8);
    }

    #[test]
    fn flat_metric_is_divergence_free() {
        let gf = PeriodicMetricField::flat(grid(8));
        let r = divergence_free_check(&gf, 1).unwrap();
        assert_eq!(r.einstein, 0.0);
        assert_eq!(r.p_first_slot, Some(0.0));
        assert_eq!(divergence_free_check(&gf, 0).unwrap().p_first_slot, None);
    }

    #[test]
    fn field_dump_has_documented_header() {
        let gf = PeriodicMetricField::flat(PeriodicGrid::new(2, 4).unwrap());
        let mut buf = Vec::new();
        write_field_csv(&gf, 1, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i0,i1,g00,g01,g11,L,E00,E01,E11"));
        assert_eq!(lines.count(), 16);
    }
}
