use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;

const TAU: f64 = 2.0 * PI;

fn line(n: usize) -> Grid {
    Grid::line(n, TAU).unwrap()
}

fn plane(n: usize, m: usize) -> Grid {
    Grid::new(&[n, m], &[TAU, TAU]).unwrap()
}

fn conformal_1d(grid: &Grid, a: impl Fn(f64) -> f64) -> SymTensorField {
    SymTensorField::conformal(&ScalarField::from_fn(grid, |x| (2.0 * a(x[0])).exp()))
}

/// dx² + e^{−2φ(x)} dθ²
fn warped_metric(grid: &Grid, phi: impl Fn(f64) -> f64) -> SymTensorField {
    SymTensorField::diagonal(&[
        ScalarField::constant(grid, 1.0),
        ScalarField::from_fn(grid, |x| (-2.0 * phi(x[0])).exp()),
    ])
    .unwrap()
}

fn field(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> ScalarField {
    ScalarField::from_fn(grid, f)
}

/// Modified Bessel function I₀ by its power series.
fn bessel_i0(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= (x * x / 4.0) / (k * k) as f64;
        sum += term;
    }
    sum
}

#[test]
fn christoffel_of_flat_metric_vanishes() {
    let g = plane(16, 16);
    let gamma = christoffel(&SymTensorField::identity(&g)).unwrap();
    assert_eq!(gamma.max_diff(&Christoffel3Field::zeros(&g)), 0.0);
}

#[test]
fn christoffel_of_conformal_line() {
    let g = line(64);
    let gamma = christoffel(&conformal_1d(&g, f64::sin)).unwrap();
    let exact = field(&g, |x| x[0].cos());
    assert!(gamma.component_field(0, 0, 0).max_diff(&exact) < 1e-12);
}

#[test]
fn christoffel_of_warped_plane() {
    let g = plane(64, 8);
    let gamma = christoffel(&warped_metric(&g, f64::sin)).unwrap();
    let exact = field(&g, |x| x[0].cos() * (-2.0 * x[0].sin()).exp());
    assert!(gamma.component_field(0, 1, 1).max_diff(&exact) < 1e-11);
    // fiber-internal derivative of the warp factor: Γᶿₓᶿ = −φ′
    let mixed = field(&g, |x| -x[0].cos());
    assert!(gamma.component_field(1, 0, 1).max_diff(&mixed) < 1e-11);
    assert!(gamma.component(0, 0, 1).iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn christoffel_rejects_degenerate_metric() {
    let g = line(16);
    let bad = SymTensorField::conformal(&field(&g, |x| x[0].sin()));
    match christoffel(&bad) {
        Err(crate::Error::NotPositiveDefinite { node, .. }) => assert_eq!(node, 0),
        other => panic!("expected positivity failure, got {other:?}"),
    }
    assert!(GeometrySnapshot::new(bad, ScalarField::zeros(&g)).is_err());
}

#[test]
fn gradient_cases() {
    let g = line(64);
    let flat = GeometrySnapshot::flat(ScalarField::zeros(&g)).unwrap();
    let grad_c = flat.gradient(&ScalarField::constant(&g, 3.0)).unwrap();
    assert!(grad_c.component(0).iter().all(|v| v.abs() < 1e-13));
    let grad = flat.gradient(&field(&g, |x| x[0].cos())).unwrap();
    assert!(grad.component_field(0).max_diff(&field(&g, |x| -x[0].sin())) < 1e-12);

    let curved = GeometrySnapshot::new(conformal_1d(&g, f64::sin), ScalarField::zeros(&g)).unwrap();
    let p = field(&g, |x| (2.0 * x[0]).cos() + x[0].sin());
    let exact = field(&g, |x| {
        (-2.0 * x[0].sin()).exp() * (-2.0 * (2.0 * x[0]).sin() + x[0].cos())
    });
    let grad = curved.gradient(&p).unwrap();
    assert!(grad.component_field(0).max_diff(&exact) < 1e-11);
}

#[test]
fn grid_mismatch_is_a_dimension_error() {
    let snap = GeometrySnapshot::flat(ScalarField::zeros(&line(16))).unwrap();
    let other = ScalarField::zeros(&line(32));
    assert!(matches!(snap.gradient(&other), Err(crate::Error::Dimension(_))));
    assert!(matches!(snap.hessian(&other), Err(crate::Error::Dimension(_))));
    assert!(matches!(snap.integrate(&other), Err(crate::Error::Dimension(_))));
    assert!(snap.tensor_norm_sq(&SymTensorField::zeros(&line(32))).is_err());
}

#[test]
fn hessian_cases() {
    let g = plane(32, 32);
    let flat = GeometrySnapshot::flat(ScalarField::zeros(&g)).unwrap();
    assert!(flat.hessian(&ScalarField::constant(&g, 2.0)).unwrap().max_abs() < 1e-12);
    let h = flat.hessian(&field(&g, |x| x[0].sin() * x[1].sin())).unwrap();
    let diag = field(&g, |x| -x[0].sin() * x[1].sin());
    let off = field(&g, |x| x[0].cos() * x[1].cos());
    assert!(h.component_field(0, 0).max_diff(&diag) < 1e-12);
    assert!(h.component_field(1, 1).max_diff(&diag) < 1e-12);
    assert!(h.component_field(0, 1).max_diff(&off) < 1e-12);

    // warped plane, f = f(x): fiber block −Γˣ_θθ f′
    let g = plane(64, 8);
    let snap = GeometrySnapshot::flat(ScalarField::zeros(&g)).unwrap();
    let snap = GeometrySnapshot::new(warped_metric(&g, f64::sin), snap.potential().clone()).unwrap();
    let f = field(&g, |x| (x[0]).cos() + 0.5 * (2.0 * x[0]).sin());
    let h = snap.hessian(&f).unwrap();
    let oracle = field(&g, |x| {
        let gamma = x[0].cos() * (-2.0 * x[0].sin()).exp();
        let fp = -x[0].sin() + (2.0 * x[0]).cos();
        -gamma * fp
    });
    assert!(h.component_field(1, 1).max_diff(&oracle) < 1e-11);
    assert!(h.component(0, 1).iter().all(|v| v.abs() < 1e-11));
}

#[test]
fn laplace_beltrami_cases() {
    let g = line(64);
    let flat = GeometrySnapshot::flat(ScalarField::zeros(&g)).unwrap();
    let lap = flat.laplace_beltrami(&field(&g, |x| x[0].cos())).unwrap();
    assert!(lap.max_diff(&field(&g, |x| -x[0].cos())) < 1e-12);
    assert!(flat.laplace_beltrami(&ScalarField::constant(&g, 1.0)).unwrap().max_abs() < 1e-13);

    let a = |x: f64| 0.3 * x.cos() + 0.1 * (2.0 * x).sin();
    let da = |x: f64| -0.3 * x.sin() + 0.2 * (2.0 * x).cos();
    let snap = GeometrySnapshot::new(conformal_1d(&g, a), ScalarField::zeros(&g)).unwrap();
    let lap = snap.laplace_beltrami(&field(&g, |x| x[0].sin())).unwrap();
    let exact =
        field(&g, |x| (-2.0 * a(x[0])).exp() * (-x[0].sin() - da(x[0]) * x[0].cos()));
    assert!(lap.max_diff(&exact) < 1e-11);
}

#[test]
fn witten_laplacian_cases() {
    let g = line(64);
    let f = field(&g, |x| x[0].cos());
    let constant_phi = GeometrySnapshot::flat(ScalarField::constant(&g, 0.7)).unwrap();
    let lf = constant_phi.witten_laplacian(&f).unwrap();
    assert!(lf.max_diff(&constant_phi.laplace_beltrami(&f).unwrap()) < 1e-12);

    let snap = GeometrySnapshot::flat(field(&g, |x| x[0].sin())).unwrap();
    let lf = snap.witten_laplacian(&f).unwrap();
    let exact = field(&g, |x| -x[0].cos() + x[0].sin() * x[0].cos());
    assert!(lf.max_diff(&exact) < 1e-12);
    assert!(snap.witten_laplacian(&ScalarField::constant(&g, 5.0)).unwrap().max_abs() < 1e-12);
}

#[test]
fn divergence_form_matches_trace_form_on_curved_plane() {
    let g = plane(48, 40);
    let metric = SymTensorField::from_node_fn(&g, |node, i, j| {
        let x = g.coords(node);
        match (i, j) {
            (0, 0) => 1.0 + 0.3 * (x[0] + x[1]).sin(),
            (0, 1) => 0.2 * x[1].cos(),
            _ => (0.4 * x[0].cos()).exp(),
        }
    });
    let phi = field(&g, |x| 0.5 * x[0].sin() * x[1].cos());
    let snap = GeometrySnapshot::new(metric, phi).unwrap();
    let f = field(&g, |x| (x[0] - 2.0 * x[1]).cos() + x[1].sin());
    let divergence = snap.witten_laplacian(&f).unwrap();
    let df = f.differential();
    let drift = snap.inner_forms(snap.potential_differential(), &df);
    let trace = snap.laplace_beltrami(&f).unwrap().sub(&drift);
    assert!(divergence.max_diff(&trace) < 1e-10, "{}", divergence.max_diff(&trace));
}

#[test]
fn ricci_of_flat_and_one_dimensional_metrics_vanishes() {
    let g = plane(16, 16);
    let flat = GeometrySnapshot::flat(ScalarField::zeros(&g)).unwrap();
    assert!(flat.ricci().max_abs() < 1e-14);
    assert!(flat.scalar_curvature().max_abs() < 1e-14);
    let g = line(64);
    let curved = GeometrySnapshot::new(
        conformal_1d(&g, |x| 0.4 * x.sin() + 0.2 * (3.0 * x).cos()),
        ScalarField::zeros(&g),
    )
    .unwrap();
    assert!(curved.ricci().max_abs() < 1e-11);
}

#[test]
fn ricci_of_warped_plane_matches_closed_form() {
    let g = plane(128, 8);
    let snap = GeometrySnapshot::new(warped_metric(&g, f64::sin), ScalarField::zeros(&g)).unwrap();
    // Ric_xx = φ″ − φ′², Ric_θθ = (φ″ − φ′²) e^{−2φ}
    let k = |x: f64| -x.sin() - x.cos() * x.cos();
    let ric = snap.ricci();
    assert!(ric.component_field(0, 0).max_diff(&field(&g, |x| k(x[0]))) <= 1e-8);
    assert!(
        ric.component_field(1, 1).max_diff(&field(&g, |x| k(x[0]) * (-2.0 * x[0].sin()).exp()))
            <= 1e-8
    );
    assert!(ric.component(0, 1).iter().all(|v| v.abs() <= 1e-8));
    assert!(snap.scalar_curvature().max_diff(&field(&g, |x| 2.0 * k(x[0]))) <= 1e-8);
    let ev = snap.min_rel_eigenvalue(ric).unwrap();
    assert!(ev.max_diff(&field(&g, |x| k(x[0]))) <= 1e-8);
}

#[test]
fn bakry_emery_cases() {
    let g = line(64);
    let flat0 = GeometrySnapshot::flat(ScalarField::constant(&g, 1.0)).unwrap();
    assert!(flat0.bakry_emery().max_abs() < 1e-13);
    assert!(flat0.bakry_emery_m(3.0).unwrap().max_abs() < 1e-13);

    let snap = GeometrySnapshot::flat(field(&g, |x| x[0].sin())).unwrap();
    let be3 = snap.bakry_emery_m(3.0).unwrap();
    let exact = field(&g, |x| -x[0].sin() - x[0].cos().powi(2) / 2.0);
    assert!(be3.component_field(0, 0).max_diff(&exact) < 1e-12);

    let grad_sq = snap.inner_forms(snap.potential_differential(), snap.potential_differential());
    let gap = snap.bakry_emery_m(1e6).unwrap().max_diff(&snap.bakry_emery());
    assert!(gap <= 1e-5 * grad_sq.max());

    assert!(matches!(snap.bakry_emery_m(1.0), Err(crate::Error::Parameter(_))));
    assert!(snap.bakry_emery_m(0.5).is_err());
    assert!(snap.bakry_emery_m(f64::INFINITY).unwrap().max_diff(&snap.bakry_emery()) == 0.0);
}

#[test]
fn tensor_norm_cases() {
    let g = plane(16, 16);
    let metric = SymTensorField::from_node_fn(&g, |node, i, j| {
        let x = g.coords(node);
        match (i, j) {
            (0, 0) => 2.0 + x[0].sin(),
            (0, 1) => 0.3 * x[1].cos(),
            _ => 1.5,
        }
    });
    let snap = GeometrySnapshot::new(metric.clone(), ScalarField::zeros(&g)).unwrap();
    let n = snap.tensor_norm_sq(&metric).unwrap();
    assert!(n.max_diff(&ScalarField::constant(&g, 2.0)) < 1e-13);
    assert_eq!(snap.tensor_norm_sq(&SymTensorField::zeros(&g)).unwrap().max_abs(), 0.0);

    let flat = GeometrySnapshot::flat(ScalarField::zeros(&g)).unwrap();
    let t = SymTensorField::diagonal(&[ScalarField::constant(&g, 3.0), ScalarField::constant(&g, -2.0)])
        .unwrap();
    assert!(flat.tensor_norm_sq(&t).unwrap().max_diff(&ScalarField::constant(&g, 13.0)) < 1e-13);
}

#[test]
fn min_rel_eigenvalue_cases() {
    let g = plane(16, 16);
    let metric = SymTensorField::from_node_fn(&g, |node, i, j| {
        let x = g.coords(node);
        match (i, j) {
            (0, 0) => 2.0 + x[0].sin(),
            (0, 1) => 0.3 * x[1].cos(),
            _ => 1.5,
        }
    });
    let snap = GeometrySnapshot::new(metric.clone(), ScalarField::zeros(&g)).unwrap();
    let ev = snap.min_rel_eigenvalue(&metric.scale(-0.7)).unwrap();
    assert!(ev.max_diff(&ScalarField::constant(&g, -0.7)) < 1e-13);

    let flat = GeometrySnapshot::flat(ScalarField::zeros(&g)).unwrap();
    let t = SymTensorField::diagonal(&[ScalarField::constant(&g, 2.0), ScalarField::constant(&g, -1.0)])
        .unwrap();
    assert!(flat.min_rel_eigenvalue(&t).unwrap().max_diff(&ScalarField::constant(&g, -1.0)) < 1e-14);
}

#[test]
fn integration_cases() {
    let g = line(128);
    let flat = GeometrySnapshot::flat(ScalarField::zeros(&g)).unwrap();
    assert!((flat.integrate(&ScalarField::constant(&g, 1.0)).unwrap() - TAU).abs() < 1e-13);
    assert!(flat.integrate(&field(&g, |x| x[0].sin())).unwrap().abs() < 1e-14);

    let weighted = GeometrySnapshot::flat(field(&g, |x| x[0].sin())).unwrap();
    let total = weighted.integrate(&ScalarField::constant(&g, 1.0)).unwrap();
    let oracle = TAU * bessel_i0(1.0);
    assert!((oracle - 7.954_926_521_012_845).abs() < 1e-12);
    assert!((total - oracle).abs() <= 1e-10);
    assert!((weighted.total_measure() - oracle).abs() <= 1e-10);
}

#[test]
fn metric_compatibility() {
    let g = plane(64, 64);
    let metric = SymTensorField::from_node_fn(&g, |node, i, j| {
        let x = g.coords(node);
        match (i, j) {
            (0, 0) => 1.5 + 0.4 * (x[0] - x[1]).sin(),
            (0, 1) => 0.25 * (x[0] + 2.0 * x[1]).cos(),
            _ => (0.3 * x[0].sin() * x[1].cos()).exp(),
        }
    });
    let snap = GeometrySnapshot::new(metric.clone(), ScalarField::zeros(&g)).unwrap();
    let gamma = snap.christoffel();
    let len = g.len();
    let mut worst = 0.0f64;
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                // ∇ₖgᵢⱼ = ∂ₖgᵢⱼ − Γˡₖᵢ gₗⱼ − Γˡₖⱼ gᵢₗ
                let d = metric.component_field(i, j).derivative(k);
                for node in 0..len {
                    let mut v = d.values()[node];
                    for l in 0..2 {
                        v -= gamma.component(l, k, i)[node] * metric.at(node, l, j);
                        v -= gamma.component(l, k, j)[node] * metric.at(node, i, l);
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
    }
    assert!(worst <= 1e-9, "{worst}");
}

#[test]
fn integration_by_parts_for_log_density() {
    let g = plane(48, 32);
    let metric = SymTensorField::from_node_fn(&g, |node, i, j| {
        let x = g.coords(node);
        match (i, j) {
            (0, 0) => 1.0 + 0.2 * x[1].sin(),
            (0, 1) => 0.1 * x[0].cos(),
            _ => 1.3 + 0.2 * x[0].cos(),
        }
    });
    let snap = GeometrySnapshot::new(metric, field(&g, |x| 0.4 * x[0].cos())).unwrap();
    let log_u = field(&g, |x| 0.8 * (x[0] - x[1]).cos() + 0.3 * x[1].sin());
    let u = log_u.map(f64::exp);
    let dlog = log_u.differential();
    let lhs = snap.integrate(&snap.laplace_beltrami(&log_u).unwrap().mul(&u)).unwrap();
    let grad_sq = snap.inner_forms(&dlog, &dlog).mul(&u);
    let drift = snap.inner_forms(snap.potential_differential(), &dlog).mul(&u);
    let rhs = -snap.integrate(&grad_sq).unwrap() + snap.integrate(&drift).unwrap();
    assert!((lhs - rhs).abs() <= 1e-9);
}

fn band_limited(grid: &Grid, coeffs: &[(f64, f64)]) -> ScalarField {
    ScalarField::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let k = k as f64;
                a * (k * x[0]).cos() + b * (k * x[0]).sin()
            })
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn derivative_is_linear_and_obeys_product_rule(a in coeffs(), b in coeffs(), s in -3.0f64..3.0) {
        let g = line(64);
        let f = band_limited(&g, &a);
        let h = band_limited(&g, &b);
        let lin = f.add_scaled(s, &h).derivative(0).sub(&f.derivative(0).add_scaled(s, &h.derivative(0)));
        prop_assert!(lin.max_abs() <= 1e-10);
        let prod = f.mul(&h).derivative(0).sub(&f.mul(&h.derivative(0))).sub(&h.mul(&f.derivative(0)));
        prop_assert!(prod.max_abs() <= 1e-10);
    }

    #[test]
    fn witten_laplacian_is_self_adjoint(
        a in coeffs(), b in coeffs(), c in coeffs(),
        amp in 0.0f64..0.5, shift in 0.0f64..TAU,
    ) {
        let g = plane(32, 24);
        let metric = SymTensorField::from_node_fn(&g, |node, i, j| {
            let x = g.coords(node);
            match (i, j) {
                (0, 0) => 1.0 + amp * (x[1] + shift).sin(),
                (0, 1) => 0.5 * amp * x[0].cos(),
                _ => 1.0 + amp * (x[0] - shift).cos(),
            }
        });
        let phi = band_limited(&line(32), &c);
        let phi = ScalarField::from_fn(&g, |x| phi.values()[(x[0] / g.spacing(0)).round() as usize % 32] * x[1].cos());
        let snap = GeometrySnapshot::new(metric, phi).unwrap();
        let fa = band_limited(&line(32), &a);
        let fb = band_limited(&line(24), &b);
        let f = ScalarField::from_fn(&g, |x| fa.values()[(x[0] / g.spacing(0)).round() as usize % 32] + x[1].sin());
        let h = ScalarField::from_fn(&g, |x| fb.values()[(x[1] / g.spacing(1)).round() as usize % 24] * x[0].cos());
        let lf = snap.witten_laplacian(&f).unwrap();
        let lh = snap.witten_laplacian(&h).unwrap();
        let norm = |v: &ScalarField| snap.integrate(&v.mul(v)).unwrap().sqrt();
        let asym = (snap.integrate(&lf.mul(&h)).unwrap() - snap.integrate(&lh.mul(&f)).unwrap()).abs();
        prop_assert!(asym <= 1e-9 * norm(&f) * norm(&h).max(1e-300) + 1e-13);
        prop_assert!(snap.integrate(&lf).unwrap().abs() <= 1e-11 * (1.0 + lf.max_abs()));
    }
}
