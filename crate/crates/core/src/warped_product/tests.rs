use std::f64::consts::PI;

use super::*;

const TAU: f64 = 2.0 * PI;

fn base_line(n: usize, phi: impl Fn(f64) -> f64) -> GeometrySnapshot {
    let g = Grid::line(n, TAU).unwrap();
    GeometrySnapshot::flat(ScalarField::from_fn(&g, |x| phi(x[0]))).unwrap()
}

fn spec(n: usize, phi: impl Fn(f64) -> f64) -> WarpedSpec {
    WarpedSpec::new(base_line(n, phi), 1.0).unwrap().with_fiber_nodes(16)
}

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
fn plain_product_when_potential_vanishes() {
    let w = build_warped(&spec(16, |_| 0.0)).unwrap();
    assert!(w.metric().max_diff(&SymTensorField::identity(w.grid())) == 0.0);
    let gamma = w.christoffel_closed_form();
    assert_eq!(gamma.max_diff(&Christoffel3Field::zeros(w.grid())), 0.0);
}

#[test]
fn warped_metric_components() {
    let w = build_warped(&spec(32, f64::sin)).unwrap();
    let fiber = ScalarField::from_fn(w.grid(), |x| (-2.0 * x[0].sin()).exp());
    assert!(w.metric().component_field(1, 1).max_diff(&fiber) < 1e-15);
    assert!(w.metric().component(0, 1).iter().all(|v| *v == 0.0));
    assert!(w.metric().component(0, 0).iter().all(|v| *v == 1.0));
}

#[test]
fn product_volume_is_weighted_base_volume() {
    let w = build_warped(&spec(128, f64::sin)).unwrap();
    let oracle = TAU * bessel_i0(1.0);
    assert!((w.snapshot().total_measure() - oracle).abs() <= 1e-10);
}

#[test]
fn assembling_needs_integer_small_fiber() {
    let s = WarpedSpec::new(base_line(16, f64::sin), 1.5).unwrap();
    assert!(matches!(build_warped(&s), Err(Error::Parameter(_))));
    let s = WarpedSpec::new(base_line(16, f64::sin), 3.0).unwrap();
    assert!(build_warped(&s).is_err());
    assert!(WarpedSpec::new(base_line(16, f64::sin), 0.0).is_err());
    // closed forms still work for real q
    let s = WarpedSpec::new(base_line(16, f64::sin), 1.5).unwrap();
    let f = ScalarField::from_fn(s.base().grid(), |x| x[0].cos());
    let (total, h, v) = s.hessian_norm_decomposition(&f, 0.3).unwrap();
    assert!(total.max_diff(&h.add(&v)) < 1e-12);
}

#[test]
fn closed_form_christoffel_matches_direct_computation() {
    let w = build_warped(&spec(128, f64::sin)).unwrap();
    let closed = w.christoffel_closed_form();
    let direct = w.snapshot().christoffel();
    assert!(closed.max_diff(direct) <= 1e-9, "{}", closed.max_diff(direct));

    let exact = ScalarField::from_fn(w.grid(), |x| x[0].cos() * (-2.0 * x[0].sin()).exp());
    assert!(closed.component_field(0, 1, 1).max_diff(&exact) < 1e-12);
    let mixed = ScalarField::from_fn(w.grid(), |x| -x[0].cos());
    assert!(closed.component_field(1, 0, 1).max_diff(&mixed) < 1e-12);
}

#[test]
fn closed_form_christoffel_two_dimensional_fiber() {
    let base = base_line(32, |x| 0.4 * x.cos());
    let s = WarpedSpec::new(base, 2.0).unwrap().with_fiber_nodes(8);
    let w = build_warped(&s).unwrap();
    assert!(w.christoffel_closed_form().max_diff(w.snapshot().christoffel()) <= 1e-10);
    let direct = w.snapshot().ricci();
    let closed = s.ricci().assemble(&w);
    assert!(direct.max_diff(&closed) <= 1e-9);
}

#[test]
fn hessian_blocks_cases() {
    let s = spec(128, f64::sin);
    let g = s.base().grid().clone();
    let zero = s.hessian_blocks(&ScalarField::constant(&g, 2.0)).unwrap();
    assert!(zero.horizontal.max_abs() < 1e-13 && zero.fiber.max_abs() < 1e-13);

    let f = ScalarField::from_fn(&g, |x| x[0].cos());
    let blocks = s.hessian_blocks(&f).unwrap();
    let coeff = ScalarField::from_fn(&g, |x| x[0].sin() * x[0].cos());
    assert!(blocks.fiber.max_diff(&coeff) < 1e-12);

    let w = build_warped(&s).unwrap();
    let direct = w.snapshot().hessian(&w.lift(&f)).unwrap();
    assert!(blocks.assemble(&w).max_diff(&direct) <= 1e-9);
    let general = s.hessian_general(&f).unwrap();
    assert_eq!(general.fiber.max_diff(&blocks.fiber), 0.0);
}

#[test]
fn hessian_blocks_reject_fiber_dependence() {
    let s = spec(32, f64::sin);
    let w = build_warped(&s).unwrap();
    let f = ScalarField::from_fn(w.grid(), |x| x[0].cos() + x[1].sin());
    assert!(matches!(s.hessian_blocks(&f), Err(Error::Precondition(_))));
    let lifted = w.lift(&ScalarField::from_fn(s.base().grid(), |x| x[0].cos()));
    assert!(s.hessian_blocks(&lifted).is_ok());
}

#[test]
fn norm_decomposition_cases() {
    let t = 0.5;
    let flat = spec(64, |_| 0.0);
    let g = flat.base().grid().clone();
    let f = ScalarField::from_fn(&g, |x| x[0].sin());
    let (_, _, v) = flat.hessian_norm_decomposition(&f, t).unwrap();
    assert!(v.max_diff(&ScalarField::constant(&g, 1.0 / (4.0 * t * t))) < 1e-13);

    let constant = spec(64, |_| 0.7);
    let (total, h, v) = constant.hessian_norm_decomposition(&ScalarField::constant(&g, 1.0), t).unwrap();
    let quarter = |k: f64| ScalarField::constant(&g, k / (4.0 * t * t));
    assert!(total.max_diff(&quarter(2.0)) < 1e-12);
    assert!(h.max_diff(&quarter(1.0)) < 1e-12);
    assert!(v.max_diff(&quarter(1.0)) < 1e-12);

    assert!(constant.hessian_norm_decomposition(&f, 0.0).is_err());
}

#[test]
fn norm_decomposition_matches_direct_product() {
    let s = spec(128, f64::sin);
    let t = 0.5;
    let f = ScalarField::from_fn(s.base().grid(), |x| x[0].cos());
    let (total, h, v) = s.hessian_norm_decomposition(&f, t).unwrap();
    assert!(total.max_diff(&h.add(&v)) <= 1e-12);

    let w = build_warped(&s).unwrap();
    let prod = w.snapshot();
    let shifted = prod.hessian(&w.lift(&f)).unwrap().add_scaled(-0.5 / t, prod.metric());
    let direct = w.restrict(&prod.tensor_norm_sq(&shifted).unwrap()).unwrap();
    assert!(direct.max_diff(&h.add(&v)) <= 1e-10, "{}", direct.max_diff(&h.add(&v)));
}

#[test]
fn laplacian_cases() {
    let s = spec(128, f64::sin);
    let w = build_warped(&s).unwrap();
    let f_base = ScalarField::from_fn(s.base().grid(), |x| x[0].cos() + 0.3 * (2.0 * x[0]).sin());
    let lf = s.base().witten_laplacian(&f_base).unwrap();
    let split = w.laplacian(&w.lift(&f_base)).unwrap();
    assert!(split.max_diff(&w.lift(&lf)) < 1e-12);

    let fiber_only = ScalarField::from_fn(w.grid(), |x| x[1].sin());
    let exact = ScalarField::from_fn(w.grid(), |x| -(2.0 * x[0].sin()).exp() * x[1].sin());
    assert!(w.laplacian(&fiber_only).unwrap().max_diff(&exact) < 1e-11);

    let mixed = ScalarField::from_fn(w.grid(), |x| x[0].cos() * x[1].sin());
    let direct = w.snapshot().laplace_beltrami(&mixed).unwrap();
    let split = w.laplacian(&mixed).unwrap();
    assert!(split.max_diff(&direct) <= 1e-9, "{}", split.max_diff(&direct));
}

#[test]
fn ricci_blocks_cases() {
    let zero = spec(32, |_| 0.0);
    let r = zero.ricci();
    assert!(r.horizontal.max_abs() < 1e-14 && r.fiber.max_abs() < 1e-14);
    assert!(zero.scalar_curvature().max_abs() < 1e-14);

    // ψ constant on a curved 2D base
    let g = Grid::new(&[32, 32], &[TAU, TAU]).unwrap();
    let metric = SymTensorField::from_node_fn(&g, |node, i, j| {
        let x = g.coords(node);
        match (i, j) {
            (0, 0) => 1.0,
            (0, 1) => 0.0,
            _ => (0.5 * x[0].sin()).exp(),
        }
    });
    let base = GeometrySnapshot::new(metric, ScalarField::constant(&g, 0.4)).unwrap();
    let s = WarpedSpec::new(base.clone(), 1.0).unwrap().with_fiber_nodes(8);
    let r = s.ricci();
    assert!(r.horizontal.max_diff(base.ricci()) < 1e-12);
    assert!(r.fiber.max_abs() < 1e-12);
    let w = build_warped(&s).unwrap();
    assert!(w.snapshot().ricci().max_diff(&r.assemble(&w)) < 1e-9);
}

#[test]
fn ricci_blocks_match_direct_product() {
    let s = spec(128, |x| 0.3 * x.sin());
    let w = build_warped(&s).unwrap();
    let closed = s.ricci();
    let direct = w.snapshot().ricci();
    assert!(closed.assemble(&w).max_diff(direct) <= 1e-8);
    let r_direct = w.snapshot().scalar_curvature();
    assert!(w.lift(&s.scalar_curvature()).max_diff(&r_direct) <= 1e-8);
    // closed form by hand: ψ″ − ψ′² in both blocks
    let k = ScalarField::from_fn(s.base().grid(), |x| -0.3 * x[0].sin() - 0.09 * x[0].cos().powi(2));
    assert!(closed.horizontal.component_field(0, 0).max_diff(&k) < 1e-12);
    assert!(closed.fiber.max_diff(&k) < 1e-12);
}

#[test]
fn ricci_quadratic_form_reduces_to_bakry_emery_m() {
    let s = spec(128, |x| 0.3 * x.sin() + 0.1 * (2.0 * x).cos());
    let w = build_warped(&s).unwrap();
    let h = ScalarField::from_fn(s.base().grid(), |x| 0.5 * x[0].cos() - 0.2 * (3.0 * x[0]).sin());
    let prod = w.snapshot();
    let grad = prod.gradient(&w.lift(&h)).unwrap();
    let lhs = prod.ricci().quadratic_form(&grad);
    let base = s.base();
    let rhs = base.bakry_emery_m(1.0 + s.q()).unwrap().quadratic_form(&base.gradient(&h).unwrap());
    assert!(lhs.max_diff(&w.lift(&rhs)) <= 1e-8);
}
