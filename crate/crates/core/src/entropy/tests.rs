use std::f64::consts::PI;

use super::*;
use crate::flows::{evolve_heat, FlowState, MetricSchedule, Scale, StepOptions};
use crate::geometry::{GeometrySnapshot, Grid, ScalarField, SymTensorField};

fn flat(n: usize, period: f64, phi: impl Fn(f64) -> f64) -> GeometrySnapshot {
    let g = Grid::line(n, period).unwrap();
    GeometrySnapshot::flat(ScalarField::from_fn(&g, |x| phi(x[0]))).unwrap()
}

fn uniform_state(snap: &GeometrySnapshot, t: f64) -> FlowState {
    let u = ScalarField::constant(snap.grid(), 1.0 / snap.total_measure());
    FlowState { t, snapshot: snap.clone(), u }
}

/// Normalized samples of the wrapped heat kernel centred mid-domain.
fn gaussian_state(n: usize, t: f64) -> FlowState {
    let snap = flat(n, 20.0 * PI, |_| 0.0);
    let l = 20.0 * PI;
    let u = ScalarField::from_fn(snap.grid(), |x| {
        (-3..=3)
            .map(|k| {
                let d = x[0] - 0.5 * l - k as f64 * l;
                (-d * d / (4.0 * t)).exp()
            })
            .sum::<f64>()
            / (4.0 * PI * t).sqrt()
    });
    let u = u.scale(1.0 / snap.integrate(&u).unwrap());
    FlowState { t, snapshot: snap, u }
}

#[test]
fn uniform_density_values() {
    let snap = flat(32, 2.0 * PI, |_| 0.0);
    let s = uniform_state(&snap, 0.3);
    let log_vol = (2.0 * PI).ln();
    assert!((shannon_h(&s).unwrap() - log_vol).abs() < 1e-13);
    // no gradient term: W reduces to the entropy itself
    assert!((w_closed(&s).unwrap() - log_vol).abs() < 1e-13);
    assert!(fisher_information(&s).unwrap().abs() < 1e-20);
    assert!(d2h_rhs(&s, &MetricSchedule::constant(&snap, 0.1, 1.0).unwrap()).unwrap().abs() < 1e-20);
}

#[test]
fn entropy_bounded_by_log_volume() {
    let snap = flat(64, 2.0 * PI, |x| 0.4 * x.sin());
    let u = ScalarField::from_fn(snap.grid(), |x| 1.0 + 0.7 * (2.0 * x[0]).cos() * x[0].sin());
    let u = u.scale(1.0 / snap.integrate(&u).unwrap());
    let s = FlowState { t: 1.0, snapshot: snap.clone(), u };
    assert!(shannon_h(&s).unwrap() < snap.total_measure().ln());
    let uni = uniform_state(&snap, 1.0);
    assert!((shannon_h(&uni).unwrap() - snap.total_measure().ln()).abs() < 1e-12);
}

#[test]
fn gaussian_entropies() {
    let s = gaussian_state(512, 0.05);
    let exact = 0.5 * (1.0 + (4.0 * PI * 0.05).ln());
    let h = shannon_h(&s).unwrap();
    assert!((h - exact).abs() <= 1e-6, "{h} vs {exact}");
    assert!(h_m(&s, 1.0).unwrap().abs() <= 1e-6);
    assert!(w_m_closed(&s, 1.0).unwrap().abs() <= 1e-6);
    assert!(matches!(LogDensity::new(&s.snapshot, &s.u).unwrap().route(), Route::Quotient { .. }));
}

#[test]
fn k_corrections() {
    let s = gaussian_state(256, 0.5);
    assert_eq!(h_mk(&s, 2.0, 0.0).unwrap(), h_m(&s, 2.0).unwrap());
    let corr = h_m(&s, 2.0).unwrap() - h_mk(&s, 2.0, 1.0).unwrap();
    assert!((corr - 13.0 / 24.0).abs() < 1e-14);
    assert_eq!(w_mk_closed(&s, 3.0, 0.0).unwrap(), w_m_closed(&s, 3.0).unwrap());
    let (m, k, t) = (3.0, 0.7, 0.5);
    let diff = w_mk_closed(&s, m, k).unwrap() - w_m_closed(&s, m).unwrap();
    assert!((diff + m * (k * t + k * k * t * t / 4.0)).abs() < 1e-14);
}

#[test]
fn stationary_dissipation_is_exact() {
    let snap = flat(64, 2.0 * PI, |_| 0.0);
    for (t, m) in [(0.1, 2.0), (0.5, 3.0), (2.0, 1.5)] {
        assert!(stationary_self_test(&snap, t, m).unwrap() <= 1e-10);
    }
    let snap = flat(64, 2.0 * PI, |x| 0.5 * x.cos());
    assert!(stationary_self_test(&snap, 0.3, 3.0).unwrap() <= 1e-10);
}

#[test]
fn k_zero_reduces_w_dissipation() {
    let snap = flat(64, 2.0 * PI, |x| 0.5 * x.cos());
    let path = MetricSchedule::constant(&snap, 0.0, 1.0).unwrap();
    let u = ScalarField::from_fn(snap.grid(), |x| (1.5 * (x[0] - 1.0).cos()).exp());
    let s = FlowState { t: 0.3, snapshot: snap.clone(), u: u.scale(1.0 / snap.integrate(&u).unwrap()) };
    assert_eq!(dwmk_rhs(&s, &path, 3.0, 0.0).unwrap(), dwm_rhs(&s, &path, 3.0).unwrap());
    assert!(dwm_rhs(&s, &path, 1.0).is_err());
    assert!(dwmk_rhs(&s, &path, 3.0, -1.0).is_err());
}

#[test]
fn gaussian_w_dissipation() {
    // m = n + 1, φ = 0: only the drift term survives, −(2t)(1/2t)² = −1/2t
    let t = 0.05;
    let s = gaussian_state(512, t);
    let path = MetricSchedule::constant(&s.snapshot, 0.01, 1.0).unwrap();
    let rhs = dwm_rhs(&s, &path, 2.0).unwrap();
    assert!((rhs + 0.5 / t).abs() <= 1e-6 * 0.5 / t, "{rhs}");
}

#[test]
fn second_derivative_of_entropy_on_fourier_solution() {
    let snap = flat(64, 2.0 * PI, |_| 0.0);
    let path = MetricSchedule::constant(&snap, 0.0, 1.0).unwrap();
    let eps = 0.3;
    let state = |t: f64| {
        let u = ScalarField::from_fn(snap.grid(), |x| (1.0 + eps * (-t).exp() * x[0].cos()) / (2.0 * PI));
        FlowState { t, snapshot: snap.clone(), u }
    };
    let (t, dt) = (0.4, 1e-4);
    let h = |t| shannon_h(&state(t)).unwrap();
    let fd = (h(t + dt) - 2.0 * h(t) + h(t - dt)) / (dt * dt);
    let rhs = d2h_rhs(&state(t), &path).unwrap();
    assert!(((fd - rhs) / rhs).abs() <= 1e-3, "{fd} {rhs}");
    let fd1 = (h(t + dt) - h(t - dt)) / (2.0 * dt);
    let rate = fisher_information(&state(t)).unwrap();
    assert!(((fd1 - rate) / rate).abs() <= 1e-4);
}

#[test]
fn hessian_identity_holds_pointwise() {
    let snap = flat(64, 2.0 * PI, |x| 0.3 * x.sin());
    let u = ScalarField::from_fn(snap.grid(), |x| (1.2 * (x[0] - 0.4).cos()).exp());
    let s = FlowState { t: 0.2, snapshot: snap, u };
    assert!(hessian_identity_residual(&s, 2.5).unwrap().max_abs() <= 1e-10);
}

#[test]
fn rejects_unnormalized_and_bad_parameters() {
    let snap = flat(32, 2.0 * PI, |_| 0.0);
    let mut s = uniform_state(&snap, 0.5);
    s.u = s.u.scale(2.0);
    assert!(matches!(shannon_h(&s), Err(crate::Error::Precondition(_))));
    let s = uniform_state(&snap, 0.0);
    assert!(h_m(&s, 1.0).is_err());
    let s = uniform_state(&snap, 0.5);
    assert!(h_mk(&s, 1.0, -0.5).is_err());
    s.u.values();
    let zero = FlowState { t: 0.5, snapshot: snap.clone(), u: ScalarField::zeros(snap.grid()) };
    assert!(LogDensity::new(&zero.snapshot, &zero.u).is_err());
}

fn stationary_trajectory(times: &[f64]) -> (MetricSchedule, crate::flows::FlowTrajectory) {
    let snap = flat(32, 2.0 * PI, |x| 0.5 * x.cos());
    let path = MetricSchedule::constant(&snap, times[0], times[times.len() - 1]).unwrap();
    let u0 = ScalarField::constant(snap.grid(), 1.0);
    let traj = evolve_heat(&path, &u0, times, &StepOptions::default()).unwrap();
    (path, traj)
}

#[test]
fn stationary_report_residuals_vanish() {
    let times: Vec<f64> = (0..=20).map(|k| 0.5 + 1e-3 * k as f64).collect();
    let (path, traj) = stationary_trajectory(&times);
    let opts = ReportOptions { m: 3.0, k: 0.5, richardson: true };
    let rep = formula_residuals(&traj, &path, &opts).unwrap();
    assert_eq!(rep.rows.len(), times.len() - 4);
    for f in Formula::ALL {
        assert!(rep.max_residual(f) <= 1e-10, "{:?}: {:e}", f, rep.max_residual(f));
    }
}

#[test]
fn report_rejects_irregular_times() {
    let times = [0.5, 0.501, 0.503, 0.504, 0.505];
    let (path, traj) = stationary_trajectory(&times);
    let opts = ReportOptions { m: 3.0, k: 0.0, richardson: false };
    assert!(matches!(formula_residuals(&traj, &path, &opts), Err(crate::Error::IrregularTimes(_))));
    let (path, traj) = stationary_trajectory(&[0.5, 0.6]);
    assert!(formula_residuals(&traj, &path, &opts).is_err());
}

#[test]
fn expanding_schedule_is_monotone() {
    let g = Grid::line(64, 2.0 * PI).unwrap();
    let path = MetricSchedule::scaled(
        SymTensorField::identity(&g),
        Scale::Polynomial(vec![1.0, 1.0]),
        ScalarField::from_fn(&g, |x| 0.3 * x[0].cos()),
        0.1,
        0.5,
    )
    .unwrap();
    let times: Vec<f64> = (0..=8).map(|k| 0.1 + 0.05 * k as f64).collect();
    let u0 = ScalarField::from_fn(&g, |x| (1.5 * (x[0] - 1.0).cos()).exp());
    let traj = evolve_heat(&path, &u0, &times, &StepOptions::default()).unwrap();
    let rep = formula_residuals(&traj, &path, &ReportOptions { m: 3.0, k: 0.0, richardson: false }).unwrap();
    assert!(rep.verdicts.super_flow && rep.verdicts.super_flow_m_free);
    assert_eq!(rep.verdicts.w_m_nonincreasing, Verdict::Pass);
    assert_eq!(rep.verdicts.h_concave, Verdict::Pass);
    assert!(rep.series.windows(2).all(|w| w[1].w_m < w[0].w_m));
}

#[test]
fn verdict_withheld_without_certificate() {
    let snap = flat(64, 2.0 * PI, |x| 0.8 * x.sin());
    let path = MetricSchedule::constant(&snap, 0.1, 0.2).unwrap();
    let times: Vec<f64> = (0..=4).map(|k| 0.1 + 0.025 * k as f64).collect();
    let u0 = ScalarField::from_fn(snap.grid(), |x| 1.0 + 0.3 * x[0].cos());
    let traj = evolve_heat(&path, &u0, &times, &StepOptions::default()).unwrap();
    let rep = formula_residuals(&traj, &path, &ReportOptions { m: 3.0, k: 0.0, richardson: false }).unwrap();
    assert!(!rep.verdicts.super_flow);
    assert_eq!(rep.verdicts.w_m_nonincreasing, Verdict::NotApplicable);
}

#[test]
fn report_serializes() {
    let times: Vec<f64> = (0..=6).map(|k| 0.5 + 1e-2 * k as f64).collect();
    let (path, traj) = stationary_trajectory(&times);
    let rep = formula_residuals(&traj, &path, &ReportOptions { m: 2.0, k: 0.0, richardson: false }).unwrap();
    let csv = rep.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), CSV_COLUMNS.len());
    assert_eq!(lines.count(), rep.rows.len());
    let dir = tempfile::tempdir().unwrap();
    rep.write(dir.path()).unwrap();
    let back: EntropyReport =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("entropy.json")).unwrap()).unwrap();
    assert_eq!(back, rep);
    let dat = std::fs::read_to_string(dir.path().join("plot").join("W_m.dat")).unwrap();
    assert_eq!(dat.lines().count(), rep.rows.len());
}

#[test]
fn harnack_on_uniform_and_gaussian() {
    let snap = flat(32, 2.0 * PI, |_| 0.0);
    let path = MetricSchedule::constant(&snap, 0.0, 1.0).unwrap();
    let (m, k, t) = (2.0, 0.5, 0.4);
    let d = harnack_defect(&uniform_state(&snap, t), &path, m, k).unwrap();
    let expected = -(m / (2.0 * t) + 0.5 * m * k * (1.0 + k * t / 3.0));
    assert!(d.max_diff(&ScalarField::constant(snap.grid(), expected)) < 1e-12);

    let s = gaussian_state(512, 0.05);
    let path = MetricSchedule::constant(&s.snapshot, 0.0, 1.0).unwrap();
    let d = harnack_defect(&s, &path, 1.0, 0.0).unwrap();
    assert!(d.max() <= HARNACK_TOLERANCE, "{}", d.max());
}

#[test]
fn harnack_requires_curvature_bound_and_static_geometry() {
    let snap = flat(64, 2.0 * PI, |x| 0.3 * x.sin());
    let path = MetricSchedule::constant(&snap, 0.0, 1.0).unwrap();
    let s = uniform_state(&snap, 0.2);
    assert!(matches!(harnack_defect(&s, &path, 3.0, 0.0), Err(crate::Error::Precondition(_))));
    assert!(harnack_defect(&s, &path, 3.0, 0.31).is_ok());
    assert!(harnack_defect(&s, &path, 1.0, 1.0).is_err());
    let g = snap.grid().clone();
    let moving =
        MetricSchedule::scaled(SymTensorField::identity(&g), Scale::Polynomial(vec![1.0, 1.0]), ScalarField::zeros(&g), 0.0, 1.0)
            .unwrap();
    let s = uniform_state(&moving.snapshot_at(0.2).unwrap(), 0.2);
    assert!(matches!(harnack_defect(&s, &moving, 2.0, 0.0), Err(crate::Error::Precondition(_))));
}

#[test]
fn perelman_entropy_closed_cases() {
    let snap = flat(64, 2.0 * PI, |_| 0.0);
    let (tau, q) = (0.3, 1.0);
    let phi = ScalarField::constant(snap.grid(), 1.0 / (2.0 * PI));
    let eta = (2.0 * PI).ln() - (4.0 * PI * tau).ln();
    assert!((w_q(&snap, &phi, tau, q).unwrap() - (eta - 2.0)).abs() < 1e-12);
    // base-only heat kernel: the fiber contributes −q(1 + ½ log 4πτ)
    let s = gaussian_state(512, 0.05);
    let w = w_q(&s.snapshot, &s.u, 0.05, q).unwrap();
    let expected = -q * (1.0 + 0.5 * (4.0 * PI * 0.05).ln());
    assert!((w - expected).abs() < 1e-6, "{w} {expected}");
    let rhs = dwq_rhs(&s.snapshot, &s.u, 0.05, q).unwrap();
    assert!((rhs + 0.5 * q / 0.05).abs() < 1e-5, "{rhs}");
    assert!(w_q(&snap, &phi.scale(2.0), tau, q).is_err());
}
