//! Built-in experiments, one per acceptance criterion plus `stationary`.

use std::f64::consts::PI;

use super::config::*;
use crate::entropy::Formula;

pub const PRESET_NAMES: &[&str] = &[
    "warped-identities",
    "entropy-dissipation",
    "w-entropy",
    "super-flow-monotonicity",
    "gaussian-baseline",
    "k-variants",
    "lott-flow",
    "log-sobolev",
    "convergence-orders",
    "stationary",
];

pub fn presets() -> Vec<ExperimentConfig> {
    PRESET_NAMES.iter().map(|n| preset(n).expect("listed preset")).collect()
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    Some(match name {
        "warped-identities" => warped_identities(),
        "entropy-dissipation" => entropy_dissipation(),
        "w-entropy" => w_entropy(),
        "super-flow-monotonicity" => super_flow(),
        "gaussian-baseline" => gaussian_baseline(),
        "k-variants" => k_variants(),
        "lott-flow" => lott_flow(),
        "log-sobolev" => log_sobolev(),
        "convergence-orders" => convergence_orders(),
        "stationary" => stationary(),
        _ => return None,
    })
}

fn base(name: &str, description: &str, grid: GridSpec, checks: Vec<CheckSpec>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        description: description.into(),
        grid,
        metric: MetricSpec::Flat,
        potential: FourierSeries::default(),
        initial: InitialData::Uniform,
        schedule: ScheduleSpec::Static,
        solver: SolverSpec::default(),
        parameters: Parameters::default(),
        checks,
        output: None,
        seed: 0,
    }
}

/// `exp(1.5 cos(x − 1))`.
fn bump() -> InitialData {
    InitialData::Exp { exponent: FourierSeries::mode(0.0, 1, 1.5 * 1f64.cos(), 1.5 * 1f64.sin()) }
}

fn formula(formula: Formula, tolerance: f64) -> CheckSpec {
    CheckSpec::Formula { formula, tolerance, absolute: false }
}

fn dissipation_setup(name: &str, description: &str, checks: Vec<CheckSpec>) -> ExperimentConfig {
    ExperimentConfig {
        potential: FourierSeries::mode(0.0, 1, 0.5, 0.0),
        initial: bump(),
        solver: SolverSpec { t0: 0.05, t_end: 0.5, dt_out: 1e-3, richardson: true, ..SolverSpec::default() },
        parameters: Parameters { m: Some(3.0), ..Parameters::default() },
        ..base(name, description, GridSpec::line(256, 2.0 * PI), checks)
    }
}

fn warped_identities() -> ExperimentConfig {
    ExperimentConfig {
        potential: FourierSeries::mode(0.0, 1, 0.0, 1.0),
        ..base(
            "warped-identities",
            "Warped-product blocks on T¹(2π) with φ = sin x and a circle fiber",
            GridSpec::line(128, 2.0 * PI),
            vec![CheckSpec::WarpedIdentities {
                q: 1.0,
                fiber_nodes: 16,
                t: 0.5,
                christoffel_tolerance: 1e-9,
                laplacian_tolerance: 1e-9,
                decomposition_tolerance: 1e-12,
                ricci_tolerance: 1e-8,
            }],
        )
    }
}

fn entropy_dissipation() -> ExperimentConfig {
    dissipation_setup(
        "entropy-dissipation",
        "Second derivative of the Shannon entropy against its dissipation formula",
        vec![formula(Formula::EntropySecond, 1e-3)],
    )
}

fn w_entropy() -> ExperimentConfig {
    dissipation_setup(
        "w-entropy",
        "W_m dissipation formula with m = 3 and the stationary self-test",
        vec![formula(Formula::Wm, 1e-3), CheckSpec::StationarySelfTest { tolerance: 1e-10 }],
    )
}

fn super_flow() -> ExperimentConfig {
    ExperimentConfig {
        potential: FourierSeries::mode(0.0, 1, 0.3, 0.0),
        initial: bump(),
        schedule: ScheduleSpec::Scaled { scale: ScaleSpec::Polynomial { coefficients: vec![1.0, 1.0] } },
        solver: SolverSpec { t0: 0.05, t_end: 1.0, dt_out: 0.05, ..SolverSpec::default() },
        parameters: Parameters { m: Some(3.0), ..Parameters::default() },
        ..base(
            "super-flow-monotonicity",
            "W_m along the expanding schedule (1 + t)·flat with the conjugate potential",
            GridSpec::line(256, 2.0 * PI),
            vec![CheckSpec::SuperFlow { slack: 1e-10 }, CheckSpec::Monotone { quantity: MonotoneQuantity::Wm }],
        )
    }
}

fn gaussian_baseline() -> ExperimentConfig {
    let period = 20.0 * PI;
    ExperimentConfig {
        initial: InitialData::HeatKernel { center: vec![0.5 * period], t: 0.01 },
        solver: SolverSpec { start: Some(0.01), t0: 0.01, t_end: 0.1, dt_out: 1e-3, ..SolverSpec::default() },
        parameters: Parameters { m: Some(1.0), ..Parameters::default() },
        ..base(
            "gaussian-baseline",
            "Wrapped Gaussian on flat T¹(20π): W_n vanishes in the equality case",
            GridSpec::line(512, period),
            vec![CheckSpec::GaussianBaseline { value_tolerance: 1e-3, rate_tolerance: 1e-2 }],
        )
    }
}

fn k_variants() -> ExperimentConfig {
    ExperimentConfig {
        potential: FourierSeries::mode(0.0, 1, 0.0, 0.3),
        initial: bump(),
        solver: SolverSpec {
            start: Some(0.0),
            t0: 0.05,
            t_end: 0.5,
            dt_out: 1e-3,
            richardson: true,
            ..SolverSpec::default()
        },
        parameters: Parameters { m: Some(3.0), k: KSpec::Named("auto".into()), q: None },
        ..base(
            "k-variants",
            "K-shifted Harnack bound, W_{m,K} formula and monotonicity with K from the curvature floor",
            GridSpec::line(256, 2.0 * PI),
            vec![
                CheckSpec::Harnack { tolerance: 1e-6 },
                formula(Formula::WmK, 1e-3),
                CheckSpec::Monotone { quantity: MonotoneQuantity::WmK },
            ],
        )
    }
}

fn lott_flow() -> ExperimentConfig {
    let terminal = InitialData::Exp { exponent: FourierSeries::mode(0.0, 1, 1.0, 0.0) };
    ExperimentConfig {
        potential: FourierSeries::mode(0.0, 1, 0.0, 0.3),
        initial: bump(),
        schedule: ScheduleSpec::Lott { q: 1.0 },
        solver: SolverSpec { start: Some(0.0), t0: 0.05, t_end: 0.5, dt_out: 0.05, ..SolverSpec::default() },
        parameters: Parameters { q: Some(1.0), ..Parameters::default() },
        ..base(
            "lott-flow",
            "Lott flow on T¹ with a circle fiber: product flow, adjointness and Perelman entropy",
            GridSpec::line(64, 2.0 * PI),
            vec![
                CheckSpec::LottProduct { fiber_nodes: 8, dt: 1e-3, tolerance: 1e-6 },
                CheckSpec::ConjugatePairing { terminal: terminal.clone(), samples: 10, tolerance: 1e-6 },
                CheckSpec::Perelman { terminal, tau_start: 0.05, dtau: 5e-3, richardson: true, tolerance: 1e-2 },
            ],
        )
    }
}

fn log_sobolev() -> ExperimentConfig {
    ExperimentConfig {
        schedule: ScheduleSpec::Scaled { scale: ScaleSpec::Polynomial { coefficients: vec![1.0, 1.0] } },
        solver: SolverSpec { t0: 0.25, t_end: 1.0, dt_out: 0.25, ..SolverSpec::default() },
        seed: 7,
        ..base(
            "log-sobolev",
            "Log-Sobolev constant: oracle agreement, K shift, monotonicity on the expanding schedule",
            GridSpec::line(64, 2.0 * PI),
            vec![
                CheckSpec::LogSobolevOracle { t: 1.0, m: 1.0, tolerance: 1e-5 },
                CheckSpec::LogSobolevShift { t: 1.0, m: 1.0, k: 1.0, tolerance: 1e-10 },
                CheckSpec::MuMonotone { times: vec![0.25, 0.5, 1.0], m: 1.0 },
            ],
        )
    }
}

fn convergence_orders() -> ExperimentConfig {
    ExperimentConfig {
        solver: SolverSpec { t0: 0.05, t_end: 0.5, dt_out: 1e-2, ..SolverSpec::default() },
        ..dissipation_setup(
            "convergence-orders",
            "Second-order time differencing and spectral spatial convergence",
            vec![
                CheckSpec::TimeOrder { formula: Formula::EntropySecond, min_ratio: 3.0, max_ratio: 5.0 },
                CheckSpec::TimeOrder { formula: Formula::Wm, min_ratio: 3.0, max_ratio: 5.0 },
                CheckSpec::SpatialFloor { nodes: vec![32, 64, 128], tolerance: 1e-8 },
            ],
        )
    }
}

fn stationary() -> ExperimentConfig {
    let absolute = |formula| CheckSpec::Formula { formula, tolerance: 1e-10, absolute: true };
    ExperimentConfig {
        potential: FourierSeries::mode(0.0, 1, 0.5, 0.0),
        initial: InitialData::Uniform,
        solver: SolverSpec { t0: 0.1, t_end: 1.0, dt_out: 0.05, ..SolverSpec::default() },
        parameters: Parameters { m: Some(3.0), k: KSpec::Value(1.0), q: None },
        ..base(
            "stationary",
            "Invariant density: dissipation residuals vanish and dW_m/dt = -m/2t in closed form",
            GridSpec::line(64, 2.0 * PI),
            vec![
                CheckSpec::StationarySelfTest { tolerance: 1e-10 },
                absolute(Formula::EntropyRate),
                absolute(Formula::EntropySecond),
                absolute(Formula::W),
            ],
        )
    }
}
