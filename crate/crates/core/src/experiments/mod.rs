//! Declarative experiments: a JSON config selects geometry, schedule, flow
//! and checks; running it produces a verdict and artifacts on disk.
//!
//! Artifacts in the output directory:
//! - `report.json`: [`RunReport`] (config echo, resolved `K`, checks)
//! - `checks.csv`: `name,measured,tolerance,passed`
//! - `entropy/`: entropy report when a heat flow ran
//! - `perelman.csv`, `mu.csv`: series of the corresponding checks
//!
//! Floats in CSV files use `{:.16e}`.

mod config;
mod presets;


use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::entropy::{
    bakry_emery_m_or_n, formula_residuals, harnack_certificate, perelman_report, stationary_self_test, w_m_closed,
    EntropyReport, PerelmanReport, ReportOptions, Verdict, MONOTONE_SLACK,
};
use crate::error::{Error, Result};
use crate::flows::{
    conjugate_heat_solve, evolve_heat, evolve_lott, ricci_flow, FlowTrajectory, GeometryPath, LottState,
    LottTrajectory, MetricSchedule, StepOptions,
};
use crate::geometry::{GeometrySnapshot, Grid, ScalarField};
use crate::logsobolev::{mu_monotonicity, LogSobolevProblem, MuSeries, OracleOptions, SolverOptions, EL_TOLERANCE};
use crate::warped_product::{build_warped, WarpedSpec};

pub use config::{
    CheckSpec, ExperimentConfig, FourierSeries, FourierTerm, GridSpec, InitialData, KSpec, MetricSpec,
    MonotoneQuantity, Parameters, ScaleSpec, ScheduleSpec, SolverSpec,
};
pub use presets::{preset, presets, PRESET_NAMES};

/// Environment variable naming the output root.
pub const OUTPUT_ENV: &str = "WITTEN_LAB_OUTPUT";

/// Fallback output root.
pub const DEFAULT_OUTPUT_ROOT: &str = "witten-lab-output";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default)]
    pub detail: String,
}

impl Check {
    /// Passes when `measured ≤ tolerance`.
    fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, passed: measured <= tolerance, detail: String::new() }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunVerdict {
    pub name: String,
    pub checks: Vec<Check>,
    /// All checks passed.
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    /// `K` after resolving `"auto"`.
    pub k: f64,
    pub verdict: RunVerdict,
}

/// Everything a run computed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: RunReport,
    pub entropy: Option<EntropyReport>,
    pub perelman: Option<PerelmanReport>,
    pub mu: Option<MuSeries>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.verdict.passed
    }

    pub fn checks_csv(&self) -> String {
        let mut out = String::from("name,measured,tolerance,passed\n");
        for c in &self.report.verdict.checks {
            let _ = writeln!(out, "{},{:.16e},{:.16e},{}", c.name, c.measured, c.tolerance, c.passed);
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&self.report)?)?;
        fs::write(dir.join("checks.csv"), self.checks_csv())?;
        if let Some(e) = &self.entropy {
            e.write(&dir.join("entropy"))?;
        }
        if let Some(p) = &self.perelman {
            let mut csv = String::from("tau,t,W_q,dWq_lhs,dWq_rhs\n");
            for r in &p.rows {
                let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.tau, r.t, r.w_q, r.lhs, r.rhs);
            }
            fs::write(dir.join("perelman.csv"), csv)?;
        }
        if let Some(m) = &self.mu {
            let mut csv = String::from("t,mu,residual,certified\n");
            for s in &m.samples {
                let _ = writeln!(csv, "{:.16e},{:.16e},{:.16e},{}", s.t, s.mu, s.residual, s.certified);
            }
            fs::write(dir.join("mu.csv"), csv)?;
        }
        Ok(())
    }
}

/// Output directory for `config`: its own `output`, else
/// `$WITTEN_LAB_OUTPUT/<name>`, else `witten-lab-output/<name>`.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = &config.output {
        return dir.clone();
    }
    let root = std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_OUTPUT_ROOT.into());
    root.join(&config.name)
}

/// Validates, then evaluates every selected check. Config problems are
/// [`Error::Config`]; anything else is a runtime failure.
pub fn evaluate(config: &ExperimentConfig) -> Result<Outcome> {
    let diagnostics = config.validate();
    if !diagnostics.is_empty() {
        return Err(Error::Config(diagnostics.join("; ")));
    }
    let mut ctx = Context::new(config)?;
    let mut checks = Vec::new();
    for spec in &config.checks {
        checks.extend(ctx.run(spec)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    let report = RunReport {
        config: config.clone(),
        k: ctx.k,
        verdict: RunVerdict { name: config.name.clone(), checks, passed },
    };
    Ok(Outcome { report, entropy: ctx.entropy, perelman: ctx.perelman, mu: ctx.mu })
}

/// [`evaluate`] and write the artifacts to [`output_dir`].
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    let outcome = evaluate(config)?;
    outcome.write(&output_dir(config))?;
    Ok(outcome)
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    grid: Grid,
    snap: GeometrySnapshot,
    options: StepOptions,
    k: f64,
    path: Option<Arc<dyn GeometryPath>>,
    lott: Option<Arc<LottTrajectory>>,
    heat: Option<FlowTrajectory>,
    entropy: Option<EntropyReport>,
    perelman: Option<PerelmanReport>,
    mu: Option<MuSeries>,
}

impl<'a> Context<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        let grid = config.build_grid()?;
        let snap = config.build_snapshot(&grid)?;
        let options = StepOptions { safety: config.solver.safety, max_dt: config.solver.max_dt };
        let k = match &config.parameters.k {
            KSpec::Value(k) => *k,
            KSpec::Named(_) => {
                let m = config.m()?;
                let floor = snap.min_rel_eigenvalue(&bakry_emery_m_or_n(&snap, m)?)?.min();
                (-floor).max(0.0)
            }
        };
        Ok(Self {
            config,
            grid,
            snap,
            options,
            k,
            path: None,
            lott: None,
            heat: None,
            entropy: None,
            perelman: None,
            mu: None,
        })
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions { seed: self.config.seed, ..SolverOptions::default() }
    }

    fn path(&mut self) -> Result<Arc<dyn GeometryPath>> {
        if self.path.is_none() {
            if let ScheduleSpec::Lott { q } = self.config.schedule {
                let lott = Arc::new(self.evolve_lott(q, &self.options)?);
                self.lott = Some(lott.clone());
                self.path = Some(lott);
            } else {
                self.path = Some(self.config.build_path(&self.snap, &self.options)?);
            }
        }
        Ok(self.path.clone().expect("set above"))
    }

    fn evolve_lott(&self, q: f64, options: &StepOptions) -> Result<LottTrajectory> {
        let s = &self.config.solver;
        let init = LottState::new(s.start(), self.snap.metric().clone(), self.snap.potential().clone())?;
        evolve_lott(&init, q, s.t_end, &s.output_times(), options)
    }

    fn lott(&mut self) -> Result<Arc<LottTrajectory>> {
        self.path()?;
        self.lott.clone().ok_or_else(|| Error::Config("the check needs a Lott schedule".into()))
    }

    fn heat(&mut self) -> Result<&FlowTrajectory> {
        if self.heat.is_none() {
            let path = self.path()?;
            let u0 = self.config.initial.field(&self.grid);
            self.heat = Some(evolve_heat(&*path, &u0, &self.config.solver.output_times(), &self.options)?);
        }
        Ok(self.heat.as_ref().expect("set above"))
    }

    fn entropy(&mut self) -> Result<&EntropyReport> {
        if self.entropy.is_none() {
            let options = ReportOptions { m: self.config.m()?, k: self.k, richardson: self.config.solver.richardson };
            let path = self.path()?;
            let report = formula_residuals(self.heat()?, &*path, &options)?;
            self.entropy = Some(report);
        }
        Ok(self.entropy.as_ref().expect("set above"))
    }

    fn run(&mut self, spec: &CheckSpec) -> Result<Vec<Check>> {
        let k = self.k;
        Ok(match spec {
            CheckSpec::WarpedIdentities {
                q,
                fiber_nodes,
                t,
                christoffel_tolerance,
                laplacian_tolerance,
                decomposition_tolerance,
                ricci_tolerance,
            } => {
                let spec = WarpedSpec::new(self.snap.clone(), *q)?.with_fiber_nodes(*fiber_nodes);
                let w = build_warped(&spec)?;
                let christoffel = w.christoffel_closed_form().max_diff(w.snapshot().christoffel());
                let n = self.grid.dim();
                let period = self.grid.periods()[0];
                let f = ScalarField::from_fn(w.grid(), |x| (2.0 * std::f64::consts::PI * x[0] / period).cos() * x[n].sin());
                let laplacian = w.laplacian(&f)?.max_diff(&w.snapshot().laplace_beltrami(&f)?);
                let base_f = ScalarField::from_fn(&self.grid, |x| (2.0 * std::f64::consts::PI * x[0] / period).cos());
                let (total, h, v) = spec.hessian_norm_decomposition(&base_f, *t)?;
                let decomposition = total.max_diff(&h.add(&v));
                let ricci = spec.ricci().assemble(&w).max_diff(w.snapshot().ricci());
                vec![
                    Check::at_most("warped.christoffel", christoffel, *christoffel_tolerance),
                    Check::at_most("warped.laplacian_split", laplacian, *laplacian_tolerance),
                    Check::at_most("warped.hessian_decomposition", decomposition, *decomposition_tolerance),
                    Check::at_most("warped.ricci_blocks", ricci, *ricci_tolerance),
                ]
            }
            CheckSpec::Formula { formula, tolerance, absolute } => {
                let report = self.entropy()?;
                let (value, kind) = if *absolute {
                    (report.max_residual(*formula), "absolute")
                } else {
                    (report.max_relative(*formula), "relative")
                };
                vec![Check::at_most(&format!("formula.{}", formula.name()), value, *tolerance)
                    .with_detail(format!("largest {kind} residual"))]
            }
            CheckSpec::StationarySelfTest { tolerance } => {
                let m = self.config.m()?;
                let path = self.path()?;
                let mut worst: f64 = 0.0;
                for t in self.config.solver.output_times() {
                    worst = worst.max(stationary_self_test(&path.snapshot_at(t)?, t, m)?);
                }
                vec![Check::at_most("stationary_self_test", worst, *tolerance)]
            }
            CheckSpec::SuperFlow { slack } => {
                let m = self.config.m()?;
                let path = self.path()?;
                let mut floor = f64::INFINITY;
                for t in self.config.solver.output_times() {
                    let snap = path.snapshot_at(t)?;
                    let tensor = bakry_emery_m_or_n(&snap, m)?
                        .add_scaled(0.5, &path.metric_rate_at(t)?)
                        .add_scaled(k, snap.metric());
                    floor = floor.min(snap.min_rel_eigenvalue(&tensor)?.min());
                }
                vec![Check {
                    name: "super_flow".into(),
                    measured: floor,
                    tolerance: -*slack,
                    passed: floor >= -*slack,
                    detail: "smallest relative eigenvalue of ½∂ₜg + Ric_{m,n}(L) + Kg".into(),
                }]
            }
            CheckSpec::Monotone { quantity } => {
                let report = self.entropy()?;
                let (name, values, verdict): (&str, Vec<f64>, Verdict) = match quantity {
                    MonotoneQuantity::Wm => (
                        "monotone.W_m",
                        report.series.iter().map(|p| p.w_m).collect(),
                        report.verdicts.w_m_nonincreasing,
                    ),
                    MonotoneQuantity::WmK => (
                        "monotone.W_mK",
                        report.series.iter().map(|p| p.w_mk).collect(),
                        report.verdicts.w_mk_nonincreasing,
                    ),
                    MonotoneQuantity::HConcave => (
                        "monotone.H_concave",
                        report.rows.iter().map(|r| r.d2h_lhs).collect(),
                        report.verdicts.h_concave,
                    ),
                };
                let rise = match quantity {
                    MonotoneQuantity::HConcave => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    _ => values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max),
                };
                vec![Check {
                    name: name.into(),
                    measured: rise,
                    tolerance: MONOTONE_SLACK,
                    passed: verdict == Verdict::Pass,
                    detail: format!("verdict {verdict:?} over {} samples", values.len()),
                }]
            }
            CheckSpec::GaussianBaseline { value_tolerance, rate_tolerance } => {
                let n = self.grid.dim() as f64;
                let traj = self.heat()?;
                let values = traj
                    .states
                    .iter()
                    .map(|s| Ok((s.t, w_m_closed(s, n)?)))
                    .collect::<Result<Vec<_>>>()?;
                let value = values.iter().map(|v| v.1.abs()).fold(0.0, f64::max);
                let rate = values.windows(2).map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs()).fold(0.0, f64::max);
                let (worst_t, _) = values.iter().fold((f64::NAN, -1.0), |acc, v| if v.1.abs() > acc.1 { (v.0, v.1.abs()) } else { acc });
                vec![
                    Check::at_most("gaussian.W_n", value, *value_tolerance).with_detail(format!("largest at t = {worst_t}")),
                    Check::at_most("gaussian.dW_n_dt", rate, *rate_tolerance),
                ]
            }
            CheckSpec::Harnack { tolerance } => {
                let m = self.config.m()?;
                let path = self.path()?;
                let cert = harnack_certificate(self.heat()?, &*path, m, k)?;
                let worst = cert.entries.iter().map(|e| e.max_defect).fold(f64::NEG_INFINITY, f64::max);
                vec![Check {
                    name: "harnack".into(),
                    measured: worst,
                    tolerance: *tolerance,
                    passed: cert.passed && worst <= *tolerance,
                    detail: format!("K = {k}"),
                }]
            }
            CheckSpec::LottProduct { fiber_nodes, dt, tolerance } => {
                let ScheduleSpec::Lott { q } = self.config.schedule else {
                    return Err(Error::Config("lott_product needs a Lott schedule".into()));
                };
                let options = StepOptions { safety: self.options.safety, max_dt: Some(*dt) };
                let traj = self.evolve_lott(q, &options)?;
                let last = traj.samples.last().expect("non-empty");
                let first = &traj.samples[0];
                let product = |s: &LottState| -> Result<_> {
                    Ok(build_warped(&WarpedSpec::new(s.snapshot()?, q)?.with_fiber_nodes(*fiber_nodes))?.metric().clone())
                };
                let span = last.t - first.t;
                let direct = ricci_flow(&product(first)?, span, *dt)?;
                let dev = direct.max_diff(&product(last)?);
                vec![Check::at_most("lott.product_flow", dev, *tolerance)]
            }
            CheckSpec::ConjugatePairing { terminal, samples, tolerance } => {
                let traj = self.lott()?;
                let (start, end) = traj.interval();
                let span = end - start;
                let taus: Vec<f64> = (1..=*samples).map(|i| span * i as f64 / *samples as f64).collect();
                let phi_end = terminal.field(&self.grid);
                let conj = conjugate_heat_solve(&traj, &phi_end, 0.0, &taus, &self.options)?;
                let mut times: Vec<f64> = taus.iter().rev().map(|tau| end - tau).filter(|&t| t > start).collect();
                times.push(end);
                let u0 = self.config.initial.field(&self.grid);
                let heat = evolve_heat(&*traj, &u0, &times, &self.options)?;
                let snap0 = traj.snapshot_at(start)?;
                let mass0 = snap0.integrate(&u0.without_nyquist())?;
                let phi_start = &conj.states.last().expect("non-empty").phi;
                let reference = snap0.integrate(&phi_start.mul(&u0.without_nyquist().scale(1.0 / mass0)))?;
                let mut drift: f64 = 0.0;
                let last = heat.states.last().expect("non-empty");
                drift = drift.max((last.snapshot.integrate(&phi_end.mul(&last.u))? - reference).abs());
                for (st, cs) in heat.states.iter().zip(conj.states.iter().rev().skip(1)) {
                    let pair = st.snapshot.integrate(&cs.phi.mul(&st.u))?;
                    drift = drift.max((pair - reference).abs());
                }
                vec![Check::at_most("lott.conjugate_pairing", drift, *tolerance)]
            }
            CheckSpec::Perelman { terminal, tau_start, dtau, richardson, tolerance } => {
                let traj = self.lott()?;
                let (start, end) = traj.interval();
                let h = if *richardson { 0.5 * dtau } else { *dtau };
                let count = ((end - start - tau_start) / h + 1e-9).floor() as usize;
                let taus: Vec<f64> = (0..=count).map(|i| tau_start + h * i as f64).collect();
                let bump = terminal.field(&self.grid);
                let snap = traj.snapshot_at(end - tau_start)?;
                let phi = bump.scale(1.0 / snap.integrate(&bump)?);
                let conj = conjugate_heat_solve(&traj, &phi, *tau_start, &taus, &self.options)?;
                let report = perelman_report(&conj, traj.q, *richardson)?;
                let rise = report.series.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max);
                let checks = vec![
                    Check::at_most("perelman.dissipation", report.max_relative(), *tolerance),
                    Check {
                        name: "perelman.W_q_nonincreasing".into(),
                        measured: rise,
                        tolerance: MONOTONE_SLACK,
                        passed: report.nonincreasing,
                        detail: format!("{} samples in τ", report.series.len()),
                    },
                ];
                self.perelman = Some(report);
                checks
            }
            CheckSpec::LogSobolevOracle { t, m, tolerance } => {
                let problem = LogSobolevProblem::mu(&self.snap, *t, *m)?;
                let sol = problem.solve(&self.solver_options())?;
                let oracle = problem.projected_gradient_minimum(&OracleOptions { seed: self.config.seed, ..Default::default() });
                vec![
                    Check::at_most("log_sobolev.oracle", (sol.mu - oracle).abs(), *tolerance)
                        .with_detail(format!("μ = {}, oracle {oracle}", sol.mu)),
                    Check::at_most("log_sobolev.el_defect", sol.residual, EL_TOLERANCE),
                ]
            }
            CheckSpec::LogSobolevShift { t, m, k: kk, tolerance } => {
                let opts = self.solver_options();
                let plain = LogSobolevProblem::mu(&self.snap, *t, *m)?.solve(&opts)?;
                let shifted = LogSobolevProblem::mu_k(&self.snap, *t, *m, *kk)?.solve(&opts)?;
                let expected = -m * (kk * t + 0.25 * kk * kk * t * t);
                let err = (shifted.mu - plain.mu - expected).abs();
                vec![Check::at_most("log_sobolev.k_shift", err, *tolerance)
                    .with_detail(format!("μ_K − μ = {}, expected {expected}", shifted.mu - plain.mu))]
            }
            CheckSpec::MuMonotone { times, m } => {
                let path = self.path()?;
                let series = mu_monotonicity(&*path, times, *m, k, &self.solver_options())?;
                let rise = series.samples.windows(2).map(|w| w[1].mu - w[0].mu).fold(f64::NEG_INFINITY, f64::max);
                let check = Check {
                    name: "log_sobolev.mu_nonincreasing".into(),
                    measured: rise,
                    tolerance: crate::logsobolev::MU_MONOTONE_SLACK,
                    passed: series.verdict == Verdict::Pass,
                    detail: format!("verdict {:?}", series.verdict),
                };
                self.mu = Some(series);
                vec![check]
            }
            CheckSpec::LogSobolevInequality { t, m, samples } => {
                let problem = LogSobolevProblem::mu(&self.snap, *t, *m)?;
                let sol = problem.solve(&self.solver_options())?;
                let lsi = problem.verify_lsi(sol.mu, *samples, self.config.seed)?;
                vec![Check {
                    name: "log_sobolev.inequality".into(),
                    measured: lsi.min_gap,
                    tolerance: -crate::logsobolev::LSI_SLACK,
                    passed: lsi.passed,
                    detail: "min F(v) − μ over random normalized v".into(),
                }]
            }
            CheckSpec::TimeOrder { formula, min_ratio, max_ratio } => {
                let m = self.config.m()?;
                let path = self.path()?;
                let s = &self.config.solver;
                let u0 = self.config.initial.field(&self.grid);
                let options = ReportOptions { m, k, richardson: false };
                let residuals = |h: f64| -> Result<Vec<(f64, f64)>> {
                    let n = ((s.t_end - s.t0) / h).round() as usize;
                    let times: Vec<f64> = (0..=n).map(|i| s.t0 + h * i as f64).collect();
                    let traj = evolve_heat(&*path, &u0, &times, &self.options)?;
                    let report = formula_residuals(&traj, &*path, &options)?;
                    Ok(report.rows.iter().map(|r| (r.t, r.residual(*formula).abs())).collect())
                };
                let coarse = residuals(s.dt_out)?;
                let fine = residuals(0.5 * s.dt_out)?;
                let common = |rows: &[(f64, f64)]| -> f64 {
                    rows.iter()
                        .filter(|r| coarse.iter().any(|c| (c.0 - r.0).abs() < 1e-9 * s.dt_out))
                        .map(|r| r.1)
                        .fold(0.0, f64::max)
                };
                let ratio = common(&coarse) / common(&fine);
                vec![Check {
                    name: format!("order.time.{}", formula.name()),
                    measured: ratio,
                    tolerance: *max_ratio,
                    passed: ratio >= *min_ratio && ratio <= *max_ratio,
                    detail: format!("residual ratio for halved output spacing, accepted in [{min_ratio}, {max_ratio}]"),
                }]
            }
            CheckSpec::SpatialFloor { nodes, tolerance } => {
                let s = &self.config.solver;
                let period = self.grid.periods()[0];
                let values = nodes
                    .iter()
                    .map(|&n| {
                        let grid = Grid::line(n, period)?;
                        let snap = self.config.build_snapshot(&grid)?;
                        let path = MetricSchedule::constant(&snap, s.start(), s.t_end)?;
                        let traj = evolve_heat(&path, &self.config.initial.field(&grid), &[s.t_end], &self.options)?;
                        crate::entropy::shannon_h(&traj.states[0])
                    })
                    .collect::<Result<Vec<_>>>()?;
                let gaps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
                let last = *gaps.last().expect("two node counts");
                vec![Check::at_most("order.space.entropy_floor", last, *tolerance)
                    .with_detail(format!("|H_N − H_2N| for N = {nodes:?}: {gaps:?}"))]
            }
        })
    }
}
