//! JSON experiment description. Analytic fields are truncated Fourier series
//! in the angles `θₐ = 2πxₐ/Pₐ`.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::entropy::Formula;
use crate::error::{Error, Result};
use crate::flows::{GeometryPath, LottState, MetricSchedule, Scale};
use crate::geometry::{GeometrySnapshot, Grid, ScalarField, SymTensorField, MAX_DIM, MIN_NODES};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    /// Integer wave vector, one entry per axis.
    pub k: Vec<i32>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `c + Σ [aₖ cos(k·θ) + bₖ sin(k·θ)]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierSeries {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub terms: Vec<FourierTerm>,
}

impl FourierSeries {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    /// `c + a cos(kθ) + b sin(kθ)` on a line.
    pub fn mode(c: f64, k: i32, cos: f64, sin: f64) -> Self {
        Self { constant: c, terms: vec![FourierTerm { k: vec![k], cos, sin }] }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.cos == 0.0 && t.sin == 0.0 || t.k.iter().all(|&k| k == 0))
    }

    pub fn field(&self, grid: &Grid) -> ScalarField {
        let periods = grid.periods();
        ScalarField::from_fn(grid, |x| {
            let mut v = self.constant;
            for term in &self.terms {
                let phase: f64 =
                    term.k.iter().zip(&periods).enumerate().map(|(a, (&k, p))| k as f64 * 2.0 * PI * x[a] / p).sum();
                v += term.cos * phase.cos() + term.sin * phase.sin();
            }
            v
        })
    }

    fn diagnose(&self, what: &str, dim: usize, out: &mut Vec<String>) {
        if !self.constant.is_finite() {
            out.push(format!("{what}: constant must be finite"));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if t.k.len() != dim {
                out.push(format!("{what}: term {i} has a wave vector of length {}, grid dimension is {dim}", t.k.len()));
            }
            if !(t.cos.is_finite() && t.sin.is_finite()) {
                out.push(format!("{what}: term {i} has non-finite coefficients"));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nodes: Vec<usize>,
    pub periods: Vec<f64>,
}

impl GridSpec {
    pub fn line(n: usize, period: f64) -> Self {
        Self { nodes: vec![n], periods: vec![period] }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    #[default]
    Flat,
    /// `e^{2a}·flat`.
    Conformal { a: FourierSeries },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// The invariant density.
    #[default]
    Uniform,
    /// `exp(series)`.
    Exp { exponent: FourierSeries },
    /// Positive Fourier series taken as is.
    Series { field: FourierSeries },
    /// Flat periodic heat kernel of age `t` centred at `center`.
    HeatKernel { center: Vec<f64>, t: f64 },
}

impl InitialData {
    pub fn field(&self, grid: &Grid) -> ScalarField {
        match self {
            InitialData::Uniform => ScalarField::constant(grid, 1.0),
            InitialData::Exp { exponent } => exponent.field(grid).map(f64::exp),
            InitialData::Series { field } => field.field(grid),
            InitialData::HeatKernel { center, t } => {
                let periods = grid.periods();
                ScalarField::from_fn(grid, |x| {
                    (0..grid.dim())
                        .map(|a| {
                            let l = periods[a];
                            let images = (2.0 + (40.0 * t).sqrt() / l).ceil() as i32;
                            (-images..=images)
                                .map(|j| {
                                    let d = x[a] - center[a] - j as f64 * l;
                                    (-d * d / (4.0 * t)).exp()
                                })
                                .sum::<f64>()
                                / (4.0 * PI * t).sqrt()
                        })
                        .product()
                })
            }
        }
    }

    fn diagnose(&self, dim: usize, out: &mut Vec<String>) {
        match self {
            InitialData::Uniform => {}
            InitialData::Exp { exponent } => exponent.diagnose("initial exponent", dim, out),
            InitialData::Series { field } => field.diagnose("initial field", dim, out),
            InitialData::HeatKernel { center, t } => {
                if center.len() != dim {
                    out.push(format!("heat kernel centre has {} coordinates, grid dimension is {dim}", center.len()));
                }
                if !(t.is_finite() && *t > 0.0) {
                    out.push(format!("heat kernel age t = {t} must be positive"));
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleSpec {
    Polynomial { coefficients: Vec<f64> },
    Exponential { rate: f64 },
}

impl ScaleSpec {
    fn scale(&self) -> Scale {
        match self {
            ScaleSpec::Polynomial { coefficients } => Scale::Polynomial(coefficients.clone()),
            ScaleSpec::Exponential { rate } => Scale::Exponential(*rate),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    #[default]
    Static,
    /// `g(t) = s(t)·g₀` with the conjugate potential.
    Scaled { scale: ScaleSpec },
    /// Lott flow from `(g₀, ψ₀ = potential)`.
    Lott { q: f64 },
    /// `g(tᵢ) = e^{2aᵢ}·flat`, interpolated, with the conjugate potential.
    Tabulated { times: Vec<f64>, conformal: Vec<FourierSeries> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    /// Time at which the initial data is posed; defaults to `t0`.
    #[serde(default)]
    pub start: Option<f64>,
    /// First output time.
    pub t0: f64,
    pub t_end: f64,
    pub dt_out: f64,
    /// With Richardson extrapolation the trajectory is sampled at
    /// `dt_out/2`, so the coarse spacing of the extrapolation is `dt_out`.
    #[serde(default)]
    pub richardson: bool,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default)]
    pub max_dt: Option<f64>,
}

fn default_safety() -> f64 {
    crate::flows::DEFAULT_SAFETY
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { start: None, t0: 0.1, t_end: 1.0, dt_out: 0.1, richardson: false, safety: default_safety(), max_dt: None }
    }
}

impl SolverSpec {
    pub fn start(&self) -> f64 {
        self.start.unwrap_or(self.t0)
    }

    pub fn sample_spacing(&self) -> f64 {
        if self.richardson {
            0.5 * self.dt_out
        } else {
            self.dt_out
        }
    }

    /// Uniform output times from `t0` to `t_end`.
    pub fn output_times(&self) -> Vec<f64> {
        let h = self.sample_spacing();
        let n = ((self.t_end - self.t0) / h).round() as usize;
        (0..=n).map(|k| self.t0 + h * k as f64).collect()
    }
}

/// `K`: a number, or `"auto"` for `‖(Ric_{m,n}(L))₋‖∞` at the initial
/// geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    Value(f64),
    Named(String),
}

impl Default for KSpec {
    fn default() -> Self {
        KSpec::Value(0.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub k: KSpec,
    #[serde(default)]
    pub q: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneQuantity {
    Wm,
    WmK,
    HConcave,
}

/// One selected verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    /// Closed-form warped-product blocks against the assembled product.
    WarpedIdentities {
        q: f64,
        fiber_nodes: usize,
        /// Time in the Hessian-norm decomposition.
        t: f64,
        christoffel_tolerance: f64,
        laplacian_tolerance: f64,
        decomposition_tolerance: f64,
        ricci_tolerance: f64,
    },
    /// Largest relative residual of a dissipation formula, or the largest
    /// absolute residual with `absolute` (for vanishing right-hand sides).
    Formula {
        formula: Formula,
        tolerance: f64,
        #[serde(default)]
        absolute: bool,
    },
    /// `|dW_m/dt + m/2t|` for the invariant density at each output time.
    StationarySelfTest { tolerance: f64 },
    /// `½∂ₜg + Ric_{m,n}(L) + Kg ≥ −slack` at every output time.
    SuperFlow { slack: f64 },
    Monotone { quantity: MonotoneQuantity },
    /// `|W_n|` and `|ΔW_n/Δt|` with `m = n`.
    GaussianBaseline { value_tolerance: f64, rate_tolerance: f64 },
    Harnack { tolerance: f64 },
    /// Lott flow against plain Ricci flow of the assembled product.
    LottProduct { fiber_nodes: usize, dt: f64, tolerance: f64 },
    /// Drift of `∫φu dμ` between forward heat and backward conjugate heat.
    ConjugatePairing { terminal: InitialData, samples: usize, tolerance: f64 },
    /// Perelman entropy of the conjugate solution: dissipation residual and
    /// monotonicity in `τ`.
    Perelman { terminal: InitialData, tau_start: f64, dtau: f64, richardson: bool, tolerance: f64 },
    /// Euler-Lagrange solver against the projected-gradient oracle.
    LogSobolevOracle { t: f64, m: f64, tolerance: f64 },
    /// `μ_K − μ = −m(Kt + K²t²/4)`.
    LogSobolevShift { t: f64, m: f64, k: f64, tolerance: f64 },
    /// `μ(t)` non-increasing along the schedule.
    MuMonotone { times: Vec<f64>, m: f64 },
    /// Log-Sobolev inequality for random test functions.
    LogSobolevInequality { t: f64, m: f64, samples: usize },
    /// Ratio of formula residuals for output spacings `h` and `h/2`
    /// (plain central differences).
    TimeOrder { formula: Formula, min_ratio: f64, max_ratio: f64 },
    /// `|H_N − H_{2N}|` at `t_end` for the listed node counts (last pair
    /// against the tolerance).
    SpatialFloor { nodes: Vec<usize>, tolerance: f64 },
}

impl CheckSpec {
    pub fn uses_heat_flow(&self) -> bool {
        matches!(
            self,
            CheckSpec::Formula { .. }
                | CheckSpec::Monotone { .. }
                | CheckSpec::GaussianBaseline { .. }
                | CheckSpec::Harnack { .. }
        )
    }

    /// Needs `m > n`.
    fn needs_strict_m(&self) -> bool {
        matches!(self, CheckSpec::Formula { .. } | CheckSpec::StationarySelfTest { .. } | CheckSpec::Monotone { .. })
    }

    fn tolerances(&self) -> Vec<(&'static str, f64)> {
        match self {
            CheckSpec::WarpedIdentities {
                christoffel_tolerance,
                laplacian_tolerance,
                decomposition_tolerance,
                ricci_tolerance,
                t,
                ..
            } => vec![
                ("christoffel_tolerance", *christoffel_tolerance),
                ("laplacian_tolerance", *laplacian_tolerance),
                ("decomposition_tolerance", *decomposition_tolerance),
                ("ricci_tolerance", *ricci_tolerance),
                ("t", *t),
            ],
            CheckSpec::Formula { tolerance, .. }
            | CheckSpec::StationarySelfTest { tolerance }
            | CheckSpec::Harnack { tolerance }
            | CheckSpec::LottProduct { tolerance, .. }
            | CheckSpec::ConjugatePairing { tolerance, .. }
            | CheckSpec::Perelman { tolerance, .. }
            | CheckSpec::LogSobolevOracle { tolerance, .. }
            | CheckSpec::LogSobolevShift { tolerance, .. }
            | CheckSpec::SpatialFloor { tolerance, .. } => vec![("tolerance", *tolerance)],
            CheckSpec::SuperFlow { slack } => vec![("slack", *slack)],
            CheckSpec::GaussianBaseline { value_tolerance, rate_tolerance } => {
                vec![("value_tolerance", *value_tolerance), ("rate_tolerance", *rate_tolerance)]
            }
            CheckSpec::TimeOrder { min_ratio, max_ratio, .. } => {
                vec![("min_ratio", *min_ratio), ("max_ratio", *max_ratio)]
            }
            CheckSpec::Monotone { .. }
            | CheckSpec::MuMonotone { .. }
            | CheckSpec::LogSobolevInequality { .. } => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub grid: GridSpec,
    #[serde(default)]
    pub metric: MetricSpec,
    #[serde(default)]
    pub potential: FourierSeries,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub parameters: Parameters,
    pub checks: Vec<CheckSpec>,
    /// Output directory; otherwise `<root>/<name>`.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(&self.grid.nodes, &self.grid.periods)
    }

    pub fn build_snapshot(&self, grid: &Grid) -> Result<GeometrySnapshot> {
        let metric = match &self.metric {
            MetricSpec::Flat => SymTensorField::identity(grid),
            MetricSpec::Conformal { a } => SymTensorField::conformal(&a.field(grid).map(|v| (2.0 * v).exp())),
        };
        GeometrySnapshot::new(metric, self.potential.field(grid))
    }

    /// Geometry path on `[start, t_end]`; the Lott case evolves the flow.
    pub fn build_path(&self, snap: &GeometrySnapshot, options: &crate::flows::StepOptions) -> Result<Arc<dyn GeometryPath>> {
        let (start, end) = (self.solver.start(), self.solver.t_end);
        Ok(match &self.schedule {
            ScheduleSpec::Static => Arc::new(MetricSchedule::constant(snap, start, end)?),
            ScheduleSpec::Scaled { scale } => Arc::new(MetricSchedule::scaled(
                snap.metric().clone(),
                scale.scale(),
                snap.potential().clone(),
                start,
                end,
            )?),
            ScheduleSpec::Lott { q } => {
                let init = LottState::new(start, snap.metric().clone(), snap.potential().clone())?;
                let marks = self.solver.output_times();
                Arc::new(crate::flows::evolve_lott(&init, *q, end, &marks, options)?)
            }
            ScheduleSpec::Tabulated { times, conformal } => {
                let grid = snap.grid();
                let metrics = conformal
                    .iter()
                    .map(|a| SymTensorField::conformal(&a.field(grid).map(|v| (2.0 * v).exp())))
                    .collect();
                Arc::new(MetricSchedule::tabulated(times.clone(), metrics, snap.potential().clone())?)
            }
        })
    }

    /// `m`, required by most checks.
    pub fn m(&self) -> Result<f64> {
        self.parameters.m.ok_or_else(|| Error::Config("parameters.m is required by the selected checks".into()))
    }

    /// Full static check; an empty list means the config can run.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            out.push("name must be non-empty and contain no path separators".into());
        }
        let dim = self.grid.nodes.len();
        if dim == 0 || dim > MAX_DIM {
            out.push(format!("grid dimension {dim} must be between 1 and {MAX_DIM}"));
        }
        if self.grid.periods.len() != dim {
            out.push("grid.nodes and grid.periods differ in length".into());
        }
        if self.grid.nodes.iter().any(|&n| n < MIN_NODES) {
            out.push(format!("every axis needs at least {MIN_NODES} nodes"));
        }
        if self.grid.periods.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            out.push("grid periods must be positive".into());
        }
        if let MetricSpec::Conformal { a } = &self.metric {
            a.diagnose("metric exponent", dim, &mut out);
        }
        self.potential.diagnose("potential", dim, &mut out);
        self.initial.diagnose(dim, &mut out);

        let s = &self.solver;
        if !(s.t0.is_finite() && s.t0 > 0.0) {
            out.push(format!("solver.t0 = {} must be positive", s.t0));
        }
        if !(s.t_end > s.t0) {
            out.push(format!("solver.t_end = {} must exceed t0 = {}", s.t_end, s.t0));
        }
        if !(s.dt_out.is_finite() && s.dt_out > 0.0) {
            out.push("solver.dt_out must be positive".into());
        } else if s.t_end > s.t0 {
            let steps = (s.t_end - s.t0) / s.sample_spacing();
            if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
                out.push("solver.t_end − t0 must be a whole number of output spacings".into());
            }
        }
        if let Some(start) = s.start {
            if !(start.is_finite() && start >= 0.0 && start <= s.t0) {
                out.push(format!("solver.start = {start} must lie in [0, t0]"));
            }
        }
        if !(s.safety.is_finite() && s.safety > 0.0) {
            out.push("solver.safety must be positive".into());
        }
        if let Some(dt) = s.max_dt {
            if !(dt.is_finite() && dt > 0.0) {
                out.push("solver.max_dt must be positive".into());
            }
        }

        match &self.schedule {
            ScheduleSpec::Static => {}
            ScheduleSpec::Scaled { scale } => match scale {
                ScaleSpec::Polynomial { coefficients } if coefficients.is_empty() => {
                    out.push("polynomial scale needs coefficients".into())
                }
                ScaleSpec::Exponential { rate } if !rate.is_finite() => out.push("exponential rate must be finite".into()),
                _ => {}
            },
            ScheduleSpec::Lott { q } => {
                if !(q.is_finite() && *q > 0.0) {
                    out.push(format!("Lott fiber dimension q = {q} must be positive"));
                }
            }
            ScheduleSpec::Tabulated { times, conformal } => {
                if times.len() != conformal.len() || times.len() < 2 {
                    out.push("tabulated schedule needs matching times and fields (at least 2)".into());
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    out.push("tabulated times must increase".into());
                }
                if let (Some(first), Some(last)) = (times.first(), times.last()) {
                    if *first > s.start() || *last < s.t_end {
                        out.push("tabulated times must cover [start, t_end]".into());
                    }
                }
                for a in conformal {
                    a.diagnose("tabulated exponent", dim, &mut out);
                }
            }
        }

        let n = dim as f64;
        match self.parameters.m {
            Some(m) if !(m.is_finite() && m >= n) => out.push(format!("m = {m} must be at least n = {dim}")),
            None if self.checks.iter().any(|c| c.needs_strict_m() || matches!(c, CheckSpec::Harnack { .. })) => {
                out.push("parameters.m is required by the selected checks".into())
            }
            _ => {}
        }
        if let Some(m) = self.parameters.m {
            if m <= n && self.checks.iter().any(CheckSpec::needs_strict_m) {
                out.push(format!("the selected m-formulas need m > n, got m = {m}, n = {dim}"));
            }
        }
        match &self.parameters.k {
            KSpec::Value(k) if !(k.is_finite() && *k >= 0.0) => out.push(format!("K = {k} must be non-negative")),
            KSpec::Named(name) if name != "auto" => out.push(format!("K must be a number or \"auto\", got {name:?}")),
            _ => {}
        }
        if let Some(q) = self.parameters.q {
            if !(q.is_finite() && q > 0.0) {
                out.push(format!("q = {q} must be positive"));
            }
        }

        if self.checks.is_empty() {
            out.push("select at least one check".into());
        }
        for (i, c) in self.checks.iter().enumerate() {
            for (what, v) in c.tolerances() {
                if !(v.is_finite() && v > 0.0) {
                    out.push(format!("check {i}: {what} must be positive"));
                }
            }
            match c {
                CheckSpec::WarpedIdentities { q, fiber_nodes, .. } => {
                    if !(q.is_finite() && *q > 0.0) || q.fract() != 0.0 || n + q > MAX_DIM as f64 {
                        out.push(format!("check {i}: q must be a positive integer with n + q ≤ {MAX_DIM}"));
                    }
                    if *fiber_nodes < MIN_NODES {
                        out.push(format!("check {i}: fiber_nodes must be at least {MIN_NODES}"));
                    }
                }
                CheckSpec::TimeOrder { min_ratio, max_ratio, .. } if min_ratio >= max_ratio => {
                    out.push(format!("check {i}: min_ratio must be below max_ratio"));
                }
                CheckSpec::LottProduct { fiber_nodes, dt, .. } => {
                    if !matches!(self.schedule, ScheduleSpec::Lott { q } if q.fract() == 0.0 && n + q <= MAX_DIM as f64) {
                        out.push(format!("check {i}: needs a Lott schedule with integer q and n + q ≤ {MAX_DIM}"));
                    }
                    if *fiber_nodes < MIN_NODES || !(dt.is_finite() && *dt > 0.0) {
                        out.push(format!("check {i}: fiber_nodes ≥ {MIN_NODES} and dt > 0 required"));
                    }
                }
                CheckSpec::ConjugatePairing { terminal, samples, .. } => {
                    terminal.diagnose(dim, &mut out);
                    if !matches!(self.schedule, ScheduleSpec::Lott { .. }) || *samples == 0 {
                        out.push(format!("check {i}: needs a Lott schedule and at least one sample"));
                    }
                }
                CheckSpec::Perelman { terminal, tau_start, dtau, .. } => {
                    terminal.diagnose(dim, &mut out);
                    if !matches!(self.schedule, ScheduleSpec::Lott { .. }) {
                        out.push(format!("check {i}: needs a Lott schedule"));
                    }
                    if !(*tau_start >= 0.0 && *dtau > 0.0 && tau_start + 4.0 * dtau <= s.t_end - s.start()) {
                        out.push(format!("check {i}: τ range must fit in the flow interval with room for 5 samples"));
                    }
                }
                CheckSpec::LogSobolevOracle { t, m, .. }
                | CheckSpec::LogSobolevShift { t, m, .. }
                | CheckSpec::LogSobolevInequality { t, m, .. } => {
                    if !(t.is_finite() && *t > 0.0) {
                        out.push(format!("check {i}: t must be positive"));
                    }
                    if !(m.is_finite() && *m >= n) {
                        out.push(format!("check {i}: m = {m} must be at least n = {dim}"));
                    }
                    if let CheckSpec::LogSobolevShift { k, .. } = c {
                        if !(k.is_finite() && *k >= 0.0) {
                            out.push(format!("check {i}: K = {k} must be non-negative"));
                        }
                    }
                }
                CheckSpec::MuMonotone { times, m } => {
                    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
                        out.push(format!("check {i}: times must be non-empty and increasing"));
                    }
                    if times.iter().any(|&t| t < s.start() || t > s.t_end) {
                        out.push(format!("check {i}: times must lie in [start, t_end]"));
                    }
                    if !(m.is_finite() && *m >= n) {
                        out.push(format!("check {i}: m = {m} must be at least n = {dim}"));
                    }
                }
                CheckSpec::SpatialFloor { nodes, .. } => {
                    if nodes.len() < 2 || nodes.iter().any(|&k| k < MIN_NODES) || dim != 1 {
                        out.push(format!("check {i}: needs a line grid and at least two node counts ≥ {MIN_NODES}"));
                    }
                }
                CheckSpec::GaussianBaseline { .. } if !self.potential.is_constant() => {
                    out.push(format!("check {i}: the Gaussian baseline needs a constant potential"));
                }
                _ => {}
            }
        }
        out
    }
}
