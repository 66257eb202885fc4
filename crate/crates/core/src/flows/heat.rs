//! `∂ₜu = L_{g(t),f(t)} u` by classical RK4.

use serde::{Deserialize, Serialize};

use super::schedule::GeometryPath;
use crate::error::{Error, Result};
use crate::geometry::{linalg, GeometrySnapshot, ScalarField};

/// Values below `−NEGATIVITY_SLACK·max|u|` are significant negativity;
/// smaller ones are rounding noise where `u` underflows.
pub const NEGATIVITY_SLACK: f64 = 1e-10;

pub const DEFAULT_SAFETY: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOptions {
    /// `dt ≤ safety·h²_min / max λ_max(g⁻¹)`.
    pub safety: f64,
    /// Optional additional cap on the step.
    pub max_dt: Option<f64>,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { safety: DEFAULT_SAFETY, max_dt: None }
    }
}

impl StepOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.safety.is_finite() && self.safety > 0.0) {
            return Err(Error::Parameter(format!("safety factor {} must be positive", self.safety)));
        }
        if let Some(dt) = self.max_dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Parameter(format!("max_dt {dt} must be positive")));
            }
        }
        Ok(())
    }

    /// Stable explicit step for the metric of `snap`.
    pub fn stable_dt(&self, snap: &GeometrySnapshot) -> f64 {
        let n = snap.dim();
        let inv = snap.inverse_metric();
        let lambda = (0..snap.grid().len())
            .map(|node| *linalg::sym_eigenvalues(&inv.matrix_at(node), n).last().unwrap())
            .fold(0.0f64, f64::max);
        let h = snap.grid().min_spacing();
        let dt = self.safety * h * h / lambda;
        self.max_dt.map_or(dt, |cap| dt.min(cap))
    }
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub t: f64,
    pub snapshot: GeometrySnapshot,
    pub u: ScalarField,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl SolverStats {
    pub(crate) fn record(&mut self, dt: f64, steps: usize) {
        if self.steps == 0 {
            self.dt_min = dt;
            self.dt_max = dt;
        } else {
            self.dt_min = self.dt_min.min(dt);
            self.dt_max = self.dt_max.max(dt);
        }
        self.steps += steps;
    }
}

#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub states: Vec<FlowState>,
    pub stats: SolverStats,
}

impl FlowTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

/// Initial data must be non-negative up to rounding and not identically zero.
pub(crate) fn check_initial_sign(u: &ScalarField, t: f64) -> Result<()> {
    let scale = u.max_abs();
    let min = u.min();
    if !u.is_finite() || scale == 0.0 || min < -NEGATIVITY_SLACK * scale {
        return Err(Error::InvalidInput(format!(
            "initial data at t = {t} is not positive (min {min:e}, max |u| {scale:e})"
        )));
    }
    Ok(())
}

/// Positivity guard after a step. Significant negative values are tolerated
/// only while they shrink, as the comparison principle demands; growing
/// negativity signals instability.
pub(crate) fn check_sign(previous_min: f64, u: &ScalarField, t: f64) -> Result<()> {
    let scale = u.max_abs();
    let min = u.min();
    let bad = !u.is_finite() || scale == 0.0 || (min < -NEGATIVITY_SLACK * scale && min < previous_min);
    if bad {
        return Err(Error::Stability {
            t,
            message: format!("solution lost positivity (min {min:e}, max |u| {scale:e})"),
        });
    }
    Ok(())
}

/// One RK4 step from `state`, refreshing the geometry at `t`, `t + dt/2`,
/// `t + dt`.
pub fn heat_step(path: &dyn GeometryPath, state: &FlowState, dt: f64) -> Result<FlowState> {
    let t = state.t;
    let mid = path.snapshot_at(t + 0.5 * dt)?;
    let end = path.snapshot_at(t + dt)?;
    let u = rk4(&state.snapshot, &mid, &end, &state.u, dt);
    check_sign(state.u.min(), &u, t + dt)?;
    Ok(FlowState { t: t + dt, snapshot: end, u })
}

pub(crate) fn rk4(
    start: &GeometrySnapshot,
    mid: &GeometrySnapshot,
    end: &GeometrySnapshot,
    u: &ScalarField,
    dt: f64,
) -> ScalarField {
    let k1 = start.witten_laplacian_unchecked(u);
    let k2 = mid.witten_laplacian_unchecked(&u.add_scaled(0.5 * dt, &k1));
    let k3 = mid.witten_laplacian_unchecked(&u.add_scaled(0.5 * dt, &k2));
    let k4 = end.witten_laplacian_unchecked(&u.add_scaled(dt, &k3));
    let incr = k1.add_scaled(2.0, &k2).add_scaled(2.0, &k3).add(&k4);
    u.add_scaled(dt / 6.0, &incr)
}

pub(crate) fn check_output_times(times: &[f64], start: f64) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("no output times requested".into()));
    }
    if times[0] < start || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!(
            "output times must increase strictly from t₀ = {start}"
        )));
    }
    Ok(())
}

/// Evolves `u₀` from the start of the path and records the state at each
/// output time.
///
/// On entry `u₀` is projected onto the Fourier modes the spectral operator
/// resolves (the Nyquist mode is invisible to it and would never decay) and
/// normalized to `∫u₀ dμ = 1`.
pub fn evolve_heat(
    path: &dyn GeometryPath,
    u0: &ScalarField,
    output_times: &[f64],
    options: &StepOptions,
) -> Result<FlowTrajectory> {
    options.validate()?;
    let (t0, _) = path.interval();
    check_output_times(output_times, t0)?;
    let snap0 = path.snapshot_at(t0)?;
    check_initial_sign(u0, t0)?;
    let u0 = u0.without_nyquist();
    let mass = snap0.integrate(&u0)?;
    if !(mass > 0.0) {
        return Err(Error::InvalidInput(format!("initial mass {mass} is not positive")));
    }
    let mut state = FlowState { t: t0, snapshot: snap0, u: u0.scale(1.0 / mass) };
    let mut states = Vec::with_capacity(output_times.len());
    let mut stats = SolverStats::default();
    for &target in output_times {
        let target = path.clamp_time(target)?;
        let span = target - state.t;
        if span > 0.0 {
            let dt_max = options.stable_dt(&state.snapshot);
            let steps = (span / dt_max).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            let base = state.t;
            for k in 0..steps {
                let mut next = heat_step(path, &state, dt)?;
                // avoid drift of the clock over many steps
                next.t = if k + 1 == steps { target } else { base + (k + 1) as f64 * dt };
                state = next;
            }
            stats.record(dt, steps);
        }
        states.push(state.clone());
    }
    Ok(FlowTrajectory { states, stats })
}
