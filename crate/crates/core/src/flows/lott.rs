//! Coupled flow `∂ₜg = −2Ric_ψ^q`, `∂ₜψ = Δψ − |∇ψ|²` on the base of a
//! warped product; equivalent to Ricci flow of `g ⊕ e^{−2ψ/q} g_N`.

use super::heat::{SolverStats, StepOptions};
use super::interp;
use super::schedule::GeometryPath;
use crate::error::{Error, Result};
use crate::geometry::{GeometrySnapshot, Grid, ScalarField, SymTensorField};
use crate::warped_product::WarpedSpec;

#[derive(Clone, Debug)]
pub struct LottState {
    pub t: f64,
    pub metric: SymTensorField,
    pub psi: ScalarField,
}

impl LottState {
    pub fn new(t: f64, metric: SymTensorField, psi: ScalarField) -> Result<Self> {
        metric.grid().ensure_same(psi.grid(), "Lott state")?;
        // validate eagerly
        GeometrySnapshot::new(metric.clone(), psi.clone())?;
        Ok(Self { t, metric, psi })
    }

    /// Snapshot with potential `ψ`, i.e. `dμ = e^{−ψ}dv`.
    pub fn snapshot(&self) -> Result<GeometrySnapshot> {
        GeometrySnapshot::new(self.metric.clone(), self.psi.clone())
    }
}

/// `(∂ₜg, ∂ₜψ)` at a snapshot carrying `ψ` as potential.
pub fn lott_rates(snap: &GeometrySnapshot, q: f64) -> (SymTensorField, ScalarField) {
    let dpsi = snap.potential_differential();
    let hess = snap.hessian_with(snap.potential(), dpsi);
    let rg = snap.bakry_emery_q(q).scale(-2.0);
    let rpsi = snap.trace(&hess).sub(&snap.inner_forms(dpsi, dpsi));
    (rg, rpsi)
}

/// `R_q` of a snapshot carrying `ψ` as potential.
pub fn r_q(snap: &GeometrySnapshot, q: f64) -> Result<ScalarField> {
    Ok(WarpedSpec::new(snap.clone(), q)?.scalar_curvature())
}

fn singular(t: f64, err: Error, last_good: f64) -> Error {
    match err {
        Error::NotPositiveDefinite { node, eigenvalue } => Error::FlowSingularity {
            t,
            message: format!(
                "metric degenerate at node {node} (eigenvalue {eigenvalue:e}); last good state at t = {last_good}"
            ),
        },
        other => other,
    }
}

/// One RK4 step of the coupled system.
pub fn lott_flow_step(state: &LottState, q: f64, dt: f64) -> Result<LottState> {
    let t = state.t;
    let eval = |g: &SymTensorField, psi: &ScalarField, at: f64| -> Result<(SymTensorField, ScalarField)> {
        let snap = GeometrySnapshot::new(g.clone(), psi.clone()).map_err(|e| singular(at, e, t))?;
        Ok(lott_rates(&snap, q))
    };
    let (g0, p0) = (&state.metric, &state.psi);
    let (kg1, kp1) = eval(g0, p0, t)?;
    let (g1, p1) = (g0.add_scaled(0.5 * dt, &kg1), p0.add_scaled(0.5 * dt, &kp1));
    let (kg2, kp2) = eval(&g1, &p1, t + 0.5 * dt)?;
    let (g2, p2) = (g0.add_scaled(0.5 * dt, &kg2), p0.add_scaled(0.5 * dt, &kp2));
    let (kg3, kp3) = eval(&g2, &p2, t + 0.5 * dt)?;
    let (g3, p3) = (g0.add_scaled(dt, &kg3), p0.add_scaled(dt, &kp3));
    let (kg4, kp4) = eval(&g3, &p3, t + dt)?;
    let metric = g0.add_scaled(
        dt / 6.0,
        &kg1.add_scaled(2.0, &kg2).add_scaled(2.0, &kg3).add(&kg4),
    );
    let psi = p0.add_scaled(dt / 6.0, &kp1.add_scaled(2.0, &kp2).add_scaled(2.0, &kp3).add(&kp4));
    GeometrySnapshot::new(metric.clone(), psi.clone()).map_err(|e| singular(t + dt, e, t))?;
    Ok(LottState { t: t + dt, metric, psi })
}

/// Dense record of a Lott run; serves geometry at any intermediate time by
/// local cubic interpolation of the stored steps.
#[derive(Clone, Debug)]
pub struct LottTrajectory {
    pub q: f64,
    pub samples: Vec<LottState>,
    times: Vec<f64>,
    pub stats: SolverStats,
}

/// Evolves from `initial` to `end`, keeping every step; the step is uniform
/// between consecutive `checkpoints` (which are hit exactly).
pub fn evolve_lott(
    initial: &LottState,
    q: f64,
    end: f64,
    checkpoints: &[f64],
    options: &StepOptions,
) -> Result<LottTrajectory> {
    options.validate()?;
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Parameter(format!("q = {q} must be positive")));
    }
    if !(end > initial.t) {
        return Err(Error::Parameter(format!("end time {end} must exceed t₀ = {}", initial.t)));
    }
    let mut marks: Vec<f64> = checkpoints.iter().copied().filter(|&c| c > initial.t && c < end).collect();
    marks.push(end);
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let mut state = initial.clone();
    let mut samples = vec![state.clone()];
    let mut stats = SolverStats::default();
    for target in marks {
        let span = target - state.t;
        let dt_max = options.stable_dt(&state.snapshot()?);
        let steps = (span / dt_max).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let base = state.t;
        for k in 0..steps {
            state = lott_flow_step(&state, q, dt)?;
            state.t = if k + 1 == steps { target } else { base + (k + 1) as f64 * dt };
            samples.push(state.clone());
        }
        stats.record(dt, steps);
    }
    let times = samples.iter().map(|s| s.t).collect();
    Ok(LottTrajectory { q, samples, times, stats })
}

impl LottTrajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state_at(&self, t: f64) -> Result<LottState> {
        let t = self.clamp_time(t)?;
        let (s, w, _) = interp::stencil(&self.times, t);
        let window = &self.samples[s..s + w.len()];
        let grid = window[0].psi.grid();
        let psi_arrays: Vec<&[f64]> = window.iter().map(|st| st.psi.values()).collect();
        let psi = ScalarField::new(grid, interp::combine(&psi_arrays, &w))?;
        let packed = (0..window[0].metric.packed().len())
            .map(|c| {
                let arrays: Vec<&[f64]> = window.iter().map(|st| st.metric.packed()[c].as_slice()).collect();
                interp::combine(&arrays, &w)
            })
            .collect();
        let metric = SymTensorField::new(grid, packed)?;
        Ok(LottState { t, metric, psi })
    }

    /// `R_q` at `t`.
    pub fn r_q_at(&self, t: f64) -> Result<ScalarField> {
        r_q(&self.snapshot_at(t)?, self.q)
    }
}

impl GeometryPath for LottTrajectory {
    fn grid(&self) -> &Grid {
        self.samples[0].psi.grid()
    }

    fn interval(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    fn snapshot_at(&self, t: f64) -> Result<GeometrySnapshot> {
        self.state_at(t)?.snapshot()
    }

    fn metric_rate_at(&self, t: f64) -> Result<SymTensorField> {
        Ok(lott_rates(&self.snapshot_at(t)?, self.q).0)
    }
}

/// Plain Ricci flow `∂ₜg = −2Ric` of a full metric by RK4 with uniform
/// steps of at most `max_dt`.
pub fn ricci_flow(g0: &SymTensorField, end: f64, max_dt: f64) -> Result<SymTensorField> {
    if !(end >= 0.0 && max_dt > 0.0) {
        return Err(Error::Parameter(format!("need end ≥ 0 and dt > 0 (got {end}, {max_dt})")));
    }
    let zero = ScalarField::zeros(g0.grid());
    let rate = |g: &SymTensorField, t: f64| -> Result<SymTensorField> {
        let snap = GeometrySnapshot::new(g.clone(), zero.clone()).map_err(|e| singular(t, e, t))?;
        Ok(snap.ricci().scale(-2.0))
    };
    let steps = (end / max_dt).ceil() as usize;
    let dt = if steps == 0 { 0.0 } else { end / steps as f64 };
    let mut g = g0.clone();
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rate(&g, t)?;
        let k2 = rate(&g.add_scaled(0.5 * dt, &k1), t)?;
        let k3 = rate(&g.add_scaled(0.5 * dt, &k2), t)?;
        let k4 = rate(&g.add_scaled(dt, &k3), t)?;
        g = g.add_scaled(dt / 6.0, &k1.add_scaled(2.0, &k2).add_scaled(2.0, &k3).add(&k4));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn line(n: usize) -> Grid {
        Grid::line(n, 2.0 * PI).unwrap()
    }

    #[test]
    fn flat_metric_constant_psi_is_fixed_point() {
        let g = line(32);
        let s = LottState::new(0.0, SymTensorField::identity(&g), ScalarField::constant(&g, 0.3)).unwrap();
        let (rg, rp) = lott_rates(&s.snapshot().unwrap(), 1.0);
        assert!(rg.max_abs() < 1e-14 && rp.max_abs() < 1e-14);
        let next = lott_flow_step(&s, 1.0, 0.01).unwrap();
        assert!(next.metric.max_diff(&s.metric) < 1e-14);
    }

    #[test]
    fn initial_metric_rate() {
        let g = line(64);
        let eps = 0.3;
        let s = LottState::new(
            0.0,
            SymTensorField::identity(&g),
            ScalarField::from_fn(&g, |x| eps * x[0].sin()),
        )
        .unwrap();
        let (rg, rp) = lott_rates(&s.snapshot().unwrap(), 1.0);
        let exact = ScalarField::from_fn(&g, |x| -2.0 * (-eps * x[0].sin() - eps * eps * x[0].cos().powi(2)));
        assert!(rg.component_field(0, 0).max_diff(&exact) < 1e-12);
        let exact_psi = ScalarField::from_fn(&g, |x| -eps * x[0].sin() - eps * eps * x[0].cos().powi(2));
        assert!(rp.max_diff(&exact_psi) < 1e-12);
    }

    #[test]
    fn trajectory_interpolates_and_hits_checkpoints() {
        let g = line(32);
        let s = LottState::new(
            0.0,
            SymTensorField::identity(&g),
            ScalarField::from_fn(&g, |x| 0.3 * x[0].sin()),
        )
        .unwrap();
        let traj = evolve_lott(&s, 1.0, 0.2, &[0.05, 0.1], &StepOptions::default()).unwrap();
        assert!(traj.times().contains(&0.05) && traj.times().contains(&0.1));
        assert_eq!(traj.interval(), (0.0, 0.2));
        let k = traj.times().iter().position(|&t| t == 0.1).unwrap();
        let at = traj.state_at(0.1).unwrap();
        assert!(at.psi.max_diff(&traj.samples[k].psi) < 1e-15);
        // a fresh run to the midpoint of two samples agrees with interpolation
        let mid = 0.5 * (traj.times()[3] + traj.times()[4]);
        let direct = evolve_lott(&s, 1.0, mid, &[], &StepOptions { safety: 0.2, max_dt: Some(1e-4) }).unwrap();
        let last = direct.samples.last().unwrap();
        assert!(traj.state_at(mid).unwrap().psi.max_diff(&last.psi) < 1e-8);
        assert!(traj.snapshot_at(0.3).is_err());
    }

    #[test]
    fn degenerate_metric_is_flow_singularity() {
        let g = line(16);
        let s = LottState {
            t: 0.0,
            metric: SymTensorField::conformal(&ScalarField::constant(&g, 1e-3)),
            psi: ScalarField::from_fn(&g, |x| 3.0 * x[0].sin()),
        };
        let err = lott_flow_step(&s, 1.0, 10.0).unwrap_err();
        assert!(matches!(err, Error::FlowSingularity { .. }), "{err}");
    }
}
