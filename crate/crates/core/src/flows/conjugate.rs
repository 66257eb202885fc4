//! Backward equation `∂ₜφ = −Lφ + R_qφ` along a Lott trajectory, integrated
//! forward in `τ = T − t`.

use std::f64::consts::PI;

use super::heat::{check_initial_sign, check_output_times, check_sign, SolverStats, StepOptions};
use super::lott::{r_q, LottTrajectory};
use super::schedule::GeometryPath;
use crate::error::{Error, Result};
use crate::geometry::{GeometrySnapshot, ScalarField};

#[derive(Clone, Debug)]
pub struct ConjugateState {
    pub tau: f64,
    pub t: f64,
    pub snapshot: GeometrySnapshot,
    pub r_q: ScalarField,
    pub phi: ScalarField,
}

#[derive(Clone, Debug)]
pub struct ConjugateTrajectory {
    /// `T`, the end of the underlying Lott run.
    pub terminal: f64,
    pub states: Vec<ConjugateState>,
    pub stats: SolverStats,
}

fn rhs(snap: &GeometrySnapshot, rq: &ScalarField, phi: &ScalarField) -> ScalarField {
    snap.witten_laplacian_unchecked(phi).sub(&rq.mul(phi))
}

/// Solves from `phi_start` at `τ = tau_start` (`τ = 0` is the end of the
/// trajectory) and records `φ` at each output `τ`.
pub fn conjugate_heat_solve(
    traj: &LottTrajectory,
    phi_start: &ScalarField,
    tau_start: f64,
    output_taus: &[f64],
    options: &StepOptions,
) -> Result<ConjugateTrajectory> {
    options.validate()?;
    let (t0, terminal) = traj.interval();
    if !(tau_start >= 0.0 && tau_start < terminal - t0) {
        return Err(Error::Parameter(format!(
            "τ₀ = {tau_start} outside [0, {})",
            terminal - t0
        )));
    }
    check_output_times(output_taus, tau_start)?;
    let q = traj.q;
    let geometry = |tau: f64| -> Result<(GeometrySnapshot, ScalarField)> {
        let snap = traj.snapshot_at(terminal - tau)?;
        let rq = r_q(&snap, q)?;
        Ok((snap, rq))
    };
    check_initial_sign(phi_start, terminal - tau_start)?;
    let (snap, rq) = geometry(tau_start)?;
    let mut state = ConjugateState {
        tau: tau_start,
        t: terminal - tau_start,
        snapshot: snap,
        r_q: rq,
        phi: phi_start.clone(),
    };
    let mut states = Vec::with_capacity(output_taus.len());
    let mut stats = SolverStats::default();
    for &target in output_taus {
        let span = target - state.tau;
        if span > 0.0 {
            let dt_max = options.stable_dt(&state.snapshot);
            let steps = (span / dt_max).ceil().max(1.0) as usize;
            let dtau = span / steps as f64;
            let base = state.tau;
            for k in 0..steps {
                let tau = state.tau;
                let (ms, mr) = geometry(tau + 0.5 * dtau)?;
                let next_tau = if k + 1 == steps { target } else { base + (k + 1) as f64 * dtau };
                let (es, er) = geometry(next_tau)?;
                let phi = &state.phi;
                let k1 = rhs(&state.snapshot, &state.r_q, phi);
                let k2 = rhs(&ms, &mr, &phi.add_scaled(0.5 * dtau, &k1));
                let k3 = rhs(&ms, &mr, &phi.add_scaled(0.5 * dtau, &k2));
                let k4 = rhs(&es, &er, &phi.add_scaled(dtau, &k3));
                let phi = phi.add_scaled(dtau / 6.0, &k1.add_scaled(2.0, &k2).add_scaled(2.0, &k3).add(&k4));
                check_sign(state.phi.min(), &phi, terminal - next_tau)?;
                state = ConjugateState { tau: next_tau, t: terminal - next_tau, snapshot: es, r_q: er, phi };
            }
            stats.record(dtau, steps);
        }
        states.push(state.clone());
    }
    Ok(ConjugateTrajectory { terminal, states, stats })
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Parameter(format!("τ = {tau} must be positive")));
    }
    Ok(())
}

/// `η = −log φ − ((n+q)/2) log 4πτ`, i.e. `φ = (4πτ)^{−(n+q)/2} e^{−η}`.
pub fn eta_from_phi(phi: &ScalarField, tau: f64, n: usize, q: f64) -> Result<ScalarField> {
    check_tau(tau)?;
    if let Some(node) = phi.values().iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Conditioning(format!(
            "φ = {} at node {node} is not positive",
            phi.values()[node]
        )));
    }
    let shift = 0.5 * (n as f64 + q) * (4.0 * PI * tau).ln();
    Ok(phi.map(|p| -p.ln() - shift))
}

/// Inverse of [`eta_from_phi`].
pub fn phi_from_eta(eta: &ScalarField, tau: f64, n: usize, q: f64) -> Result<ScalarField> {
    check_tau(tau)?;
    let shift = 0.5 * (n as f64 + q) * (4.0 * PI * tau).ln();
    Ok(eta.map(|e| (-e - shift).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::lott::{evolve_lott, LottState};
    use crate::geometry::{Grid, SymTensorField};

    fn static_flat(n: usize, period: f64, end: f64) -> LottTrajectory {
        let g = Grid::line(n, period).unwrap();
        let s = LottState::new(0.0, SymTensorField::identity(&g), ScalarField::zeros(&g)).unwrap();
        evolve_lott(&s, 1.0, end, &[], &StepOptions::default()).unwrap()
    }

    #[test]
    fn constant_terminal_data_stays_constant() {
        let traj = static_flat(32, 2.0 * PI, 0.5);
        let g = traj.grid().clone();
        let out = conjugate_heat_solve(&traj, &ScalarField::constant(&g, 2.0), 0.0, &[0.1, 0.4], &StepOptions::default())
            .unwrap();
        for s in &out.states {
            assert!(s.phi.max_diff(&ScalarField::constant(&g, 2.0)) < 1e-13);
        }
    }

    #[test]
    fn fourier_mode_decays_in_tau() {
        let traj = static_flat(32, 2.0 * PI, 1.0);
        let g = traj.grid().clone();
        let phi = ScalarField::from_fn(&g, |x| 1.0 + 0.5 * (2.0 * x[0]).cos());
        let opts = StepOptions { max_dt: Some(2e-3), ..StepOptions::default() };
        let out = conjugate_heat_solve(&traj, &phi, 0.0, &[0.3, 0.8], &opts).unwrap();
        for s in &out.states {
            let tau = s.tau;
            let exact = ScalarField::from_fn(&g, |x| 1.0 + 0.5 * (-4.0 * tau).exp() * (2.0 * x[0]).cos());
            assert!(s.phi.max_diff(&exact) < 1e-9, "{} {}", s.tau, s.phi.max_diff(&exact));
            assert!((s.t - (1.0 - tau)).abs() < 1e-15);
        }
    }

    #[test]
    fn eta_round_trip() {
        let g = Grid::line(16, 1.0).unwrap();
        let tau = 0.07;
        let c = (4.0 * PI * tau).powf(-1.0);
        let eta = eta_from_phi(&ScalarField::constant(&g, c), tau, 1, 1.0).unwrap();
        assert!(eta.max_abs() < 1e-14);
        let phi = ScalarField::from_fn(&g, |x| 0.3 + (6.0 * x[0]).sin().powi(2));
        let back = phi_from_eta(&eta_from_phi(&phi, tau, 1, 1.0).unwrap(), tau, 1, 1.0).unwrap();
        for (a, b) in back.values().iter().zip(phi.values()) {
            assert!(((a - b) / b).abs() <= 1e-14);
        }
        assert!(eta_from_phi(&phi.scale(-1.0), tau, 1, 1.0).is_err());
        assert!(eta_from_phi(&phi, 0.0, 1, 1.0).is_err());
    }
}
