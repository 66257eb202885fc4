//! Reduced Perelman entropy of a conjugate heat solution along a Lott flow,
//! `W_q = ∫[τ(|∇η|² + R_q) + η − (n+q)]φ dμ` with
//! `φ = (4πτ)^{−(n+q)/2}e^{−η}`, and its dissipation in `τ`.

use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use super::{check_normalized, LogDensity};
use super::report::{non_increasing, uniform_spacing};
use crate::error::{Error, Result};
use crate::flows::{r_q, ConjugateTrajectory};
use crate::geometry::{GeometrySnapshot, ScalarField};

/// `|∫φ dμ − 1|` allowed for conjugate solutions.
pub const PHI_NORMALIZATION_TOLERANCE: f64 = 1e-6;

fn prepare<'a>(snap: &'a GeometrySnapshot, phi: &ScalarField, tau: f64, q: f64) -> Result<LogDensity<'a>> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Parameter(format!("q = {q} must be positive")));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Parameter(format!("τ = {tau} must be positive")));
    }
    check_normalized(snap, phi, PHI_NORMALIZATION_TOLERANCE)?;
    LogDensity::new(snap, phi)
}

/// `η = −log φ − ((n+q)/2) log 4πτ` on the resolved support.
fn eta_of(d: &LogDensity<'_>, tau: f64, q: f64) -> ScalarField {
    let shift = 0.5 * (d.snapshot().dim() as f64 + q) * (4.0 * PI * tau).ln();
    d.log_u().map(|l| -l - shift)
}

/// `snap` carries `ψ` as its potential. Computed through `log φ` as for the
/// heat-flow entropies, so `η` follows [`eta_from_phi`](crate::flows::eta_from_phi).
pub fn w_q(snap: &GeometrySnapshot, phi: &ScalarField, tau: f64, q: f64) -> Result<f64> {
    let d = prepare(snap, phi, tau, q)?;
    let eta = eta_of(&d, tau, q);
    let rq = r_q(snap, q)?;
    let dim = snap.dim() as f64 + q;
    let integrand = d.grad_sq().add(&rq).scale(tau).add(&eta).map(|v| v - dim);
    Ok(d.integrate(&integrand))
}

/// `−2τ∫[|Ric_ψ^q + Hess η − g/2τ|² + (1/q)(Δψ − |∇ψ|² − ⟨∇ψ, ∇η⟩ − q/2τ)²]φ dμ`.
pub fn dwq_rhs(snap: &GeometrySnapshot, phi: &ScalarField, tau: f64, q: f64) -> Result<f64> {
    let d = prepare(snap, phi, tau, q)?;
    // ∇η = −∇log φ, Hess η = −Hess log φ
    let tensor = snap
        .bakry_emery_q(q)
        .add_scaled(-1.0, d.hessian())
        .add_scaled(-0.5 / tau, snap.metric());
    let first = snap.tensor_norm_sq(&tensor)?;
    let dpsi = snap.potential_differential();
    let psi = snap.potential();
    let lap = snap.trace(&snap.hessian_with(psi, dpsi));
    let scalar = lap
        .sub(&snap.inner_forms(dpsi, dpsi))
        .add(&snap.inner_forms(dpsi, d.dlog()))
        .map(|v| (v - 0.5 * q / tau).powi(2) / q);
    Ok(-2.0 * tau * d.integrate(&first.add(&scalar)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerelmanRow {
    pub tau: f64,
    pub t: f64,
    pub w_q: f64,
    /// Finite-difference `dW_q/dτ`.
    pub lhs: f64,
    pub rhs: f64,
}

impl PerelmanRow {
    pub fn relative(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerelmanReport {
    pub q: f64,
    pub spacing: f64,
    pub rows: Vec<PerelmanRow>,
    /// `(τ, W_q)` at every stored state.
    pub series: Vec<(f64, f64)>,
    /// `W_q` non-increasing in `τ`.
    pub nonincreasing: bool,
}

impl PerelmanReport {
    pub fn max_relative(&self) -> f64 {
        self.rows.iter().map(PerelmanRow::relative).fold(0.0, f64::max)
    }
}

/// Compares central differences in `τ` (uniformly spaced states) with the
/// dissipation integral.
pub fn perelman_report(conj: &ConjugateTrajectory, q: f64, richardson: bool) -> Result<PerelmanReport> {
    let taus: Vec<f64> = conj.states.iter().map(|s| s.tau).collect();
    let reach = if richardson { 2 } else { 1 };
    let h = uniform_spacing(&taus, 2 * reach + 1)?;
    let ws = conj
        .states
        .iter()
        .map(|s| w_q(&s.snapshot, &s.phi, s.tau, q))
        .collect::<Result<Vec<_>>>()?;
    let rows = (reach..taus.len() - reach)
        .map(|i| {
            let s = &conj.states[i];
            let d1 = (ws[i + 1] - ws[i - 1]) / (2.0 * h);
            let lhs = if richardson { (4.0 * d1 - (ws[i + 2] - ws[i - 2]) / (4.0 * h)) / 3.0 } else { d1 };
            Ok(PerelmanRow { tau: s.tau, t: s.t, w_q: ws[i], lhs, rhs: dwq_rhs(&s.snapshot, &s.phi, s.tau, q)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PerelmanReport {
        q,
        spacing: h,
        rows,
        series: taus.iter().copied().zip(ws.iter().copied()).collect(),
        nonincreasing: non_increasing(ws.iter().copied()),
    })
}
