//! Entropy functionals of heat-flow states, both sides of the dissipation
//! formulas, Harnack certificates, and the reduced Perelman entropy along a
//! Lott flow.
//!
//! Integrands are built from `log u` and its spectral derivatives. Densities
//! whose minimum drops below [`CONDITIONING_FLOOR`]`·max u` (tails of narrow
//! kernels) switch to quotient formulas `∂u/u` on the resolved support; nodes
//! under the floor carry zero weight.

mod harnack;
mod perelman;
mod report;

#[cfg(test)]
mod tests;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flows::{FlowState, GeometryPath};
use crate::geometry::{GeometrySnapshot, ScalarField, SymTensorField};

pub use harnack::{harnack_certificate, harnack_defect, HarnackCertificate, HarnackEntry, HARNACK_TOLERANCE};
pub use perelman::{dwq_rhs, perelman_report, w_q, PerelmanReport, PerelmanRow};
pub use report::{formula_residuals, EntropyReport, EntropyRow, Formula, ReportOptions, Verdict, Verdicts, CSV_COLUMNS};

/// Relative level below which `log u` is not trusted.
pub const CONDITIONING_FLOOR: f64 = 1e-12;

/// `|∫u dμ − 1|` allowed for heat-flow densities.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// Slack for monotonicity verdicts.
pub const MONOTONE_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Route {
    Logarithmic,
    /// Quotient formulas on `{u ≥ floor}`; `excluded` nodes lie below it.
    Quotient { floor: f64, excluded: usize },
}

/// `u` prepared for entropy integrands.
#[derive(Clone, Debug)]
pub struct LogDensity<'a> {
    snap: &'a GeometrySnapshot,
    weight: Vec<f64>,
    log_u: ScalarField,
    dlog: Vec<ScalarField>,
    hess: SymTensorField,
    route: Route,
}

impl<'a> LogDensity<'a> {
    pub fn new(snap: &'a GeometrySnapshot, u: &ScalarField) -> Result<Self> {
        snap.grid().ensure_same(u.grid(), "density vs snapshot")?;
        if !u.is_finite() {
            return Err(Error::InvalidInput("density has non-finite values".into()));
        }
        let max = u.max();
        if !(max > 0.0) {
            return Err(Error::Conditioning("density is not positive anywhere".into()));
        }
        let min = u.min();
        if min >= CONDITIONING_FLOOR * max {
            let log_u = u.map(f64::ln);
            let dlog = log_u.differential();
            let hess = snap.hessian_with(&log_u, &dlog);
            return Ok(Self { snap, weight: u.values().to_vec(), log_u, dlog, hess, route: Route::Logarithmic });
        }
        // negative values are resolution noise of the same size as their
        // positive counterparts; keep well clear of both
        let floor = (CONDITIONING_FLOOR * max).max(-10.0 * min);
        let vals = u.values();
        let keep: Vec<bool> = vals.iter().map(|&v| v >= floor).collect();
        let excluded = keep.iter().filter(|k| !**k).count();
        let du = u.differential();
        let hu = snap.hessian_with(u, &du);
        let grid = snap.grid();
        let n = snap.dim();
        let quotient = |f: &[f64]| -> Vec<f64> {
            f.iter().zip(vals).zip(&keep).map(|((a, v), k)| if *k { a / v } else { 0.0 }).collect()
        };
        let dlog: Vec<ScalarField> = du.iter().map(|d| ScalarField::from_raw(grid, quotient(d.values()))).collect();
        let mut hess = SymTensorField::zeros(grid);
        for i in 0..n {
            for j in i..n {
                let q = quotient(hu.component(i, j));
                let h: Vec<f64> = q
                    .iter()
                    .zip(dlog[i].values().iter().zip(dlog[j].values()))
                    .map(|(h, (a, b))| h - a * b)
                    .collect();
                hess.packed_mut()[crate::geometry::sym_index(n, i, j)] = h;
            }
        }
        let log_u = ScalarField::from_raw(
            grid,
            vals.iter().zip(&keep).map(|(v, k)| if *k { v.ln() } else { 0.0 }).collect(),
        );
        let weight = vals.iter().zip(&keep).map(|(v, k)| if *k { *v } else { 0.0 }).collect();
        Ok(Self { snap, weight, log_u, dlog, hess, route: Route::Quotient { floor, excluded } })
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn snapshot(&self) -> &GeometrySnapshot {
        self.snap
    }

    pub fn log_u(&self) -> &ScalarField {
        &self.log_u
    }

    /// `∂ᵢ log u`.
    pub fn dlog(&self) -> &[ScalarField] {
        &self.dlog
    }

    /// `∇² log u`.
    pub fn hessian(&self) -> &SymTensorField {
        &self.hess
    }

    /// `∫ F u dμ`.
    pub fn integrate(&self, f: &ScalarField) -> f64 {
        let prod: Vec<f64> = f.values().iter().zip(&self.weight).map(|(a, w)| a * w).collect();
        self.snap.integrate_unchecked(&prod)
    }

    /// `|∇ log u|²`.
    pub fn grad_sq(&self) -> ScalarField {
        self.snap.inner_forms(&self.dlog, &self.dlog)
    }

    /// `T(∇ log u, ∇ log u)`.
    pub fn form(&self, t: &SymTensorField) -> ScalarField {
        t.quadratic_form(&self.snap.raise(&self.dlog))
    }
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Parameter(format!("t = {t} must be positive")));
    }
    Ok(())
}

pub(crate) fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Parameter(format!("K = {k} must be non-negative")));
    }
    Ok(())
}

pub(crate) fn check_m_strict(m: f64, n: usize) -> Result<()> {
    if !(m > n as f64) {
        return Err(Error::Parameter(format!(
            "m = {m} must exceed the dimension n = {n} for the 1/(m−n) terms"
        )));
    }
    Ok(())
}

pub(crate) fn check_normalized(snap: &GeometrySnapshot, u: &ScalarField, tol: f64) -> Result<()> {
    let mass = snap.integrate(u)?;
    if (mass - 1.0).abs() > tol {
        return Err(Error::Precondition(format!("∫u dμ = {mass} is not 1 within {tol:e}")));
    }
    Ok(())
}

/// `Ric_{m,n}(L)`, also accepting `m = n` when the potential is constant.
pub fn bakry_emery_m_or_n(snap: &GeometrySnapshot, m: f64) -> Result<SymTensorField> {
    let n = snap.dim() as f64;
    if m == n {
        let slope = snap.potential_differential().iter().map(|d| d.max_abs()).fold(0.0, f64::max);
        if slope > 1e-12 * (1.0 + snap.potential().max_abs()) {
            return Err(Error::Parameter(format!("m = n = {n} needs a constant potential")));
        }
        return Ok(snap.bakry_emery());
    }
    snap.bakry_emery_m(m)
}

fn density(state: &FlowState) -> Result<LogDensity<'_>> {
    check_normalized(&state.snapshot, &state.u, NORMALIZATION_TOLERANCE)?;
    LogDensity::new(&state.snapshot, &state.u)
}

/// `−∫u log u dμ` with `0 log 0 = 0`.
pub fn shannon_h(state: &FlowState) -> Result<f64> {
    Ok(entropy_of(&density(state)?))
}

fn entropy_of(d: &LogDensity<'_>) -> f64 {
    -d.integrate(d.log_u())
}

pub(crate) fn gaussian_shift(t: f64, m: f64) -> f64 {
    0.5 * m * (1.0 + (4.0 * PI * t).ln())
}

/// `H − (m/2)(1 + log 4πt)`.
pub fn h_m(state: &FlowState, m: f64) -> Result<f64> {
    check_time(state.t)?;
    Ok(shannon_h(state)? - gaussian_shift(state.t, m))
}

/// `H_m − (m/2)Kt(1 + Kt/6)`.
pub fn h_mk(state: &FlowState, m: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    let t = state.t;
    Ok(h_m(state, m)? - 0.5 * m * k * t * (1.0 + k * t / 6.0))
}

/// `∫|∇ log u|² u dμ`, which is also `dH/dt` under the conjugate potential.
pub fn fisher_information(state: &FlowState) -> Result<f64> {
    let d = density(state)?;
    Ok(d.integrate(&d.grad_sq()))
}

/// `∫[t|∇ log u|² − log u] u dμ = d/dt(tH)`.
pub fn w_closed(state: &FlowState) -> Result<f64> {
    check_time(state.t)?;
    let d = density(state)?;
    Ok(w_of(&d, state.t))
}

fn w_of(d: &LogDensity<'_>, t: f64) -> f64 {
    t * d.integrate(&d.grad_sq()) + entropy_of(d)
}

/// `W − (m/2)(2 + log 4πt) = d/dt(tH_m)`.
pub fn w_m_closed(state: &FlowState, m: f64) -> Result<f64> {
    Ok(w_closed(state)? - w_m_shift(state.t, m))
}

pub(crate) fn w_m_shift(t: f64, m: f64) -> f64 {
    0.5 * m * (2.0 + (4.0 * PI * t).ln())
}

pub(crate) fn w_mk_shift(t: f64, m: f64, k: f64) -> f64 {
    m * (k * t + 0.25 * k * k * t * t)
}

/// `W_m − m(Kt + K²t²/4) = d/dt(tH_{m,K})`.
pub fn w_mk_closed(state: &FlowState, m: f64, k: f64) -> Result<f64> {
    check_k(k)?;
    Ok(w_m_closed(state, m)? - w_mk_shift(state.t, m, k))
}

fn check_on_path(state: &FlowState, path: &dyn GeometryPath) -> Result<()> {
    path.clamp_time(state.t)?;
    state.snapshot.grid().ensure_same(path.grid(), "state vs schedule")
}

/// `−2∫[|∇² log u|² + (½∂ₜg + Ric(L))(∇ log u, ∇ log u)] u dμ`.
pub fn d2h_rhs(state: &FlowState, path: &dyn GeometryPath) -> Result<f64> {
    check_on_path(state, path)?;
    let d = density(state)?;
    d2h_of(&d, &path.metric_rate_at(state.t)?)
}

fn d2h_of(d: &LogDensity<'_>, rate: &SymTensorField) -> Result<f64> {
    let snap = d.snapshot();
    let hess_sq = snap.tensor_norm_sq(d.hessian())?;
    let tensor = snap.bakry_emery().add_scaled(0.5, rate);
    Ok(-2.0 * d.integrate(&hess_sq.add(&d.form(&tensor))))
}

/// `t·d²H/dt² + 2∫|∇ log u|² u dμ`.
pub fn dw_rhs(state: &FlowState, path: &dyn GeometryPath) -> Result<f64> {
    check_time(state.t)?;
    check_on_path(state, path)?;
    let d = density(state)?;
    let rate = path.metric_rate_at(state.t)?;
    Ok(state.t * d2h_of(&d, &rate)? + 2.0 * d.integrate(&d.grad_sq()))
}

/// Three-term dissipation of `W_m`.
pub fn dwm_rhs(state: &FlowState, path: &dyn GeometryPath, m: f64) -> Result<f64> {
    dwmk_rhs(state, path, m, 0.0)
}

/// Three-term dissipation of `W_{m,K}`:
/// `−2t∫|∇²log u + (1/2t + K/2)g|²u − (2t/(m−n))∫(∇φ·∇log u − (m−n)(1/2t + K/2))²u
///  − 2t∫(½∂ₜg + Ric_{m,n}(L) + Kg)(∇log u, ∇log u)u`.
pub fn dwmk_rhs(state: &FlowState, path: &dyn GeometryPath, m: f64, k: f64) -> Result<f64> {
    check_time(state.t)?;
    check_k(k)?;
    check_m_strict(m, state.snapshot.dim())?;
    check_on_path(state, path)?;
    let d = density(state)?;
    dwmk_of(&d, &path.metric_rate_at(state.t)?, state.t, m, k)
}

fn dwmk_of(d: &LogDensity<'_>, rate: &SymTensorField, t: f64, m: f64, k: f64) -> Result<f64> {
    let snap = d.snapshot();
    let q = m - snap.dim() as f64;
    let c = 0.5 / t + 0.5 * k;
    let shifted = d.hessian().add_scaled(c, snap.metric());
    let first = snap.tensor_norm_sq(&shifted)?;
    let drift = snap.inner_forms(snap.potential_differential(), d.dlog()).map(|p| (p - q * c).powi(2));
    let tensor = snap.bakry_emery_m(m)?.add_scaled(0.5, rate).add_scaled(k, snap.metric());
    let curv = d.form(&tensor);
    Ok(-2.0 * t * d.integrate(&first) - 2.0 * t / q * d.integrate(&drift) - 2.0 * t * d.integrate(&curv))
}

/// Pointwise `2t|∇²log u|² + m/2t − [2t|∇²log u + g/2t|² + (m−n)/2t − 2Δ log u]`,
/// identically zero.
pub fn hessian_identity_residual(state: &FlowState, m: f64) -> Result<ScalarField> {
    let t = state.t;
    check_time(t)?;
    let d = LogDensity::new(&state.snapshot, &state.u)?;
    let snap = &state.snapshot;
    let n = snap.dim() as f64;
    let a = snap.tensor_norm_sq(d.hessian())?;
    let b = snap.tensor_norm_sq(&d.hessian().add_scaled(0.5 / t, snap.metric()))?;
    let lap = snap.trace(d.hessian());
    let lhs = a.map(|x| 2.0 * t * x + m / (2.0 * t));
    let rhs = b.map(|x| 2.0 * t * x + (m - n) / (2.0 * t)).add_scaled(-2.0, &lap);
    Ok(lhs.sub(&rhs))
}

/// `|dW_m/dt + m/2t|` for the invariant density of `snap` at time `t`, where
/// both sides are known exactly.
pub fn stationary_self_test(snap: &GeometrySnapshot, t: f64, m: f64) -> Result<f64> {
    let path = crate::flows::MetricSchedule::constant(snap, 0.5 * t, 2.0 * t)?;
    let u = ScalarField::constant(snap.grid(), 1.0 / snap.total_measure());
    let state = FlowState { t, snapshot: snap.clone(), u };
    Ok((dwm_rhs(&state, &path, m)? + 0.5 * m / t).abs())
}

/// All per-state quantities the report needs, evaluated once.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct StateValues {
    pub h: f64,
    pub fisher: f64,
    pub d2h: f64,
    pub dwmk: f64,
    pub dwm: f64,
    pub defect_m: f64,
    pub defect_mk: f64,
    pub defect_inf: f64,
}

pub(crate) fn state_values(state: &FlowState, path: &dyn GeometryPath, m: f64, k: f64) -> Result<StateValues> {
    check_on_path(state, path)?;
    let d = density(state)?;
    let rate = path.metric_rate_at(state.t)?;
    let defect = |mm: f64, kk: f64| -> Result<f64> {
        let snap = &state.snapshot;
        let tensor = snap.bakry_emery_m(mm)?.add_scaled(0.5, &rate).add_scaled(kk, snap.metric());
        Ok(snap.min_rel_eigenvalue(&tensor)?.min())
    };
    Ok(StateValues {
        h: entropy_of(&d),
        fisher: d.integrate(&d.grad_sq()),
        d2h: d2h_of(&d, &rate)?,
        dwmk: dwmk_of(&d, &rate, state.t, m, k)?,
        dwm: dwmk_of(&d, &rate, state.t, m, 0.0)?,
        defect_m: defect(m, 0.0)?,
        defect_mk: defect(m, k)?,
        defect_inf: defect(f64::INFINITY, 0.0)?,
    })
}
