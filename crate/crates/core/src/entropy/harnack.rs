//! Li-Yau type gradient bound for positive solutions on a static geometry
//! with `Ric_{m,n}(L) ≥ −K`:
//! `|∇u|²/u² − (1 + 2Kt/3)∂ₜu/u ≤ m/2t + (mK/2)(1 + Kt/3)`.
//!
//! `t` is the time since the solution started, i.e. the state's own time on
//! a schedule beginning at `0`.

use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use super::{bakry_emery_m_or_n, check_k, check_time, LogDensity, Route};
use crate::error::{Error, Result};
use crate::flows::{FlowState, FlowTrajectory, GeometryPath, SUPER_FLOW_SLACK};
use crate::geometry::ScalarField;

pub const HARNACK_TOLERANCE: f64 = 1e-6;

/// Pointwise `LHS − RHS`; `∂ₜu/u = L log u + |∇ log u|²`. In the far tails
/// of a density that needs quotient formulas the derivatives are rounding
/// noise; such nodes report `−RHS`.
pub fn harnack_defect(state: &FlowState, path: &dyn GeometryPath, m: f64, k: f64) -> Result<ScalarField> {
    let t = state.t;
    check_time(t)?;
    check_k(k)?;
    let snap = &state.snapshot;
    if !path.is_static() {
        return Err(Error::Precondition("the gradient bound is stated for a static geometry".into()));
    }
    let floor = snap
        .min_rel_eigenvalue(&bakry_emery_m_or_n(snap, m)?.add_scaled(k, snap.metric()))?
        .min();
    if floor < -SUPER_FLOW_SLACK {
        return Err(Error::Precondition(format!(
            "Ric_{{m,n}}(L) + Kg has relative eigenvalue {floor:e} < 0 (K = {k})"
        )));
    }
    let d = LogDensity::new(snap, &state.u)?;
    let grad_sq = d.grad_sq();
    let drift = snap.inner_forms(snap.potential_differential(), d.dlog());
    let l_log = snap.trace(d.hessian()).sub(&drift);
    let rhs = 0.5 * m / t + 0.5 * m * k * (1.0 + k * t / 3.0);
    let c = 1.0 + 2.0 * k * t / 3.0;
    // quotient derivatives carry rounding of size ε·k²_max·max u / u; keep
    // only nodes where that stays an order below the tolerance
    let k_sq: f64 = (0..snap.dim()).map(|a| (PI / snap.grid().spacing(a)).powi(2)).sum();
    let resolved = 10.0 * f64::EPSILON * k_sq * state.u.max() / HARNACK_TOLERANCE;
    let support = state.u.values().iter().map(|&v| match d.route() {
        Route::Logarithmic => true,
        Route::Quotient { floor, .. } => v >= floor.max(resolved),
    });
    let values = grad_sq
        .values()
        .iter()
        .zip(l_log.values())
        .zip(support)
        .map(|((g, l), keep)| if keep { g - c * (l + g) - rhs } else { -rhs })
        .collect();
    Ok(ScalarField::from_raw(snap.grid(), values))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackEntry {
    pub t: f64,
    pub max_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnackCertificate {
    pub m: f64,
    pub k: f64,
    pub tolerance: f64,
    pub entries: Vec<HarnackEntry>,
    pub passed: bool,
}

/// Certificate over every state of `traj`.
pub fn harnack_certificate(
    traj: &FlowTrajectory,
    path: &dyn GeometryPath,
    m: f64,
    k: f64,
) -> Result<HarnackCertificate> {
    let entries = traj
        .states
        .iter()
        .map(|s| {
            let d = harnack_defect(s, path, m, k)?;
            Ok(HarnackEntry { t: s.t, max_defect: d.max() })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = entries.iter().all(|e| e.max_defect <= HARNACK_TOLERANCE);
    Ok(HarnackCertificate { m, k, tolerance: HARNACK_TOLERANCE, entries, passed })
}
