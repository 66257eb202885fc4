//! Finite-difference left-hand sides against closed-form right-hand sides
//! along a heat trajectory.
//!
//! CSV layout: one row per interior output time, columns in the order of
//! [`CSV_COLUMNS`], floats as `{:.16e}`. `*_res` columns are `lhs − rhs`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_k, check_m_strict, check_time, gaussian_shift, state_values, w_m_shift, w_mk_shift, MONOTONE_SLACK};
use crate::error::{Error, Result};
use crate::flows::{FlowTrajectory, GeometryPath, SUPER_FLOW_SLACK};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub m: f64,
    pub k: f64,
    /// Combine spacings `h` and `2h` to cancel the `O(h²)` term.
    pub richardson: bool,
}

/// Identity checked by a report column pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// `dH/dt = ∫|∇ log u|² u dμ`.
    EntropyRate,
    /// `d²H/dt²` against its curvature integral.
    EntropySecond,
    /// `dW/dt`.
    W,
    /// `dW_m/dt`.
    Wm,
    /// `dW_{m,K}/dt`.
    WmK,
    /// `d/dt(tH_m)` against the closed form of `W_m`.
    WmDefinition,
}

impl Formula {
    pub const ALL: [Formula; 6] =
        [Formula::EntropyRate, Formula::EntropySecond, Formula::W, Formula::Wm, Formula::WmK, Formula::WmDefinition];

    pub fn name(self) -> &'static str {
        match self {
            Formula::EntropyRate => "dH",
            Formula::EntropySecond => "d2H",
            Formula::W => "dW",
            Formula::Wm => "dWm",
            Formula::WmK => "dWmK",
            Formula::WmDefinition => "Wm_def",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub t: f64,
    pub h: f64,
    pub h_m: f64,
    pub h_mk: f64,
    pub w: f64,
    pub w_m: f64,
    pub w_mk: f64,
    pub w_m_def: f64,
    pub dh_lhs: f64,
    pub dh_rhs: f64,
    pub d2h_lhs: f64,
    pub d2h_rhs: f64,
    pub dw_lhs: f64,
    pub dw_rhs: f64,
    pub dwm_lhs: f64,
    pub dwm_rhs: f64,
    pub dwmk_lhs: f64,
    pub dwmk_rhs: f64,
    pub defect_m: f64,
    pub defect_mk: f64,
    pub defect_inf: f64,
}

impl EntropyRow {
    pub fn lhs(&self, f: Formula) -> f64 {
        match f {
            Formula::EntropyRate => self.dh_lhs,
            Formula::EntropySecond => self.d2h_lhs,
            Formula::W => self.dw_lhs,
            Formula::Wm => self.dwm_lhs,
            Formula::WmK => self.dwmk_lhs,
            Formula::WmDefinition => self.w_m_def,
        }
    }

    pub fn rhs(&self, f: Formula) -> f64 {
        match f {
            Formula::EntropyRate => self.dh_rhs,
            Formula::EntropySecond => self.d2h_rhs,
            Formula::W => self.dw_rhs,
            Formula::Wm => self.dwm_rhs,
            Formula::WmK => self.dwmk_rhs,
            Formula::WmDefinition => self.w_m,
        }
    }

    pub fn residual(&self, f: Formula) -> f64 {
        self.lhs(f) - self.rhs(f)
    }

    /// `|lhs − rhs|/|rhs|`, or the absolute residual when `rhs = 0`.
    pub fn relative(&self, f: Formula) -> f64 {
        let r = self.rhs(f).abs();
        let d = self.residual(f).abs();
        if r > 0.0 {
            d / r
        } else {
            d
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The curvature certificate the statement needs did not hold.
    NotApplicable,
}

impl Verdict {
    fn gated(certified: bool, holds: bool) -> Self {
        match (certified, holds) {
            (false, _) => Verdict::NotApplicable,
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Fail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    /// `½∂ₜg + Ric_{m,n}(L) ≥ 0` at every output time.
    pub super_flow: bool,
    /// `½∂ₜg + Ric_{m,n}(L) ≥ −Kg`.
    pub k_super_flow: bool,
    /// `½∂ₜg + Ric(L) ≥ 0`.
    pub super_flow_m_free: bool,
    pub w_m_nonincreasing: Verdict,
    pub w_mk_nonincreasing: Verdict,
    pub h_concave: Verdict,
}

/// Sampled values at every trajectory time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub h: f64,
    pub w_m: f64,
    pub w_mk: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub options: ReportOptions,
    /// Output spacing of the trajectory.
    pub spacing: f64,
    pub rows: Vec<EntropyRow>,
    pub series: Vec<SeriesPoint>,
    pub verdicts: Verdicts,
}

pub const CSV_COLUMNS: [&str; 27] = [
    "t", "H", "H_m", "H_mK", "W", "W_m", "W_mK", "Wm_def", "dH_lhs", "dH_rhs", "dH_res", "d2H_lhs", "d2H_rhs",
    "d2H_res", "dW_lhs", "dW_rhs", "dW_res", "dWm_lhs", "dWm_rhs", "dWm_res", "dWmK_lhs", "dWmK_rhs", "dWmK_res",
    "defect_m", "defect_mK", "defect_inf", "Wm_def_res",
];

impl EntropyReport {
    pub fn max_relative(&self, f: Formula) -> f64 {
        self.rows.iter().map(|r| r.relative(f)).fold(0.0, f64::max)
    }

    pub fn max_residual(&self, f: Formula) -> f64 {
        self.rows.iter().map(|r| r.residual(f).abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let values = [
                r.t,
                r.h,
                r.h_m,
                r.h_mk,
                r.w,
                r.w_m,
                r.w_mk,
                r.w_m_def,
                r.dh_lhs,
                r.dh_rhs,
                r.residual(Formula::EntropyRate),
                r.d2h_lhs,
                r.d2h_rhs,
                r.residual(Formula::EntropySecond),
                r.dw_lhs,
                r.dw_rhs,
                r.residual(Formula::W),
                r.dwm_lhs,
                r.dwm_rhs,
                r.residual(Formula::Wm),
                r.dwmk_lhs,
                r.dwmk_rhs,
                r.residual(Formula::WmK),
                r.defect_m,
                r.defect_mk,
                r.defect_inf,
                r.residual(Formula::WmDefinition),
            ];
            let line: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// `entropy.csv`, `entropy.json` and one two-column `plot/<column>.dat`
    /// per CSV column.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("plot"))?;
        let csv = self.to_csv();
        fs::write(dir.join("entropy.csv"), &csv)?;
        fs::write(dir.join("entropy.json"), serde_json::to_string_pretty(self)?)?;
        for (c, name) in CSV_COLUMNS.iter().enumerate().skip(1) {
            let mut dat = String::new();
            for line in csv.lines().skip(1) {
                let cells: Vec<&str> = line.split(',').collect();
                let _ = writeln!(dat, "{} {}", cells[0], cells[c]);
            }
            fs::write(dir.join("plot").join(format!("{name}.dat")), dat)?;
        }
        Ok(())
    }
}

fn first(f: &[f64], i: usize, h: f64, richardson: bool) -> f64 {
    let d1 = (f[i + 1] - f[i - 1]) / (2.0 * h);
    if !richardson {
        return d1;
    }
    let d2 = (f[i + 2] - f[i - 2]) / (4.0 * h);
    (4.0 * d1 - d2) / 3.0
}

fn second(f: &[f64], i: usize, h: f64, richardson: bool) -> f64 {
    let s1 = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    if !richardson {
        return s1;
    }
    let s2 = (f[i + 2] - 2.0 * f[i] + f[i - 2]) / (4.0 * h * h);
    (4.0 * s1 - s2) / 3.0
}

/// Uniform spacing of `times`, or an error naming the first deviation.
pub(crate) fn uniform_spacing(times: &[f64], needed: usize) -> Result<f64> {
    if times.len() < needed {
        return Err(Error::IrregularTimes(format!("{} output times, at least {needed} needed", times.len())));
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::IrregularTimes(format!("spacing {} at index {i} differs from {h}", w[1] - w[0])));
        }
    }
    Ok(h)
}

pub(crate) fn non_increasing(values: impl IntoIterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.into_iter().collect();
    v.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK)
}

/// Builds the residual report for a trajectory with uniformly spaced output
/// times (at least 3, or 5 with Richardson extrapolation).
pub fn formula_residuals(
    traj: &FlowTrajectory,
    path: &dyn GeometryPath,
    options: &ReportOptions,
) -> Result<EntropyReport> {
    let (m, k) = (options.m, options.k);
    check_k(k)?;
    check_m_strict(m, path.grid().dim())?;
    let times = traj.times();
    let reach = if options.richardson { 2 } else { 1 };
    let h = uniform_spacing(&times, 2 * reach + 1)?;
    for &t in &times {
        check_time(t)?;
    }
    let values = traj
        .states
        .par_iter()
        .map(|s| state_values(s, path, m, k))
        .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = values.iter().map(|v| v.h).collect();
    let ws: Vec<f64> = values.iter().zip(&times).map(|(v, t)| t * v.fisher + v.h).collect();
    let wms: Vec<f64> = ws.iter().zip(&times).map(|(w, &t)| w - w_m_shift(t, m)).collect();
    let wmks: Vec<f64> = wms.iter().zip(&times).map(|(w, &t)| w - w_mk_shift(t, m, k)).collect();
    let thm: Vec<f64> = hs.iter().zip(&times).map(|(h, &t)| t * (h - gaussian_shift(t, m))).collect();
    let r = options.richardson;
    let rows: Vec<EntropyRow> = (reach..times.len() - reach)
        .map(|i| {
            let (t, v) = (times[i], values[i]);
            let h_m = hs[i] - gaussian_shift(t, m);
            EntropyRow {
                t,
                h: hs[i],
                h_m,
                h_mk: h_m - 0.5 * m * k * t * (1.0 + k * t / 6.0),
                w: ws[i],
                w_m: wms[i],
                w_mk: wmks[i],
                w_m_def: first(&thm, i, h, r),
                dh_lhs: first(&hs, i, h, r),
                dh_rhs: v.fisher,
                d2h_lhs: second(&hs, i, h, r),
                d2h_rhs: v.d2h,
                dw_lhs: first(&ws, i, h, r),
                dw_rhs: t * v.d2h + 2.0 * v.fisher,
                dwm_lhs: first(&wms, i, h, r),
                dwm_rhs: v.dwm,
                dwmk_lhs: first(&wmks, i, h, r),
                dwmk_rhs: v.dwmk,
                defect_m: v.defect_m,
                defect_mk: v.defect_mk,
                defect_inf: v.defect_inf,
            }
        })
        .collect();
    let certified = |f: fn(&super::StateValues) -> f64| values.iter().all(|v| f(v) >= -SUPER_FLOW_SLACK);
    let super_flow = certified(|v| v.defect_m);
    let k_super_flow = certified(|v| v.defect_mk);
    let super_flow_m_free = certified(|v| v.defect_inf);
    let verdicts = Verdicts {
        super_flow,
        k_super_flow,
        super_flow_m_free,
        w_m_nonincreasing: Verdict::gated(super_flow, non_increasing(wms.iter().copied())),
        w_mk_nonincreasing: Verdict::gated(k_super_flow, non_increasing(wmks.iter().copied())),
        h_concave: Verdict::gated(super_flow_m_free, rows.iter().all(|r| r.d2h_lhs <= MONOTONE_SLACK)),
    };
    let series = (0..times.len())
        .map(|i| SeriesPoint { t: times[i], h: hs[i], w_m: wms[i], w_mk: wmks[i] })
        .collect();
    Ok(EntropyReport { options: *options, spacing: h, rows, series, verdicts })
}
