//! Time-dependent geometries `t ↦ (g(t), φ(t))`.

use std::fmt;
use std::sync::Arc;

use super::interp;
use crate::error::{Error, Result};
use crate::geometry::{GeometrySnapshot, Grid, ScalarField, SymTensorField};

/// Anything that supplies a geometry snapshot at each time of an interval.
pub trait GeometryPath: Send + Sync {
    fn grid(&self) -> &Grid;

    /// `[t₀, T]`.
    fn interval(&self) -> (f64, f64);

    fn snapshot_at(&self, t: f64) -> Result<GeometrySnapshot>;

    /// `∂ₜg` at `t`.
    fn metric_rate_at(&self, t: f64) -> Result<SymTensorField>;

    /// True when neither metric nor potential changes in time.
    fn is_static(&self) -> bool {
        false
    }

    /// Validates `t` against the interval, snapping rounding-level overshoot.
    fn clamp_time(&self, t: f64) -> Result<f64> {
        let (start, end) = self.interval();
        let slack = 1e-12 * (1.0 + start.abs().max(end.abs()));
        if !t.is_finite() || t < start - slack || t > end + slack {
            return Err(Error::OutOfInterval { t, start, end });
        }
        Ok(t.clamp(start, end))
    }
}

type MetricFn = Arc<dyn Fn(f64) -> SymTensorField + Send + Sync>;

/// Scale factor `s(t)` for `g(t) = s(t)·g₀`.
#[derive(Clone, Debug, PartialEq)]
pub enum Scale {
    /// `Σ cₖ tᵏ`.
    Polynomial(Vec<f64>),
    /// `e^{2at}`.
    Exponential(f64),
}

impl Scale {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Scale::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
            Scale::Exponential(a) => (2.0 * a * t).exp(),
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        match self {
            Scale::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * t + k as f64 * ck),
            Scale::Exponential(a) => 2.0 * a * (2.0 * a * t).exp(),
        }
    }
}

#[derive(Clone)]
enum Kind {
    Static(SymTensorField),
    Scaled { g0: SymTensorField, scale: Scale },
    Function { metric: MetricFn, rate: Option<MetricFn> },
    Tabulated { times: Vec<f64>, metrics: Vec<SymTensorField> },
}

/// Metric family on `[t₀, T]` with the conjugate potential
/// `f(t) = f₀ + ½ log(det g(t)/det g(t₀))`, which keeps
/// `dμ = e^{−f}√det g dx` independent of time.
#[derive(Clone)]
pub struct MetricSchedule {
    kind: Kind,
    start: f64,
    end: f64,
    f0: ScalarField,
    log_det0: Vec<f64>,
    initial: GeometrySnapshot,
}

impl fmt::Debug for MetricSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Static(_) => "static",
            Kind::Scaled { .. } => "scaled",
            Kind::Function { .. } => "function",
            Kind::Tabulated { .. } => "tabulated",
        };
        f.debug_struct("MetricSchedule")
            .field("kind", &kind)
            .field("interval", &(self.start, self.end))
            .finish()
    }
}

fn log_det(snap: &GeometrySnapshot) -> Vec<f64> {
    snap.sqrt_det().values().iter().map(|s| 2.0 * s.ln()).collect()
}

impl MetricSchedule {
    fn build(kind: Kind, start: f64, end: f64, f0: ScalarField) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::Parameter(format!("interval [{start}, {end}] is empty")));
        }
        let g0 = Self::metric_of(&kind, start)?;
        let initial = GeometrySnapshot::new(g0, f0.clone())?;
        let log_det0 = log_det(&initial);
        Ok(Self { kind, start, end, f0, log_det0, initial })
    }

    pub fn constant(snapshot: &GeometrySnapshot, start: f64, end: f64) -> Result<Self> {
        Self::build(Kind::Static(snapshot.metric().clone()), start, end, snapshot.potential().clone())
    }

    /// `g(t) = s(t)·g₀` with `f(t₀) = f₀`.
    pub fn scaled(
        g0: SymTensorField,
        scale: Scale,
        f0: ScalarField,
        start: f64,
        end: f64,
    ) -> Result<Self> {
        for t in [start, end] {
            if !(scale.value(t) > 0.0) {
                return Err(Error::Parameter(format!("scale factor not positive at t = {t}")));
            }
        }
        Self::build(Kind::Scaled { g0, scale }, start, end, f0)
    }

    /// Metric given by a callback; without a rate callback the rate is a
    /// centred difference with step `10⁻⁴(T − t₀)`.
    pub fn from_fn(
        metric: impl Fn(f64) -> SymTensorField + Send + Sync + 'static,
        rate: Option<Box<dyn Fn(f64) -> SymTensorField + Send + Sync>>,
        f0: ScalarField,
        start: f64,
        end: f64,
    ) -> Result<Self> {
        let rate: Option<MetricFn> = rate.map(Arc::from);
        Self::build(Kind::Function { metric: Arc::new(metric), rate }, start, end, f0)
    }

    /// Piecewise-cubic interpolation of metrics sampled at `times`.
    pub fn tabulated(times: Vec<f64>, metrics: Vec<SymTensorField>, f0: ScalarField) -> Result<Self> {
        if times.len() < 2 || times.len() != metrics.len() {
            return Err(Error::InvalidInput(format!(
                "{} sample times for {} metrics (need at least two)",
                times.len(),
                metrics.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("sample times must increase strictly".into()));
        }
        for m in &metrics {
            f0.grid().ensure_same(m.grid(), "tabulated metric")?;
        }
        let (start, end) = (times[0], times[times.len() - 1]);
        Self::build(Kind::Tabulated { times, metrics }, start, end, f0)
    }

    fn metric_of(kind: &Kind, t: f64) -> Result<SymTensorField> {
        Ok(match kind {
            Kind::Static(g) => g.clone(),
            Kind::Scaled { g0, scale } => g0.scale(scale.value(t)),
            Kind::Function { metric, .. } => metric(t),
            Kind::Tabulated { times, metrics } => {
                let (s, w, _) = interp::stencil(times, t);
                interpolate(&metrics[s..s + w.len()], &w)
            }
        })
    }

    pub fn metric_at(&self, t: f64) -> Result<SymTensorField> {
        let t = self.clamp_time(t)?;
        Self::metric_of(&self.kind, t)
    }

    pub fn initial(&self) -> &GeometrySnapshot {
        &self.initial
    }

    /// Conjugate potential at `t` in closed form.
    pub fn conjugate_potential(&self, t: f64) -> Result<ScalarField> {
        Ok(self.snapshot_at(t)?.potential().clone())
    }

    fn finite_difference_rate(&self, t: f64) -> Result<SymTensorField> {
        let delta = 1e-4 * (self.end - self.start);
        let at = |s: f64| Self::metric_of(&self.kind, s);
        if t - delta < self.start || t + delta > self.end {
            // second-order one-sided stencil pointing into the interval
            let h = if t - delta < self.start { delta } else { -delta };
            let (a, b, c) = (at(t)?, at(t + h)?, at(t + 2.0 * h)?);
            return Ok(a.scale(-3.0).add_scaled(4.0, &b).add_scaled(-1.0, &c).scale(0.5 / h));
        }
        Ok(at(t + delta)?.sub(&at(t - delta)?).scale(0.5 / delta))
    }
}

fn interpolate(metrics: &[SymTensorField], weights: &[f64]) -> SymTensorField {
    let grid = metrics[0].grid();
    let packed = (0..metrics[0].packed().len())
        .map(|c| {
            let arrays: Vec<&[f64]> = metrics.iter().map(|m| m.packed()[c].as_slice()).collect();
            interp::combine(&arrays, weights)
        })
        .collect();
    SymTensorField::new(grid, packed).expect("interpolated metric is finite")
}

impl GeometryPath for MetricSchedule {
    fn grid(&self) -> &Grid {
        self.initial.grid()
    }

    fn interval(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    fn snapshot_at(&self, t: f64) -> Result<GeometrySnapshot> {
        let t = self.clamp_time(t)?;
        if let Kind::Static(_) = self.kind {
            return Ok(self.initial.clone());
        }
        let g = Self::metric_of(&self.kind, t)?;
        // validates positive-definiteness before the determinant is used
        let probe = GeometrySnapshot::new(g.clone(), self.f0.clone())?;
        let f = self
            .f0
            .values()
            .iter()
            .zip(log_det(&probe))
            .zip(&self.log_det0)
            .map(|((f0, ld), ld0)| f0 + 0.5 * (ld - ld0))
            .collect();
        GeometrySnapshot::new(g, ScalarField::new(self.grid(), f)?)
    }

    fn metric_rate_at(&self, t: f64) -> Result<SymTensorField> {
        let t = self.clamp_time(t)?;
        match &self.kind {
            Kind::Static(g) => Ok(SymTensorField::zeros(g.grid())),
            Kind::Scaled { g0, scale } => Ok(g0.scale(scale.rate(t))),
            Kind::Function { rate: Some(rate), .. } => Ok(rate(t)),
            _ => self.finite_difference_rate(t),
        }
    }

    fn is_static(&self) -> bool {
        matches!(self.kind, Kind::Static(_))
    }
}

/// `min λ(½∂ₜg + Ric_{m,n}(L) + Kg)` relative to `g(t)`, per node.
pub fn super_ricci_defect(path: &dyn GeometryPath, m: f64, k: f64, t: f64) -> Result<ScalarField> {
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Parameter(format!("K = {k} must be non-negative")));
    }
    let snap = path.snapshot_at(t)?;
    let tensor = snap
        .bakry_emery_m(m)?
        .add_scaled(0.5, &path.metric_rate_at(t)?)
        .add_scaled(k, snap.metric());
    snap.min_rel_eigenvalue(&tensor)
}

/// Certification threshold for [`super_ricci_defect`].
pub const SUPER_FLOW_SLACK: f64 = 1e-10;
