//! Uniform periodic grids on the flat torus `∏ [0, Lᵢ)`.
//!
//! Nodes are stored row-major: axis 0 varies slowest. Every axis carries a
//! cached forward/inverse FFT plan used by the spectral derivative.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;
pub const MIN_NODES: usize = 8;

struct Axis {
    nodes: usize,
    period: f64,
    spacing: f64,
    stride: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Angular wavenumbers in FFT order with the Nyquist entry zeroed.
    wavenumbers: Vec<f64>,
}

struct GridInner {
    axes: Vec<Axis>,
    len: usize,
}

/// A structured periodic grid. Cloning is cheap (shared inner state).
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl Grid {
    pub fn new(nodes: &[usize], periods: &[f64]) -> Result<Self> {
        let dim = nodes.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("grid dimension {dim} not in 1..=3")));
        }
        if periods.len() != dim {
            return Err(Error::Dimension(format!(
                "{} node counts but {} periods",
                dim,
                periods.len()
            )));
        }
        let mut planner = FftPlanner::<f64>::new();
        let len: usize = nodes.iter().product();
        let mut axes = Vec::with_capacity(dim);
        let mut stride = len;
        for (&n, &period) in nodes.iter().zip(periods) {
            if n < MIN_NODES || n % 2 != 0 {
                return Err(Error::InvalidInput(format!(
                    "node count {n} per axis must be even and at least {MIN_NODES}"
                )));
            }
            if !(period.is_finite() && period > 0.0) {
                return Err(Error::InvalidInput(format!("period {period} must be positive")));
            }
            stride /= n;
            let base = 2.0 * PI / period;
            let wavenumbers = (0..n)
                .map(|j| {
                    if j < n / 2 {
                        base * j as f64
                    } else if j == n / 2 {
                        0.0
                    } else {
                        base * (j as f64 - n as f64)
                    }
                })
                .collect();
            axes.push(Axis {
                nodes: n,
                period,
                spacing: period / n as f64,
                stride,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                wavenumbers,
            });
        }
        Ok(Self { inner: Arc::new(GridInner { axes, len }) })
    }

    /// One-dimensional grid of `n` nodes on `[0, period)`.
    pub fn line(n: usize, period: f64) -> Result<Self> {
        Self::new(&[n], &[period])
    }

    pub fn dim(&self) -> usize {
        self.inner.axes.len()
    }

    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        self.inner.len == 0
    }

    pub fn nodes(&self) -> Vec<usize> {
        self.inner.axes.iter().map(|a| a.nodes).collect()
    }

    pub fn periods(&self) -> Vec<f64> {
        self.inner.axes.iter().map(|a| a.period).collect()
    }

    pub fn nodes_on(&self, axis: usize) -> usize {
        self.inner.axes[axis].nodes
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.inner.axes[axis].spacing
    }

    pub fn min_spacing(&self) -> f64 {
        self.inner.axes.iter().map(|a| a.spacing).fold(f64::INFINITY, f64::min)
    }

    /// Volume of one grid cell, `∏ hᵢ`.
    pub fn cell_volume(&self) -> f64 {
        self.inner.axes.iter().map(|a| a.spacing).product()
    }

    pub fn volume(&self) -> f64 {
        self.inner.axes.iter().map(|a| a.period).product()
    }

    /// Row-major stride of `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.inner.axes[axis].stride
    }

    /// Per-axis integer index of a flat node index.
    pub fn multi_index(&self, node: usize) -> [usize; MAX_DIM] {
        let mut out = [0; MAX_DIM];
        for (a, axis) in self.inner.axes.iter().enumerate() {
            out[a] = (node / axis.stride) % axis.nodes;
        }
        out
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        self.inner
            .axes
            .iter()
            .zip(index)
            .map(|(axis, &i)| (i % axis.nodes) * axis.stride)
            .sum()
    }

    /// Coordinates of a node; unused trailing entries are zero.
    pub fn coords(&self, node: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(node);
        let mut x = [0.0; MAX_DIM];
        for (a, axis) in self.inner.axes.iter().enumerate() {
            x[a] = idx[a] as f64 * axis.spacing;
        }
        x
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.nodes() == other.nodes() && self.periods() == other.periods())
    }

    pub(crate) fn ensure_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!("{what}: grid {self} does not match {other}")))
        }
    }

    pub(crate) fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.inner.axes[axis].wavenumbers
    }

    /// Applies a Fourier multiplier `m(k)` along one axis and returns the
    /// real part.
    pub(crate) fn apply_multiplier(
        &self,
        values: &[f64],
        axis: usize,
        multiplier: impl Fn(f64) -> Complex64,
    ) -> Vec<f64> {
        let k = self.wavenumbers(axis);
        self.apply_index_multiplier(values, axis, |j| multiplier(k[j]))
    }

    /// Zeroes the Nyquist mode along every axis.
    pub(crate) fn remove_nyquist(&self, values: &[f64]) -> Vec<f64> {
        let mut out = values.to_vec();
        for axis in 0..self.dim() {
            let half = self.nodes_on(axis) / 2;
            out = self.apply_index_multiplier(&out, axis, |j| {
                Complex64::new(if j == half { 0.0 } else { 1.0 }, 0.0)
            });
        }
        out
    }

    /// Like [`apply_multiplier`](Self::apply_multiplier) but indexed by FFT
    /// bin.
    fn apply_index_multiplier(
        &self,
        values: &[f64],
        axis: usize,
        multiplier: impl Fn(usize) -> Complex64,
    ) -> Vec<f64> {
        let ax = &self.inner.axes[axis];
        let n = ax.nodes;
        let stride = ax.stride;
        let lines = self.inner.len / n;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.inner.len];
        // gather each line contiguously so one plan call handles all of them
        for line in 0..lines {
            let outer = line / stride;
            let inner = line % stride;
            let start = outer * n * stride + inner;
            for k in 0..n {
                buf[line * n + k] = Complex64::new(values[start + k * stride], 0.0);
            }
        }
        ax.forward.process(&mut buf);
        let factors: Vec<Complex64> = (0..n).map(&multiplier).collect();
        for chunk in buf.chunks_mut(n) {
            for (c, f) in chunk.iter_mut().zip(&factors) {
                *c *= f;
            }
        }
        ax.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        let mut out = vec![0.0; self.inner.len];
        for line in 0..lines {
            let outer = line / stride;
            let inner = line % stride;
            let start = outer * n * stride + inner;
            for k in 0..n {
                out[start + k * stride] = buf[line * n + k].re * scale;
            }
        }
        out
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("nodes", &self.nodes())
            .field("periods", &self.periods())
            .finish()
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .inner
            .axes
            .iter()
            .map(|a| format!("{}@{}", a.nodes, a.period))
            .collect();
        write!(f, "T{}[{}]", self.dim(), parts.join("x"))
    }
}
