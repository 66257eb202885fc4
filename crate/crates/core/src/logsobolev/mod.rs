//! Optimal log-Sobolev constants as constrained minima
//! `μ = inf {F(u) : ∫u² w dμ = 1}`, with
//! `F(u) = ∫[4t|∇u|² + a u² − u² log u²] w dμ` and `w = (4πt)^{−m/2}`.
//! The zeroth-order coefficient is `a = −m` for the plain constant,
//! `a = −m(1 + Kt/2)²` for the K-variant and `a = τR_q − (n+q)` along a
//! Lott flow (with `t = τ`, `m = n + q`).
//!
//! Iterates are carried as `ℓ = log u`, so every iterate is positive. A
//! semi-implicit normalized gradient flow does the descent; a damped Newton
//! iteration on the Euler-Lagrange system `−4tLu + au − 2u log u = μu`,
//! `∫u² w dμ = 1` refines it. Newton steps are least-squares solutions
//! through an SVD: translation-invariant problems have a singular direction.
//! Operators are assembled densely, which caps the grid size.
//!
//! The spectral first derivative drops the Nyquist mode, which would make
//! grid-scale oscillation free of gradient energy and let it undercut every
//! smooth minimizer. The discrete energy therefore charges the Nyquist
//! component of each axis `k_N²⟨ρgᵃᵃ⟩∫|P_N u|² dx`, and `L` below means the
//! operator of that energy; on resolved functions the extra term vanishes.

mod io;
mod oracle;


use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{bakry_emery_m_or_n, Verdict};
use crate::error::{Error, Result};
use crate::flows::{r_q, GeometryPath, LottState, LottTrajectory, SUPER_FLOW_SLACK};
use crate::geometry::{GeometrySnapshot, ScalarField};

pub use io::SolutionSummary;
pub use oracle::OracleOptions;

/// Euler-Lagrange defect `‖−4tLu + au − 2u log u − μu‖_{L²(w dμ)}` required.
pub const EL_TOLERANCE: f64 = 1e-8;

/// Restarts whose constants differ by more than this flag non-uniqueness.
pub const NON_UNIQUE_GAP: f64 = 1e-7;

/// Slack for the monotonicity verdict of `μ`.
pub const MU_MONOTONE_SLACK: f64 = 1e-7;

/// Largest grid the dense solver accepts.
pub const MAX_DENSE_NODES: usize = 2048;

/// Smallest value an iterate may take; underflowing tails are lifted to it.
const POSITIVE_FLOOR: f64 = 1e-290;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Random positive starting points in addition to `u ∝ 1`.
    pub restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Descent hands over to Newton below this defect.
    pub descent_tolerance: f64,
    pub max_descent_steps: usize,
    pub max_newton_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            seed: 0,
            tolerance: EL_TOLERANCE,
            descent_tolerance: 1e-3,
            max_descent_steps: 5000,
            max_newton_steps: 80,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LogSobolevSolution {
    /// `t`, or `τ` for the Lott variant.
    pub t: f64,
    pub mu: f64,
    /// Positive minimizer with `∫u² w dμ = 1`.
    pub u: ScalarField,
    /// Euler-Lagrange defect at `(u, μ)`.
    pub residual: f64,
    /// `|λ − F(u)|` for the multiplier `λ` found by Newton.
    pub multiplier_gap: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Constants of every converged start, in start order (`u ∝ 1` first).
    pub candidates: Vec<f64>,
    pub non_unique: bool,
}

/// One instance of the constrained minimization.
#[derive(Clone, Debug)]
pub struct LogSobolevProblem {
    snap: GeometrySnapshot,
    t: f64,
    m: f64,
    coefficient: ScalarField,
    /// `(axis, k_N²⟨ρgᵃᵃ⟩)` for every axis with an even node count.
    nyquist: Vec<(usize, f64)>,
}

impl LogSobolevProblem {
    /// Any zeroth-order coefficient `a`.
    pub fn custom(snap: &GeometrySnapshot, t: f64, m: f64, coefficient: ScalarField) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Parameter(format!("t = {t} must be positive")));
        }
        let n = snap.dim() as f64;
        if !(m.is_finite() && m >= n) {
            return Err(Error::Parameter(format!("m = {m} must be at least the dimension {n}")));
        }
        snap.grid().ensure_same(coefficient.grid(), "coefficient vs snapshot")?;
        if snap.grid().len() > MAX_DENSE_NODES {
            return Err(Error::Precondition(format!(
                "dense solver takes at most {MAX_DENSE_NODES} nodes, grid has {}",
                snap.grid().len()
            )));
        }
        let grid = snap.grid();
        let rho = snap.measure_density().values();
        let nyquist = (0..grid.dim())
            .filter(|&a| grid.nodes_on(a) % 2 == 0)
            .map(|a| {
                let k = PI / grid.spacing(a);
                let gaa = snap.inverse_metric().component(a, a);
                let mean = rho.iter().zip(gaa).map(|(r, g)| r * g).sum::<f64>() / grid.len() as f64;
                (a, k * k * mean)
            })
            .collect();
        Ok(Self { snap: snap.clone(), t, m, coefficient, nyquist })
    }

    pub fn mu(snap: &GeometrySnapshot, t: f64, m: f64) -> Result<Self> {
        Self::custom(snap, t, m, ScalarField::constant(snap.grid(), -m))
    }

    pub fn mu_k(snap: &GeometrySnapshot, t: f64, m: f64, k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Parameter(format!("K = {k} must be non-negative")));
        }
        let c = m * (1.0 + 0.5 * k * t).powi(2);
        Self::custom(snap, t, m, ScalarField::constant(snap.grid(), -c))
    }

    /// Base problem of the warped product at a Lott state, `n` the base
    /// dimension and `q` the fiber dimension.
    pub fn lott(state: &LottState, tau: f64, n: usize, q: f64) -> Result<Self> {
        let snap = state.snapshot()?;
        if n != snap.dim() {
            return Err(Error::Dimension(format!("n = {n} but the base grid has dimension {}", snap.dim())));
        }
        let r = r_q(&snap, q)?;
        Self::lott_with_curvature(&snap, tau, q, &r)
    }

    /// As [`Self::lott`] with a supplied `R_q` field.
    pub fn lott_with_curvature(snap: &GeometrySnapshot, tau: f64, q: f64, r: &ScalarField) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::Parameter(format!("q = {q} must be positive")));
        }
        let m = snap.dim() as f64 + q;
        Self::custom(snap, tau, m, r.scale(tau).add(&ScalarField::constant(snap.grid(), -m)))
    }

    pub fn snapshot(&self) -> &GeometrySnapshot {
        &self.snap
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn coefficient(&self) -> &ScalarField {
        &self.coefficient
    }

    /// `(4πt)^{−m/2}`.
    pub fn weight(&self) -> f64 {
        (4.0 * PI * self.t).powf(-0.5 * self.m)
    }

    /// `∫u² w dμ`.
    pub fn norm_sq(&self, u: &ScalarField) -> Result<f64> {
        Ok(self.weight() * self.snap.integrate(&u.mul(u))?)
    }

    /// `u / ‖u‖`.
    pub fn normalize(&self, u: &ScalarField) -> Result<ScalarField> {
        let n = self.norm_sq(u)?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("cannot normalize a zero function".into()));
        }
        Ok(u.scale(n.sqrt().recip()))
    }

    /// `F(u)`; `u` may change sign.
    pub fn functional(&self, u: &ScalarField) -> Result<f64> {
        self.snap.grid().ensure_same(u.grid(), "function vs snapshot")?;
        if !u.is_finite() {
            return Err(Error::InvalidInput("function has non-finite values".into()));
        }
        Ok(self.functional_of(u.values()))
    }

    fn functional_of(&self, u: &[f64]) -> f64 {
        let f = ScalarField::from_raw(self.snap.grid(), u.to_vec());
        let du = f.differential();
        let grad = self.snap.inner_forms(&du, &du);
        let four_t = 4.0 * self.t;
        let integrand: Vec<f64> = u
            .iter()
            .zip(grad.values())
            .zip(self.coefficient.values())
            .map(|((&v, &g), &a)| {
                let sq = v * v;
                let ent = if sq > 0.0 { sq * sq.ln() } else { 0.0 };
                four_t * g + a * sq - ent
            })
            .collect();
        let penalty: f64 = self
            .nyquist
            .iter()
            .map(|&(a, kappa)| kappa * self.nyquist_part(u, a).iter().map(|v| v * v).sum::<f64>())
            .sum();
        self.weight() * (self.snap.integrate_unchecked(&integrand) + four_t * penalty * self.snap.grid().cell_volume())
    }

    /// Component of `u` along the alternating mode of `axis`, line by line.
    fn nyquist_part(&self, u: &[f64], axis: usize) -> Vec<f64> {
        let grid = self.snap.grid();
        let stride = grid.stride(axis);
        let n = grid.nodes_on(axis);
        let sign = |node: usize| if grid.multi_index(node)[axis] % 2 == 0 { 1.0 } else { -1.0 };
        let base = |node: usize| node - grid.multi_index(node)[axis] * stride;
        let mut sums = vec![0.0; u.len()];
        for (node, v) in u.iter().enumerate() {
            sums[base(node)] += sign(node) * v;
        }
        (0..u.len()).map(|node| sign(node) * sums[base(node)] / n as f64).collect()
    }

    /// `L u` of the discrete energy: the Witten Laplacian minus the Nyquist
    /// charge.
    fn apply_l(&self, u: &ScalarField) -> Vec<f64> {
        let mut lu = self.snap.witten_laplacian_unchecked(u).into_values();
        let rho = self.snap.measure_density().values();
        for &(a, kappa) in &self.nyquist {
            for ((l, p), r) in lu.iter_mut().zip(self.nyquist_part(u.values(), a)).zip(rho) {
                *l -= kappa * p / r;
            }
        }
        lu
    }

    /// `−4tLu + au − 2u log u − μu` for positive `u`.
    pub fn el_residual(&self, u: &ScalarField, mu: f64) -> Result<ScalarField> {
        self.snap.grid().ensure_same(u.grid(), "function vs snapshot")?;
        if !(u.is_finite() && u.min() > 0.0) {
            return Err(Error::InvalidInput("the Euler-Lagrange operator needs a positive function".into()));
        }
        let lu = self.apply_l(u);
        Ok(self.residual_of(u.values(), &lu, mu))
    }

    fn residual_of(&self, u: &[f64], lu: &[f64], mu: f64) -> ScalarField {
        let four_t = 4.0 * self.t;
        let r = u
            .iter()
            .zip(lu)
            .zip(self.coefficient.values())
            .map(|((&v, &l), &a)| -four_t * l + a * v - 2.0 * v * v.ln() - mu * v)
            .collect();
        ScalarField::from_raw(self.snap.grid(), r)
    }

    /// `‖−4tLu + au − 2u log u − μu‖_{L²(w dμ)}`.
    pub fn el_defect(&self, u: &ScalarField, mu: f64) -> Result<f64> {
        let r = self.el_residual(u, mu)?;
        Ok(self.weighted_norm(r.values()))
    }

    fn weighted_norm(&self, r: &[f64]) -> f64 {
        let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
        (self.weight() * self.snap.integrate_unchecked(&sq)).max(0.0).sqrt()
    }

    /// `−4tL` as a dense matrix acting on node values.
    fn operator(&self) -> DMatrix<f64> {
        let grid = self.snap.grid();
        let len = grid.len();
        let columns: Vec<Vec<f64>> = (0..len)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![0.0; len];
                e[j] = 1.0;
                let l = self.apply_l(&ScalarField::from_raw(grid, e));
                l.iter().map(|v| -4.0 * self.t * v).collect()
            })
            .collect();
        DMatrix::from_fn(len, len, |i, j| columns[j][i])
    }

    fn uniform(&self) -> Vec<f64> {
        let c = (self.weight() * self.snap.total_measure()).sqrt().recip();
        vec![c; self.snap.grid().len()]
    }

    /// Smooth random positive start `exp(Σ low modes)`, normalized.
    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let grid = self.snap.grid();
        let modes: Vec<Vec<(f64, f64)>> = (0..grid.dim())
            .map(|_| (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        let periods = grid.periods();
        let f = ScalarField::from_fn(grid, |x| {
            let mut s = 0.0;
            for (a, m) in modes.iter().enumerate() {
                let th = 2.0 * PI * x[a] / periods[a];
                for (k, (c, d)) in m.iter().enumerate() {
                    let kk = (k + 1) as f64;
                    s += c * (kk * th).cos() + d * (kk * th).sin();
                }
            }
            s.exp()
        });
        self.normalize(&f).map(ScalarField::into_values).unwrap_or_else(|_| self.uniform())
    }

    fn quadrature(&self) -> Vec<f64> {
        let cell = self.snap.grid().cell_volume();
        self.snap.measure_density().values().iter().map(|r| r * cell).collect()
    }

    fn normalized(&self, mut u: Vec<f64>) -> Vec<f64> {
        let q = self.quadrature();
        let n = self.weight() * crate::geometry::neumaier_sum(u.iter().zip(&q).map(|(v, w)| v * v * w));
        let s = n.sqrt().recip();
        for v in &mut u {
            *v = (*v * s).max(POSITIVE_FLOOR);
        }
        u
    }

    fn defect_at(&self, op: &DMatrix<f64>, u: &[f64], mu: f64) -> f64 {
        let lu = op * DVector::from_column_slice(u);
        let r: Vec<f64> = u
            .iter()
            .zip(lu.iter())
            .zip(self.coefficient.values())
            .map(|((&v, &l), &a)| l + a * v - 2.0 * v * v.ln() - mu * v)
            .collect();
        self.weighted_norm(&r)
    }

    /// Normalized gradient flow `∂ₛu = 4tLu − au + 2u log u`, split into an
    /// exact diagonal factor and an implicit Euler step of the operator.
    fn descend(&self, op: &DMatrix<f64>, mut u: Vec<f64>, opts: &SolverOptions) -> (Vec<f64>, usize) {
        let len = u.len();
        let mut ds = 0.5;
        let mut lu = (DMatrix::identity(len, len) + op * ds).lu();
        let mut value = self.functional_of(&u);
        let mut accepted = 0usize;
        let mut steps = 0;
        while steps < opts.max_descent_steps {
            steps += 1;
            let pre: Vec<f64> = u
                .iter()
                .zip(self.coefficient.values())
                .map(|(&v, &a)| v * (ds * (2.0 * v.ln() - a)).min(600.0).exp())
                .collect();
            let next = lu.solve(&DVector::from_vec(pre)).map(|y| self.normalized(y.as_slice().to_vec()));
            let candidate = next.filter(|y| y.iter().all(|v| v.is_finite()));
            let next_value = candidate.as_ref().map(|y| self.functional_of(y));
            match (candidate, next_value) {
                (Some(y), Some(f)) if f.is_finite() && f <= value => {
                    let gain = value - f;
                    u = y;
                    value = f;
                    accepted += 1;
                    if self.defect_at(op, &u, value) <= opts.descent_tolerance
                        || gain <= 1e-15 * (1.0 + value.abs())
                    {
                        break;
                    }
                    if accepted % 8 == 0 && ds < 1e3 {
                        ds *= 2.0;
                        lu = (DMatrix::identity(len, len) + op * ds).lu();
                    }
                }
                _ => {
                    ds *= 0.25;
                    if ds < 1e-12 {
                        break;
                    }
                    lu = (DMatrix::identity(len, len) + op * ds).lu();
                }
            }
        }
        (u, steps)
    }

    /// Damped Newton on the Euler-Lagrange system in the unknowns
    /// `(log u, λ)`. Returns `(u, λ, iterations)`.
    fn refine(&self, op: &DMatrix<f64>, u0: Vec<f64>, opts: &SolverOptions) -> Result<(Vec<f64>, f64, usize)> {
        let len = u0.len();
        let w = self.weight();
        let q = self.quadrature();
        let scale: Vec<f64> = q.iter().map(|x| (w * x).sqrt()).collect();
        let a = self.coefficient.values();
        let mut ell: Vec<f64> = u0.iter().map(|v| v.ln()).collect();
        let mut lambda = self.functional_of(&u0);

        let merit = |ell: &[f64], lambda: f64| -> (f64, Vec<f64>, Vec<f64>, f64) {
            let u: Vec<f64> = ell.iter().map(|l| l.exp()).collect();
            let lu = op * DVector::from_column_slice(&u);
            let r: Vec<f64> = (0..len)
                .map(|i| scale[i] * (lu[i] + a[i] * u[i] - 2.0 * u[i] * ell[i] - lambda * u[i]))
                .collect();
            let c = w * crate::geometry::neumaier_sum(u.iter().zip(&q).map(|(v, x)| v * v * x)) - 1.0;
            let m = r.iter().map(|x| x * x).sum::<f64>() + c * c;
            (m, u, r, c)
        };

        let target = 0.01 * opts.tolerance;
        let (mut m, mut u, mut r, mut c) = merit(&ell, lambda);
        let mut iterations = 0;
        while iterations < opts.max_newton_steps && m.sqrt() > target {
            iterations += 1;
            let mut jac = DMatrix::zeros(len + 1, len + 1);
            for j in 0..len {
                for i in 0..len {
                    jac[(i, j)] = scale[i] * op[(i, j)] * u[j];
                }
                jac[(j, j)] += scale[j] * (a[j] - 2.0 * ell[j] - 2.0 - lambda) * u[j];
                jac[(j, len)] = -scale[j] * u[j];
                jac[(len, j)] = 2.0 * w * q[j] * u[j] * u[j];
            }
            let mut rhs = DVector::zeros(len + 1);
            for i in 0..len {
                rhs[i] = -r[i];
            }
            rhs[len] = -c;
            let svd = jac.svd(true, true);
            let cutoff = 1e-13 * svd.singular_values.max();
            let step = svd
                .solve(&rhs, cutoff)
                .map_err(|e| Error::Precondition(format!("least-squares Newton step failed: {e}")))?;
            let mut alpha = 1.0;
            let mut improved = false;
            while alpha >= 1.0 / 1024.0 {
                let trial: Vec<f64> = (0..len).map(|i| ell[i] + alpha * step[i]).collect();
                let trial_lambda = lambda + alpha * step[len];
                let (tm, tu, tr, tc) = merit(&trial, trial_lambda);
                if tm.is_finite() && tm < m {
                    ell = trial;
                    lambda = trial_lambda;
                    (m, u, r, c) = (tm, tu, tr, tc);
                    improved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        let u = self.normalized(u);
        let mu = self.functional_of(&u);
        let defect = self.defect_at(op, &u, mu);
        if !(defect <= opts.tolerance) {
            return Err(Error::Convergence { iterations, defect, last_iterate: u });
        }
        Ok((u, lambda, iterations))
    }

    /// Minimizes over `u ∝ 1` and `opts.restarts` random positive starts.
    pub fn solve(&self, opts: &SolverOptions) -> Result<LogSobolevSolution> {
        if !(opts.tolerance > 0.0) {
            return Err(Error::Parameter("tolerance must be positive".into()));
        }
        let op = self.operator();
        let mut starts = vec![self.uniform()];
        for i in 0..opts.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
            starts.push(self.random_start(&mut rng));
        }
        let runs: Vec<Result<(Vec<f64>, f64, usize)>> = starts
            .into_par_iter()
            .map(|u0| {
                let (u, steps) = self.descend(&op, u0, opts);
                self.refine(&op, u, opts).map(|(u, lambda, it)| (u, lambda, it + steps))
            })
            .collect();
        let mut first_error = None;
        let mut converged = Vec::new();
        for run in runs {
            match run {
                Ok(x) => converged.push(x),
                Err(e) => {
                    first_error.get_or_insert(e);
                }
            }
        }
        if converged.is_empty() {
            return Err(first_error.expect("at least one start"));
        }
        let uniform = self.uniform();
        let q = self.quadrature();
        let w = self.weight();
        let distance = |u: &[f64]| -> f64 {
            w * u.iter().zip(&uniform).zip(&q).map(|((a, b), x)| (a - b).powi(2) * x).sum::<f64>()
        };
        let scored: Vec<(f64, f64, usize)> = converged
            .iter()
            .enumerate()
            .map(|(i, (u, _, _))| (self.functional_of(u), distance(u), i))
            .collect();
        let candidates: Vec<f64> = scored.iter().map(|s| s.0).collect();
        let low = candidates.iter().copied().fold(f64::INFINITY, f64::min);
        let high = candidates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tie = 1e-10 * (1.0 + low.abs());
        let best = scored
            .iter()
            .filter(|s| s.0 <= low + tie)
            .min_by(|x, y| x.1.total_cmp(&y.1).then(x.2.cmp(&y.2)))
            .expect("non-empty");
        let (u, lambda, iterations) = converged.swap_remove(best.2);
        let mu = best.0;
        let residual = self.defect_at(&op, &u, mu);
        Ok(LogSobolevSolution {
            t: self.t,
            mu,
            u: ScalarField::from_raw(self.snap.grid(), u),
            residual,
            multiplier_gap: (lambda - mu).abs(),
            iterations,
            seed: opts.seed,
            candidates,
            non_unique: high - low > NON_UNIQUE_GAP,
        })
    }

    /// Checks `F(v) ≥ μ − 1e−8` for `samples` random normalized `v`.
    pub fn verify_lsi(&self, mu: f64, samples: usize, seed: u64) -> Result<LsiCheck> {
        let grid = self.snap.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut min_gap = f64::INFINITY;
        for s in 0..samples {
            let v = if s % 2 == 0 {
                ScalarField::from_raw(grid, self.random_start(&mut rng))
            } else {
                // signed, rough test function
                let raw: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                ScalarField::from_raw(grid, raw).without_nyquist()
            };
            let v = self.normalize(&v)?;
            min_gap = min_gap.min(self.functional(&v)? - mu);
        }
        Ok(LsiCheck { samples, min_gap, passed: min_gap >= -LSI_SLACK })
    }
}

/// Slack in the inequality checks of [`LogSobolevProblem::verify_lsi`].
pub const LSI_SLACK: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsiCheck {
    pub samples: usize,
    /// `min F(v) − μ` over the samples.
    pub min_gap: f64,
    pub passed: bool,
}

/// `μ(t)` with `(4πt)^{−m/2}` normalization.
pub fn solve_mu(snap: &GeometrySnapshot, t: f64, m: f64, opts: &SolverOptions) -> Result<LogSobolevSolution> {
    LogSobolevProblem::mu(snap, t, m)?.solve(opts)
}

/// `μ_K(t)`, zeroth-order coefficient `m(1 + Kt/2)²`.
pub fn solve_mu_k(
    snap: &GeometrySnapshot,
    t: f64,
    m: f64,
    k: f64,
    opts: &SolverOptions,
) -> Result<LogSobolevSolution> {
    LogSobolevProblem::mu_k(snap, t, m, k)?.solve(opts)
}

/// `μ(τ)` at a Lott state, with `τR_q` in the potential term.
pub fn solve_mu_lott(
    state: &LottState,
    tau: f64,
    n: usize,
    q: f64,
    opts: &SolverOptions,
) -> Result<LogSobolevSolution> {
    LogSobolevProblem::lott(state, tau, n, q)?.solve(opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuSample {
    /// `t`, or `τ` for Lott series.
    pub t: f64,
    pub mu: f64,
    pub residual: f64,
    pub non_unique: bool,
    /// The curvature condition of the monotonicity statement held here.
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuSeries {
    pub m: f64,
    pub k: f64,
    pub samples: Vec<MuSample>,
    pub verdict: Verdict,
}

fn check_increasing(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("sample times must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

fn verdict(samples: &[MuSample]) -> Verdict {
    let certified = samples.iter().all(|s| s.certified);
    let holds = samples.windows(2).all(|w| w[1].mu <= w[0].mu + MU_MONOTONE_SLACK);
    match (certified, holds) {
        (false, _) => Verdict::NotApplicable,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    }
}

/// `μ_K(t)` on `path` at `times`. Each sample is certified when
/// `½∂ₜg + Ric_{m,n}(L) + Kg ≥ 0` there; the verdict is withheld otherwise.
pub fn mu_monotonicity(
    path: &dyn GeometryPath,
    times: &[f64],
    m: f64,
    k: f64,
    opts: &SolverOptions,
) -> Result<MuSeries> {
    check_increasing(times)?;
    let samples = times
        .iter()
        .map(|&t| {
            let t = path.clamp_time(t)?;
            let snap = path.snapshot_at(t)?;
            let tensor = bakry_emery_m_or_n(&snap, m)?
                .add_scaled(0.5, &path.metric_rate_at(t)?)
                .add_scaled(k, snap.metric());
            let certified = snap.min_rel_eigenvalue(&tensor)?.min() >= -SUPER_FLOW_SLACK;
            let sol = solve_mu_k(&snap, t, m, k, opts)?;
            Ok(MuSample { t, mu: sol.mu, residual: sol.residual, non_unique: sol.non_unique, certified })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = verdict(&samples);
    Ok(MuSeries { m, k, samples, verdict })
}

/// `μ(τ)` along a Lott flow at `τ = T − t`, `T` the end of the trajectory.
/// The flow itself is the hypothesis, so every sample is certified.
pub fn mu_monotonicity_lott(traj: &LottTrajectory, taus: &[f64], opts: &SolverOptions) -> Result<MuSeries> {
    check_increasing(taus)?;
    let (_, end) = traj.interval();
    let n = traj.grid().dim();
    let samples = taus
        .iter()
        .map(|&tau| {
            let state = traj.state_at(end - tau)?;
            let sol = solve_mu_lott(&state, tau, n, traj.q, opts)?;
            Ok(MuSample { t: tau, mu: sol.mu, residual: sol.residual, non_unique: sol.non_unique, certified: true })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = verdict(&samples);
    Ok(MuSeries { m: n as f64 + traj.q, k: 0.0, samples, verdict })
}
