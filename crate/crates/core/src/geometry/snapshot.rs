//! Metric + potential at one instant, with lazily cached curvature.

use std::sync::{Arc, OnceLock};

use super::field::{sym_index, sym_len, Christoffel3Field, ScalarField, SymTensorField, VectorField};
use super::grid::Grid;
use super::linalg;
use crate::error::{Error, Result};

/// Smallest admissible metric eigenvalue at any node.
pub const MIN_METRIC_EIGENVALUE: f64 = 1e-12;

/// Inverse metric and `√det g`; fails on the first node that is not
/// positive-definite.
pub fn invert_metric(g: &SymTensorField) -> Result<(SymTensorField, ScalarField)> {
    let grid = g.grid();
    let n = grid.dim();
    let mut inv = vec![vec![0.0; grid.len()]; sym_len(n)];
    let mut sqrt_det = vec![0.0; grid.len()];
    for node in 0..grid.len() {
        let m = g.matrix_at(node);
        let smallest = linalg::sym_eigenvalues(&m, n)[0];
        if !(smallest > MIN_METRIC_EIGENVALUE) {
            return Err(Error::NotPositiveDefinite { node, eigenvalue: smallest });
        }
        let mi = linalg::inverse(&m, n);
        for i in 0..n {
            for j in i..n {
                inv[sym_index(n, i, j)][node] = mi[i][j];
            }
        }
        sqrt_det[node] = linalg::det(&m, n).sqrt();
    }
    Ok((SymTensorField::from_raw(grid, inv), ScalarField::from_raw(grid, sqrt_det)))
}

fn christoffel_with_inverse(g: &SymTensorField, ginv: &SymTensorField) -> Christoffel3Field {
    let grid = g.grid();
    let n = grid.dim();
    // dg[a][c] = ∂ₐ of packed component c
    let dg: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|a| {
            g.packed()
                .iter()
                .map(|c| ScalarField::from_raw(grid, c.clone()).derivative(a).into_values())
                .collect()
        })
        .collect();
    let d = |a: usize, i: usize, j: usize| -> &[f64] { &dg[a][sym_index(n, i, j)] };
    let len = grid.len();
    // first kind: Γ_{l,ij} = ½(∂ᵢg_{jl} + ∂ⱼg_{il} − ∂ₗg_{ij})
    let mut first = vec![vec![vec![0.0; len]; sym_len(n)]; n];
    for l in 0..n {
        for i in 0..n {
            for j in i..n {
                let out = &mut first[l][sym_index(n, i, j)];
                let (a, b, c) = (d(i, j, l), d(j, i, l), d(l, i, j));
                for node in 0..len {
                    out[node] = 0.5 * (a[node] + b[node] - c[node]);
                }
            }
        }
    }
    let mut gamma = Christoffel3Field::zeros(grid);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let out = gamma.component_mut(k, i, j);
                for l in 0..n {
                    let gkl = ginv.component(k, l);
                    let f = &first[l][sym_index(n, i, j)];
                    for node in 0..len {
                        out[node] += gkl[node] * f[node];
                    }
                }
            }
        }
    }
    gamma
}

/// Levi-Civita connection `Γᵏᵢⱼ = ½gᵏˡ(∂ᵢgⱼₗ + ∂ⱼgᵢₗ − ∂ₗgᵢⱼ)`.
pub fn christoffel(g: &SymTensorField) -> Result<Christoffel3Field> {
    let (ginv, _) = invert_metric(g)?;
    Ok(christoffel_with_inverse(g, &ginv))
}

fn ricci_from(gamma: &Christoffel3Field) -> SymTensorField {
    let grid = gamma.grid();
    let n = grid.dim();
    let len = grid.len();
    // contraction cⱼ = Γᵏₖⱼ
    let contraction: Vec<ScalarField> = (0..n)
        .map(|j| {
            let mut c = vec![0.0; len];
            for k in 0..n {
                for (v, g) in c.iter_mut().zip(gamma.component(k, k, j)) {
                    *v += g;
                }
            }
            ScalarField::from_raw(grid, c)
        })
        .collect();
    let mut out = SymTensorField::zeros(grid);
    for i in 0..n {
        for j in i..n {
            let mut r = vec![0.0; len];
            for k in 0..n {
                let d = gamma.component_field(k, i, j).derivative(k);
                for (v, x) in r.iter_mut().zip(d.values()) {
                    *v += x;
                }
            }
            let dij = contraction[j].derivative(i);
            let dji = contraction[i].derivative(j);
            for node in 0..len {
                r[node] -= 0.5 * (dij.values()[node] + dji.values()[node]);
            }
            for l in 0..n {
                let gl = gamma.component(l, i, j);
                let cl = contraction[l].values();
                for node in 0..len {
                    r[node] += cl[node] * gl[node];
                }
            }
            for k in 0..n {
                for l in 0..n {
                    let a = gamma.component(k, i, l);
                    let b = gamma.component(l, k, j);
                    for node in 0..len {
                        r[node] -= a[node] * b[node];
                    }
                }
            }
            out.packed_mut()[sym_index(n, i, j)] = r;
        }
    }
    out
}

struct Inner {
    metric: SymTensorField,
    potential: ScalarField,
    inverse: SymTensorField,
    sqrt_det: ScalarField,
    density: ScalarField,
    christoffel: OnceLock<Christoffel3Field>,
    ricci: OnceLock<SymTensorField>,
    potential_differential: OnceLock<Vec<ScalarField>>,
}

/// Metric `g`, potential `φ` and the weighted measure `dμ = e^{−φ}√det g dx`.
///
/// Immutable: derived quantities are computed on first use and then shared.
/// Cloning is cheap.
#[derive(Clone)]
pub struct GeometrySnapshot {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for GeometrySnapshot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GeometrySnapshot").field("grid", self.grid()).finish_non_exhaustive()
    }
}

impl GeometrySnapshot {
    pub fn new(metric: SymTensorField, potential: ScalarField) -> Result<Self> {
        metric.grid().ensure_same(potential.grid(), "snapshot potential")?;
        if !potential.is_finite() {
            return Err(Error::InvalidInput("potential has non-finite values".into()));
        }
        let (inverse, sqrt_det) = invert_metric(&metric)?;
        let density = potential.zip_map(&sqrt_det, |phi, s| (-phi).exp() * s);
        if let Some(node) = density.values().iter().position(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "measure density {} at node {node} is not positive",
                density.values()[node]
            )));
        }
        Ok(Self {
            inner: Arc::new(Inner {
                metric,
                potential,
                inverse,
                sqrt_det,
                density,
                christoffel: OnceLock::new(),
                ricci: OnceLock::new(),
                potential_differential: OnceLock::new(),
            }),
        })
    }

    /// Flat metric with the given potential.
    pub fn flat(potential: ScalarField) -> Result<Self> {
        Self::new(SymTensorField::identity(potential.grid()), potential)
    }

    pub fn grid(&self) -> &Grid {
        self.inner.metric.grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn metric(&self) -> &SymTensorField {
        &self.inner.metric
    }

    pub fn potential(&self) -> &ScalarField {
        &self.inner.potential
    }

    pub fn inverse_metric(&self) -> &SymTensorField {
        &self.inner.inverse
    }

    pub fn sqrt_det(&self) -> &ScalarField {
        &self.inner.sqrt_det
    }

    /// `e^{−φ}√det g`, the density of `dμ` against `dx`.
    pub fn measure_density(&self) -> &ScalarField {
        &self.inner.density
    }

    pub fn christoffel(&self) -> &Christoffel3Field {
        self.inner
            .christoffel
            .get_or_init(|| christoffel_with_inverse(&self.inner.metric, &self.inner.inverse))
    }

    pub fn ricci(&self) -> &SymTensorField {
        self.inner.ricci.get_or_init(|| ricci_from(self.christoffel()))
    }

    pub fn scalar_curvature(&self) -> ScalarField {
        self.trace(self.ricci())
    }

    /// `(∂₀φ, …)`.
    pub fn potential_differential(&self) -> &[ScalarField] {
        self.inner.potential_differential.get_or_init(|| self.inner.potential.differential())
    }

    fn check(&self, f: &ScalarField) -> Result<()> {
        self.grid().ensure_same(f.grid(), "field vs snapshot")
    }

    fn check_tensor(&self, t: &SymTensorField) -> Result<()> {
        self.grid().ensure_same(t.grid(), "tensor vs snapshot")
    }

    /// Raises a covariant one-form given as per-axis fields.
    pub fn raise(&self, form: &[ScalarField]) -> VectorField {
        let n = self.dim();
        let len = self.grid().len();
        let comps = (0..n)
            .map(|i| {
                let mut c = vec![0.0; len];
                for (j, fj) in form.iter().enumerate() {
                    let gij = self.inner.inverse.component(i, j);
                    for node in 0..len {
                        c[node] += gij[node] * fj.values()[node];
                    }
                }
                c
            })
            .collect();
        VectorField::from_raw(self.grid(), comps)
    }

    /// `gⁱʲ aᵢ bⱼ` for covariant one-forms.
    pub fn inner_forms(&self, a: &[ScalarField], b: &[ScalarField]) -> ScalarField {
        let n = self.dim();
        let len = self.grid().len();
        let mut out = vec![0.0; len];
        for i in 0..n {
            for j in 0..n {
                let gij = self.inner.inverse.component(i, j);
                let (ai, bj) = (a[i].values(), b[j].values());
                for node in 0..len {
                    out[node] += gij[node] * ai[node] * bj[node];
                }
            }
        }
        ScalarField::from_raw(self.grid(), out)
    }

    /// `(∇f)ⁱ = gⁱʲ∂ⱼf`.
    pub fn gradient(&self, f: &ScalarField) -> Result<VectorField> {
        self.check(f)?;
        Ok(self.raise(&f.differential()))
    }

    /// Covariant Hessian given `f` and its differential.
    pub fn hessian_with(&self, f: &ScalarField, df: &[ScalarField]) -> SymTensorField {
        let n = self.dim();
        let len = self.grid().len();
        let gamma = self.christoffel();
        let mut out = SymTensorField::zeros(self.grid());
        for i in 0..n {
            for j in i..n {
                let mut h = f.mixed_derivative(i, j).into_values();
                for (k, dk) in df.iter().enumerate() {
                    let gk = gamma.component(k, i, j);
                    for node in 0..len {
                        h[node] -= gk[node] * dk.values()[node];
                    }
                }
                out.packed_mut()[sym_index(n, i, j)] = h;
            }
        }
        out
    }

    /// `∇²ᵢⱼf = ∂ᵢ∂ⱼf − Γᵏᵢⱼ∂ₖf`.
    pub fn hessian(&self, f: &ScalarField) -> Result<SymTensorField> {
        self.check(f)?;
        Ok(self.hessian_with(f, &f.differential()))
    }

    /// `gⁱʲTᵢⱼ`.
    pub fn trace(&self, t: &SymTensorField) -> ScalarField {
        let n = self.dim();
        let len = self.grid().len();
        let mut out = vec![0.0; len];
        for i in 0..n {
            for j in 0..n {
                let gij = self.inner.inverse.component(i, j);
                let tij = t.component(i, j);
                for node in 0..len {
                    out[node] += gij[node] * tij[node];
                }
            }
        }
        ScalarField::from_raw(self.grid(), out)
    }

    /// Laplace-Beltrami operator as the `g`-trace of the Hessian.
    pub fn laplace_beltrami(&self, f: &ScalarField) -> Result<ScalarField> {
        Ok(self.trace(&self.hessian(f)?))
    }

    /// Witten Laplacian `Lf = Δf − g(∇φ, ∇f)`.
    ///
    /// Evaluated in divergence form `ρ⁻¹∂ᵢ(ρ gⁱʲ∂ⱼf)` with `ρ` the measure
    /// density, so the discrete operator is symmetric in `L²(dμ)` and
    /// `∫Lf dμ` vanishes to rounding.
    pub fn witten_laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        self.check(f)?;
        Ok(self.witten_laplacian_unchecked(f))
    }

    pub(crate) fn witten_laplacian_unchecked(&self, f: &ScalarField) -> ScalarField {
        let n = self.dim();
        let len = self.grid().len();
        let rho = self.inner.density.values();
        let df = f.differential();
        let mut div = vec![0.0; len];
        for i in 0..n {
            let mut flux = vec![0.0; len];
            for (j, dj) in df.iter().enumerate() {
                let gij = self.inner.inverse.component(i, j);
                for node in 0..len {
                    flux[node] += rho[node] * gij[node] * dj.values()[node];
                }
            }
            let d = ScalarField::from_raw(self.grid(), flux).derivative(i);
            for (v, x) in div.iter_mut().zip(d.values()) {
                *v += x;
            }
        }
        for (v, r) in div.iter_mut().zip(rho) {
            *v /= r;
        }
        ScalarField::from_raw(self.grid(), div)
    }

    /// `Ric(L) = Ric + ∇²φ`.
    pub fn bakry_emery(&self) -> SymTensorField {
        let hess_phi = self.hessian_with(self.potential(), self.potential_differential());
        self.ricci().add(&hess_phi)
    }

    /// `Ric_{m,n}(L) = Ric + ∇²φ − dφ⊗dφ/(m−n)`; `m = ∞` gives [`bakry_emery`](Self::bakry_emery).
    pub fn bakry_emery_m(&self, m: f64) -> Result<SymTensorField> {
        let n = self.dim() as f64;
        if m.is_nan() || m <= n {
            return Err(Error::Parameter(format!(
                "m = {m} must exceed the dimension n = {n} (1/(m−n) is singular)"
            )));
        }
        let dphi = self.potential_differential();
        let outer = SymTensorField::sym_product(dphi, dphi);
        Ok(self.bakry_emery().add_scaled(-1.0 / (m - n), &outer))
    }

    /// Pointwise `gⁱᵏgʲˡTᵢⱼTₖₗ`.
    pub fn tensor_norm_sq(&self, t: &SymTensorField) -> Result<ScalarField> {
        self.check_tensor(t)?;
        let n = self.dim();
        let values = (0..self.grid().len())
            .map(|node| {
                let a = linalg::mul(&self.inner.inverse.matrix_at(node), &t.matrix_at(node), n);
                let aa = linalg::mul(&a, &a, n);
                (0..n).map(|i| aa[i][i]).sum()
            })
            .collect();
        Ok(ScalarField::from_raw(self.grid(), values))
    }

    /// Smallest eigenvalue of `T v = λ g v` at each node.
    pub fn min_rel_eigenvalue(&self, t: &SymTensorField) -> Result<ScalarField> {
        self.check_tensor(t)?;
        let n = self.dim();
        let mut out = Vec::with_capacity(self.grid().len());
        for node in 0..self.grid().len() {
            let ev = linalg::relative_eigenvalues(&t.matrix_at(node), &self.metric().matrix_at(node), n)
                .ok_or(Error::NotPositiveDefinite { node, eigenvalue: f64::NAN })?;
            out.push(ev[0]);
        }
        Ok(ScalarField::from_raw(self.grid(), out))
    }

    /// `∫ f dμ` by the periodic trapezoid rule, summed in node order.
    pub fn integrate(&self, f: &ScalarField) -> Result<f64> {
        self.check(f)?;
        if let Some(node) = f.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite integrand at node {node}")));
        }
        Ok(self.integrate_unchecked(f.values()))
    }

    pub(crate) fn integrate_unchecked(&self, f: &[f64]) -> f64 {
        let rho = self.inner.density.values();
        neumaier_sum(f.iter().zip(rho).map(|(a, r)| a * r)) * self.grid().cell_volume()
    }

    /// Total weighted volume `μ(M)`.
    pub fn total_measure(&self) -> f64 {
        neumaier_sum(self.inner.density.values().iter().copied()) * self.grid().cell_volume()
    }
}

/// Compensated summation in iteration order (deterministic).
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
