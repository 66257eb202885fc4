use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Index of the `(i, j)` entry in the packed upper triangle of an `n × n`
/// symmetric matrix.
#[inline]
pub const fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + b
}

#[inline]
pub const fn sym_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(node) => Err(Error::InvalidInput(format!(
            "{what}: non-finite value {} at node {node}",
            values[node]
        ))),
        None => Ok(()),
    }
}

#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        check_finite(&values, "scalar field")?;
        Ok(Self { grid: grid.clone(), values })
    }

    pub(crate) fn from_raw(grid: &Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid: grid.clone(), values }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self::from_raw(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at every node; `f` receives the node coordinates.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let dim = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.coords(i)[..dim])).collect();
        Self::from_raw(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert!(self.grid.same_shape(&other.grid));
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::from_raw(&self.grid, values)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add_scaled(&self, c: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |self − other|` over nodes.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Spectral first derivative along `axis`.
    /// Projection onto the Fourier modes that spectral differentiation
    /// resolves (Nyquist mode removed on every axis).
    pub fn without_nyquist(&self) -> Self {
        Self::from_raw(&self.grid, self.grid.remove_nyquist(&self.values))
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let v = self.grid.apply_multiplier(&self.values, axis, |k| Complex64::new(0.0, k));
        Self::from_raw(&self.grid, v)
    }

    /// Spectral second derivative along `axis`; identical to applying
    /// [`derivative`](Self::derivative) twice.
    pub fn second_derivative(&self, axis: usize) -> Self {
        let v = self.grid.apply_multiplier(&self.values, axis, |k| Complex64::new(-k * k, 0.0));
        Self::from_raw(&self.grid, v)
    }

    /// `∂ₐ∂ᵦ f`.
    pub fn mixed_derivative(&self, a: usize, b: usize) -> Self {
        if a == b {
            self.second_derivative(a)
        } else {
            self.derivative(a).derivative(b)
        }
    }

    /// Covariant differential `(∂₀f, …, ∂ₙ₋₁f)`.
    pub fn differential(&self) -> Vec<ScalarField> {
        (0..self.grid.dim()).map(|a| self.derivative(a)).collect()
    }
}

/// Spectral derivative of a periodic field along one axis.
pub fn spectral_derivative(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    if axis >= f.grid.dim() {
        return Err(Error::Dimension(format!("axis {axis} on a {}-d grid", f.grid.dim())));
    }
    check_finite(&f.values, "spectral_derivative")?;
    Ok(f.derivative(axis))
}

/// Contravariant vector field, one value array per component.
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: &Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() || components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Dimension("vector field shape does not match grid".into()));
        }
        for c in &components {
            check_finite(c, "vector field")?;
        }
        Ok(Self { grid: grid.clone(), components })
    }

    pub(crate) fn from_raw(grid: &Grid, components: Vec<Vec<f64>>) -> Self {
        Self { grid: grid.clone(), components }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn component_field(&self, i: usize) -> ScalarField {
        ScalarField::from_raw(&self.grid, self.components[i].clone())
    }
}

/// Covariant symmetric 2-tensor, packed upper triangle per node.
#[derive(Clone, Debug)]
pub struct SymTensorField {
    grid: Grid,
    components: Vec<Vec<f64>>,
}

impl SymTensorField {
    pub fn new(grid: &Grid, components: Vec<Vec<f64>>) -> Result<Self> {
        let n = grid.dim();
        if components.len() != sym_len(n) || components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Dimension(format!(
                "symmetric tensor needs {} component arrays of {} nodes",
                sym_len(n),
                grid.len()
            )));
        }
        for c in &components {
            check_finite(c, "tensor field")?;
        }
        Ok(Self { grid: grid.clone(), components })
    }

    pub(crate) fn from_raw(grid: &Grid, components: Vec<Vec<f64>>) -> Self {
        Self { grid: grid.clone(), components }
    }

    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.dim();
        Self::from_raw(grid, vec![vec![0.0; grid.len()]; sym_len(n)])
    }

    /// The flat metric `δᵢⱼ`.
    pub fn identity(grid: &Grid) -> Self {
        Self::conformal(&ScalarField::constant(grid, 1.0))
    }

    /// `w · δᵢⱼ`.
    pub fn conformal(w: &ScalarField) -> Self {
        let grid = w.grid();
        let n = grid.dim();
        let mut t = Self::zeros(grid);
        for i in 0..n {
            t.components[sym_index(n, i, i)] = w.values().to_vec();
        }
        t
    }

    /// Diagonal tensor from per-axis fields.
    pub fn diagonal(diag: &[ScalarField]) -> Result<Self> {
        let grid = diag
            .first()
            .ok_or_else(|| Error::Dimension("empty diagonal".into()))?
            .grid()
            .clone();
        let n = grid.dim();
        if diag.len() != n {
            return Err(Error::Dimension(format!("{} diagonal entries for dim {n}", diag.len())));
        }
        let mut t = Self::zeros(&grid);
        for (i, d) in diag.iter().enumerate() {
            grid.ensure_same(d.grid(), "diagonal tensor")?;
            t.components[sym_index(n, i, i)] = d.values().to_vec();
        }
        Ok(t)
    }

    /// Builds `T` from a function of `(node, i, j)` with `i ≤ j`.
    pub fn from_node_fn(grid: &Grid, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let n = grid.dim();
        let mut comps = vec![vec![0.0; grid.len()]; sym_len(n)];
        for i in 0..n {
            for j in i..n {
                let c = &mut comps[sym_index(n, i, j)];
                for (node, v) in c.iter_mut().enumerate() {
                    *v = f(node, i, j);
                }
            }
        }
        Self::from_raw(grid, comps)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn component(&self, i: usize, j: usize) -> &[f64] {
        &self.components[sym_index(self.grid.dim(), i, j)]
    }

    pub fn component_field(&self, i: usize, j: usize) -> ScalarField {
        ScalarField::from_raw(&self.grid, self.component(i, j).to_vec())
    }

    pub fn packed(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub(crate) fn packed_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.components
    }

    pub fn at(&self, node: usize, i: usize, j: usize) -> f64 {
        self.component(i, j)[node]
    }

    /// Dense `n × n` matrix at one node (row-major, padded to 3×3).
    pub fn matrix_at(&self, node: usize) -> [[f64; 3]; 3] {
        let n = self.grid.dim();
        let mut m = [[0.0; 3]; 3];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = self.at(node, i, j);
            }
        }
        m
    }

    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        Self::from_raw(&self.grid, comps)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        let comps = self.components.iter().map(|a| a.iter().map(|x| c * x).collect()).collect();
        Self::from_raw(&self.grid, comps)
    }

    pub fn add_scaled(&self, c: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }

    /// Pointwise multiplication by a scalar field.
    pub fn mul_scalar(&self, w: &ScalarField) -> Self {
        let comps = self
            .components
            .iter()
            .map(|a| a.iter().zip(w.values()).map(|(x, y)| x * y).collect())
            .collect();
        Self::from_raw(&self.grid, comps)
    }

    /// `T(v, v) = Tᵢⱼ vⁱ vʲ` for a contravariant `v`.
    pub fn quadratic_form(&self, v: &VectorField) -> ScalarField {
        let n = self.dim();
        let mut out = vec![0.0; self.grid.len()];
        for i in 0..n {
            for j in 0..n {
                let t = self.component(i, j);
                let (vi, vj) = (v.component(i), v.component(j));
                for node in 0..out.len() {
                    out[node] += t[node] * vi[node] * vj[node];
                }
            }
        }
        ScalarField::from_raw(&self.grid, out)
    }

    /// `a ⊗ b + b ⊗ a` symmetrized over covariant one-forms, halved:
    /// entries `(aᵢbⱼ + aⱼbᵢ)/2`.
    pub fn sym_product(a: &[ScalarField], b: &[ScalarField]) -> Self {
        let grid = a[0].grid().clone();
        Self::from_node_fn(&grid, |node, i, j| {
            0.5 * (a[i].values()[node] * b[j].values()[node]
                + a[j].values()[node] * b[i].values()[node])
        })
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Christoffel symbols of the second kind `Γᵏᵢⱼ`; lower pair packed.
#[derive(Clone, Debug)]
pub struct Christoffel3Field {
    grid: Grid,
    /// `components[k][sym_index(i, j)]`
    components: Vec<Vec<Vec<f64>>>,
}

impl Christoffel3Field {
    pub(crate) fn from_raw(grid: &Grid, components: Vec<Vec<Vec<f64>>>) -> Self {
        Self { grid: grid.clone(), components }
    }

    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.dim();
        Self::from_raw(grid, vec![vec![vec![0.0; grid.len()]; sym_len(n)]; n])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `Γᵏᵢⱼ` values; symmetric in `(i, j)` by construction.
    pub fn component(&self, k: usize, i: usize, j: usize) -> &[f64] {
        &self.components[k][sym_index(self.grid.dim(), i, j)]
    }

    pub(crate) fn component_mut(&mut self, k: usize, i: usize, j: usize) -> &mut Vec<f64> {
        let n = self.grid.dim();
        &mut self.components[k][sym_index(n, i, j)]
    }

    pub fn component_field(&self, k: usize, i: usize, j: usize) -> ScalarField {
        ScalarField::from_raw(&self.grid, self.component(k, i, j).to_vec())
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .flatten()
            .zip(other.components.iter().flatten())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn packed_indices_cover_upper_triangle() {
        assert_eq!(sym_index(1, 0, 0), 0);
        assert_eq!(sym_index(2, 0, 1), 1);
        assert_eq!(sym_index(2, 1, 0), 1);
        assert_eq!(sym_index(2, 1, 1), 2);
        let idx: Vec<usize> =
            (0..3).flat_map(|i| (i..3).map(move |j| sym_index(3, i, j))).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid::new(&[16, 8], &[2.0, 3.0]).unwrap();
        let f = ScalarField::constant(&g, 4.2);
        for a in 0..2 {
            assert!(spectral_derivative(&f, a).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = Grid::line(64, 2.0 * PI).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin());
        let df = spectral_derivative(&f, 0).unwrap();
        let exact = ScalarField::from_fn(&g, |x| x[0].cos());
        assert!(df.max_diff(&exact) <= 1e-12);
    }

    #[test]
    fn derivative_along_second_axis() {
        let g = Grid::new(&[32, 32], &[2.0 * PI, 2.0 * PI]).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin() * x[1].cos());
        let df = spectral_derivative(&f, 1).unwrap();
        let exact = ScalarField::from_fn(&g, |x| -x[0].sin() * x[1].sin());
        assert!(df.max_diff(&exact) <= 1e-12);
    }

    #[test]
    fn derivative_rejects_bad_axis_and_nan() {
        let g = Grid::line(8, 1.0).unwrap();
        let f = ScalarField::constant(&g, 1.0);
        assert!(spectral_derivative(&f, 1).is_err());
        let bad = ScalarField::from_raw(&g, vec![f64::NAN; 8]);
        assert!(matches!(spectral_derivative(&bad, 0), Err(Error::InvalidInput(_))));
        assert!(ScalarField::new(&g, vec![f64::INFINITY; 8]).is_err());
    }

    #[test]
    fn second_derivative_matches_repeated_first() {
        let g = Grid::line(32, 3.0).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0] / 3.0).sin().exp());
        let a = f.second_derivative(0);
        let b = f.derivative(0).derivative(0);
        assert!(a.max_diff(&b) < 1e-10);
    }
}
