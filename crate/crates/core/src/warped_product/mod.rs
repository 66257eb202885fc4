//! Warped products `M × N` with metric `g ⊕ e^{−2φ/q} g_N`.
//!
//! The fiber `N` is a flat torus with period 2π on each of its `q` axes and
//! its measure is normalized to total mass one. Closed-form block formulas
//! work for any real `q > 0`; assembling the product metric on a grid needs
//! an integer `q` with `n + q ≤ 3`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{
    sym_index, sym_len, Christoffel3Field, GeometrySnapshot, Grid, ScalarField, SymTensorField,
    MAX_DIM,
};

#[cfg(test)]
mod tests;

pub const FIBER_PERIOD: f64 = 2.0 * PI;
const DEFAULT_FIBER_NODES: usize = 16;

/// Base snapshot (metric `g`, potential `φ`) plus fiber dimension `q = m − n`.
#[derive(Clone, Debug)]
pub struct WarpedSpec {
    base: GeometrySnapshot,
    q: f64,
    fiber_nodes: usize,
}

impl WarpedSpec {
    pub fn new(base: GeometrySnapshot, q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::Parameter(format!("fiber dimension q = {q} must be positive")));
        }
        Ok(Self { base, q, fiber_nodes: DEFAULT_FIBER_NODES })
    }

    /// Nodes per fiber axis used when the product is assembled.
    pub fn with_fiber_nodes(mut self, nodes: usize) -> Self {
        self.fiber_nodes = nodes;
        self
    }

    pub fn base(&self) -> &GeometrySnapshot {
        &self.base
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn fiber_nodes(&self) -> usize {
        self.fiber_nodes
    }

    /// Warp factor `e^{−2φ/q}` on the base grid.
    pub fn warp_factor(&self) -> ScalarField {
        let q = self.q;
        self.base.potential().map(|phi| (-2.0 * phi / q).exp())
    }

    fn grad_phi_dot(&self, f: &ScalarField) -> ScalarField {
        self.base.inner_forms(self.base.potential_differential(), &f.differential())
    }

    /// Restricts a field to the base grid; product fields must be constant
    /// along the fiber.
    fn base_field(&self, f: &ScalarField) -> Result<ScalarField> {
        if f.grid().same_shape(self.base.grid()) {
            return Ok(f.clone());
        }
        build_warped(self)?.restrict(f)
    }

    /// Closed-form Hessian of a base-only `f`: horizontal block `∇²f`,
    /// fiber block `−(∇φ·∇f/q) g̃_N`, mixed block zero.
    pub fn hessian_blocks(&self, f: &ScalarField) -> Result<BlockTensor> {
        let f = self.base_field(f)?;
        let horizontal = self.base.hessian(&f)?;
        let fiber = self.grad_phi_dot(&f).scale(-1.0 / self.q);
        Ok(BlockTensor { horizontal, fiber })
    }

    /// Same identity in the notation of the Lott setting, where the base
    /// potential is `ψ` and `u = e^{−ψ}`.
    pub fn hessian_general(&self, v: &ScalarField) -> Result<BlockTensor> {
        self.hessian_blocks(v)
    }

    /// Pointwise `(total, horizontal, vertical)` for `|∇̃²f − g̃/2t|²`:
    /// horizontal `|∇²f − g/2t|²`, vertical `(1/q)(∇φ·∇f + q/2t)²`, total the
    /// `g̃`-norm of the assembled block tensor.
    pub fn hessian_norm_decomposition(
        &self,
        f: &ScalarField,
        t: f64,
    ) -> Result<(ScalarField, ScalarField, ScalarField)> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Parameter(format!("t = {t} must be positive")));
        }
        let f = self.base_field(f)?;
        let blocks = self.hessian_blocks(&f)?;
        let shifted = BlockTensor {
            horizontal: blocks.horizontal.add_scaled(-0.5 / t, self.base.metric()),
            fiber: blocks.fiber.map(|c| c - 0.5 / t),
        };
        let horizontal = self.base.tensor_norm_sq(&shifted.horizontal)?;
        let q = self.q;
        let vertical = self.grad_phi_dot(&f).map(|d| (d + q / (2.0 * t)).powi(2) / q);
        let total = shifted.norm_sq(self)?;
        Ok((total, horizontal, vertical))
    }

    /// Ricci blocks of the warped metric with base potential `ψ`:
    /// horizontal `Ric + Hess ψ − (1/q)dψ⊗dψ`, fiber `(1/q)(Δψ − |∇ψ|²) g̃_N`.
    pub fn ricci(&self) -> BlockTensor {
        let horizontal = self.base.bakry_emery_q(self.q);
        let psi = self.base.potential();
        let lap = self.base.trace(&self.base.hessian_with(psi, self.base.potential_differential()));
        let grad_sq = self.grad_phi_dot(psi);
        let fiber = lap.sub(&grad_sq).scale(1.0 / self.q);
        BlockTensor { horizontal, fiber }
    }

    /// `R_q = R + 2Δψ − (1 + 1/q)|∇ψ|²`.
    pub fn scalar_curvature(&self) -> ScalarField {
        let psi = self.base.potential();
        let lap = self.base.trace(&self.base.hessian_with(psi, self.base.potential_differential()));
        let grad_sq = self.grad_phi_dot(psi);
        self.base
            .scalar_curvature()
            .add_scaled(2.0, &lap)
            .add_scaled(-(1.0 + 1.0 / self.q), &grad_sq)
    }
}

impl GeometrySnapshot {
    /// `Ric + ∇²φ − dφ⊗dφ/q` for any real `q > 0`.
    pub(crate) fn bakry_emery_q(&self, q: f64) -> SymTensorField {
        let dphi = self.potential_differential();
        let outer = SymTensorField::sym_product(dphi, dphi);
        self.bakry_emery().add_scaled(-1.0 / q, &outer)
    }
}

/// A symmetric 2-tensor on the warped product in block form
/// `horizontal ⊕ fiber·g̃_N` with zero mixed block, all on the base grid.
#[derive(Clone, Debug)]
pub struct BlockTensor {
    pub horizontal: SymTensorField,
    /// Coefficient of the warped fiber metric `e^{−2φ/q} g_N`.
    pub fiber: ScalarField,
}

impl BlockTensor {
    /// Pointwise `g̃`-norm squared.
    ///
    /// For integer `q` the full `(n+q) × (n+q)` block matrices are formed and
    /// contracted; otherwise the fiber block contributes `q·c²`.
    pub fn norm_sq(&self, spec: &WarpedSpec) -> Result<ScalarField> {
        let base = spec.base();
        let n = base.dim();
        let q = spec.q;
        let qi = q.round() as usize;
        if q.fract() != 0.0 || n + qi > MAX_DIM {
            let h = base.tensor_norm_sq(&self.horizontal)?;
            return Ok(h.zip_map(&self.fiber, |h, c| h + q * c * c));
        }
        let w = spec.warp_factor();
        let gi = base.inverse_metric();
        let dim = n + qi;
        let values = (0..base.grid().len())
            .map(|node| {
                let mut t = [[0.0; 3]; 3];
                let mut inv = [[0.0; 3]; 3];
                for i in 0..n {
                    for j in 0..n {
                        t[i][j] = self.horizontal.at(node, i, j);
                        inv[i][j] = gi.at(node, i, j);
                    }
                }
                let wn = w.values()[node];
                for a in n..dim {
                    t[a][a] = self.fiber.values()[node] * wn;
                    inv[a][a] = 1.0 / wn;
                }
                let a = crate::geometry::linalg::mul(&inv, &t, dim);
                let aa = crate::geometry::linalg::mul(&a, &a, dim);
                (0..dim).map(|i| aa[i][i]).sum()
            })
            .collect();
        ScalarField::new(base.grid(), values)
    }

    /// Product-grid tensor with fiber block `fiber·e^{−2φ/q}δ`.
    pub fn assemble(&self, warped: &WarpedSnapshot) -> SymTensorField {
        let w = warped.spec.warp_factor();
        let coeff = self.fiber.mul(&w);
        warped.assemble_blocks(&self.horizontal, &coeff)
    }
}

/// The assembled product `(M × N, g̃)` on an `(n+q)`-dimensional grid.
#[derive(Clone, Debug)]
pub struct WarpedSnapshot {
    spec: WarpedSpec,
    fiber_len: usize,
    snapshot: GeometrySnapshot,
}

/// Builds `g̃ = g ⊕ e^{−2φ/q} g_N` on the product grid. The product snapshot
/// carries the constant potential `q log 2π`, so its measure is
/// `dμ ⊗ dν_N` with `ν_N(N) = 1`.
pub fn build_warped(spec: &WarpedSpec) -> Result<WarpedSnapshot> {
    let base = spec.base();
    let n = base.dim();
    let q = spec.q;
    if q.fract() != 0.0 || n + q as usize > MAX_DIM {
        return Err(Error::Parameter(format!(
            "assembling the product needs integer q with n + q ≤ {MAX_DIM} (n = {n}, q = {q})"
        )));
    }
    let qi = q as usize;
    let mut nodes = base.grid().nodes();
    let mut periods = base.grid().periods();
    nodes.extend(std::iter::repeat_n(spec.fiber_nodes, qi));
    periods.extend(std::iter::repeat_n(FIBER_PERIOD, qi));
    let grid = Grid::new(&nodes, &periods)?;
    let fiber_len = spec.fiber_nodes.pow(qi as u32);
    let mut out = WarpedSnapshot { spec: spec.clone(), fiber_len, snapshot: base.clone() };
    let metric = out.assemble_blocks_on(&grid, base.metric(), &spec.warp_factor());
    let potential = ScalarField::constant(&grid, q * FIBER_PERIOD.ln());
    out.snapshot = GeometrySnapshot::new(metric, potential)?;
    Ok(out)
}

impl WarpedSnapshot {
    pub fn spec(&self) -> &WarpedSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Grid {
        self.snapshot.grid()
    }

    /// Product snapshot; its measure is `dμ ⊗ dν_N`.
    pub fn snapshot(&self) -> &GeometrySnapshot {
        &self.snapshot
    }

    pub fn metric(&self) -> &SymTensorField {
        self.snapshot.metric()
    }

    /// Extends a base field constantly along the fiber.
    pub fn lift(&self, f: &ScalarField) -> ScalarField {
        let fl = self.fiber_len;
        let values = (0..self.grid().len()).map(|p| f.values()[p / fl]).collect();
        ScalarField::new(self.grid(), values).expect("lifted values are finite")
    }

    /// Restriction to the base; fails if `f` varies along the fiber.
    pub fn restrict(&self, f: &ScalarField) -> Result<ScalarField> {
        self.grid().ensure_same(f.grid(), "product field")?;
        let fl = self.fiber_len;
        let scale = f.max_abs().max(1.0);
        let mut out = Vec::with_capacity(self.grid().len() / fl);
        for chunk in f.values().chunks(fl) {
            if chunk.iter().any(|v| (v - chunk[0]).abs() > 1e-12 * scale) {
                return Err(Error::Precondition("field varies along the fiber".into()));
            }
            out.push(chunk[0]);
        }
        ScalarField::new(self.spec.base().grid(), out)
    }

    fn assemble_blocks(&self, horizontal: &SymTensorField, fiber: &ScalarField) -> SymTensorField {
        self.assemble_blocks_on(self.grid(), horizontal, fiber)
    }

    fn assemble_blocks_on(
        &self,
        grid: &Grid,
        horizontal: &SymTensorField,
        fiber: &ScalarField,
    ) -> SymTensorField {
        let n = horizontal.dim();
        let dim = grid.dim();
        let fl = self.fiber_len;
        let len = grid.len();
        let mut packed = vec![vec![0.0; len]; sym_len(dim)];
        for i in 0..n {
            for j in i..n {
                let src = horizontal.component(i, j);
                packed[sym_index(dim, i, j)] = (0..len).map(|p| src[p / fl]).collect();
            }
        }
        for a in n..dim {
            packed[sym_index(dim, a, a)] = (0..len).map(|p| fiber.values()[p / fl]).collect();
        }
        SymTensorField::new(grid, packed).expect("assembled tensor is finite")
    }

    /// Closed-form Christoffel symbols of `g̃`:
    /// `Γ̃ᵏᵢⱼ = Γᵏᵢⱼ`, `Γ̃ᵏ_αβ = q⁻¹gᵏˡ∂ₗφ g̃_αβ`, `Γ̃^β_iα = −(∂ᵢφ/q)δ^β_α`,
    /// all other blocks zero.
    pub fn christoffel_closed_form(&self) -> Christoffel3Field {
        let base = self.spec.base();
        let n = base.dim();
        let dim = self.grid().dim();
        let q = self.spec.q;
        let fl = self.fiber_len;
        let len = self.grid().len();
        let lift = |v: &[f64]| -> Vec<f64> { (0..len).map(|p| v[p / fl]).collect() };
        let gamma = base.christoffel();
        let dphi = base.potential_differential();
        let grad_phi = base.raise(dphi);
        let w = self.spec.warp_factor();
        let mut comps = vec![vec![vec![0.0; len]; sym_len(dim)]; dim];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    comps[k][sym_index(dim, i, j)] = lift(gamma.component(k, i, j));
                }
            }
            let c: Vec<f64> = grad_phi
                .component(k)
                .iter()
                .zip(w.values())
                .map(|(g, w)| g * w / q)
                .collect();
            for a in n..dim {
                comps[k][sym_index(dim, a, a)] = lift(&c);
            }
        }
        for a in n..dim {
            for (i, di) in dphi.iter().enumerate() {
                let c: Vec<f64> = di.values().iter().map(|d| -d / q).collect();
                comps[a][sym_index(dim, i, a)] = lift(&c);
            }
        }
        Christoffel3Field::from_raw(self.grid(), comps)
    }

    /// `Δ_{M̃} f = Lf + e^{+2φ/q} Δ_N f` for a product-grid field, with `L`
    /// acting along the base axes in divergence form.
    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        self.grid().ensure_same(f.grid(), "product field")?;
        let base = self.spec.base();
        let n = base.dim();
        let dim = self.grid().dim();
        let q = self.spec.q;
        let rho = self.lift(base.measure_density());
        let df: Vec<ScalarField> = (0..n).map(|j| f.derivative(j)).collect();
        let mut out = vec![0.0; self.grid().len()];
        for i in 0..n {
            let gi: Vec<ScalarField> = (0..n)
                .map(|j| self.lift(&base.inverse_metric().component_field(i, j)))
                .collect();
            let mut flux = ScalarField::zeros(self.grid());
            for (j, dj) in df.iter().enumerate() {
                flux = flux.add(&gi[j].mul(dj));
            }
            let d = flux.mul(&rho).derivative(i);
            for (o, v) in out.iter_mut().zip(d.values()) {
                *o += v;
            }
        }
        for (o, r) in out.iter_mut().zip(rho.values()) {
            *o /= r;
        }
        let inv_warp = self.lift(&base.potential().map(|phi| (2.0 * phi / q).exp()));
        let mut fiber = ScalarField::zeros(self.grid());
        for a in n..dim {
            fiber = fiber.add(&f.second_derivative(a));
        }
        let fiber = fiber.mul(&inv_warp);
        Ok(ScalarField::new(self.grid(), out)?.add(&fiber))
    }
}
