//! Periodic grids, fields, spectral calculus and the tensor-calculus stack
//! (connection, Hessian, Laplacians, curvature, Bakry-Emery tensors,
//! weighted quadrature).

mod field;
mod grid;
pub mod io;
pub mod linalg;
mod snapshot;

#[cfg(test)]
mod tests;

pub use field::{
    spectral_derivative, sym_index, sym_len, Christoffel3Field, ScalarField, SymTensorField,
    VectorField,
};
pub use grid::{Grid, MAX_DIM, MIN_NODES};
pub use snapshot::{christoffel, invert_metric, neumaier_sum, GeometrySnapshot, MIN_METRIC_EIGENVALUE};
