//! Self-describing JSON container for fields: grid header followed by
//! component-major, row-major value arrays.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::field::{ScalarField, SymTensorField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

pub const FIELD_FORMAT: &str = "witten-lab-field";
pub const FIELD_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
    SymTensor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldContainer {
    pub format: String,
    pub version: u32,
    pub kind: FieldKind,
    pub dim: usize,
    pub nodes: Vec<usize>,
    pub periods: Vec<f64>,
    /// One array per component; symmetric tensors store the upper triangle
    /// in row order `(0,0), (0,1), …, (1,1), …`.
    pub components: Vec<Vec<f64>>,
}

impl FieldContainer {
    fn with(grid: &Grid, kind: FieldKind, components: Vec<Vec<f64>>) -> Self {
        Self {
            format: FIELD_FORMAT.into(),
            version: FIELD_VERSION,
            kind,
            dim: grid.dim(),
            nodes: grid.nodes(),
            periods: grid.periods(),
            components,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        if self.format != FIELD_FORMAT {
            return Err(Error::InvalidInput(format!("unknown container format {:?}", self.format)));
        }
        if self.nodes.len() != self.dim {
            return Err(Error::Dimension("container header dim disagrees with nodes".into()));
        }
        Grid::new(&self.nodes, &self.periods)
    }

    fn expect(&self, kind: FieldKind) -> Result<Grid> {
        if self.kind != kind {
            return Err(Error::InvalidInput(format!("expected {kind:?}, found {:?}", self.kind)));
        }
        self.grid()
    }

    pub fn into_scalar(self) -> Result<ScalarField> {
        let grid = self.expect(FieldKind::Scalar)?;
        let mut comps = self.components;
        if comps.len() != 1 {
            return Err(Error::Dimension("scalar container needs one component".into()));
        }
        ScalarField::new(&grid, comps.remove(0))
    }

    pub fn into_vector(self) -> Result<VectorField> {
        let grid = self.expect(FieldKind::Vector)?;
        VectorField::new(&grid, self.components)
    }

    pub fn into_sym_tensor(self) -> Result<SymTensorField> {
        let grid = self.expect(FieldKind::SymTensor)?;
        SymTensorField::new(&grid, self.components)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }
}

impl From<&ScalarField> for FieldContainer {
    fn from(f: &ScalarField) -> Self {
        Self::with(f.grid(), FieldKind::Scalar, vec![f.values().to_vec()])
    }
}

impl From<&VectorField> for FieldContainer {
    fn from(f: &VectorField) -> Self {
        Self::with(f.grid(), FieldKind::Vector, f.components().to_vec())
    }
}

impl From<&SymTensorField> for FieldContainer {
    fn from(f: &SymTensorField) -> Self {
        Self::with(f.grid(), FieldKind::SymTensor, f.packed().to_vec())
    }
}
