//! `minimizer.json` (field container) plus `summary.json`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LogSobolevSolution;
use crate::error::Result;
use crate::geometry::io::FieldContainer;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub t: f64,
    pub mu: f64,
    pub residual: f64,
    pub multiplier_gap: f64,
    pub iterations: usize,
    pub seed: u64,
    pub candidates: Vec<f64>,
    pub non_unique: bool,
}

impl LogSobolevSolution {
    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            t: self.t,
            mu: self.mu,
            residual: self.residual,
            multiplier_gap: self.multiplier_gap,
            iterations: self.iterations,
            seed: self.seed,
            candidates: self.candidates.clone(),
            non_unique: self.non_unique,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        FieldContainer::from(&self.u).write(&dir.join("minimizer.json"))?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&self.summary())?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let summary: SolutionSummary = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
        let u = FieldContainer::read(&dir.join("minimizer.json"))?.into_scalar()?;
        Ok(Self {
            t: summary.t,
            mu: summary.mu,
            u,
            residual: summary.residual,
            multiplier_gap: summary.multiplier_gap,
            iterations: summary.iterations,
            seed: summary.seed,
            candidates: summary.candidates,
            non_unique: summary.non_unique,
        })
    }
}
