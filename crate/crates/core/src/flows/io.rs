//! Trajectories on disk: one field container per stored field plus
//! `index.json`.
//!
//! ```json
//! { "format": "witten-lab-trajectory", "version": 1, "kind": "heat",
//!   "stats": { "steps": 120, "dt_min": 1e-3, "dt_max": 1e-3 },
//!   "entries": [ { "time": 0.1, "fields": { "u": "u_0000.json", ... } } ] }
//! ```
//!
//! `time` is `t` for heat and Lott runs and `τ` for conjugate runs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::conjugate::ConjugateTrajectory;
use super::heat::{FlowTrajectory, SolverStats};
use super::lott::LottTrajectory;
use crate::error::{Error, Result};
use crate::geometry::io::FieldContainer;

pub const TRAJECTORY_FORMAT: &str = "witten-lab-trajectory";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub time: f64,
    pub fields: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryIndex {
    pub format: String,
    pub version: u32,
    pub kind: String,
    pub stats: SolverStats,
    pub entries: Vec<IndexEntry>,
}

impl TrajectoryIndex {
    pub fn read(dir: &Path) -> Result<Self> {
        let index: Self = serde_json::from_str(&fs::read_to_string(dir.join("index.json"))?)?;
        if index.format != TRAJECTORY_FORMAT {
            return Err(Error::InvalidInput(format!("unknown trajectory format {:?}", index.format)));
        }
        Ok(index)
    }

    /// Loads one stored field of entry `i`.
    pub fn field(&self, dir: &Path, i: usize, name: &str) -> Result<FieldContainer> {
        let file = self
            .entries
            .get(i)
            .and_then(|e| e.fields.get(name))
            .ok_or_else(|| Error::InvalidInput(format!("entry {i} has no field {name:?}")))?;
        FieldContainer::read(&dir.join(file))
    }
}

struct Writer<'a> {
    dir: &'a Path,
    entries: Vec<IndexEntry>,
}

impl<'a> Writer<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir, entries: Vec::new() })
    }

    fn entry(&mut self, time: f64, fields: &[(&str, FieldContainer)]) -> Result<()> {
        let i = self.entries.len();
        let mut names = BTreeMap::new();
        for (name, container) in fields {
            let file = format!("{name}_{i:04}.json");
            container.write(&self.dir.join(&file))?;
            names.insert((*name).to_string(), file);
        }
        self.entries.push(IndexEntry { time, fields: names });
        Ok(())
    }

    fn finish(self, kind: &str, stats: &SolverStats) -> Result<()> {
        let index = TrajectoryIndex {
            format: TRAJECTORY_FORMAT.into(),
            version: 1,
            kind: kind.into(),
            stats: stats.clone(),
            entries: self.entries,
        };
        fs::write(self.dir.join("index.json"), serde_json::to_string_pretty(&index)?)?;
        Ok(())
    }
}

impl FlowTrajectory {
    /// Writes `u`, `metric` and `potential` for every state.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut w = Writer::new(dir)?;
        for s in &self.states {
            w.entry(
                s.t,
                &[
                    ("u", (&s.u).into()),
                    ("metric", s.snapshot.metric().into()),
                    ("potential", s.snapshot.potential().into()),
                ],
            )?;
        }
        w.finish("heat", &self.stats)
    }
}

impl LottTrajectory {
    /// Writes `metric` and `psi` for every stored step.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut w = Writer::new(dir)?;
        for s in &self.samples {
            w.entry(s.t, &[("metric", (&s.metric).into()), ("psi", (&s.psi).into())])?;
        }
        w.finish("lott", &self.stats)
    }
}

impl ConjugateTrajectory {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut w = Writer::new(dir)?;
        for s in &self.states {
            w.entry(s.tau, &[("phi", (&s.phi).into())])?;
        }
        w.finish("conjugate", &self.stats)
    }
}
