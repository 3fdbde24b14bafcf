//! The JSON instance file.

use std::collections::BTreeMap;

use boxloc::eval::ModeDurations;
use boxloc::gen::GenConfig;
use boxloc::{AccessParams, EdgeCosts, Instance, Location, VoterPopulation};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub locations: Vec<Location>,
    pub start: String,
    /// Row `i` lists the costs from location `i` to locations `0..i`.
    pub edge_costs: Vec<Vec<f64>>,
    pub populations: Vec<PopulationRecord>,
    pub q: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durations: Option<ModeDurations>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationRecord {
    pub id: String,
    pub weight: f64,
    pub covering_set: Vec<String>,
    pub v0: f64,
    pub v1: f64,
    pub a: BTreeMap<String, f64>,
}

/// How a generated instance was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorInfo {
    pub seed: u64,
    pub rng: String,
    pub config: GenConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported instance file version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("edge_costs row {row} has {found} entries, expected {row}")]
    Triangle { row: usize, found: usize },
    #[error("edge_costs has {found} rows for {expected} locations")]
    Rows { expected: usize, found: usize },
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            version: FORMAT_VERSION,
            locations: inst.locations.clone(),
            start: inst.start.clone(),
            edge_costs: inst.edge_costs.lower_triangle(),
            populations: inst
                .populations
                .iter()
                .map(|p| PopulationRecord {
                    id: p.id.clone(),
                    weight: p.weight,
                    covering_set: p.covering_set.clone(),
                    v0: p.access.v0,
                    v1: p.access.v1,
                    a: p.access.a.clone(),
                })
                .collect(),
            q: inst.q,
            durations: None,
            generator: None,
        }
    }

    pub fn to_instance(&self) -> Result<Instance, FileError> {
        if self.edge_costs.len() != self.locations.len() {
            return Err(FileError::Rows {
                expected: self.locations.len(),
                found: self.edge_costs.len(),
            });
        }
        let edge_costs = EdgeCosts::from_lower_triangle(&self.edge_costs).ok_or_else(|| {
            let (row, r) = self
                .edge_costs
                .iter()
                .enumerate()
                .find(|(i, r)| r.len() != *i)
                .expect("a ragged row exists");
            FileError::Triangle { row, found: r.len() }
        })?;
        Ok(Instance {
            locations: self.locations.clone(),
            start: self.start.clone(),
            edge_costs,
            populations: self
                .populations
                .iter()
                .map(|p| VoterPopulation {
                    id: p.id.clone(),
                    covering_set: p.covering_set.clone(),
                    access: AccessParams {
                        v0: p.v0,
                        v1: p.v1,
                        a: p.a.clone(),
                    },
                    weight: p.weight,
                })
                .collect(),
            q: self.q,
        })
    }

    pub fn parse(text: &str) -> Result<Self, FileError> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(FileError::Version(file.version));
        }
        Ok(file)
    }

    pub fn emit(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files always serialize");
        s.push('\n');
        s
    }
}
