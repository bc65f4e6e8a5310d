//! Built-in study populations, shipped as versioned JSON files under `data/`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::PopulationSummary;
use crate::weights::Phase;

const SINGLE_PHASE: &str = include_str!("../data/single_phase.json");
const TWO_PHASE: &str = include_str!("../data/two_phase.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltinPopulation {
    pub id: u32,
    pub label: String,
    pub summary: PopulationSummary,
    /// Observed first-phase proportion reported alongside two-phase data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_phase_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSet {
    pub version: u32,
    #[serde(default)]
    pub description: String,
    pub populations: Vec<BuiltinPopulation>,
}

impl PopulationSet {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let set: PopulationSet = serde_json::from_str(s)?;
        for p in &set.populations {
            p.summary.validate()?;
        }
        Ok(set)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, id: u32) -> Result<&BuiltinPopulation> {
        self.populations
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| Error::InvalidSummary(format!("no population with id {id}")))
    }
}

pub fn builtin_set(phase: Phase) -> PopulationSet {
    let raw = match phase {
        Phase::Single => SINGLE_PHASE,
        Phase::Two => TWO_PHASE,
    };
    PopulationSet::from_json_str(raw).expect("built-in population data is valid")
}

pub fn builtin(phase: Phase, id: u32) -> Result<BuiltinPopulation> {
    builtin_set(phase).get(id).cloned()
}
