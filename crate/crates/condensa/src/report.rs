//! Run reports. Everything in `report.json` is a function of the config
//! and seed; wall-clock time goes to `timing.json` next to it.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

/// One emitted number with its tolerance and the criterion it serves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u32>,
    pub value: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, comparison: Comparison, tolerance: f64) -> Self {
        let pass = match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::Below => value < tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Above => value > tolerance,
        };
        Check { name: name.into(), criterion: None, value, comparison, tolerance, pass }
    }

    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, tolerance)
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(name, value, Comparison::AtLeast, tolerance)
    }

    pub fn for_criterion(mut self, id: u32) -> Self {
        self.criterion = Some(id);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// the effective config, seed and output directory included
    pub config: ExperimentConfig,
    pub seed: u64,
    pub metrics: serde_json::Value,
    pub checks: Vec<Check>,
    /// file names relative to the output directory
    pub artifacts: Vec<String>,
    pub pass: bool,
}

/// Wall-clock timings, kept out of the deterministic report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_clock_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sections: Vec<(String, f64)>,
}
