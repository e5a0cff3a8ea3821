use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::matrix::SquareMatrix;

/// A `k × k` block estimate of a graphon together with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct StepEstimate {
    pub values: SquareMatrix,
    pub meta: EstimateMeta,
}

impl StepEstimate {
    pub fn k(&self) -> usize {
        self.values.dim()
    }
}

/// Metadata sidecar written next to every estimate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateMeta {
    pub k: usize,
    #[serde(rename = "N")]
    pub total_nodes: usize,
    #[serde(rename = "M")]
    pub graph_count: usize,
    #[serde(rename = "S")]
    pub observed_dyads: u64,
    pub method: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub elapsed_seconds: f64,
    #[serde(default)]
    pub empty_blocks: usize,
}

impl EstimateMeta {
    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn empty_block_fraction(&self) -> f64 {
        if self.k == 0 {
            0.0
        } else {
            self.empty_blocks as f64 / (self.k * self.k) as f64
        }
    }
}
