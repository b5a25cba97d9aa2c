use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

/// Discretization `0 = t_0 < t_1 < ... < t_K = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(FlowError::InvalidGrid(format!(
                "need at least 2 nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(FlowError::InvalidGrid(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        let last = nodes[nodes.len() - 1];
        if last != 1.0 {
            return Err(FlowError::InvalidGrid(format!("last node must be 1, got {last}")));
        }
        for (k, pair) in nodes.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(FlowError::InvalidGrid(format!(
                    "node {} ({}) does not exceed node {} ({})",
                    k + 1,
                    pair[1],
                    k,
                    pair[0]
                )));
            }
        }
        Ok(TimeGrid { nodes })
    }

    /// `t_k = k / K`.
    pub fn uniform(steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(FlowError::InvalidGrid("step count must be at least 1".into()));
        }
        let k = steps as f64;
        let nodes = (0..=steps).map(|i| i as f64 / k).collect();
        TimeGrid::new(nodes)
    }

    /// Number of steps K.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// `t_{k+1} - t_k`.
    pub fn dt(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    /// Largest step.
    pub fn h(&self) -> f64 {
        (0..self.steps()).map(|k| self.dt(k)).fold(0.0, f64::max)
    }
}

impl<'de> Deserialize<'de> for TimeGrid {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let nodes = Vec::<f64>::deserialize(deserializer)?;
        TimeGrid::new(nodes).map_err(serde::de::Error::custom)
    }
}
