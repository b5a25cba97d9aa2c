//! Samplers: forward Euler, speculative drafting with parallel verification,
//! and a fine RK4 reference.

mod euler;
mod reference;
mod speculative;

pub use euler::full_euler;
pub use reference::{reference_on_grid, reference_solution};
pub use speculative::{flowcast, RoundOutcome, RoundRecord, SpecRun, SpecTrace};

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::grid::TimeGrid;
use crate::state::StateVector;

/// States at every node of a grid; `states[0]` is the initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<StateVector>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least two states")
    }

    /// Keeps only the states at `coarse` nodes, which must coincide with nodes
    /// of this trajectory's grid.
    pub fn restrict(&self, coarse: &TimeGrid) -> Result<Trajectory> {
        let fine = self.grid.nodes();
        let mut states = Vec::with_capacity(coarse.nodes().len());
        let mut cursor = 0;
        for (k, &t) in coarse.nodes().iter().enumerate() {
            let offset = fine[cursor..].partition_point(|&s| s < t - 1e-12);
            let i = cursor + offset;
            if i >= fine.len() || (fine[i] - t).abs() > 1e-12 {
                return Err(FlowError::GridMismatch(format!(
                    "coarse node {k} (t = {t}) is not a node of the {}-step fine grid",
                    self.grid.steps()
                )));
            }
            states.push(self.states[i].clone());
            cursor = i;
        }
        Ok(Trajectory {
            grid: coarse.clone(),
            states,
        })
    }
}
