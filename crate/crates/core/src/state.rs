//! Points on a trajectory and the velocity-comparison primitive.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

/// A finite point in R^d, d >= 1.
///
/// Velocities share the representation; they are states per unit time.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(FlowError::EmptyState);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(FlowError::NonFiniteValue { index, value });
        }
        Ok(StateVector(values))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `self + dt * velocity`, coordinate by coordinate.
    ///
    /// This single expression is the Euler step, the constant-velocity draft and the
    /// correction step alike, which keeps the three bit-compatible.
    pub fn advance(&self, dt: f64, velocity: &StateVector) -> Result<StateVector> {
        check_dims(self, velocity)?;
        let values = self
            .0
            .iter()
            .zip(&velocity.0)
            .map(|(x, v)| x + dt * v)
            .collect();
        StateVector::new(values)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        check_dims(self, other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        StateVector::new(values).map_err(serde::de::Error::custom)
    }
}

impl Index<usize> for StateVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = FlowError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        StateVector::new(values)
    }
}

fn check_dims(a: &StateVector, b: &StateVector) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

/// Mean over coordinates of squared differences.
pub fn mse(a: &StateVector, b: &StateVector) -> Result<f64> {
    check_dims(a, b)?;
    let sum: f64 = a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.dim() as f64)
}
