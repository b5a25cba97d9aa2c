//! Seeded initial-state sampling.
//!
//! The generator is pinned so golden files stay portable: ChaCha8 seeded with
//! `seed_from_u64`, uniforms from the top 53 bits of each 64-bit output, and
//! Box–Muller with `u1 = 1 - U`, producing `r cos θ` then `r sin θ` per pair.

use std::f64::consts::TAU;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::state::StateVector;

/// Where a run's starting point comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Explicit { values: Vec<f64> },
    /// Independent `N(mean, stddev^2)` coordinates.
    Gaussian { seed: u64, mean: f64, stddev: f64 },
}

impl InitialState {
    pub fn sample(&self, dim: usize) -> Result<StateVector> {
        match self {
            InitialState::Explicit { values } => {
                if values.len() != dim {
                    return Err(FlowError::DimensionMismatch {
                        expected: dim,
                        got: values.len(),
                    });
                }
                StateVector::new(values.clone())
            }
            InitialState::Gaussian { seed, mean, stddev } => {
                if !(*stddev >= 0.0) {
                    return Err(FlowError::InvalidArgument(format!(
                        "stddev must be >= 0, got {stddev}"
                    )));
                }
                let z = standard_normals(*seed, dim);
                StateVector::new(z.into_iter().map(|z| mean + stddev * z).collect())
            }
        }
    }

    /// Same source with the seed replaced; explicit states are unchanged.
    pub fn with_seed(&self, seed: u64) -> InitialState {
        match self {
            InitialState::Gaussian { mean, stddev, .. } => InitialState::Gaussian {
                seed,
                mean: *mean,
                stddev: *stddev,
            },
            other => other.clone(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            InitialState::Gaussian { seed, .. } => Some(*seed),
            InitialState::Explicit { .. } => None,
        }
    }
}

/// `count` standard normal draws from the pinned generator.
pub fn standard_normals(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        out.push(r * (TAU * u2).cos());
        out.push(r * (TAU * u2).sin());
    }
    out.truncate(count);
    out
}
