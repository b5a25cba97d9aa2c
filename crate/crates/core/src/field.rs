//! The velocity-field interface integrated by every sampler.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::state::StateVector;

/// Where a regularity constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Closed-form constant of an analytic field.
    Declared,
    /// Sampled lower estimate; bounds built on it are advisory.
    Estimated,
}

/// Lipschitz constant `m` of v in x and the curvature bound `n` on ‖x''(t)‖.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRegularity {
    pub m: f64,
    pub n: f64,
    pub provenance: Provenance,
}

/// A pure, time-dependent velocity field v(x, t).
///
/// Implementations must return identical output for identical input and must
/// tolerate concurrent calls; verification batches evaluate drafts in parallel.
pub trait VelocityField: Send + Sync {
    /// State dimension d.
    fn dim(&self) -> usize;

    fn eval(&self, x: &StateVector, t: f64) -> Result<StateVector>;

    /// Evaluates every `(x, t)` pair. Entry `i` equals `eval(pairs[i])` exactly.
    fn batch_eval(&self, pairs: &[(StateVector, f64)]) -> Result<Vec<StateVector>> {
        pairs.par_iter().map(|(x, t)| self.eval(x, *t)).collect()
    }

    /// Closed-form `(M, N)` for the trajectory starting at `x0`, when known.
    fn declared_regularity(&self, _x0: &StateVector) -> Option<FieldRegularity> {
        None
    }
}

impl<F: VelocityField + ?Sized> VelocityField for Box<F> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &StateVector, t: f64) -> Result<StateVector> {
        (**self).eval(x, t)
    }

    fn batch_eval(&self, pairs: &[(StateVector, f64)]) -> Result<Vec<StateVector>> {
        (**self).batch_eval(pairs)
    }

    fn declared_regularity(&self, x0: &StateVector) -> Option<FieldRegularity> {
        (**self).declared_regularity(x0)
    }
}
