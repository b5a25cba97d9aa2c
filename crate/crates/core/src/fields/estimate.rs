//! Sampled estimates of the regularity constants M and N.
//!
//! Both are lower estimates: a sampled secant slope never exceeds the true
//! Lipschitz constant, and the finite-difference curvature is taken along one
//! trajectory only. Bounds built on them are advisory.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::field::{FieldRegularity, Provenance, VelocityField};
use crate::integrator::reference_solution;
use crate::state::StateVector;

/// Axis-aligned box in state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let b = BoundingBox { lo, hi };
        b.validate()?;
        Ok(b)
    }

    /// Symmetric cube `[-r, r]^dim`.
    pub fn cube(dim: usize, r: f64) -> Result<Self> {
        BoundingBox::new(vec![-r; dim], vec![r; dim])
    }

    /// Smallest box containing `states`, grown by `margin` times its extent
    /// (and by `margin` absolutely, so flat directions keep some volume).
    pub fn around(states: &[StateVector], margin: f64) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| FlowError::InvalidArgument("no states to bound".into()))?;
        let mut lo = first.as_slice().to_vec();
        let mut hi = lo.clone();
        for s in states {
            for (i, &v) in s.as_slice().iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        for i in 0..lo.len() {
            let pad = margin * (hi[i] - lo[i]) + margin;
            lo[i] -= pad;
            hi[i] += pad;
        }
        BoundingBox::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn validate(&self) -> Result<()> {
        if self.lo.is_empty() || self.lo.len() != self.hi.len() {
            return Err(FlowError::InvalidArgument(format!(
                "bounding box corners have dimensions {} and {}",
                self.lo.len(),
                self.hi.len()
            )));
        }
        for (i, (lo, hi)) in self.lo.iter().zip(&self.hi).enumerate() {
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(FlowError::InvalidArgument(format!(
                    "degenerate bounding box along axis {i}: [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

/// Largest sampled secant slope `‖v(x+δ,t) − v(x,t)‖ / ‖δ‖` over random
/// `(x, t)` in `bbox × [0, 1]`. Deterministic for a given seed.
pub fn estimate_lipschitz(
    field: &dyn VelocityField,
    bbox: &BoundingBox,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples < 2 {
        return Err(FlowError::InvalidArgument(format!("need at least 2 samples, got {samples}")));
    }
    bbox.validate()?;
    if bbox.dim() != field.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: field.dim(),
            got: bbox.dim(),
        });
    }
    let step = 1e-3
        * bbox
            .lo
            .iter()
            .zip(&bbox.hi)
            .map(|(l, h)| h - l)
            .fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let x: Vec<f64> = bbox
            .lo
            .iter()
            .zip(&bbox.hi)
            .map(|(&l, &h)| l + (h - l) * rng.random::<f64>())
            .collect();
        let t = rng.random::<f64>();
        let dir: Vec<f64> = (0..field.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let len = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if len < 1e-3 {
            continue;
        }
        let x = StateVector::new(x)?;
        let moved = StateVector::new(
            x.as_slice()
                .iter()
                .zip(&dir)
                .map(|(xi, d)| xi + step * d / len)
                .collect(),
        )?;
        let delta = moved.distance(&x)?;
        if delta == 0.0 {
            continue;
        }
        let dv = field.eval(&moved, t)?.distance(&field.eval(&x, t)?)?;
        best = best.max(dv / delta);
    }
    Ok(best)
}

/// Largest ‖x''(t)‖ along the RK4 trajectory from `x0`, by finite differences
/// of `x'(t) = v(x(t), t)` on `resolution` uniform steps.
pub fn estimate_curvature(field: &dyn VelocityField, x0: &StateVector, resolution: usize) -> Result<f64> {
    if resolution < 8 {
        return Err(FlowError::InvalidArgument(format!(
            "curvature resolution must be at least 8, got {resolution}"
        )));
    }
    let path = reference_solution(field, x0, resolution)?;
    let velocities: Vec<StateVector> = path
        .states
        .iter()
        .zip(path.grid.nodes())
        .map(|(x, &t)| field.eval(x, t))
        .collect::<Result<_>>()?;
    let dt = 1.0 / resolution as f64;
    let d = field.dim();
    let mut best = 0.0f64;
    for i in 0..=resolution {
        let accel: f64 = (0..d)
            .map(|c| {
                let v = |k: usize| velocities[k][c];
                // Third-order one-sided stencils at the ends, where second-order
                // ones overshoot by O(dt^2) on circular motion.
                let a = if i == 0 {
                    (-11.0 * v(0) + 18.0 * v(1) - 9.0 * v(2) + 2.0 * v(3)) / (6.0 * dt)
                } else if i == resolution {
                    (11.0 * v(i) - 18.0 * v(i - 1) + 9.0 * v(i - 2) - 2.0 * v(i - 3)) / (6.0 * dt)
                } else {
                    (v(i + 1) - v(i - 1)) / (2.0 * dt)
                };
                a * a
            })
            .sum::<f64>()
            .sqrt();
        best = best.max(accel);
    }
    Ok(best)
}

/// Declared constants when the field has them, otherwise sampled estimates
/// over `bbox` and along the trajectory from `x0`.
pub fn regularity_or_estimate(
    field: &dyn VelocityField,
    x0: &StateVector,
    bbox: &BoundingBox,
    samples: usize,
    seed: u64,
    resolution: usize,
) -> Result<FieldRegularity> {
    if let Some(declared) = field.declared_regularity(x0) {
        return Ok(declared);
    }
    Ok(FieldRegularity {
        m: estimate_lipschitz(field, bbox, samples, seed)?,
        n: estimate_curvature(field, x0, resolution)?,
        provenance: Provenance::Estimated,
    })
}
