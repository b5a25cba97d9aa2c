//! Error bounds for speculative Euler sampling and their empirical checks.
//!
//! With `M` the Lipschitz constant of v in x, `N` a bound on ‖x''‖ along the
//! trajectory, step `h`, and a fraction `p` of steps using a reused velocity
//! within `√ε` of the true one,
//!
//! ```text
//! ‖x(t_k) − x_k‖ ≤ (e^{M t_k} − 1) / (2M) · (h N + 2 p √ε)
//! ```
//!
//! and choosing `ε ≤ (q_d / 2A)²`, `A = (e^M − 1)/M`, keeps the speculative
//! share `A p √ε` of that bound at or below `q_d`.
//!
//! Norms are Euclidean. The sampler thresholds the *mean* squared velocity
//! difference, so an accepted draft satisfies `‖Δv‖ ≤ √(d ε)`; [`bound_check`]
//! feeds `d ε` into [`lemma_bound`] for that reason.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{FlowError, Result};
use crate::field::{FieldRegularity, Provenance};
use crate::grid::TimeGrid;
use crate::integrator::Trajectory;
use crate::stats::{RunStats, SpecConfig};

/// `(e^{M t} − 1) / M`, continuous at `M = 0` where it equals `t`.
pub fn growth_factor(m: f64, t: f64) -> f64 {
    if m == 0.0 {
        t
    } else {
        (m * t).exp_m1() / m
    }
}

/// Right-hand side of the global error bound at time `t`.
pub fn lemma_bound(m: f64, n: f64, h: f64, p: f64, epsilon: f64, t: f64) -> f64 {
    growth_factor(m, t) / 2.0 * (h * n + 2.0 * p * epsilon.sqrt())
}

/// Largest threshold whose speculative deviation stays within `q_d`:
/// `(q_d / 2A)²` with `A = (e^M − 1)/M`.
pub fn epsilon_for_tolerance(q_d: f64, m: f64) -> Result<f64> {
    if !(q_d > 0.0) || !q_d.is_finite() {
        return Err(FlowError::InvalidArgument(format!("tolerance must be > 0, got {q_d}")));
    }
    if !(m >= 0.0) || !m.is_finite() {
        return Err(FlowError::InvalidArgument(format!(
            "Lipschitz constant must be >= 0, got {m}"
        )));
    }
    let a = growth_factor(m, 1.0);
    Ok((q_d / (2.0 * a)).powi(2))
}

/// Speculative share `A p √ε` of the bound at `t = 1`.
pub fn speculative_term(m: f64, p: f64, epsilon: f64) -> f64 {
    growth_factor(m, 1.0) * p * epsilon.sqrt()
}

/// Per-node distances between the speculative, Euler and reference trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub dim: usize,
    /// ‖x_ref(t_k) − x_euler,k‖: discretization error of plain Euler.
    pub per_step_error: Vec<f64>,
    /// ‖x_ref(t_k) − x_spec,k‖: total error of the speculative run.
    pub spec_error: Vec<f64>,
    /// ‖x_spec,k − x_euler,k‖: deviation introduced by speculation.
    pub spec_deviation: Vec<f64>,
    pub max_error: f64,
    pub final_error: f64,
    pub max_spec_error: f64,
    pub final_spec_error: f64,
    pub max_spec_deviation: f64,
    pub final_spec_deviation: f64,
}

fn distances(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    a.states.iter().zip(&b.states).map(|(x, y)| x.distance(y)).collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

pub fn deviation_report(
    spec: &Trajectory,
    euler: &Trajectory,
    reference: &Trajectory,
) -> Result<DeviationReport> {
    for (name, other) in [("euler", euler), ("reference", reference)] {
        if other.grid != spec.grid || other.states.len() != spec.states.len() {
            return Err(FlowError::GridMismatch(format!(
                "{name} trajectory is not on the speculative run's grid"
            )));
        }
    }
    let per_step_error = distances(reference, euler)?;
    let spec_error = distances(reference, spec)?;
    let spec_deviation = distances(spec, euler)?;
    Ok(DeviationReport {
        dim: spec.states[0].dim(),
        max_error: max_of(&per_step_error),
        final_error: *per_step_error.last().unwrap_or(&0.0),
        max_spec_error: max_of(&spec_error),
        final_spec_error: *spec_error.last().unwrap_or(&0.0),
        max_spec_deviation: max_of(&spec_deviation),
        final_spec_deviation: *spec_deviation.last().unwrap_or(&0.0),
        per_step_error,
        spec_error,
        spec_deviation,
    })
}

/// Bound over empirical error at one node. Serialized as a number, `"inf"`
/// when only the empirical error is zero, or `"exact"` when both are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tightness {
    Ratio(f64),
    Unbounded,
    ExactMatch,
}

impl Tightness {
    pub fn new(bound: f64, empirical: f64) -> Self {
        if empirical > 0.0 {
            Tightness::Ratio(bound / empirical)
        } else if bound > 0.0 {
            Tightness::Unbounded
        } else {
            Tightness::ExactMatch
        }
    }

    pub fn ratio(&self) -> Option<f64> {
        match self {
            Tightness::Ratio(r) => Some(*r),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TightnessRepr {
    Ratio(f64),
    Sentinel(String),
}

impl Serialize for Tightness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tightness::Ratio(r) => TightnessRepr::Ratio(*r),
            Tightness::Unbounded => TightnessRepr::Sentinel("inf".into()),
            Tightness::ExactMatch => TightnessRepr::Sentinel("exact".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tightness {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match TightnessRepr::deserialize(d)? {
            TightnessRepr::Ratio(r) => Ok(Tightness::Ratio(r)),
            TightnessRepr::Sentinel(s) if s == "inf" => Ok(Tightness::Unbounded),
            TightnessRepr::Sentinel(s) if s == "exact" => Ok(Tightness::ExactMatch),
            TightnessRepr::Sentinel(s) => Err(serde::de::Error::custom(format!("unknown tightness `{s}`"))),
        }
    }
}

/// Arguments the bound was evaluated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub m: f64,
    pub n: f64,
    pub h: f64,
    pub p: f64,
    /// MSE threshold of the run.
    pub epsilon: f64,
    /// `d ε`, the squared-norm threshold passed to the bound.
    pub epsilon_norm: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub per_step_bound: Vec<f64>,
    pub empirical: DeviationReport,
    pub tightness_ratio: Vec<Tightness>,
    /// Empirical total error within the bound at every node.
    pub bound_holds: bool,
    /// False when the constants are estimates; `bound_holds` is then advisory.
    pub guarantee: bool,
}

impl BoundReport {
    pub fn final_bound(&self) -> f64 {
        *self.per_step_bound.last().unwrap_or(&0.0)
    }

    pub fn final_tightness(&self) -> Tightness {
        *self.tightness_ratio.last().unwrap_or(&Tightness::ExactMatch)
    }

    /// Largest finite ratio, if any node has non-zero empirical error.
    pub fn max_tightness(&self) -> Option<f64> {
        self.tightness_ratio
            .iter()
            .filter_map(Tightness::ratio)
            .reduce(f64::max)
    }
}

/// Evaluates the bound at every node with the run's realized `p` and compares
/// it against the speculative run's error from the reference.
pub fn bound_check(
    regularity: &FieldRegularity,
    grid: &TimeGrid,
    stats: &RunStats,
    config: &SpecConfig,
    deviation: &DeviationReport,
) -> BoundReport {
    let inputs = BoundInputs {
        m: regularity.m,
        n: regularity.n,
        h: grid.h(),
        p: stats.acceptance_fraction(),
        epsilon: config.epsilon,
        epsilon_norm: deviation.dim as f64 * config.epsilon,
        provenance: regularity.provenance,
    };
    let per_step_bound: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&t| lemma_bound(inputs.m, inputs.n, inputs.h, inputs.p, inputs.epsilon_norm, t))
        .collect();
    let tightness_ratio = per_step_bound
        .iter()
        .zip(&deviation.spec_error)
        .map(|(&b, &e)| Tightness::new(b, e))
        .collect();
    let bound_holds = per_step_bound
        .iter()
        .zip(&deviation.spec_error)
        .all(|(b, e)| e <= b);
    BoundReport {
        guarantee: inputs.provenance == Provenance::Declared,
        inputs,
        per_step_bound,
        empirical: deviation.clone(),
        tightness_ratio,
        bound_holds,
    }
}
