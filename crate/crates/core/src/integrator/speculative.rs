//! Speculative sampling: constant-velocity drafts, one parallel verification
//! batch per round, correction on the first rejected draft.
//!
//! From anchor `m` every remaining node is drafted as
//! `x̃_k = x_m + (t_k - t_m) v_m`. The field is evaluated at all drafts in one
//! batch and draft `k` is accepted while `mse(v_m, v(x̃_k, t_k)) <= ε`. At the
//! first rejected index `j`, drafts `m+1 .. j-1` are kept, `x_j` is one Euler
//! step from `x̃_{j-1}` with the velocity already computed there, and `j`
//! becomes the next anchor.

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::field::VelocityField;
use crate::grid::TimeGrid;
use crate::integrator::Trajectory;
use crate::state::{mse, StateVector};
use crate::stats::{CorrectionRule, RunStats, SpecConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundOutcome {
    AllAccepted,
    RejectedAt { index: usize },
}

/// One drafting and verification round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub anchor_index: usize,
    pub anchor_state: StateVector,
    pub anchor_velocity: StateVector,
    /// `anchor_index + 1 ..= K`.
    pub drafted_indices: Vec<usize>,
    pub drafted_states: Vec<StateVector>,
    /// MSE between the anchor velocity and the velocity at each draft.
    pub verification_errors: Vec<f64>,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecTrace {
    pub epsilon: f64,
    pub rounds: Vec<RoundRecord>,
}

impl SpecTrace {
    /// Checks the structural invariants of a trace produced under the
    /// progressive correction rule. Returns a description of the first violation.
    pub fn check(&self, steps: usize) -> std::result::Result<(), String> {
        let mut previous: Option<usize> = None;
        for (r, round) in self.rounds.iter().enumerate() {
            if let Some(p) = previous {
                if round.anchor_index <= p {
                    return Err(format!("round {r}: anchor {} after {p}", round.anchor_index));
                }
            }
            previous = Some(round.anchor_index);
            let expected: Vec<usize> = (round.anchor_index + 1..=steps).collect();
            if round.drafted_indices != expected {
                return Err(format!("round {r}: drafted indices do not cover m+1..K"));
            }
            if round.verification_errors.len() != expected.len()
                || round.drafted_states.len() != expected.len()
            {
                return Err(format!("round {r}: record lengths disagree"));
            }
            match round.outcome {
                RoundOutcome::AllAccepted => {
                    if round.verification_errors.iter().any(|&e| e > self.epsilon) {
                        return Err(format!("round {r}: accepted an error above epsilon"));
                    }
                }
                RoundOutcome::RejectedAt { index } => {
                    let pos = index
                        .checked_sub(round.anchor_index + 1)
                        .filter(|&p| p < expected.len())
                        .ok_or_else(|| format!("round {r}: rejection index {index} out of range"))?;
                    if !(round.verification_errors[pos] > self.epsilon) {
                        return Err(format!("round {r}: rejected at {index} without exceeding epsilon"));
                    }
                    if round.verification_errors[..pos].iter().any(|&e| e > self.epsilon) {
                        return Err(format!("round {r}: rejection at {index} is not the first"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRun {
    pub trajectory: Trajectory,
    pub stats: RunStats,
    pub trace: SpecTrace,
}

/// Runs the speculative sampler over `grid` from `x0`.
pub fn flowcast(
    field: &dyn VelocityField,
    grid: &TimeGrid,
    x0: &StateVector,
    config: &SpecConfig,
) -> Result<SpecRun> {
    if x0.dim() != field.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: field.dim(),
            got: x0.dim(),
        });
    }
    if !(config.epsilon >= 0.0) {
        return Err(FlowError::InvalidArgument(format!(
            "epsilon must be >= 0, got {}",
            config.epsilon
        )));
    }
    let steps = grid.steps();
    let max_rounds = config.max_rounds_for(steps);

    let mut states: Vec<Option<StateVector>> = vec![None; steps + 1];
    states[0] = Some(x0.clone());
    let mut stats = RunStats {
        steps,
        rounds_folded: 1,
        rounds_strict: 1,
        total_evals: 1,
        accepted_draft_steps: 0,
        correction_rounds: 0,
    };
    let mut anchor = 0;
    let mut anchor_state = x0.clone();
    let mut anchor_velocity = field.eval(x0, grid.node(0))?;
    let mut rounds = Vec::new();

    while anchor < steps {
        if stats.rounds_folded >= max_rounds {
            return Err(FlowError::MaxRoundsExceeded { max_rounds, anchor });
        }
        let round = rounds.len() + 1;
        let t_anchor = grid.node(anchor);
        let drafted_indices: Vec<usize> = (anchor + 1..=steps).collect();
        let drafts = drafted_indices
            .iter()
            .map(|&k| {
                anchor_state
                    .advance(grid.node(k) - t_anchor, &anchor_velocity)
                    .map_err(|_| FlowError::NonFiniteDraft { round, index: k })
            })
            .collect::<Result<Vec<_>>>()?;

        let pairs: Vec<(StateVector, f64)> = drafts
            .iter()
            .zip(&drafted_indices)
            .map(|(x, &k)| (x.clone(), grid.node(k)))
            .collect();
        let velocities = field.batch_eval(&pairs)?;
        stats.rounds_folded += 1;
        stats.rounds_strict += 1;
        stats.total_evals += drafts.len();

        let errors = velocities
            .iter()
            .map(|v| mse(&anchor_velocity, v))
            .collect::<Result<Vec<_>>>()?;
        let rejected = errors
            .iter()
            .position(|&e| e > config.epsilon)
            .map(|p| anchor + 1 + p);

        rounds.push(RoundRecord {
            anchor_index: anchor,
            anchor_state: anchor_state.clone(),
            anchor_velocity: anchor_velocity.clone(),
            drafted_indices,
            drafted_states: drafts.clone(),
            verification_errors: errors,
            outcome: match rejected {
                None => RoundOutcome::AllAccepted,
                Some(index) => RoundOutcome::RejectedAt { index },
            },
        });

        let Some(j) = rejected else {
            // The step out of the anchor uses its own velocity; every later
            // step reuses it.
            stats.accepted_draft_steps += steps - anchor - 1;
            for (k, draft) in (anchor + 1..).zip(drafts) {
                states[k] = Some(draft);
            }
            break;
        };

        let accepted = j - anchor - 1;
        stats.accepted_draft_steps += accepted.saturating_sub(1);
        stats.correction_rounds += 1;
        for (k, draft) in (anchor + 1..j).zip(&drafts) {
            states[k] = Some(draft.clone());
        }
        let (base_state, base_velocity) = if accepted == 0 {
            (&anchor_state, &anchor_velocity)
        } else {
            (&drafts[accepted - 1], &velocities[accepted - 1])
        };
        let corrected = base_state
            .advance(grid.dt(j - 1), base_velocity)
            .map_err(|_| FlowError::NonFiniteState { step: j })?;

        match config.correction {
            CorrectionRule::Progressive => {
                if j < steps {
                    // When j = m + 1 the corrected state is the draft itself and
                    // its velocity is already known.
                    anchor_velocity = if corrected == drafts[j - anchor - 1] {
                        velocities[j - anchor - 1].clone()
                    } else {
                        stats.total_evals += 1;
                        stats.rounds_strict += 1;
                        field.eval(&corrected, grid.node(j))?
                    };
                }
                states[j] = Some(corrected.clone());
                anchor_state = corrected;
                anchor = j;
            }
            CorrectionRule::Literal => {
                let next = j - 1;
                if next == anchor {
                    return Err(FlowError::NoProgress {
                        round,
                        anchor,
                        rejected: j,
                    });
                }
                states[j] = Some(corrected);
                anchor_state = drafts[accepted - 1].clone();
                anchor_velocity = field.eval(&anchor_state, grid.node(next))?;
                stats.total_evals += 1;
                stats.rounds_strict += 1;
                anchor = next;
            }
        }
    }

    let states = states
        .into_iter()
        .enumerate()
        .map(|(k, s)| s.ok_or(FlowError::NonFiniteState { step: k }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpecRun {
        trajectory: Trajectory {
            grid: grid.clone(),
            states,
        },
        stats,
        trace: SpecTrace {
            epsilon: config.epsilon,
            rounds,
        },
    })
}
