use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

/// Cost and acceptance accounting for one sampler run.
///
/// A round is one sequential batch of field evaluations, whatever its size.
/// `rounds_folded` charges a fresh anchor evaluation to the verification batch
/// that follows it; `rounds_strict` charges it as a round of its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub rounds_folded: usize,
    pub rounds_strict: usize,
    pub total_evals: usize,
    /// Grid steps whose update reused an anchor velocity.
    pub accepted_draft_steps: usize,
    pub correction_rounds: usize,
}

impl RunStats {
    /// Accounting of plain forward Euler over `steps` steps.
    pub fn sequential(steps: usize) -> Self {
        RunStats {
            steps,
            rounds_folded: steps,
            rounds_strict: steps,
            total_evals: steps,
            accepted_draft_steps: 0,
            correction_rounds: 0,
        }
    }

    /// Fraction p of grid steps covered by accepted drafts.
    pub fn acceptance_fraction(&self) -> f64 {
        self.accepted_draft_steps as f64 / self.steps as f64
    }

    /// Speedup in sequential rounds against same-K full Euler.
    pub fn speedup_rounds(&self) -> f64 {
        self.steps as f64 / self.rounds_folded as f64
    }

    /// Speedup against a 50-step full Euler baseline.
    pub fn speedup_vs_50(&self) -> f64 {
        50.0 / self.rounds_folded as f64
    }
}

/// How a rejected round picks the next anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionRule {
    /// Re-anchor at the rejected index `j`; always makes progress.
    #[default]
    Progressive,
    /// Re-anchor at `j - 1` and re-evaluate there. Stalls when `j = m + 1`,
    /// which is reported as [`FlowError::NoProgress`].
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecConfig {
    /// Acceptance threshold on the MSE between anchor and draft velocities.
    pub epsilon: f64,
    /// Cap on sequential rounds; `None` means `4 K`.
    pub max_rounds: Option<usize>,
    pub correction: CorrectionRule,
}

impl SpecConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(FlowError::InvalidArgument(format!(
                "epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(SpecConfig {
            epsilon,
            max_rounds: None,
            correction: CorrectionRule::Progressive,
        })
    }

    pub fn with_correction(mut self, correction: CorrectionRule) -> Self {
        self.correction = correction;
        self
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = Some(max_rounds);
        self
    }

    pub fn max_rounds_for(&self, steps: usize) -> usize {
        self.max_rounds.unwrap_or(4 * steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_must_be_non_negative() {
        assert!(SpecConfig::new(0.0).is_ok());
        assert!(SpecConfig::new(-1e-9).is_err());
        assert!(SpecConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn default_round_cap_is_four_k() {
        let c = SpecConfig::new(0.1).unwrap();
        assert_eq!(c.max_rounds_for(50), 200);
        assert_eq!(c.with_max_rounds(3).max_rounds_for(50), 3);
    }

    #[test]
    fn euler_accounting() {
        let s = RunStats::sequential(50);
        assert_eq!(s.rounds_folded, 50);
        assert_eq!(s.acceptance_fraction(), 0.0);
        assert_eq!(s.speedup_rounds(), 1.0);
    }
}
