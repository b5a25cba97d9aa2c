use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::fields::{registry, FieldSource};
use crate::grid::TimeGrid;
use crate::sampling::InitialState;

/// Log-spaced thresholds `10^(-5 + i/3)` for `i = 0..=12`, pinned as literals.
pub const DEFAULT_EPSILONS: [f64; 13] = [
    1e-05,
    2.1544346900318823e-05,
    4.641588833612782e-05,
    0.0001,
    0.00021544346900318823,
    0.0004641588833612782,
    0.001,
    0.0021544346900318843,
    0.004641588833612777,
    0.01,
    0.021544346900318846,
    0.046415888336127774,
    0.1,
];

/// A uniform grid by step count, or explicit nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Steps(usize),
    Nodes(TimeGrid),
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        match self {
            GridSpec::Steps(k) => TimeGrid::uniform(*k),
            GridSpec::Nodes(grid) => Ok(grid.clone()),
        }
    }
}

/// Settings for sampled Lipschitz and curvature estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityOptions {
    /// Allow estimation for fields without declared constants.
    #[serde(default)]
    pub estimate: bool,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Relative margin added around the visited states.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_samples() -> usize {
    10_000
}

fn default_resolution() -> usize {
    1000
}

fn default_margin() -> f64 {
    0.1
}

fn default_refinement() -> usize {
    100
}

fn default_repetitions() -> usize {
    1
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            estimate: false,
            samples: default_samples(),
            seed: 0,
            resolution: default_resolution(),
            margin: default_margin(),
        }
    }
}

/// One field on one grid, over a list of thresholds and repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub field: FieldSource,
    pub grid: GridSpec,
    /// Defaults to the alias's pinned start, or a standard Gaussian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    /// First seed; defaults to the initial state's own seed, else 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    /// Target deviation; the threshold is derived from it when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Repetition `r` uses seed `seed + r`.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_refinement")]
    pub reference_refinement: usize,
    #[serde(default)]
    pub regularity: RegularityOptions,
}

impl ExperimentConfig {
    pub fn new(field: FieldSource, steps: usize) -> Self {
        ExperimentConfig {
            field,
            grid: GridSpec::Steps(steps),
            initial_state: None,
            seed: None,
            epsilons: None,
            tolerance: None,
            repetitions: 1,
            reference_refinement: default_refinement(),
            regularity: RegularityOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FlowError::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(FlowError::Config("repetitions must be at least 1".into()));
        }
        if self.epsilons.is_none() && self.tolerance.is_none() {
            return Err(FlowError::Config("one of epsilons or tolerance is required".into()));
        }
        self.to_sweep().validate()
    }

    /// The equivalent single-field sweep.
    pub fn to_sweep(&self) -> SweepConfig {
        let base = self
            .seed
            .or_else(|| self.initial_state.as_ref().and_then(InitialState::seed))
            .or_else(|| alias_initial(&self.field).and_then(|s| s.seed()))
            .unwrap_or(0);
        SweepConfig {
            fields: vec![self.field.clone()],
            grids: vec![self.grid.clone()],
            epsilons: self.epsilons.clone(),
            tolerance: self.tolerance,
            seeds: (0..self.repetitions as u64).map(|r| base + r).collect(),
            initial_state: self.initial_state.clone(),
            reference_refinement: self.reference_refinement,
            regularity: self.regularity.clone(),
        }
    }
}

/// Cartesian product of fields, grids, thresholds and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub fields: Vec<FieldSource>,
    pub grids: Vec<GridSpec>,
    /// Defaults to [`DEFAULT_EPSILONS`] when neither this nor `tolerance` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub seeds: Vec<u64>,
    /// Template whose seed is replaced per row. When absent, aliases use their
    /// pinned start and other fields a standard Gaussian.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default = "default_refinement")]
    pub reference_refinement: usize,
    #[serde(default)]
    pub regularity: RegularityOptions,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: SweepConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FlowError::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(FlowError::Config(msg));
        if self.fields.is_empty() {
            return fail("at least one field is required".into());
        }
        if self.grids.is_empty() {
            return fail("at least one grid is required".into());
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        for grid in &self.grids {
            grid.build()?;
        }
        if let Some(eps) = &self.epsilons {
            if eps.is_empty() {
                return fail("epsilons must not be empty".into());
            }
            if let Some(bad) = eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
                return fail(format!("epsilon must be finite and >= 0, got {bad}"));
            }
        }
        if let Some(q) = self.tolerance {
            if !(q.is_finite() && q > 0.0) {
                return fail(format!("tolerance must be finite and > 0, got {q}"));
            }
        }
        if self.reference_refinement < 10 {
            return fail(format!(
                "reference_refinement must be at least 10, got {}",
                self.reference_refinement
            ));
        }
        for field in &self.fields {
            if let FieldSource::Alias(name) = field {
                registry::lookup(name)?;
            }
        }
        Ok(())
    }

    /// Thresholds for a field whose Lipschitz constant is `m`.
    pub fn epsilons_for(&self, m: f64) -> Result<Vec<f64>> {
        let mut eps = match (&self.epsilons, self.tolerance) {
            (Some(list), _) => list.clone(),
            (None, Some(_)) => Vec::new(),
            (None, None) => DEFAULT_EPSILONS.to_vec(),
        };
        if let Some(q) = self.tolerance {
            eps.push(crate::analysis::epsilon_for_tolerance(q, m)?);
        }
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        Ok(eps)
    }

    /// Starting point source for `field`, seeded with `seed`.
    pub fn initial_for(&self, field: &FieldSource, seed: u64) -> Result<InitialState> {
        let template = self
            .initial_state
            .clone()
            .or_else(|| alias_initial(field))
            .unwrap_or(InitialState::Gaussian { seed: 0, mean: 0.0, stddev: 1.0 });
        Ok(template.with_seed(seed))
    }
}

fn alias_initial(field: &FieldSource) -> Option<InitialState> {
    match field {
        FieldSource::Alias(name) => registry::lookup(name).ok().map(|a| a.initial),
        _ => None,
    }
}
