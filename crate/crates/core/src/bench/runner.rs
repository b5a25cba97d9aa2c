use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{bound_check, deviation_report, BoundReport};
use crate::bench::config::{ExperimentConfig, SweepConfig};
use crate::bench::row::{read_rows_file, write_rows_file, ResultRow, RowKey};
use crate::error::{FlowError, Result};
use crate::field::{FieldRegularity, VelocityField};
use crate::fields::{estimate_curvature, estimate_lipschitz, BoundingBox, Field, FieldSource};
use crate::grid::TimeGrid;
use crate::integrator::{flowcast, full_euler, reference_on_grid, SpecTrace, Trajectory};
use crate::state::StateVector;
use crate::stats::SpecConfig;
use crate::Provenance;

pub const RESULTS_FILE: &str = "results.csv";
pub const BOUNDS_FILE: &str = "bounds.json";
pub const TRACES_FILE: &str = "traces.json";
pub const CONFIG_FILE: &str = "effective-config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    #[serde(flatten)]
    pub key: RowKey,
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    #[serde(flatten)]
    pub key: RowKey,
    pub trace: SpecTrace,
}

/// A row that could not be produced. `epsilon` is absent when the failure
/// happened before thresholds were known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    pub field_id: String,
    pub steps: usize,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub error: String,
}

/// Contents of the JSON companion to the results CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Companion {
    pub bounds: Vec<BoundRecord>,
    pub failures: Vec<RowFailure>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; the rayon default when `None`.
    pub jobs: Option<usize>,
    pub keep_traces: bool,
    /// Rows already computed; their keys are skipped.
    pub existing: Vec<ResultRow>,
    pub existing_bounds: Vec<BoundRecord>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    /// Sorted by (field_id, steps, epsilon, seed).
    pub rows: Vec<ResultRow>,
    pub bounds: Vec<BoundRecord>,
    pub traces: Vec<TraceRecord>,
    pub failures: Vec<RowFailure>,
    /// Rows taken over from `SweepOptions::existing`.
    pub resumed: usize,
}

impl SweepOutcome {
    pub fn companion(&self) -> Companion {
        Companion {
            bounds: self.bounds.clone(),
            failures: self.failures.clone(),
        }
    }
}

struct Cell<'a> {
    field_index: usize,
    field_id: String,
    source: &'a FieldSource,
    grid: TimeGrid,
    seed: u64,
}

struct Computed {
    row: ResultRow,
    bound: BoundRecord,
    trace: Option<TraceRecord>,
}

/// Declared constants, or estimates when estimation is enabled.
pub fn field_regularity(
    field: &Field,
    x0: &StateVector,
    visited: &[StateVector],
    options: &crate::bench::config::RegularityOptions,
) -> Result<FieldRegularity> {
    if let Some(declared) = field.declared_regularity(x0) {
        return Ok(declared);
    }
    if !options.estimate {
        return Err(FlowError::Config(format!(
            "{} field has no declared regularity constants; enable regularity estimation",
            field.kind()
        )));
    }
    let bbox = BoundingBox::around(visited, options.margin)?;
    Ok(FieldRegularity {
        m: estimate_lipschitz(field, &bbox, options.samples, options.seed)?,
        n: estimate_curvature(field, x0, options.resolution)?,
        provenance: Provenance::Estimated,
    })
}

fn run_cell(
    config: &SweepConfig,
    field: &Field,
    cell: &Cell,
    done: &dyn Fn(&RowKey) -> bool,
    keep_traces: bool,
) -> (Vec<Computed>, Vec<RowFailure>) {
    let fail = |epsilon: Option<f64>, e: FlowError| RowFailure {
        field_id: cell.field_id.clone(),
        steps: cell.grid.steps(),
        epsilon,
        seed: cell.seed,
        error: e.to_string(),
    };
    let prepared = (|| -> Result<_> {
        let x0 = config.initial_for(cell.source, cell.seed)?.sample(field.dim())?;
        let (euler, _) = full_euler(field, &cell.grid, &x0)?;
        let reference = reference_on_grid(field, &x0, &cell.grid, config.reference_refinement)?;
        let visited: Vec<StateVector> = reference.states.iter().chain(&euler.states).cloned().collect();
        let regularity = field_regularity(field, &x0, &visited, &config.regularity)?;
        let epsilons = config.epsilons_for(regularity.m)?;
        Ok((x0, euler, reference, regularity, epsilons))
    })();
    let (x0, euler, reference, regularity, epsilons) = match prepared {
        Ok(p) => p,
        Err(e) => return (Vec::new(), vec![fail(None, e)]),
    };
    let mut computed = Vec::new();
    let mut failures = Vec::new();
    for epsilon in epsilons {
        let key = RowKey {
            field_id: cell.field_id.clone(),
            steps: cell.grid.steps(),
            epsilon,
            seed: cell.seed,
        };
        if done(&key) {
            continue;
        }
        match run_point(field, &cell.grid, &x0, epsilon, &euler, &reference, &regularity) {
            Ok((row_stats, report, trace)) => {
                let row = make_row(&key, &row_stats, &report);
                computed.push(Computed {
                    row,
                    trace: keep_traces.then(|| TraceRecord {
                        key: key.clone(),
                        trace,
                    }),
                    bound: BoundRecord { key, report },
                });
            }
            Err(e) => failures.push(fail(Some(epsilon), e)),
        }
    }
    (computed, failures)
}

fn run_point(
    field: &Field,
    grid: &TimeGrid,
    x0: &StateVector,
    epsilon: f64,
    euler: &Trajectory,
    reference: &Trajectory,
    regularity: &FieldRegularity,
) -> Result<(crate::RunStats, BoundReport, SpecTrace)> {
    let spec_config = SpecConfig::new(epsilon)?;
    let run = flowcast(field, grid, x0, &spec_config)?;
    let deviation = deviation_report(&run.trajectory, euler, reference)?;
    let report = bound_check(regularity, grid, &run.stats, &spec_config, &deviation);
    Ok((run.stats, report, run.trace))
}

fn make_row(key: &RowKey, stats: &crate::RunStats, report: &BoundReport) -> ResultRow {
    ResultRow {
        field_id: key.field_id.clone(),
        steps: key.steps,
        epsilon: key.epsilon,
        seed: key.seed,
        rounds_folded: stats.rounds_folded,
        rounds_strict: stats.rounds_strict,
        total_evals: stats.total_evals,
        acceptance_fraction: stats.acceptance_fraction(),
        speedup_rounds: stats.speedup_rounds(),
        speedup_vs_50: stats.speedup_vs_50(),
        final_spec_deviation: report.empirical.final_spec_deviation,
        max_spec_deviation: report.empirical.max_spec_deviation,
        bound: report.final_bound(),
        bound_holds: report.bound_holds,
    }
}

/// Runs every (field, grid, seed, ε) combination. Field-loading errors abort
/// the sweep; errors in individual runs are collected as failures.
pub fn sweep(config: &SweepConfig, options: SweepOptions) -> Result<SweepOutcome> {
    config.validate()?;
    let fields: Vec<Field> = config
        .fields
        .iter()
        .map(|s| s.load().map_err(|e| e.context(format!("loading field `{s}`"))))
        .collect::<Result<_>>()?;
    let grids: Vec<TimeGrid> = config.grids.iter().map(|g| g.build()).collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (field_index, source) in config.fields.iter().enumerate() {
        for grid in &grids {
            for &seed in &config.seeds {
                cells.push(Cell {
                    field_index,
                    field_id: source.to_string(),
                    source,
                    grid: grid.clone(),
                    seed,
                });
            }
        }
    }

    let existing = options.existing;
    let done = |key: &RowKey| existing.iter().any(|r| r.key().same(key));
    let keep_traces = options.keep_traces;
    let work = || -> Vec<(Vec<Computed>, Vec<RowFailure>)> {
        cells
            .par_iter()
            .map(|cell| run_cell(config, &fields[cell.field_index], cell, &done, keep_traces))
            .collect()
    };
    let results = match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| FlowError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut outcome = SweepOutcome {
        resumed: existing.len(),
        ..Default::default()
    };
    let mut rows = existing.clone();
    let mut all_bounds: Vec<BoundRecord> = options
        .existing_bounds
        .into_iter()
        .filter(|b| existing.iter().any(|r| r.key().same(&b.key)))
        .collect();
    for (computed, failures) in results {
        for c in computed {
            rows.push(c.row);
            all_bounds.push(c.bound);
            outcome.traces.extend(c.trace);
        }
        outcome.failures.extend(failures);
    }
    rows.sort_by(|a, b| a.key().order(&b.key()));
    all_bounds.sort_by(|a, b| a.key.order(&b.key));
    outcome.traces.sort_by(|a, b| a.key.order(&b.key));
    outcome.rows = rows;
    outcome.bounds = all_bounds;
    Ok(outcome)
}

/// Runs one experiment, keeping traces.
pub fn run_experiment(config: &ExperimentConfig, jobs: Option<usize>) -> Result<SweepOutcome> {
    config.validate()?;
    sweep(
        &config.to_sweep(),
        SweepOptions {
            jobs,
            keep_traces: true,
            ..Default::default()
        },
    )
}

/// Previously written rows and bound records in `dir`, if any.
pub fn load_previous(dir: &Path) -> Result<(Vec<ResultRow>, Vec<BoundRecord>)> {
    let csv_path = dir.join(RESULTS_FILE);
    if !csv_path.exists() {
        return Ok((Vec::new(), Vec::new()));
    }
    let rows = read_rows_file(&csv_path)?;
    let json_path = dir.join(BOUNDS_FILE);
    let bounds = if json_path.exists() {
        let text = std::fs::read_to_string(&json_path).map_err(|e| FlowError::io(&json_path, e))?;
        serde_json::from_str::<Companion>(&text)
            .map_err(|e| FlowError::from(e).context(json_path.display().to_string()))?
            .bounds
    } else {
        Vec::new()
    };
    Ok((rows, bounds))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| FlowError::io(path, e))
}

/// Writes the effective config, results CSV, bound companion and (when
/// present) traces into `dir`.
pub fn write_outputs<C: Serialize>(dir: &Path, config: &C, outcome: &SweepOutcome) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| FlowError::io(dir, e))?;
    write_json(&dir.join(CONFIG_FILE), config)?;
    write_rows_file(&dir.join(RESULTS_FILE), &outcome.rows)?;
    write_json(&dir.join(BOUNDS_FILE), &outcome.companion())?;
    if !outcome.traces.is_empty() {
        write_json(&dir.join(TRACES_FILE), &outcome.traces)?;
    }
    Ok(())
}
