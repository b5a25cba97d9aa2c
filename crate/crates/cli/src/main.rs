mod compare;
mod error;
mod gen;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use flowcast::analysis::BoundReport;
use flowcast::bench::{self, ExperimentConfig, GridSpec, SweepConfig, SweepOptions, SweepOutcome};
use flowcast::fields::{Field, FieldSource};
use flowcast::{Provenance, VelocityField};

use error::CliError;

#[derive(Parser)]
#[command(name = "flowcast", version, about = "Speculative sampling experiments for flow-matching ODEs")]
struct Cli {
    /// Suppress per-row summaries on stdout.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write results, bound reports and traces.
    Run(RunArgs),
    /// Run a sweep over fields, step counts, thresholds and seeds.
    Sweep(SweepArgs),
    /// Check the global error bound, or derive a threshold from a tolerance.
    Bound(RunArgs),
    /// Compare two results files column by column.
    Compare { a: PathBuf, b: PathBuf },
    /// Write a tabulated or MLP field file sampled from an analytic field.
    GenField(GenArgs),
}

#[derive(Args, Default)]
struct Overrides {
    /// Field alias, or `file:`, `tabulated:` or `mlp:` followed by a path.
    #[arg(long)]
    field: Option<String>,
    #[arg(long)]
    steps: Option<usize>,
    /// One or more thresholds, comma separated.
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Deviation tolerance; the threshold is derived from it.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Estimate regularity constants for fields that do not declare them.
    #[arg(long)]
    estimate_regularity: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "flowcast-out")]
    out: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "flowcast-out")]
    out: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    /// Keep rows already present in the output directory.
    #[arg(long)]
    resume: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKind {
    Tabulated,
    Mlp,
}

#[derive(Args)]
struct GenArgs {
    /// Analytic source: an alias or a `file:` path holding an analytic field.
    #[arg(long)]
    field: String,
    #[arg(long, value_enum)]
    kind: FieldKind,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    hi: f64,
    /// Nodes per spatial axis.
    #[arg(long, default_value_t = 41)]
    nodes: usize,
    #[arg(long, default_value_t = 21)]
    time_nodes: usize,
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::failure("io", format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_value(read_json(path)?)
        .map_err(|e| CliError::usage("config", format!("{}: {e}", path.display())))
}

fn experiment_config(args: &RunArgs, default_epsilon: Option<f64>) -> Result<ExperimentConfig, CliError> {
    let o = &args.overrides;
    let mut config = match (&args.config, &o.field) {
        (Some(path), _) => parse_config(path)?,
        (None, Some(field)) => ExperimentConfig::new(FieldSource::parse(field)?, o.steps.unwrap_or(50)),
        (None, None) => return Err(CliError::usage("usage", "one of --config or --field is required")),
    };
    if let Some(field) = &o.field {
        config.field = FieldSource::parse(field)?;
    }
    if let Some(k) = o.steps {
        config.grid = GridSpec::Steps(k);
    }
    if !o.epsilon.is_empty() {
        config.epsilons = Some(o.epsilon.clone());
    }
    if o.seed.is_some() {
        config.seed = o.seed;
    }
    if o.tolerance.is_some() {
        config.tolerance = o.tolerance;
        if o.epsilon.is_empty() {
            config.epsilons = None;
        }
    }
    if o.estimate_regularity {
        config.regularity.estimate = true;
    }
    if config.epsilons.is_none() && config.tolerance.is_none() {
        config.epsilons = default_epsilon.map(|e| vec![e]);
    }
    config.validate()?;
    Ok(config)
}

fn sweep_config(args: &SweepArgs) -> Result<SweepConfig, CliError> {
    let o = &args.overrides;
    let mut config: SweepConfig = parse_config(&args.config)?;
    if let Some(field) = &o.field {
        config.fields = vec![FieldSource::parse(field)?];
    }
    if let Some(k) = o.steps {
        config.grids = vec![GridSpec::Steps(k)];
    }
    if !o.epsilon.is_empty() {
        config.epsilons = Some(o.epsilon.clone());
    }
    if let Some(seed) = o.seed {
        config.seeds = vec![seed];
    }
    if o.tolerance.is_some() {
        config.tolerance = o.tolerance;
    }
    if o.estimate_regularity {
        config.regularity.estimate = true;
    }
    config.validate()?;
    Ok(config)
}

fn print_rows(outcome: &SweepOutcome) {
    println!("field_id,steps,epsilon,seed,rounds_folded,speedup_rounds,max_spec_deviation,bound,bound_holds");
    for r in &outcome.rows {
        println!(
            "{},{},{:e},{},{},{},{:e},{:e},{}",
            r.field_id, r.steps, r.epsilon, r.seed, r.rounds_folded, r.speedup_rounds, r.max_spec_deviation, r.bound,
            r.bound_holds
        );
    }
}

fn check_failures(outcome: &SweepOutcome, out: &Path) -> Result<(), CliError> {
    if outcome.failures.is_empty() {
        return Ok(());
    }
    let first = &outcome.failures[0];
    Err(CliError::failure(
        "runtime",
        format!(
            "{} run(s) failed, see {}; first ({} K={} seed={}): {}",
            outcome.failures.len(),
            out.join(bench::BOUNDS_FILE).display(),
            first.field_id,
            first.steps,
            first.seed,
            first.error
        ),
    ))
}

fn cmd_run(args: &RunArgs, quiet: bool) -> Result<i32, CliError> {
    let config = experiment_config(args, None)?;
    require_regularity(&config)?;
    let outcome = bench::run_experiment(&config, args.jobs)?;
    bench::write_outputs(&args.out, &config, &outcome)?;
    if !quiet {
        print_rows(&outcome);
    }
    check_failures(&outcome, &args.out)?;
    Ok(0)
}

fn cmd_sweep(args: &SweepArgs, quiet: bool) -> Result<i32, CliError> {
    let config = sweep_config(args)?;
    let (existing, existing_bounds) = if args.resume {
        bench::load_previous(&args.out)?
    } else {
        Default::default()
    };
    let options = SweepOptions {
        jobs: args.jobs,
        keep_traces: false,
        existing,
        existing_bounds,
    };
    let outcome = bench::sweep(&config, options)?;
    bench::write_outputs(&args.out, &config, &outcome)?;
    if !quiet {
        print_rows(&outcome);
        eprintln!(
            "{} rows ({} resumed), {} failures",
            outcome.rows.len(),
            outcome.resumed,
            outcome.failures.len()
        );
    }
    check_failures(&outcome, &args.out)?;
    Ok(0)
}

fn require_regularity(config: &ExperimentConfig) -> Result<Field, CliError> {
    let field = config.field.load()?;
    if config.regularity.estimate {
        return Ok(field);
    }
    let sweep = config.to_sweep();
    let x0 = sweep.initial_for(&config.field, sweep.seeds[0])?.sample(field.dim())?;
    if field.declared_regularity(&x0).is_none() {
        return Err(CliError::failure(
            "regularity",
            format!(
                "{} field `{}` declares no regularity constants; pass --estimate-regularity",
                field.kind(),
                config.field
            ),
        ));
    }
    Ok(field)
}

fn describe(value: Option<f64>) -> String {
    value.map_or_else(|| "none".to_string(), |v| format!("{v:.6e}"))
}

fn cmd_bound(args: &RunArgs, quiet: bool) -> Result<i32, CliError> {
    let config = experiment_config(args, Some(0.0))?;
    require_regularity(&config)?;
    let outcome = bench::run_experiment(&config, args.jobs)?;
    bench::write_outputs(&args.out, &config, &outcome)?;
    let reports: Vec<&BoundReport> = outcome.bounds.iter().map(|b| &b.report).collect();
    let path = args.out.join("bound-report.json");
    let text = serde_json::to_string_pretty(&reports).map_err(flowcast::FlowError::from)?;
    std::fs::write(&path, text + "\n").map_err(|e| flowcast::FlowError::io(&path, e))?;
    check_failures(&outcome, &args.out)?;

    let mut code = 0;
    for (record, row) in outcome.bounds.iter().zip(&outcome.rows) {
        let report = &record.report;
        if report.inputs.provenance == Provenance::Estimated {
            eprintln!("note: regularity constants are estimated; the bound is advisory");
        }
        if let Some(q) = config.tolerance {
            println!("epsilon={:.6e}", record.key.epsilon);
            let within = row.max_spec_deviation <= q;
            println!("max_spec_deviation={:.6e} tolerance={q} within={within}", row.max_spec_deviation);
            if !within {
                code = 1;
            }
        }
        if !quiet || config.tolerance.is_none() {
            println!(
                "seed={} epsilon={:.6e} bound_holds={} max_tightness={} final_bound={:.6e} provenance={}",
                record.key.seed,
                record.key.epsilon,
                report.bound_holds,
                describe(report.max_tightness()),
                report.final_bound(),
                if report.guarantee { "declared" } else { "estimated" }
            );
        }
        if report.guarantee && !report.bound_holds {
            code = 1;
        }
    }
    Ok(code)
}

fn cmd_gen(args: &GenArgs) -> Result<i32, CliError> {
    let spec = match FieldSource::parse(&args.field)?.load()? {
        Field::Analytic(f) => f.spec().clone(),
        other => {
            return Err(CliError::usage(
                "argument",
                format!("gen-field needs an analytic source, got a {} field", other.kind()),
            ))
        }
    };
    let field = match args.kind {
        FieldKind::Tabulated => gen::tabulate(&spec, args.lo, args.hi, args.nodes, args.time_nodes)?,
        FieldKind::Mlp => gen::affine_mlp(&spec)?,
    };
    let text = serde_json::to_string(&field.to_json()).map_err(flowcast::FlowError::from)?;
    std::fs::write(&args.output, text + "\n").map_err(|e| flowcast::FlowError::io(&args.output, e))?;
    println!("{}", args.output.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args, cli.quiet),
        Command::Sweep(args) => cmd_sweep(args, cli.quiet),
        Command::Bound(args) => cmd_bound(args, cli.quiet),
        Command::Compare { a, b } => compare::compare_files(a, b),
        Command::GenField(args) => cmd_gen(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code as u8)
        }
    }
}
