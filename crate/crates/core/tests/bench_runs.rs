use flowcast::bench::{
    self, ExperimentConfig, GridSpec, ResultRow, SweepConfig, SweepOptions, DEFAULT_EPSILONS, RESULTS_FILE,
};
use flowcast::fields::FieldSource;
use proptest::prelude::*;

fn experiment(field: &str, steps: usize, epsilons: Vec<f64>) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(FieldSource::Alias(field.into()), steps);
    config.epsilons = Some(epsilons);
    config
}

fn rows(config: &ExperimentConfig) -> Vec<ResultRow> {
    let out = bench::run_experiment(config, None).unwrap();
    assert!(out.failures.is_empty(), "{:?}", out.failures);
    out.rows
}

#[test]
fn constant_field_run() {
    let r = rows(&experiment("constant2d", 50, vec![0.01]));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].speedup_rounds, 25.0);
    assert_eq!(r[0].max_spec_deviation, 0.0);
    assert_eq!(r[0].final_spec_deviation, 0.0);
}

#[test]
fn zero_threshold_rows() {
    for field in ["gauss-bridge", "rotation", "linear-contract"] {
        let r = rows(&experiment(field, 25, vec![0.0]));
        assert_eq!(r[0].max_spec_deviation, 0.0, "{field}");
        assert!(r[0].speedup_rounds <= 1.0, "{field}");
    }
}

#[test]
fn threshold_by_steps_grid() {
    let config = SweepConfig {
        fields: vec![FieldSource::Alias("linear-contract".into())],
        grids: vec![GridSpec::Steps(10), GridSpec::Steps(50)],
        epsilons: Some(vec![0.0, 0.01]),
        tolerance: None,
        seeds: vec![0],
        initial_state: None,
        reference_refinement: 100,
        regularity: Default::default(),
    };
    let out = bench::sweep(&config, SweepOptions::default()).unwrap();
    assert_eq!(out.rows.len(), 4);
    for r in &out.rows {
        assert_eq!(r.speedup_rounds, r.steps as f64 / r.rounds_folded as f64);
        assert_eq!(r.speedup_vs_50, 50.0 / r.rounds_folded as f64);
        if r.epsilon == 0.0 {
            assert_eq!(r.max_spec_deviation, 0.0);
        }
    }
}

#[test]
fn single_point_sweep_matches_run() {
    let config = experiment("gauss-bridge", 20, vec![1e-3]);
    let direct = rows(&config);
    let swept = bench::sweep(&config.to_sweep(), SweepOptions::default()).unwrap().rows;
    assert_eq!(direct, swept);
}

#[test]
fn bridge_sweep_orders_speedup_and_deviation() {
    let mut config = experiment("gauss-bridge", 50, DEFAULT_EPSILONS[3..].to_vec());
    config.repetitions = 5;
    let r = rows(&config);
    let mean = |eps: f64, f: fn(&ResultRow) -> f64| {
        let sel: Vec<&ResultRow> = r.iter().filter(|x| x.epsilon == eps).collect();
        sel.iter().map(|x| f(x)).sum::<f64>() / sel.len() as f64
    };
    let eps = &DEFAULT_EPSILONS[3..];
    for w in eps.windows(2) {
        assert!(mean(w[1], |x| x.speedup_rounds) >= mean(w[0], |x| x.speedup_rounds));
        assert!(mean(w[1], |x| x.max_spec_deviation) >= mean(w[0], |x| x.max_spec_deviation));
    }
}

#[test]
fn effective_config_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = experiment("rotation", 30, vec![1e-4, 1e-2]);
    config.repetitions = 2;
    let first = dir.path().join("first");
    let out = bench::run_experiment(&config, None).unwrap();
    bench::write_outputs(&first, &config, &out).unwrap();

    let again = ExperimentConfig::load(&first.join(bench::CONFIG_FILE)).unwrap();
    assert_eq!(again, config);
    let second = dir.path().join("second");
    bench::write_outputs(&second, &again, &bench::run_experiment(&again, Some(2)).unwrap()).unwrap();
    for file in [RESULTS_FILE, bench::BOUNDS_FILE, bench::TRACES_FILE, bench::CONFIG_FILE] {
        assert_eq!(
            std::fs::read(first.join(file)).unwrap(),
            std::fs::read(second.join(file)).unwrap(),
            "{file}"
        );
    }
}

fn resume_config() -> SweepConfig {
    SweepConfig {
        fields: vec![FieldSource::Alias("gauss-bridge".into()), FieldSource::Alias("rotation".into())],
        grids: vec![GridSpec::Steps(12), GridSpec::Steps(20)],
        epsilons: Some(vec![0.0, 1e-3, 1e-2]),
        tolerance: None,
        seeds: vec![3, 4],
        initial_state: None,
        reference_refinement: 10,
        regularity: Default::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn resume_matches_clean_run(mask in proptest::collection::vec(any::<bool>(), 24)) {
        let config = resume_config();
        let clean = bench::sweep(&config, SweepOptions::default()).unwrap();
        prop_assert_eq!(clean.rows.len(), 24);
        let dir = tempfile::tempdir().unwrap();
        let partial = bench::SweepOutcome {
            rows: clean.rows.iter().zip(&mask).filter(|(_, &m)| m).map(|(r, _)| r.clone()).collect(),
            bounds: clean.bounds.iter().zip(&mask).filter(|(_, &m)| m).map(|(b, _)| b.clone()).collect(),
            ..Default::default()
        };
        bench::write_outputs(dir.path(), &config, &partial).unwrap();
        let (existing, existing_bounds) = bench::load_previous(dir.path()).unwrap();
        let resumed = bench::sweep(&config, SweepOptions { existing, existing_bounds, ..Default::default() }).unwrap();
        prop_assert_eq!(&resumed.rows, &clean.rows);
        prop_assert_eq!(&resumed.bounds, &clean.bounds);
    }
}
