use flowcast::analysis::{bound_check, deviation_report, Tightness};
use flowcast::fields::{AnalyticField, AnalyticFieldSpec};
use flowcast::{flowcast, full_euler, reference_on_grid, SpecConfig, StateVector, TimeGrid, VelocityField};

fn sv(v: &[f64]) -> StateVector {
    StateVector::new(v.to_vec()).unwrap()
}

fn decay() -> AnalyticField {
    AnalyticField::new(AnalyticFieldSpec::Linear { a: vec![vec![-1.0]], b: vec![0.0] }).unwrap()
}

#[test]
fn euler_error_on_scalar_decay() {
    let f = decay();
    let grid = TimeGrid::uniform(50).unwrap();
    let x0 = sv(&[1.0]);
    let (euler, _) = full_euler(&f, &grid, &x0).unwrap();
    let reference = reference_on_grid(&f, &x0, &grid, 200).unwrap();
    let report = deviation_report(&euler, &euler, &reference).unwrap();
    let closed = ((-1f64).exp() - 0.98f64.powi(50)).abs();
    assert!((report.final_error - closed).abs() < 1e-9, "{} vs {closed}", report.final_error);
    assert!((closed - 3.709e-3).abs() < 1e-6);
    assert_eq!(report.per_step_error[0], 0.0);
    assert!(report.spec_deviation.iter().all(|&d| d == 0.0));
}

#[test]
fn constant_field_has_no_error() {
    let f = AnalyticField::new(AnalyticFieldSpec::Constant { c: vec![1.0, -1.0] }).unwrap();
    let grid = TimeGrid::uniform(20).unwrap();
    let x0 = sv(&[0.0, 0.0]);
    let config = SpecConfig::new(0.0).unwrap();
    let run = flowcast(&f, &grid, &x0, &config).unwrap();
    let (euler, _) = full_euler(&f, &grid, &x0).unwrap();
    let reference = reference_on_grid(&f, &x0, &grid, 10).unwrap();
    let dev = deviation_report(&run.trajectory, &euler, &reference).unwrap();
    assert!(dev.per_step_error.iter().all(|&e| e == 0.0), "{:?}", dev.per_step_error);
    let reg = f.declared_regularity(&x0).unwrap();
    assert_eq!((reg.m, reg.n), (0.0, 0.0));
    let report = bound_check(&reg, &grid, &run.stats, &config, &dev);
    assert!(report.per_step_bound.iter().all(|&b| b == 0.0));
    assert!(report.tightness_ratio.iter().all(|t| *t == Tightness::ExactMatch));
    assert!(report.bound_holds);
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["tightness_ratio"][3], "exact");
}

#[test]
fn euler_run_satisfies_bound() {
    let f = decay();
    let grid = TimeGrid::uniform(50).unwrap();
    let x0 = sv(&[1.0]);
    let config = SpecConfig::new(0.0).unwrap();
    let run = flowcast(&f, &grid, &x0, &config).unwrap();
    let (euler, _) = full_euler(&f, &grid, &x0).unwrap();
    let reference = reference_on_grid(&f, &x0, &grid, 100).unwrap();
    let dev = deviation_report(&run.trajectory, &euler, &reference).unwrap();
    let reg = f.declared_regularity(&x0).unwrap();
    assert_eq!((reg.m, reg.n), (1.0, 1.0));
    let report = bound_check(&reg, &grid, &run.stats, &config, &dev);
    assert!(report.bound_holds && report.guarantee);
    for (b, e) in report.per_step_bound.iter().zip(&dev.spec_error) {
        assert!(e <= b);
    }
}

#[test]
fn report_serializes_with_fixed_keys() {
    let f = decay();
    let grid = TimeGrid::uniform(5).unwrap();
    let x0 = sv(&[1.0]);
    let config = SpecConfig::new(1e-3).unwrap();
    let run = flowcast(&f, &grid, &x0, &config).unwrap();
    let (euler, _) = full_euler(&f, &grid, &x0).unwrap();
    let reference = reference_on_grid(&f, &x0, &grid, 10).unwrap();
    let dev = deviation_report(&run.trajectory, &euler, &reference).unwrap();
    let report = bound_check(&f.declared_regularity(&x0).unwrap(), &grid, &run.stats, &config, &dev);
    let json = serde_json::to_value(&report).unwrap();
    for key in ["inputs", "per_step_bound", "empirical", "tightness_ratio", "bound_holds", "guarantee"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    for key in ["m", "n", "h", "p", "epsilon", "epsilon_norm", "provenance"] {
        assert!(json["inputs"].get(key).is_some(), "{key}");
    }
    assert_eq!(json["inputs"]["provenance"], "declared");
    let back: flowcast::analysis::BoundReport = serde_json::from_value(json).unwrap();
    assert_eq!(back, report);
}

#[test]
fn mismatched_grids_are_rejected() {
    let f = decay();
    let x0 = sv(&[1.0]);
    let (a, _) = full_euler(&f, &TimeGrid::uniform(5).unwrap(), &x0).unwrap();
    let (b, _) = full_euler(&f, &TimeGrid::uniform(10).unwrap(), &x0).unwrap();
    assert!(deviation_report(&a, &a, &b).is_err());
}
