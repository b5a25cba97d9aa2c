use crate::error::{FlowError, Result};
use crate::field::VelocityField;
use crate::grid::TimeGrid;
use crate::integrator::Trajectory;
use crate::stats::RunStats;
use crate::state::StateVector;

/// Forward Euler, `x_{k+1} = x_k + Δt_k v(x_k, t_k)`, one evaluation per round.
pub fn full_euler(
    field: &dyn VelocityField,
    grid: &TimeGrid,
    x0: &StateVector,
) -> Result<(Trajectory, RunStats)> {
    if x0.dim() != field.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: field.dim(),
            got: x0.dim(),
        });
    }
    let mut states = Vec::with_capacity(grid.steps() + 1);
    states.push(x0.clone());
    for k in 0..grid.steps() {
        let x = &states[k];
        let v = field.eval(x, grid.node(k)).map_err(|e| match e {
            FlowError::NonFiniteValue { .. } => FlowError::NonFiniteState { step: k },
            other => other,
        })?;
        let next = x
            .advance(grid.dt(k), &v)
            .map_err(|_| FlowError::NonFiniteState { step: k + 1 })?;
        states.push(next);
    }
    Ok((
        Trajectory {
            grid: grid.clone(),
            states,
        },
        RunStats::sequential(grid.steps()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{AnalyticField, AnalyticFieldSpec};

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn constant_field_telescopes() {
        let f = AnalyticField::new(AnalyticFieldSpec::Constant { c: vec![0.5, -2.0] }).unwrap();
        let grid = TimeGrid::new(vec![0.0, 0.1, 0.35, 0.8, 1.0]).unwrap();
        let (traj, stats) = full_euler(&f, &grid, &sv(&[1.0, 1.0])).unwrap();
        let last = traj.final_state();
        assert!((last[0] - 1.5).abs() < 1e-15 && (last[1] + 1.0).abs() < 1e-15);
        assert_eq!(stats.rounds_folded, 4);
        assert_eq!(stats.total_evals, 4);
        assert_eq!(stats.acceptance_fraction(), 0.0);
    }

    // Closed-form product (1 - 1/K)^K against an independently accumulated loop.
    #[test]
    fn scalar_decay_matches_product() {
        let f = AnalyticField::new(AnalyticFieldSpec::Linear {
            a: vec![vec![-1.0]],
            b: vec![0.0],
        })
        .unwrap();
        let (traj, _) = full_euler(&f, &TimeGrid::uniform(50).unwrap(), &sv(&[1.0])).unwrap();
        let expected = 0.98f64.powi(50);
        assert!((traj.final_state()[0] - expected).abs() < 1e-14);
        assert!((expected - 0.36417).abs() < 1e-5);
    }

    #[test]
    fn single_step() {
        let f = AnalyticField::new(AnalyticFieldSpec::Rotation { omega: 3.0 }).unwrap();
        let x0 = sv(&[1.0, 2.0]);
        let (traj, stats) = full_euler(&f, &TimeGrid::uniform(1).unwrap(), &x0).unwrap();
        let v = f.eval(&x0, 0.0).unwrap();
        assert_eq!(traj.final_state(), &x0.advance(1.0, &v).unwrap());
        assert_eq!(stats.rounds_folded, 1);
    }

    #[test]
    fn blow_up_reports_step() {
        let f = AnalyticField::new(AnalyticFieldSpec::Linear {
            a: vec![vec![1e300]],
            b: vec![0.0],
        })
        .unwrap();
        let err = full_euler(&f, &TimeGrid::uniform(10).unwrap(), &sv(&[1e10])).unwrap_err();
        assert!(matches!(err, FlowError::NonFiniteState { .. }), "{err}");
    }
}
