use crate::error::{FlowError, Result};
use crate::field::VelocityField;
use crate::grid::TimeGrid;
use crate::integrator::Trajectory;
use crate::state::StateVector;

/// Classical RK4 on `fine_steps` uniform steps over [0, 1].
pub fn reference_solution(
    field: &dyn VelocityField,
    x0: &StateVector,
    fine_steps: usize,
) -> Result<Trajectory> {
    if x0.dim() != field.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: field.dim(),
            got: x0.dim(),
        });
    }
    let grid = TimeGrid::uniform(fine_steps)?;
    let mut states = Vec::with_capacity(fine_steps + 1);
    states.push(x0.clone());
    for i in 0..fine_steps {
        let t = grid.node(i);
        let h = grid.dt(i);
        let x = &states[i];
        let k1 = field.eval(x, t)?;
        let k2 = field.eval(&x.advance(0.5 * h, &k1)?, t + 0.5 * h)?;
        let k3 = field.eval(&x.advance(0.5 * h, &k2)?, t + 0.5 * h)?;
        let k4 = field.eval(&x.advance(h, &k3)?, t + h)?;
        let next: Vec<f64> = (0..x.dim())
            .map(|c| x[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]))
            .collect();
        states.push(StateVector::new(next).map_err(|_| FlowError::NonFiniteState { step: i + 1 })?);
    }
    Ok(Trajectory { grid, states })
}

/// Reference states at the nodes of `grid`, integrated with `refinement`
/// fine steps per coarse step (at least 10).
pub fn reference_on_grid(
    field: &dyn VelocityField,
    x0: &StateVector,
    grid: &TimeGrid,
    refinement: usize,
) -> Result<Trajectory> {
    if refinement < 10 {
        return Err(FlowError::InvalidArgument(format!(
            "reference refinement must be at least 10, got {refinement}"
        )));
    }
    reference_solution(field, x0, refinement * grid.steps())?.restrict(grid)
}
