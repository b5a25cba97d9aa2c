use flowcast::fields::{Activation, AnalyticField, AnalyticFieldSpec, Field, Layer, MlpField, TabulatedField};

use crate::error::CliError;

/// Uniform nodes `lo, ..., hi`.
fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Samples `spec` on a tensor grid over `[lo, hi]^d × [0, 1]`.
pub fn tabulate(
    spec: &AnalyticFieldSpec,
    lo: f64,
    hi: f64,
    space_nodes: usize,
    time_nodes: usize,
) -> Result<Field, CliError> {
    if space_nodes < 2 || time_nodes < 2 {
        return Err(CliError::usage("argument", "tabulated fields need at least 2 nodes per axis"));
    }
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(CliError::usage("argument", format!("empty range [{lo}, {hi}]")));
    }
    let field = AnalyticField::new(spec.clone())?;
    let dim = flowcast::VelocityField::dim(&field);
    let mut axes = vec![linspace(lo, hi, space_nodes); dim];
    axes.push(linspace(0.0, 1.0, time_nodes));
    Ok(Field::Tabulated(TabulatedField::sample(&field, axes)?))
}

/// Exact single-layer network for time-independent affine fields.
pub fn affine_mlp(spec: &AnalyticFieldSpec) -> Result<Field, CliError> {
    let (a, b) = match spec {
        AnalyticFieldSpec::Constant { c } => (vec![vec![0.0; c.len()]; c.len()], c.clone()),
        AnalyticFieldSpec::Linear { a, b } => (a.clone(), b.clone()),
        AnalyticFieldSpec::Rotation { omega } => (vec![vec![0.0, -omega], vec![*omega, 0.0]], vec![0.0, 0.0]),
        AnalyticFieldSpec::GaussianBridge { .. } => {
            return Err(CliError::failure(
                "unsupported",
                "mlp export needs a time-independent affine field; use --kind tabulated",
            ))
        }
    };
    let weights = a
        .into_iter()
        .map(|mut row| {
            row.push(0.0);
            row
        })
        .collect();
    let layer = Layer { weights, bias: b, activation: Activation::Identity };
    Ok(Field::Mlp(MlpField::new(vec![layer])?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use flowcast::{StateVector, VelocityField};

    #[test]
    fn affine_export_is_exact() {
        let spec = AnalyticFieldSpec::Rotation { omega: 1.5 };
        let exact = AnalyticField::new(spec.clone()).unwrap();
        let net = affine_mlp(&spec).unwrap();
        let x = StateVector::new(vec![0.3, -1.2]).unwrap();
        assert_eq!(net.eval(&x, 0.7).unwrap(), exact.eval(&x, 0.7).unwrap());
        let bridge = AnalyticFieldSpec::GaussianBridge { mu: vec![1.0], sigma0: 1.0, sigma1: 1.0 };
        assert_eq!(affine_mlp(&bridge).unwrap_err().code, 1);
    }

    #[test]
    fn tabulated_export_matches_at_nodes() {
        let spec = AnalyticFieldSpec::Rotation { omega: 1.0 };
        let exact = AnalyticField::new(spec.clone()).unwrap();
        let table = tabulate(&spec, -2.0, 2.0, 5, 3).unwrap();
        let x = StateVector::new(vec![1.0, -2.0]).unwrap();
        assert_eq!(table.eval(&x, 0.5).unwrap(), exact.eval(&x, 0.5).unwrap());
    }
}
