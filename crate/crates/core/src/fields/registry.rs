//! Built-in field aliases with pinned parameters and starting points.

use crate::error::{FlowError, Result};
use crate::fields::analytic::AnalyticFieldSpec;
use crate::sampling::InitialState;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldAlias {
    pub name: &'static str,
    pub spec: AnalyticFieldSpec,
    pub initial: InitialState,
}

pub const ALIASES: &[&str] = &[
    "constant2d",
    "linear-contract",
    "rotation",
    "gauss-bridge",
    "gauss-bridge-complex",
];

fn gaussian_start() -> InitialState {
    InitialState::Gaussian {
        seed: 7,
        mean: 0.0,
        stddev: 1.0,
    }
}

pub fn lookup(name: &str) -> Result<FieldAlias> {
    let (name, spec, initial) = match name {
        "constant2d" => (
            "constant2d",
            AnalyticFieldSpec::Constant { c: vec![1.0, -1.0] },
            InitialState::Explicit { values: vec![0.0, 0.0] },
        ),
        "linear-contract" => (
            "linear-contract",
            AnalyticFieldSpec::Linear {
                a: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
                b: vec![0.0, 0.0],
            },
            InitialState::Explicit { values: vec![1.0, 0.0] },
        ),
        "rotation" => (
            "rotation",
            AnalyticFieldSpec::Rotation { omega: 1.0 },
            InitialState::Explicit { values: vec![1.0, 0.0] },
        ),
        "gauss-bridge" => (
            "gauss-bridge",
            AnalyticFieldSpec::GaussianBridge {
                mu: vec![3.0, 0.0],
                sigma0: 1.0,
                sigma1: 1.0,
            },
            gaussian_start(),
        ),
        "gauss-bridge-complex" => (
            "gauss-bridge-complex",
            AnalyticFieldSpec::GaussianBridge {
                mu: vec![3.0, 0.0],
                sigma0: 1.0,
                sigma1: 0.1,
            },
            gaussian_start(),
        ),
        other => return Err(FlowError::UnknownAlias(other.to_string())),
    };
    Ok(FieldAlias { name, spec, initial })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::analytic::AnalyticField;

    #[test]
    fn every_alias_resolves_and_builds() {
        for name in ALIASES {
            let alias = lookup(name).unwrap();
            assert_eq!(&alias.name, name);
            let field = AnalyticField::new(alias.spec).unwrap();
            assert!(alias.initial.sample(crate::field::VelocityField::dim(&field)).is_ok());
        }
        assert!(matches!(lookup("nope"), Err(FlowError::UnknownAlias(_))));
    }
}
