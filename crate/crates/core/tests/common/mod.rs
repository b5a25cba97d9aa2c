#![allow(dead_code)]

use flowcast::fields::registry::{self, ALIASES};
use flowcast::fields::{Activation, AnalyticField, AnalyticFieldSpec, Field, FieldSource, Layer, MlpField, TabulatedField};
use flowcast::StateVector;

/// Every alias with its pinned start, plus a tabulated and an MLP field.
pub fn shipped_fields() -> Vec<(String, Field, StateVector)> {
    let mut out = Vec::new();
    for name in ALIASES {
        let field = FieldSource::Alias(name.to_string()).load().unwrap();
        let x0 = registry::lookup(name).unwrap().initial.sample(2).unwrap();
        out.push((name.to_string(), field, x0));
    }
    let rotation = AnalyticField::new(AnalyticFieldSpec::Rotation { omega: 1.5 }).unwrap();
    let axis: Vec<f64> = (0..=8).map(|i| -2.0 + 0.5 * i as f64).collect();
    let table = TabulatedField::sample(&rotation, vec![axis.clone(), axis, vec![0.0, 0.5, 1.0]]).unwrap();
    out.push(("tabulated".into(), Field::Tabulated(table), StateVector::new(vec![1.0, 0.3]).unwrap()));
    out.push(("mlp".into(), Field::Mlp(small_mlp()), StateVector::new(vec![0.2, -0.4]).unwrap()));
    out
}

pub fn small_mlp() -> MlpField {
    MlpField::new(vec![
        Layer {
            weights: vec![vec![0.8, -0.3, 1.1], vec![0.2, 0.9, -0.7], vec![-0.5, 0.4, 0.6]],
            bias: vec![0.1, -0.2, 0.05],
            activation: Activation::Tanh,
        },
        Layer {
            weights: vec![vec![1.2, -0.6, 0.3], vec![0.4, 0.7, -1.0]],
            bias: vec![0.3, -0.1],
            activation: Activation::Identity,
        },
    ])
    .unwrap()
}
