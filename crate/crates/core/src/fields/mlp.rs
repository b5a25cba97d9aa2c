use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::field::VelocityField;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    /// `out x in`, row by row.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Small fully connected network on `state ⊕ time`, producing a velocity.
#[derive(Debug, Clone)]
pub struct MlpField {
    layers: Vec<Layer>,
    dim: usize,
}

impl MlpField {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let last = layers
            .last()
            .ok_or_else(|| FlowError::InvalidArgument("mlp needs at least one layer".into()))?;
        if last.activation != Activation::Identity {
            return Err(FlowError::InvalidArgument(
                "mlp: final layer activation must be identity".into(),
            ));
        }
        let dim = last.bias.len();
        if dim == 0 {
            return Err(FlowError::InvalidArgument("mlp: output dimension is 0".into()));
        }
        let mut width = dim + 1;
        for (l, layer) in layers.iter().enumerate() {
            if layer.weights.len() != layer.bias.len() {
                return Err(FlowError::InvalidArgument(format!(
                    "layers[{l}]: {} weight rows but {} bias entries",
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
            for (r, row) in layer.weights.iter().enumerate() {
                if row.len() != width {
                    return Err(FlowError::InvalidArgument(format!(
                        "layers[{l}].weights[{r}] has {} columns, expected {width}",
                        row.len()
                    )));
                }
                if row.iter().any(|w| !w.is_finite()) {
                    return Err(FlowError::InvalidArgument(format!(
                        "layers[{l}].weights[{r}] has a non-finite entry"
                    )));
                }
            }
            if layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(FlowError::InvalidArgument(format!("layers[{l}].bias has a non-finite entry")));
            }
            width = layer.bias.len();
        }
        Ok(MlpField { layers, dim })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
}

impl VelocityField for MlpField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &StateVector, t: f64) -> Result<StateVector> {
        if x.dim() != self.dim {
            return Err(FlowError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let mut h: Vec<f64> = x.as_slice().to_vec();
        h.push(t);
        for layer in &self.layers {
            h = layer
                .weights
                .iter()
                .zip(&layer.bias)
                .map(|(row, b)| {
                    let z = row.iter().zip(&h).fold(*b, |acc, (w, v)| acc + w * v);
                    match layer.activation {
                        Activation::Tanh => z.tanh(),
                        Activation::Identity => z,
                    }
                })
                .collect();
        }
        StateVector::new(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    fn zero_net() -> MlpField {
        MlpField::new(vec![
            Layer {
                weights: vec![vec![0.0; 3]; 4],
                bias: vec![0.0; 4],
                activation: Activation::Tanh,
            },
            Layer {
                weights: vec![vec![0.0; 4]; 2],
                bias: vec![0.0; 2],
                activation: Activation::Identity,
            },
        ])
        .unwrap()
    }

    #[test]
    fn zero_weights_give_zero_velocity() {
        let f = zero_net();
        for (x, t) in [([1.0, 2.0], 0.0), ([-5.0, 0.3], 0.5), ([100.0, -100.0], 1.0)] {
            assert_eq!(f.eval(&sv(&x), t).unwrap(), sv(&[0.0, 0.0]));
        }
    }

    #[test]
    fn hand_computed_forward_pass() {
        // h = tanh(x0 + t), v = 2 h + 1
        let f = MlpField::new(vec![
            Layer {
                weights: vec![vec![1.0, 1.0]],
                bias: vec![0.0],
                activation: Activation::Tanh,
            },
            Layer {
                weights: vec![vec![2.0]],
                bias: vec![1.0],
                activation: Activation::Identity,
            },
        ])
        .unwrap();
        let v = f.eval(&sv(&[0.25]), 0.5).unwrap();
        assert_eq!(v[0], 2.0 * 0.75f64.tanh() + 1.0);
    }

    #[test]
    fn shape_errors() {
        let bad_width = vec![Layer {
            weights: vec![vec![1.0, 1.0]; 2],
            bias: vec![0.0; 2],
            activation: Activation::Identity,
        }];
        let err = MlpField::new(bad_width).unwrap_err().to_string();
        assert!(err.contains("layers[0].weights[0]"), "{err}");

        let tanh_last = vec![Layer {
            weights: vec![vec![1.0, 1.0]],
            bias: vec![0.0],
            activation: Activation::Tanh,
        }];
        assert!(MlpField::new(tanh_last).is_err());
        assert!(MlpField::new(vec![]).is_err());
    }
}
