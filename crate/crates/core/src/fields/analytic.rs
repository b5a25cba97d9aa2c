//! Closed-form velocity fields with known regularity constants.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::field::{FieldRegularity, Provenance, VelocityField};
use crate::state::StateVector;

/// Parameters of an analytic field, as they appear in field files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticFieldSpec {
    /// `v = c`.
    Constant { c: Vec<f64> },
    /// `v = A x + b`, with `a` given row by row.
    Linear { a: Vec<Vec<f64>>, b: Vec<f64> },
    /// Planar rotation `v = omega * (-x1, x0)`.
    Rotation { omega: f64 },
    /// Marginal field of the straight interpolant between `N(0, sigma0^2 I)` and
    /// `N(mu, sigma1^2 I)` drawn independently.
    GaussianBridge { mu: Vec<f64>, sigma0: f64, sigma1: f64 },
}

impl AnalyticFieldSpec {
    pub fn variant_name(&self) -> &'static str {
        match self {
            AnalyticFieldSpec::Constant { .. } => "constant",
            AnalyticFieldSpec::Linear { .. } => "linear",
            AnalyticFieldSpec::Rotation { .. } => "rotation",
            AnalyticFieldSpec::GaussianBridge { .. } => "gaussian_bridge",
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Constant(StateVector),
    Affine {
        a: DMatrix<f64>,
        b: Vec<f64>,
        /// Largest eigenvalue of the symmetric part of `a` (logarithmic 2-norm).
        log_norm: f64,
    },
    Bridge {
        mu: Vec<f64>,
        sigma0: f64,
        sigma1: f64,
    },
}

/// A validated [`AnalyticFieldSpec`] ready for evaluation.
#[derive(Debug, Clone)]
pub struct AnalyticField {
    spec: AnalyticFieldSpec,
    kind: Kind,
    dim: usize,
    lipschitz: f64,
}

impl AnalyticField {
    pub fn new(spec: AnalyticFieldSpec) -> Result<Self> {
        let (kind, dim, lipschitz) = match &spec {
            AnalyticFieldSpec::Constant { c } => {
                let c = StateVector::new(c.clone())?;
                let dim = c.dim();
                (Kind::Constant(c), dim, 0.0)
            }
            AnalyticFieldSpec::Linear { a, b } => {
                let d = b.len();
                if d == 0 {
                    return Err(FlowError::InvalidArgument("linear field: b is empty".into()));
                }
                if a.len() != d {
                    return Err(FlowError::InvalidArgument(format!(
                        "linear field: A has {} rows, b has {d} entries",
                        a.len()
                    )));
                }
                for (i, row) in a.iter().enumerate() {
                    if row.len() != d {
                        return Err(FlowError::InvalidArgument(format!(
                            "linear field: row {i} of A has {} entries, expected {d}",
                            row.len()
                        )));
                    }
                }
                let flat: Vec<f64> = a.iter().flatten().copied().collect();
                if flat.iter().chain(b).any(|v| !v.is_finite()) {
                    return Err(FlowError::InvalidArgument("linear field: non-finite coefficient".into()));
                }
                affine(DMatrix::from_row_slice(d, d, &flat), b.clone())
            }
            AnalyticFieldSpec::Rotation { omega } => {
                if !omega.is_finite() {
                    return Err(FlowError::InvalidArgument("rotation: omega must be finite".into()));
                }
                let a = DMatrix::from_row_slice(2, 2, &[0.0, -omega, *omega, 0.0]);
                affine(a, vec![0.0, 0.0])
            }
            AnalyticFieldSpec::GaussianBridge { mu, sigma0, sigma1 } => {
                if mu.is_empty() {
                    return Err(FlowError::InvalidArgument("gaussian_bridge: mu is empty".into()));
                }
                if !(*sigma0 > 0.0 && *sigma1 > 0.0) || !sigma0.is_finite() || !sigma1.is_finite() {
                    return Err(FlowError::InvalidArgument(format!(
                        "gaussian_bridge: sigmas must be positive, got {sigma0}, {sigma1}"
                    )));
                }
                StateVector::new(mu.clone())?;
                let m = bridge_lipschitz(*sigma0, *sigma1);
                (
                    Kind::Bridge {
                        mu: mu.clone(),
                        sigma0: *sigma0,
                        sigma1: *sigma1,
                    },
                    mu.len(),
                    m,
                )
            }
        };
        Ok(AnalyticField {
            spec,
            kind,
            dim,
            lipschitz,
        })
    }

    pub fn spec(&self) -> &AnalyticFieldSpec {
        &self.spec
    }

    /// Declared Lipschitz constant in x.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Closed-form state at time `t` on the trajectory through `x0`, where one exists.
    pub fn exact_state(&self, x0: &StateVector, t: f64) -> Option<StateVector> {
        match &self.kind {
            Kind::Constant(c) => x0.advance(t, c).ok(),
            Kind::Bridge { mu, sigma0, sigma1 } => {
                let scale = bridge_variance(*sigma0, *sigma1, t).sqrt() / sigma0;
                let values = x0
                    .as_slice()
                    .iter()
                    .zip(mu)
                    .map(|(x, m)| t * m + scale * x)
                    .collect();
                StateVector::new(values).ok()
            }
            Kind::Affine { .. } => None,
        }
    }
}

fn affine(a: DMatrix<f64>, b: Vec<f64>) -> (Kind, usize, f64) {
    let d = b.len();
    let gram = a.transpose() * &a;
    let op_norm = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l))
        .sqrt();
    let sym = (&a + a.transpose()) * 0.5;
    let log_norm = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &l| acc.max(l));
    (Kind::Affine { a, b, log_norm }, d, op_norm)
}

/// `sigma_t^2 = (1-t)^2 sigma0^2 + t^2 sigma1^2`.
fn bridge_variance(sigma0: f64, sigma1: f64, t: f64) -> f64 {
    let s = 1.0 - t;
    s * s * sigma0 * sigma0 + t * t * sigma1 * sigma1
}

/// Gain `a(t)` of the bridge field `v = a(t) (x - t mu) + mu`.
pub(crate) fn bridge_gain(sigma0: f64, sigma1: f64, t: f64) -> f64 {
    (t * sigma1 * sigma1 - (1.0 - t) * sigma0 * sigma0) / bridge_variance(sigma0, sigma1, t)
}

/// `sup_{t in [0,1]} |a(t)|`. Interior extrema of `a` sit at `t s = sigma0^2 ± sigma0 sigma1`
/// with `s = sigma0^2 + sigma1^2`.
fn bridge_lipschitz(sigma0: f64, sigma1: f64) -> f64 {
    let s = sigma0 * sigma0 + sigma1 * sigma1;
    let base = sigma0 * sigma0;
    let cross = sigma0 * sigma1;
    [0.0, 1.0, (base - cross) / s, (base + cross) / s]
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .map(|t| bridge_gain(sigma0, sigma1, t).abs())
        .fold(0.0, f64::max)
}

impl VelocityField for AnalyticField {
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
        match &self.kind {
            Kind::Constant(c) => Ok(c.clone()),
            Kind::Affine { a, b, .. } => {
                let xs = x.as_slice();
                let values = (0..self.dim)
                    .map(|i| {
                        let mut acc = b[i];
                        for (j, xj) in xs.iter().enumerate() {
                            acc += a[(i, j)] * xj;
                        }
                        acc
                    })
                    .collect();
                StateVector::new(values)
            }
            Kind::Bridge { mu, sigma0, sigma1 } => {
                let gain = bridge_gain(*sigma0, *sigma1, t);
                let values = x
                    .as_slice()
                    .iter()
                    .zip(mu)
                    .map(|(xi, m)| gain * (xi - t * m) + m)
                    .collect();
                StateVector::new(values)
            }
        }
    }

    fn declared_regularity(&self, x0: &StateVector) -> Option<FieldRegularity> {
        if x0.dim() != self.dim {
            return None;
        }
        let n = match &self.kind {
            Kind::Constant(_) => 0.0,
            // x'' = A x' solves y' = A y, so ‖x''(t)‖ <= ‖x''(0)‖ exp(mu(A) t).
            Kind::Affine { a, log_norm, .. } => {
                let v0 = self.eval(x0, 0.0).ok()?;
                let v0 = nalgebra::DVector::from_column_slice(v0.as_slice());
                let accel = a * v0;
                accel.norm() * log_norm.max(0.0).exp()
            }
            // x(t) = t mu + (sigma_t / sigma0) x0 and sigma_t'' = sigma0^2 sigma1^2 / sigma_t^3,
            // largest where sigma_t^2 reaches its minimum sigma0^2 sigma1^2 / s.
            Kind::Bridge { sigma0, sigma1, .. } => {
                let s = sigma0 * sigma0 + sigma1 * sigma1;
                let var_min = sigma0 * sigma0 * sigma1 * sigma1 / s;
                let accel = sigma0 * sigma0 * sigma1 * sigma1 / var_min.powf(1.5);
                x0.norm() / sigma0 * accel
            }
        };
        Some(FieldRegularity {
            m: self.lipschitz,
            n,
            provenance: Provenance::Declared,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec()).unwrap()
    }

    fn field(spec: AnalyticFieldSpec) -> AnalyticField {
        AnalyticField::new(spec).unwrap()
    }

    #[test]
    fn constant_ignores_inputs() {
        let f = field(AnalyticFieldSpec::Constant { c: vec![1.0, -1.0] });
        for (x, t) in [([0.0, 0.0], 0.0), ([5.0, -3.0], 0.7), ([1e3, 2.0], 1.0)] {
            assert_eq!(f.eval(&sv(&x), t).unwrap(), sv(&[1.0, -1.0]));
        }
        let reg = f.declared_regularity(&sv(&[3.0, 4.0])).unwrap();
        assert_eq!((reg.m, reg.n), (0.0, 0.0));
    }

    #[test]
    fn negative_identity() {
        let f = field(AnalyticFieldSpec::Linear {
            a: vec![vec![-1.0, 0.0], vec![0.0, -1.0]],
            b: vec![0.0, 0.0],
        });
        assert_eq!(f.eval(&sv(&[2.0, 0.0]), 0.3).unwrap(), sv(&[-2.0, 0.0]));
        let reg = f.declared_regularity(&sv(&[1.0, 0.0])).unwrap();
        assert!((reg.m - 1.0).abs() < 1e-12);
        // x'' = e^{-t} x0 for A = -I.
        assert!((reg.n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_operator_norm() {
        let f = field(AnalyticFieldSpec::Linear {
            a: vec![vec![2.0, 0.0], vec![0.0, 1.0]],
            b: vec![0.5, 0.0],
        });
        assert!((f.lipschitz() - 2.0).abs() < 1e-12);
        // Non-normal matrix: ‖[[1,1],[0,1]]‖₂ is the golden ratio.
        let g = field(AnalyticFieldSpec::Linear {
            a: vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            b: vec![0.0, 0.0],
        });
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((g.lipschitz() - golden).abs() < 1e-12);
    }

    #[test]
    fn rotation_regularity() {
        let f = field(AnalyticFieldSpec::Rotation { omega: 2.0 });
        assert_eq!(f.eval(&sv(&[1.0, 0.0]), 0.0).unwrap(), sv(&[0.0, 2.0]));
        let reg = f.declared_regularity(&sv(&[3.0, 4.0])).unwrap();
        assert!((reg.m - 2.0).abs() < 1e-12);
        assert!((reg.n - 20.0).abs() < 1e-12);
    }

    // E[x1 - x0 | x_t = x] for independent x0 ~ N(0, s0^2), x1 ~ N(mu, s1^2).
    fn conditional_oracle(mu: f64, s0: f64, s1: f64, x: f64, t: f64) -> f64 {
        let cov = t * s1 * s1 - (1.0 - t) * s0 * s0;
        let var = (1.0 - t) * (1.0 - t) * s0 * s0 + t * t * s1 * s1;
        mu + cov / var * (x - t * mu)
    }

    #[test]
    fn bridge_matches_gaussian_conditioning() {
        let f = field(AnalyticFieldSpec::GaussianBridge {
            mu: vec![1.0],
            sigma0: 1.0,
            sigma1: 1.0,
        });
        let got = f.eval(&sv(&[0.5]), 0.5).unwrap()[0];
        let expected = conditional_oracle(1.0, 1.0, 1.0, 0.5, 0.5);
        assert!((got - expected).abs() < 1e-15);
        assert_eq!(expected, 1.0);

        let g = field(AnalyticFieldSpec::GaussianBridge {
            mu: vec![3.0, -1.0],
            sigma0: 1.0,
            sigma1: 0.1,
        });
        for &(x0, x1, t) in &[(0.2, -0.4, 0.1), (2.0, 1.0, 0.9), (-1.0, 0.0, 0.55)] {
            let v = g.eval(&sv(&[x0, x1]), t).unwrap();
            assert!((v[0] - conditional_oracle(3.0, 1.0, 0.1, x0, t)).abs() < 1e-12);
            assert!((v[1] - conditional_oracle(-1.0, 1.0, 0.1, x1, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn bridge_lipschitz_matches_grid_search() {
        for &(s0, s1) in &[(1.0, 1.0), (1.0, 0.1), (0.5, 2.0), (1.0, 0.9)] {
            let f = field(AnalyticFieldSpec::GaussianBridge {
                mu: vec![0.0],
                sigma0: s0,
                sigma1: s1,
            });
            let searched = (0..=200_000)
                .map(|i| bridge_gain(s0, s1, i as f64 / 200_000.0).abs())
                .fold(0.0, f64::max);
            assert!(f.lipschitz() >= searched - 1e-12);
            assert!((f.lipschitz() - searched).abs() < 1e-6, "{s0} {s1}");
        }
    }

    #[test]
    fn bridge_closed_form_trajectory_solves_the_ode() {
        let f = field(AnalyticFieldSpec::GaussianBridge {
            mu: vec![3.0, 0.0],
            sigma0: 1.0,
            sigma1: 0.4,
        });
        let x0 = sv(&[0.7, -1.2]);
        let h = 1e-6;
        for &t in &[0.1, 0.5, 0.8] {
            let xp = f.exact_state(&x0, t + h).unwrap();
            let xm = f.exact_state(&x0, t - h).unwrap();
            let x = f.exact_state(&x0, t).unwrap();
            let v = f.eval(&x, t).unwrap();
            for i in 0..2 {
                let fd = (xp[i] - xm[i]) / (2.0 * h);
                assert!((fd - v[i]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(AnalyticField::new(AnalyticFieldSpec::Linear {
            a: vec![vec![1.0]],
            b: vec![0.0, 0.0],
        })
        .is_err());
        assert!(AnalyticField::new(AnalyticFieldSpec::GaussianBridge {
            mu: vec![0.0],
            sigma0: 0.0,
            sigma1: 1.0,
        })
        .is_err());
        assert!(AnalyticField::new(AnalyticFieldSpec::Constant { c: vec![] }).is_err());
    }

    #[test]
    fn eval_checks_dimension() {
        let f = field(AnalyticFieldSpec::Rotation { omega: 1.0 });
        assert!(matches!(
            f.eval(&sv(&[1.0]), 0.0),
            Err(FlowError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn spec_json_shape() {
        let spec: AnalyticFieldSpec =
            serde_json::from_str(r#"{"variant":"gaussian_bridge","mu":[3,0],"sigma0":1,"sigma1":0.1}"#)
                .unwrap();
        assert_eq!(spec.variant_name(), "gaussian_bridge");
        assert!(serde_json::from_str::<AnalyticFieldSpec>(r#"{"variant":"rotation","omega":1,"x":2}"#).is_err());
    }
}
