//! Velocity sampled on an axis-aligned grid over state × time.

use serde_json::Value;

use crate::error::{FlowError, Result};
use crate::field::VelocityField;
use crate::fields::estimate::BoundingBox;
use crate::state::StateVector;

/// Multilinear interpolation over an axis-aligned grid. The last axis is time.
///
/// Queries outside the grid are clamped to the nearest boundary value.
#[derive(Debug, Clone)]
pub struct TabulatedField {
    axes: Vec<Vec<f64>>,
    /// Row-major node velocities, `dim` entries per node.
    values: Vec<f64>,
    strides: Vec<usize>,
    dim: usize,
}

impl TabulatedField {
    /// Builds a field from axes (state axes, then time) and flat row-major node values.
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        validate_axes(&axes).map_err(FlowError::InvalidArgument)?;
        let dim = axes.len() - 1;
        let nodes: usize = axes.iter().map(Vec::len).product();
        if values.len() != nodes * dim {
            return Err(FlowError::InvalidArgument(format!(
                "expected {} values ({nodes} nodes x {dim}), got {}",
                nodes * dim,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FlowError::InvalidArgument(format!("value {i} is not finite")));
        }
        let mut strides = vec![0; axes.len()];
        let mut stride = dim;
        for (a, axis) in axes.iter().enumerate().rev() {
            strides[a] = stride;
            stride *= axis.len();
        }
        Ok(TabulatedField {
            axes,
            values,
            strides,
            dim,
        })
    }

    /// Samples `field` at every node of `axes`.
    pub fn sample(field: &dyn VelocityField, axes: Vec<Vec<f64>>) -> Result<Self> {
        validate_axes(&axes).map_err(FlowError::InvalidArgument)?;
        if axes.len() != field.dim() + 1 {
            return Err(FlowError::DimensionMismatch {
                expected: field.dim() + 1,
                got: axes.len(),
            });
        }
        let mut values = Vec::new();
        let mut index = vec![0usize; axes.len()];
        loop {
            let x: Vec<f64> = (0..field.dim()).map(|a| axes[a][index[a]]).collect();
            let t = axes[field.dim()][index[field.dim()]];
            values.extend_from_slice(field.eval(&StateVector::new(x)?, t)?.as_slice());
            if !increment(&mut index, &axes) {
                break;
            }
        }
        TabulatedField::new(axes, values)
    }

    /// Parses the `axes` / `values` members of a tabulated field file.
    pub fn from_json(axes: &Value, values: &Value) -> std::result::Result<Self, String> {
        let axes: Vec<Vec<f64>> = axes
            .as_array()
            .ok_or("`axes` must be an array of arrays")?
            .iter()
            .enumerate()
            .map(|(a, axis)| number_array(axis, &format!("axes[{a}]")))
            .collect::<std::result::Result<_, _>>()?;
        validate_axes(&axes)?;
        let dim = axes.len() - 1;
        let mut flat = Vec::new();
        collect_values(values, &axes, 0, dim, "values", &mut flat)?;
        TabulatedField::new(axes, flat).map_err(|e| e.to_string())
    }

    /// Nested row-major representation used in field files.
    pub fn to_json(&self) -> Value {
        fn nest(field: &TabulatedField, level: usize, offset: usize) -> Value {
            if level == field.axes.len() {
                return Value::from(field.values[offset..offset + field.dim].to_vec());
            }
            Value::Array(
                (0..field.axes[level].len())
                    .map(|i| nest(field, level + 1, offset + i * field.strides[level]))
                    .collect(),
            )
        }
        serde_json::json!({
            "kind": "tabulated",
            "axes": self.axes,
            "values": nest(self, 0, 0),
        })
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// State-space extent of the grid (time axis excluded).
    pub fn bounding_box(&self) -> BoundingBox {
        let lo = self.axes[..self.dim].iter().map(|a| a[0]).collect();
        let hi = self.axes[..self.dim].iter().map(|a| a[a.len() - 1]).collect();
        BoundingBox { lo, hi }
    }
}

fn increment(index: &mut [usize], axes: &[Vec<f64>]) -> bool {
    for a in (0..index.len()).rev() {
        index[a] += 1;
        if index[a] < axes[a].len() {
            return true;
        }
        index[a] = 0;
    }
    false
}

fn validate_axes(axes: &[Vec<f64>]) -> std::result::Result<(), String> {
    if axes.len() < 2 {
        return Err(format!(
            "need at least one state axis plus the time axis, got {} axes",
            axes.len()
        ));
    }
    for (a, axis) in axes.iter().enumerate() {
        if axis.len() < 2 {
            return Err(format!("axes[{a}] needs at least 2 nodes, got {}", axis.len()));
        }
        if let Some(i) = axis.iter().position(|v| !v.is_finite()) {
            return Err(format!("axes[{a}][{i}] is not finite"));
        }
        for i in 1..axis.len() {
            if !(axis[i] > axis[i - 1]) {
                return Err(format!(
                    "axes[{a}] is not strictly increasing: node {i} ({}) <= node {} ({})",
                    axis[i],
                    i - 1,
                    axis[i - 1]
                ));
            }
        }
    }
    Ok(())
}

fn number_array(value: &Value, path: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .as_array()
        .ok_or_else(|| format!("{path} must be an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| v.as_f64().ok_or_else(|| format!("{path}[{i}] is not a number")))
        .collect()
}

fn collect_values(
    value: &Value,
    axes: &[Vec<f64>],
    level: usize,
    dim: usize,
    path: &str,
    out: &mut Vec<f64>,
) -> std::result::Result<(), String> {
    if level == axes.len() {
        let v = number_array(value, path)?;
        if v.len() != dim {
            return Err(format!("{path} has {} components, expected {dim}", v.len()));
        }
        out.extend(v);
        return Ok(());
    }
    let items = value
        .as_array()
        .ok_or_else(|| format!("{path} must be an array"))?;
    if items.len() != axes[level].len() {
        return Err(format!(
            "{path} has {} entries, expected {} (length of axes[{level}])",
            items.len(),
            axes[level].len()
        ));
    }
    for (i, item) in items.iter().enumerate() {
        collect_values(item, axes, level + 1, dim, &format!("{path}[{i}]"), out)?;
    }
    Ok(())
}

impl VelocityField for TabulatedField {
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
        let n_axes = self.axes.len();
        let mut cells = Vec::with_capacity(n_axes);
        for (a, axis) in self.axes.iter().enumerate() {
            let z = if a < self.dim { x[a] } else { t };
            let last = axis.len() - 1;
            let z = z.clamp(axis[0], axis[last]);
            let i = (axis.partition_point(|&n| n <= z).max(1) - 1).min(last - 1);
            let frac = (z - axis[i]) / (axis[i + 1] - axis[i]);
            cells.push((i, frac));
        }

        let mut out = vec![0.0; self.dim];
        for corner in 0..(1usize << n_axes) {
            let mut weight = 1.0;
            let mut offset = 0;
            for (a, &(i, frac)) in cells.iter().enumerate() {
                let upper = (corner >> a) & 1 == 1;
                weight *= if upper { frac } else { 1.0 - frac };
                offset += (i + upper as usize) * self.strides[a];
            }
            if weight == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(&self.values[offset..offset + self.dim]) {
                *o += weight * v;
            }
        }
        StateVector::new(out)
    }
}
