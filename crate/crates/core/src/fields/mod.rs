//! Concrete velocity fields and the field-file format.

pub mod analytic;
pub mod estimate;
pub mod mlp;
pub mod registry;
pub mod tabulated;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use analytic::{AnalyticField, AnalyticFieldSpec};
pub use estimate::{estimate_curvature, estimate_lipschitz, regularity_or_estimate, BoundingBox};
pub use mlp::{Activation, Layer, MlpField};
pub use tabulated::TabulatedField;

use crate::error::{FlowError, Result};
use crate::field::{FieldRegularity, VelocityField};
use crate::state::StateVector;

/// Any field this crate can load.
#[derive(Debug, Clone)]
pub enum Field {
    Analytic(AnalyticField),
    Tabulated(TabulatedField),
    Mlp(MlpField),
}

impl Field {
    pub fn kind(&self) -> &'static str {
        match self {
            Field::Analytic(_) => "analytic",
            Field::Tabulated(_) => "tabulated",
            Field::Mlp(_) => "mlp",
        }
    }

    fn inner(&self) -> &dyn VelocityField {
        match self {
            Field::Analytic(f) => f,
            Field::Tabulated(f) => f,
            Field::Mlp(f) => f,
        }
    }

    /// Serialized field-file document.
    pub fn to_json(&self) -> Value {
        match self {
            Field::Analytic(f) => {
                let mut v = serde_json::to_value(f.spec()).expect("analytic spec serializes");
                v["kind"] = Value::from("analytic");
                v
            }
            Field::Tabulated(f) => f.to_json(),
            Field::Mlp(f) => serde_json::json!({ "kind": "mlp", "layers": f.layers() }),
        }
    }
}

impl VelocityField for Field {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn eval(&self, x: &StateVector, t: f64) -> Result<StateVector> {
        self.inner().eval(x, t)
    }

    fn batch_eval(&self, pairs: &[(StateVector, f64)]) -> Result<Vec<StateVector>> {
        self.inner().batch_eval(pairs)
    }

    fn declared_regularity(&self, x0: &StateVector) -> Option<FieldRegularity> {
        self.inner().declared_regularity(x0)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedDoc {
    axes: Value,
    values: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpDoc {
    layers: Vec<Layer>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FieldFile {
    Tabulated(TabulatedDoc),
    Mlp(MlpDoc),
    Analytic(AnalyticFieldSpec),
}

/// Parses a field document; `origin` names the source in error messages.
pub fn parse_field(text: &str, origin: &str) -> Result<Field> {
    let parse_err = |message: String| FlowError::FieldParse {
        path: origin.to_string(),
        message,
    };
    let file: FieldFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    match file {
        FieldFile::Tabulated(TabulatedDoc { axes, values }) => TabulatedField::from_json(&axes, &values)
            .map(Field::Tabulated)
            .map_err(parse_err),
        FieldFile::Mlp(MlpDoc { layers }) => MlpField::new(layers)
            .map(Field::Mlp)
            .map_err(|e| parse_err(e.to_string())),
        FieldFile::Analytic(spec) => AnalyticField::new(spec)
            .map(Field::Analytic)
            .map_err(|e| parse_err(e.to_string())),
    }
}

pub fn load_field(path: &Path) -> Result<Field> {
    let text = std::fs::read_to_string(path).map_err(|e| FlowError::io(path, e))?;
    parse_field(&text, &path.display().to_string())
}

/// Loads a file that must hold a tabulated field.
pub fn load_tabulated(path: &Path) -> Result<TabulatedField> {
    match load_field(path)? {
        Field::Tabulated(f) => Ok(f),
        other => Err(FlowError::FieldParse {
            path: path.display().to_string(),
            message: format!("expected kind `tabulated`, found `{}`", other.kind()),
        }),
    }
}

/// How an experiment names its field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    /// Built-in alias from [`registry`].
    Alias(String),
    /// Field file of any kind.
    File(PathBuf),
    Analytic(AnalyticFieldSpec),
}

impl FieldSource {
    /// Parses the command-line form: an alias, or `file:`, `tabulated:`, `mlp:`
    /// followed by a path.
    pub fn parse(text: &str) -> Result<Self> {
        for prefix in ["file:", "tabulated:", "mlp:"] {
            if let Some(path) = text.strip_prefix(prefix) {
                return Ok(FieldSource::File(PathBuf::from(path)));
            }
        }
        registry::lookup(text)?;
        Ok(FieldSource::Alias(text.to_string()))
    }

    pub fn load(&self) -> Result<Field> {
        match self {
            FieldSource::Alias(name) => {
                Ok(Field::Analytic(AnalyticField::new(registry::lookup(name)?.spec)?))
            }
            FieldSource::File(path) => load_field(path),
            FieldSource::Analytic(spec) => Ok(Field::Analytic(AnalyticField::new(spec.clone())?)),
        }
    }

    pub fn is_file(&self) -> bool {
        matches!(self, FieldSource::File(_))
    }
}

impl fmt::Display for FieldSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSource::Alias(name) => f.write_str(name),
            FieldSource::File(path) => write!(f, "file:{}", path.display()),
            FieldSource::Analytic(spec) => write!(f, "analytic:{}", spec.variant_name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_document_roundtrip() {
        let text = r#"{"kind":"analytic","variant":"linear","a":[[-1,0],[0,-1]],"b":[0,0]}"#;
        let field = parse_field(text, "inline").unwrap();
        assert_eq!(field.kind(), "analytic");
        let again = parse_field(&field.to_json().to_string(), "again").unwrap();
        let x = StateVector::new(vec![2.0, 1.0]).unwrap();
        assert_eq!(field.eval(&x, 0.5).unwrap(), again.eval(&x, 0.5).unwrap());
    }

    #[test]
    fn mlp_document() {
        let text = r#"{"kind":"mlp","layers":[{"weights":[[1,0]],"bias":[0.5],"activation":"identity"}]}"#;
        let field = parse_field(text, "inline").unwrap();
        let v = field.eval(&StateVector::new(vec![2.0]).unwrap(), 0.3).unwrap();
        assert_eq!(v.as_slice(), &[2.5]);
    }

    #[test]
    fn unknown_kind_and_keys_are_rejected() {
        assert!(parse_field(r#"{"kind":"spline"}"#, "x").is_err());
        let extra = r#"{"kind":"mlp","layers":[],"extra":1}"#;
        assert!(parse_field(extra, "x").is_err());
        let err = parse_field(r#"{"kind":"tabulated","axes":[[1,0],[0,1]],"values":[]}"#, "f.json")
            .unwrap_err()
            .to_string();
        assert!(err.contains("f.json") && err.contains("axes[0]"), "{err}");
    }

    #[test]
    fn load_tabulated_rejects_other_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        std::fs::write(&path, r#"{"kind":"analytic","variant":"rotation","omega":1}"#).unwrap();
        assert!(load_field(&path).is_ok());
        assert!(load_tabulated(&path).is_err());
        assert!(load_field(&dir.path().join("missing.json")).is_err());
    }

    #[test]
    fn source_parsing() {
        assert_eq!(
            FieldSource::parse("gauss-bridge").unwrap(),
            FieldSource::Alias("gauss-bridge".into())
        );
        assert_eq!(
            FieldSource::parse("tabulated:f.json").unwrap(),
            FieldSource::File("f.json".into())
        );
        assert!(FieldSource::parse("no-such-alias").is_err());
        let json = serde_json::to_string(&FieldSource::Alias("rotation".into())).unwrap();
        assert_eq!(json, r#"{"alias":"rotation"}"#);
    }
}
