use std::cmp::Ordering;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

pub const HEADER: [&str; 14] = [
    "field_id",
    "steps",
    "epsilon",
    "seed",
    "rounds_folded",
    "rounds_strict",
    "total_evals",
    "acceptance_fraction",
    "speedup_rounds",
    "speedup_vs_50",
    "final_spec_deviation",
    "max_spec_deviation",
    "bound",
    "bound_holds",
];

/// Kind of value in each CSV column, used when comparing result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Text,
    Count,
    Float,
    Flag,
}

pub const COLUMN_KINDS: [ColumnKind; 14] = [
    ColumnKind::Text,
    ColumnKind::Count,
    ColumnKind::Float,
    ColumnKind::Count,
    ColumnKind::Count,
    ColumnKind::Count,
    ColumnKind::Count,
    ColumnKind::Float,
    ColumnKind::Float,
    ColumnKind::Float,
    ColumnKind::Float,
    ColumnKind::Float,
    ColumnKind::Float,
    ColumnKind::Flag,
];

/// One (field, K, ε, seed) run summarized for the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub field_id: String,
    pub steps: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub rounds_folded: usize,
    pub rounds_strict: usize,
    pub total_evals: usize,
    pub acceptance_fraction: f64,
    pub speedup_rounds: f64,
    pub speedup_vs_50: f64,
    pub final_spec_deviation: f64,
    pub max_spec_deviation: f64,
    /// Deviation bound at t = 1.
    pub bound: f64,
    pub bound_holds: bool,
}

/// Identity of a row within a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowKey {
    pub field_id: String,
    pub steps: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl RowKey {
    pub fn order(&self, other: &RowKey) -> Ordering {
        self.field_id
            .cmp(&other.field_id)
            .then(self.steps.cmp(&other.steps))
            .then(self.epsilon.total_cmp(&other.epsilon))
            .then(self.seed.cmp(&other.seed))
    }

    pub fn same(&self, other: &RowKey) -> bool {
        self.order(other) == Ordering::Equal
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultRow {
    pub fn key(&self) -> RowKey {
        RowKey {
            field_id: self.field_id.clone(),
            steps: self.steps,
            epsilon: self.epsilon,
            seed: self.seed,
        }
    }

    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.field_id.clone(),
            self.steps.to_string(),
            float(self.epsilon),
            self.seed.to_string(),
            self.rounds_folded.to_string(),
            self.rounds_strict.to_string(),
            self.total_evals.to_string(),
            float(self.acceptance_fraction),
            float(self.speedup_rounds),
            float(self.speedup_vs_50),
            float(self.final_spec_deviation),
            float(self.max_spec_deviation),
            float(self.bound),
            self.bound_holds.to_string(),
        ]
    }

    pub fn from_record(record: &csv::StringRecord) -> Result<Self> {
        if record.len() != HEADER.len() {
            return Err(FlowError::Config(format!(
                "expected {} columns, found {}",
                HEADER.len(),
                record.len()
            )));
        }
        let bad = |i: usize| FlowError::Config(format!("bad value `{}` in column {}", &record[i], HEADER[i]));
        let count = |i: usize| record[i].parse::<usize>().map_err(|_| bad(i));
        let real = |i: usize| record[i].parse::<f64>().map_err(|_| bad(i));
        Ok(ResultRow {
            field_id: record[0].to_string(),
            steps: count(1)?,
            epsilon: real(2)?,
            seed: record[3].parse().map_err(|_| bad(3))?,
            rounds_folded: count(4)?,
            rounds_strict: count(5)?,
            total_evals: count(6)?,
            acceptance_fraction: real(7)?,
            speedup_rounds: real(8)?,
            speedup_vs_50: real(9)?,
            final_spec_deviation: real(10)?,
            max_spec_deviation: real(11)?,
            bound: real(12)?,
            bound_holds: record[13].parse().map_err(|_| bad(13))?,
        })
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(HEADER)?;
    for row in rows {
        writer.write_record(row.to_record())?;
    }
    writer.flush().map_err(|e| FlowError::io("<csv output>", e))?;
    Ok(())
}

/// Reads a results CSV, checking its header.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(FlowError::Config(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    reader
        .records()
        .map(|r| ResultRow::from_record(&r?))
        .collect()
}

pub fn write_rows_file(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| FlowError::io(path, e))?;
    write_rows(std::io::BufWriter::new(file), rows)
}

pub fn read_rows_file(path: &Path) -> Result<Vec<ResultRow>> {
    let file = std::fs::File::open(path).map_err(|e| FlowError::io(path, e))?;
    read_rows(file).map_err(|e| e.context(path.display().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            field_id: "gauss-bridge".into(),
            steps: 50,
            epsilon: 1e-3,
            seed: 7,
            rounds_folded: 9,
            rounds_strict: 12,
            total_evals: 140,
            acceptance_fraction: 0.82,
            speedup_rounds: 50.0 / 9.0,
            speedup_vs_50: 50.0 / 9.0,
            final_spec_deviation: 0.0123,
            max_spec_deviation: 0.0345,
            bound: 1.5,
            bound_holds: true,
        }
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row(), row()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("field_id,steps,epsilon,seed,"));
        assert!(!text.contains('\r'));
        assert!(text.contains("5.5555555555555554e0"));
        let back = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back, vec![row(), row()]);
    }

    #[test]
    fn header_is_checked() {
        assert!(read_rows("a,b\n1,2\n".as_bytes()).is_err());
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row()]).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",true", ",maybe");
        assert!(read_rows(text.as_bytes()).is_err());
    }

    #[test]
    fn key_order() {
        let mut a = row().key();
        let b = row().key();
        assert!(a.same(&b));
        a.epsilon = 1e-4;
        assert_eq!(a.order(&b), Ordering::Less);
        a.steps = 60;
        assert_eq!(a.order(&b), Ordering::Greater);
    }
}
