use std::path::Path;

use flowcast::bench::{read_rows_file, ColumnKind, ResultRow, COLUMN_KINDS, HEADER};

use crate::error::CliError;

/// Absolute tolerance for float columns; every other column must match exactly.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDiff {
    pub name: &'static str,
    pub kind: ColumnKind,
    /// Largest absolute difference; for text and flag columns, the number of
    /// differing rows.
    pub max_diff: f64,
}

impl ColumnDiff {
    pub fn within_tolerance(&self) -> bool {
        match self.kind {
            ColumnKind::Float => self.max_diff <= FLOAT_TOLERANCE,
            _ => self.max_diff == 0.0,
        }
    }
}

fn values(row: &ResultRow) -> Vec<String> {
    row.to_record()
}

pub fn diff_rows(a: &[ResultRow], b: &[ResultRow]) -> Vec<ColumnDiff> {
    let mut diffs: Vec<ColumnDiff> = HEADER
        .iter()
        .zip(COLUMN_KINDS)
        .map(|(&name, kind)| ColumnDiff { name, kind, max_diff: 0.0 })
        .collect();
    for (ra, rb) in a.iter().zip(b) {
        for (d, (va, vb)) in diffs.iter_mut().zip(values(ra).iter().zip(&values(rb))) {
            let delta = match d.kind {
                ColumnKind::Count | ColumnKind::Float => {
                    let x: f64 = va.parse().unwrap_or(f64::NAN);
                    let y: f64 = vb.parse().unwrap_or(f64::NAN);
                    if x == y {
                        0.0
                    } else {
                        (x - y).abs()
                    }
                }
                ColumnKind::Text | ColumnKind::Flag => {
                    if va == vb {
                        0.0
                    } else {
                        1.0
                    }
                }
            };
            d.max_diff = if d.kind == ColumnKind::Text || d.kind == ColumnKind::Flag {
                d.max_diff + delta
            } else if delta.is_nan() {
                f64::INFINITY
            } else {
                d.max_diff.max(delta)
            };
        }
    }
    diffs
}

/// Prints the per-column report; returns the exit code.
pub fn compare_files(a: &Path, b: &Path) -> Result<i32, CliError> {
    let read = |p: &Path| read_rows_file(p).map_err(|e| CliError::usage("schema", e.to_string()));
    let (ra, rb) = (read(a)?, read(b)?);
    let diffs = diff_rows(&ra, &rb);
    println!("column,max_abs_diff,tolerance,status");
    for d in &diffs {
        let tol = if d.kind == ColumnKind::Float { FLOAT_TOLERANCE } else { 0.0 };
        let status = if d.within_tolerance() { "ok" } else { "differs" };
        println!("{},{:e},{:e},{}", d.name, d.max_diff, tol, status);
    }
    let mut ok = diffs.iter().all(ColumnDiff::within_tolerance);
    if ra.len() != rb.len() {
        println!("rows,{},{},differs", ra.len(), rb.len());
        ok = false;
    }
    Ok(if ok { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seed: u64, dev: f64) -> ResultRow {
        ResultRow {
            field_id: "rotation".into(),
            steps: 10,
            epsilon: 1e-3,
            seed,
            rounds_folded: 4,
            rounds_strict: 5,
            total_evals: 30,
            acceptance_fraction: 0.6,
            speedup_rounds: 2.5,
            speedup_vs_50: 12.5,
            final_spec_deviation: dev,
            max_spec_deviation: dev,
            bound: 1.0,
            bound_holds: true,
        }
    }

    #[test]
    fn identical_rows_have_zero_diff() {
        let d = diff_rows(&[row(1, 0.1)], &[row(1, 0.1)]);
        assert!(d.iter().all(|c| c.max_diff == 0.0 && c.within_tolerance()));
    }

    #[test]
    fn tolerances_per_kind() {
        let d = diff_rows(&[row(1, 0.1)], &[row(1, 0.1 + 1e-12)]);
        assert!(d.iter().all(ColumnDiff::within_tolerance));
        let d = diff_rows(&[row(1, 0.1)], &[row(2, 0.1)]);
        let seed = d.iter().find(|c| c.name == "seed").unwrap();
        assert_eq!(seed.max_diff, 1.0);
        assert!(!seed.within_tolerance());
    }
}
