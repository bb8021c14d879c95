//! Replicate statistics: trimmed mean and percentile error bars.

use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::io::{Cell, NumericTable, Table};

/// Fewest replicates for which statistics are computed.
pub const MIN_REPLICATES: usize = 3;

/// Columns that identify a row rather than hold a measurement. They must
/// agree across replicates and are copied through.
pub const KEY_COLUMNS: &[&str] = &["t", "step", "rank", "start", "span", "block"];

/// Percentile `pct ∈ [0, 100]` by linear interpolation at position
/// `pct·(n−1)/100`. The position is kept in integer hundredths and the
/// division comes last, so hand-computed values are reproduced exactly.
pub fn percentile(sorted: &[f64], pct: u32) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let scaled = pct.min(100) as usize * (sorted.len() - 1);
    let lo = scaled / 100;
    let rem = scaled % 100;
    if rem == 0 {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[lo + 1] - sorted[lo]) * rem as f64 / 100.0
    }
}

/// Mean after dropping one largest and one smallest value.
pub fn trimmed_mean(sorted: &[f64]) -> f64 {
    assert!(sorted.len() >= MIN_REPLICATES, "trimmed mean needs at least {MIN_REPLICATES} values");
    let inner = &sorted[1..sorted.len() - 1];
    inner.iter().sum::<f64>() / inner.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub p10: f64,
    pub p90: f64,
}

/// Summary of one metric at one time point over the replicates. NaN
/// values sort last.
pub fn summarize(values: &[f64]) -> CliResult<Summary> {
    if values.len() < MIN_REPLICATES {
        return Err(CliError::Config(format!(
            "replicate statistics need at least {MIN_REPLICATES} runs, got {}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary { mean: trimmed_mean(&sorted), p10: percentile(&sorted, 10), p90: percentile(&sorted, 90) })
}

/// Combines the same table from several runs. Key columns are copied;
/// every other column `c` becomes `c_mean`, `c_p10` and `c_p90`.
pub fn replicate_statistics(tables: &[NumericTable]) -> CliResult<Table> {
    if tables.len() < MIN_REPLICATES {
        return Err(CliError::Config(format!(
            "replicate statistics need at least {MIN_REPLICATES} runs, got {}",
            tables.len()
        )));
    }
    let first = &tables[0];
    for t in &tables[1..] {
        if t.columns != first.columns {
            return Err(CliError::Format("replicate tables have different columns".into()));
        }
        if t.rows.len() != first.rows.len() {
            return Err(CliError::Format(format!(
                "replicate tables have different lengths ({} and {} rows)",
                first.rows.len(),
                t.rows.len()
            )));
        }
    }
    let is_key: Vec<bool> = first.columns.iter().map(|c| KEY_COLUMNS.contains(&c.as_str())).collect();
    let mut out_cols = Vec::new();
    for (c, &k) in first.columns.iter().zip(&is_key) {
        if k {
            out_cols.push(c.clone());
        } else {
            out_cols.extend([format!("{c}_mean"), format!("{c}_p10"), format!("{c}_p90")]);
        }
    }
    let mut out = Table::new(out_cols);
    for r in 0..first.rows.len() {
        let mut row = Vec::new();
        for (c, &k) in is_key.iter().enumerate() {
            let key = first.rows[r][c];
            if k {
                if tables.iter().any(|t| t.rows[r][c].to_bits() != key.to_bits()) {
                    return Err(CliError::Format(format!(
                        "column {} differs between replicates at row {}",
                        first.columns[c],
                        r + 1
                    )));
                }
                row.push(if key.fract() == 0.0 && key >= 0.0 { Cell::Int(key as u64) } else { Cell::Float(key) });
            } else {
                let values: Vec<f64> = tables.iter().map(|t| t.rows[r][c]).collect();
                let s = summarize(&values)?;
                row.extend([Cell::Float(s.mean), Cell::Float(s.p10), Cell::Float(s.p90)]);
            }
        }
        out.push(row);
    }
    Ok(out)
}

/// Loads `table` from every run directory and writes the summary.
pub fn summarize_runs(run_dirs: &[impl AsRef<Path>], table: &str, output: &Path) -> CliResult<Table> {
    let tables =
        run_dirs.iter().map(|d| NumericTable::load(&d.as_ref().join(table))).collect::<CliResult<Vec<_>>>()?;
    let summary = replicate_statistics(&tables)?;
    summary.save(output)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_to_ten() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        let s = summarize(&v).unwrap();
        assert_eq!(s.mean, 5.5);
        // positions 0.9 and 8.1
        assert_eq!(s.p10, 1.9);
        assert_eq!(s.p90, 9.1);
    }

    #[test]
    fn identical_runs_collapse() {
        let s = summarize(&[0.25; 10]).unwrap();
        assert_eq!((s.mean, s.p10, s.p90), (0.25, 0.25, 0.25));
    }

    #[test]
    fn too_few_runs_are_refused() {
        assert!(summarize(&[1.0, 2.0]).is_err());
        let t = NumericTable { columns: vec!["t".into()], rows: vec![] };
        assert!(replicate_statistics(&[t.clone(), t]).is_err());
    }

    #[test]
    fn keys_must_agree() {
        let mk = |t: f64, v: f64| NumericTable { columns: vec!["t".into(), "x".into()], rows: vec![vec![t, v]] };
        let ok = replicate_statistics(&[mk(0.1, 1.0), mk(0.1, 2.0), mk(0.1, 3.0)]).unwrap();
        assert_eq!(ok.columns, ["t", "x_mean", "x_p10", "x_p90"]);
        assert_eq!(ok.rows[0][1], Cell::Float(2.0));
        assert!(replicate_statistics(&[mk(0.1, 1.0), mk(0.2, 2.0), mk(0.1, 3.0)]).is_err());
    }

    proptest! {
        #[test]
        fn summary_is_ordered_and_permutation_invariant(mut v in prop::collection::vec(-1e3f64..1e3, 3..30)) {
            let s = summarize(&v).unwrap();
            let (lo, hi) = v.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            prop_assert!(lo <= s.p10 && s.p10 <= s.p90 && s.p90 <= hi);
            prop_assert!(lo <= s.mean && s.mean <= hi);
            v.reverse();
            prop_assert_eq!(summarize(&v).unwrap(), s);
        }
    }
}
