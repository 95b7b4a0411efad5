//! Datasets and CSV ingestion.
//!
//! Columns whose every cell parses as a number are kept as numeric features;
//! any other column is treated as nominal and one-hot encoded into
//! `column=value` indicator columns, one per distinct value in sorted order.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric feature matrix (row-major) with a continuous target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    n_cols: usize,
    target: Vec<f64>,
    feature_names: Vec<String>,
    /// Original nominal column -> the one-hot columns emitted for it.
    nominal_map: BTreeMap<String, Vec<String>>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        n_cols: usize,
        target: Vec<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if n_cols == 0 || features.len() != n_cols * target.len() {
            return Err(Error::invalid(format!(
                "feature matrix of {} values does not match {} rows x {} columns",
                features.len(),
                target.len(),
                n_cols
            )));
        }
        if feature_names.len() != n_cols {
            return Err(Error::invalid(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                n_cols
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::invalid(format!("duplicate feature name `{dup}`")));
        }
        if features.iter().chain(&target).any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        Ok(Dataset {
            features,
            n_cols,
            target,
            feature_names,
            nominal_map: BTreeMap::new(),
        })
    }

    pub fn with_nominal_map(mut self, nominal_map: BTreeMap<String, Vec<String>>) -> Self {
        self.nominal_map = nominal_map;
        self
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn nominal_map(&self) -> &BTreeMap<String, Vec<String>> {
        &self.nominal_map
    }

    /// Number of original nominal columns.
    pub fn n_nominal(&self) -> usize {
        self.nominal_map.len()
    }

    /// Number of original numeric columns.
    pub fn n_numeric(&self) -> usize {
        self.n_cols - self.nominal_map.values().map(Vec::len).sum::<usize>()
    }

    /// Rows `rows`, in that order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(rows.len() * self.n_cols);
        for &r in rows {
            features.extend_from_slice(self.row(r));
        }
        Dataset {
            features,
            n_cols: self.n_cols,
            target: rows.iter().map(|&r| self.target[r]).collect(),
            feature_names: self.feature_names.clone(),
            nominal_map: self.nominal_map.clone(),
        }
    }
}

/// What to do with rows that contain empty cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnMissing {
    #[default]
    Error,
    DropRows,
}

impl std::str::FromStr for OnMissing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(OnMissing::Error),
            "drop_rows" | "drop-rows" | "drop" => Ok(OnMissing::DropRows),
            other => Err(Error::invalid(format!("unknown missing-value policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub dataset: Dataset,
    /// Rows skipped under [`OnMissing::DropRows`].
    pub dropped_rows: usize,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | "?")
}

pub fn load_csv(path: impl AsRef<Path>, target_column: &str, on_missing: OnMissing) -> Result<CsvLoad> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    load_csv_from_reader(file, path, target_column, on_missing)
}

/// Parses CSV text from any reader; `path` only labels error messages.
pub fn load_csv_from_reader<R: Read>(
    reader: R,
    path: &Path,
    target_column: &str,
    on_missing: OnMissing,
) -> Result<CsvLoad> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(parse_err(1, "empty file or missing header row".into()));
    }
    if header.iter().all(|h| h.parse::<f64>().is_ok()) {
        return Err(parse_err(1, "expected a header row, found only numeric values".into()));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(parse_err(1, format!("duplicate column name `{dup}`")));
    }
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| parse_err(1, format!("target column `{target_column}` not found")))?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut lines: Vec<u64> = Vec::new();
    let mut dropped_rows = 0;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if let Some(col) = record.iter().position(is_missing) {
            match on_missing {
                OnMissing::Error => {
                    return Err(parse_err(line, format!("missing value in column `{}`", header[col])))
                }
                OnMissing::DropRows => {
                    dropped_rows += 1;
                    continue;
                }
            }
        }
        rows.push(record.iter().map(str::to_owned).collect());
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }

    let mut target = Vec::with_capacity(rows.len());
    for (row, &line) in rows.iter().zip(&lines) {
        match row[target_idx].parse::<f64>() {
            Ok(v) if v.is_finite() => target.push(v),
            _ => {
                return Err(parse_err(
                    line,
                    format!("unparseable target value `{}`", row[target_idx]),
                ))
            }
        }
    }

    enum Column {
        Numeric(Vec<f64>),
        Nominal(Vec<String>),
    }
    let mut columns: Vec<(usize, Column)> = Vec::new();
    for c in (0..header.len()).filter(|&c| c != target_idx) {
        let parsed: Option<Vec<f64>> = rows.iter().map(|r| r[c].parse::<f64>().ok()).collect();
        let column = match parsed {
            Some(values) => {
                if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                    return Err(parse_err(
                        lines[i],
                        format!("non-finite value in column `{}`", header[c]),
                    ));
                }
                Column::Numeric(values)
            }
            None => {
                let levels: BTreeSet<&str> = rows.iter().map(|r| r[c].as_str()).collect();
                Column::Nominal(levels.into_iter().map(str::to_owned).collect())
            }
        };
        columns.push((c, column));
    }

    let mut feature_names = Vec::new();
    let mut nominal_map = BTreeMap::new();
    for (c, column) in &columns {
        match column {
            Column::Numeric(_) => feature_names.push(header[*c].clone()),
            Column::Nominal(levels) => {
                let names: Vec<String> = levels.iter().map(|l| format!("{}={l}", header[*c])).collect();
                feature_names.extend(names.iter().cloned());
                nominal_map.insert(header[*c].clone(), names);
            }
        }
    }
    let n_cols = feature_names.len();
    if n_cols == 0 {
        return Err(parse_err(1, "no feature columns besides the target".into()));
    }

    let mut features = Vec::with_capacity(rows.len() * n_cols);
    for (i, row) in rows.iter().enumerate() {
        for (c, column) in &columns {
            match column {
                Column::Numeric(values) => features.push(values[i]),
                Column::Nominal(levels) => {
                    features.extend(levels.iter().map(|l| f64::from(u8::from(*l == row[*c]))))
                }
            }
        }
    }

    let dataset = Dataset::new(features, n_cols, target, feature_names)
        .map_err(|e| parse_err(1, e.to_string()))?
        .with_nominal_map(nominal_map);
    Ok(CsvLoad {
        dataset,
        dropped_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, on_missing: OnMissing) -> Result<CsvLoad> {
        load_csv_from_reader(text.as_bytes(), Path::new("mem.csv"), "y", on_missing)
    }

    #[test]
    fn one_hot_nominal_column() {
        let out = load("x,c,y\n1.5,a,10\n2.5,b,20\n3.5,a,30\n", OnMissing::Error).unwrap();
        let ds = out.dataset;
        assert_eq!(ds.feature_names(), ["x", "c=a", "c=b"]);
        assert_eq!(ds.row(0), [1.5, 1.0, 0.0]);
        assert_eq!(ds.row(1), [2.5, 0.0, 1.0]);
        assert_eq!(ds.target(), [10.0, 20.0, 30.0]);
        assert_eq!((ds.n_nominal(), ds.n_numeric()), (1, 1));
        assert_eq!(ds.nominal_map()["c"], vec!["c=a".to_string(), "c=b".to_string()]);
    }

    #[test]
    fn headerless_file_is_a_line_one_error() {
        let err = load("1,2,3\n4,5,6\n", OnMissing::Error).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn missing_target_column() {
        let err = load_csv_from_reader("a,b\n1,2\n".as_bytes(), Path::new("m"), "y", OnMissing::Error)
            .unwrap_err();
        assert!(err.to_string().contains("target column `y` not found"));
    }

    #[test]
    fn unparseable_target_names_its_line() {
        let err = load("x,y\n1,2\n2,oops\n", OnMissing::Error).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("oops"));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn drop_incomplete_rows() {
        let mut text = String::from("x,c,y\n");
        for i in 0..10 {
            match i {
                3 => text.push_str("3,,3\n"),
                7 => text.push_str("NA,q,7\n"),
                _ => text.push_str(&format!("{i},q,{i}\n")),
            }
        }
        let out = load(&text, OnMissing::DropRows).unwrap();
        assert_eq!(out.dataset.n_rows(), 8);
        assert_eq!(out.dropped_rows, 2);
        assert_eq!(out.dataset.target(), [0.0, 1.0, 2.0, 4.0, 5.0, 6.0, 8.0, 9.0]);
        assert!(load(&text, OnMissing::Error).is_err());
    }

    #[test]
    fn rejects_non_finite_numeric() {
        assert!(load("x,y\ninf,1\n2,2\n", OnMissing::Error).is_err());
    }

    #[test]
    fn subset_keeps_order() {
        let ds = Dataset::new(vec![1.0, 2.0, 3.0], 1, vec![10.0, 20.0, 30.0], vec!["a".into()]).unwrap();
        let s = ds.subset(&[2, 0]);
        assert_eq!(s.features(), [3.0, 1.0]);
        assert_eq!(s.target(), [30.0, 10.0]);
    }
}
