//! Writers for the CSV and JSON artifacts. Files are written to a temporary
//! sibling and renamed into place, so readers never see a partial file.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sera::{CurvePoint, SeraCurve};

/// 17 significant digits, enough to round-trip any binary64 value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn curve_csv(curve: &SeraCurve) -> String {
    let mut out = String::from("t,ser\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{}", fmt_f64(p.t), fmt_f64(p.ser));
    }
    out
}

pub fn parse_curve_csv(text: &str) -> Result<SeraCurve> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let points = rdr
        .deserialize::<CurvePoint>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(SeraCurve { points })
}

/// One row of a prediction dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub row_id: usize,
    pub y: f64,
    pub yhat: f64,
}

pub fn predictions_csv(rows: &[PredictionRow]) -> String {
    let mut out = String::from("row_id,y,yhat\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.row_id, fmt_f64(r.y), fmt_f64(r.yhat));
    }
    out
}

pub fn parse_predictions_csv(text: &str) -> Result<Vec<PredictionRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    Ok(rdr
        .deserialize::<PredictionRow>()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

/// `y,phi` samples of a relevance curve.
pub fn relevance_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("y,phi\n");
    for &(y, phi) in points {
        let _ = writeln!(out, "{},{}", fmt_f64(y), fmt_f64(phi));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn csv_round_trips_bit_exactly(
            vals in prop::collection::vec((any::<f64>().prop_filter("finite", |v| v.is_finite()), any::<f64>().prop_filter("finite", |v| v.is_finite())), 0..30)
        ) {
            let curve = SeraCurve { points: vals.iter().map(|&(t, ser)| CurvePoint { t, ser }).collect() };
            prop_assert_eq!(parse_curve_csv(&curve_csv(&curve)).unwrap(), curve);
            let rows: Vec<PredictionRow> = vals.iter().enumerate().map(|(i, &(y, yhat))| PredictionRow { row_id: i, y, yhat }).collect();
            prop_assert_eq!(parse_predictions_csv(&predictions_csv(&rows)).unwrap(), rows);
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.json");
        write_json(&p, &vec![1.5f64]).unwrap();
        write_json(&p, &vec![2.5f64]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(back, vec![2.5]);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
