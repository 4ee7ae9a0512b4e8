//! Bundled real datasets.

use crate::error::{Error, Result};

const CHOLESTEROL_CSV: &str = include_str!("../../data/cholesterol.csv");
const MARKS_CSV: &str = include_str!("../../data/marks.csv");

pub const MARKS_COLUMNS: [&str; 3] = ["X1", "X2", "X3"];

/// Names accepted by [`bundled_csv`].
pub const BUNDLED: [&str; 2] = ["cholesterol", "marks"];

/// Raw CSV text of a bundled dataset, header included.
pub fn bundled_csv(name: &str) -> Option<&'static str> {
    match name {
        "cholesterol" => Some(CHOLESTEROL_CSV),
        "marks" => Some(MARKS_CSV),
        _ => None,
    }
}

fn column(csv: &str, name: &str) -> Result<Vec<f64>> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Data("empty dataset".into()))?;
    let idx = header
        .split(',')
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Parameter(format!("no column {name:?}")))?;
    lines
        .enumerate()
        .map(|(row, line)| {
            let cell = line.split(',').nth(idx).unwrap_or("").trim();
            cell.parse::<f64>()
                .map_err(|_| Error::Data(format!("row {}: bad value {cell:?}", row + 2)))
        })
        .collect()
}

/// Serum cholesterol (82 patients), in g/l.
pub fn cholesterol() -> Vec<f64> {
    column(CHOLESTEROL_CSV, "cholesterol").expect("bundled cholesterol data parses")
}

/// One column of the marks data. The three columns were expanded from
/// separate frequency tables, so rows do not pair students across columns.
pub fn marks(name: &str) -> Result<Vec<f64>> {
    column(MARKS_CSV, name)
}
