//! Reading numeric tables from CSV files or the bundled datasets.

use std::path::Path;

use mebk::simlab::datasets;

use crate::error::{CliError, CliResult};

/// A row-major numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub data: Vec<f64>,
    pub n: usize,
}

impl Table {
    pub fn d(&self) -> usize {
        self.names.len()
    }

    /// Keeps the named columns, in the order given.
    pub fn select(self, columns: &[String]) -> CliResult<Table> {
        if columns.is_empty() {
            return Ok(self);
        }
        let idx = columns
            .iter()
            .map(|c| {
                self.names
                    .iter()
                    .position(|n| n == c)
                    .ok_or_else(|| CliError::validation(format!("no column {c:?}; available: {}", self.names.join(","))))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let d = self.d();
        let data = (0..self.n)
            .flat_map(|i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.data[i * d + j])
            .collect();
        Ok(Table {
            names: columns.to_vec(),
            data,
            n: self.n,
        })
    }
}

/// Parses CSV text. `#` lines are comments; a first row with any non-numeric
/// cell is taken as the header, otherwise columns are named `x1..xd`.
pub fn parse_table(text: &str, origin: &str) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut names: Option<Vec<String>> = None;
    let mut data = Vec::new();
    let mut n = 0;
    for (k, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::validation(format!("{origin}: {e}")))?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if names.is_none() && n == 0 && parsed.iter().any(Result::is_err) {
            names = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let width = names.get_or_insert_with(|| (1..=record.len()).map(|j| format!("x{j}")).collect()).len();
        if record.len() != width {
            return Err(CliError::validation(format!(
                "{origin}:{line}: expected {width} columns, found {}",
                record.len()
            )));
        }
        for (j, v) in parsed.into_iter().enumerate() {
            match v {
                Ok(x) if x.is_finite() => data.push(x),
                _ => {
                    return Err(CliError::validation(format!(
                        "{origin}:{line}: column {}: {:?} is not a finite number",
                        j + 1,
                        &record[j]
                    )))
                }
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(CliError::validation(format!("{origin}: no data rows")));
    }
    Ok(Table {
        names: names.unwrap_or_default(),
        data,
        n,
    })
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    parse_table(&text, &path.display().to_string())
}

pub fn bundled_table(name: &str) -> CliResult<Table> {
    let text = datasets::bundled_csv(name).ok_or_else(|| {
        CliError::validation(format!("unknown dataset {name:?}; bundled: {}", datasets::BUNDLED.join(", ")))
    })?;
    parse_table(text, name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_detected() {
        let t = parse_table("a,b\n1,2\n3,4\n", "t").unwrap();
        assert_eq!(t.names, vec!["a", "b"]);
        assert_eq!(t.data, vec![1.0, 2.0, 3.0, 4.0]);
        let t = parse_table("# note\n1,2\n3,4\n", "t").unwrap();
        assert_eq!(t.names, vec!["x1", "x2"]);
        assert_eq!(t.n, 2);
    }

    #[test]
    fn bad_cells_name_the_line() {
        let e = parse_table("1,2\n3,oops\n", "f.csv").unwrap_err().to_string();
        assert!(e.contains("f.csv:2") && e.contains("oops"), "{e}");
        assert!(parse_table("1,2\n3\n", "f").is_err());
        assert!(parse_table("a,b\n", "f").is_err());
        assert!(parse_table("1,nan\n", "f").is_err());
    }

    #[test]
    fn select_reorders_columns() {
        let t = parse_table("a,b,c\n1,2,3\n4,5,6\n", "t").unwrap();
        let s = t.select(&["c".into(), "a".into()]).unwrap();
        assert_eq!(s.data, vec![3.0, 1.0, 6.0, 4.0]);
        assert!(parse_table("a\n1\n", "t").unwrap().select(&["z".into()]).is_err());
    }

    #[test]
    fn bundled_data_load() {
        let t = bundled_table("cholesterol").unwrap();
        assert_eq!((t.n, t.d()), (82, 2));
        assert!(bundled_table("geyser").is_err());
    }
}
