//! Output files. Every file carries the resolved config, seed and tool
//! version: as `#` lines ahead of CSV, as top-level fields in JSON.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(command: &str, seed: u64, config: &impl Serialize) -> CliResult<Self> {
        let config = serde_json::to_value(config).map_err(|e| CliError::validation(format!("config: {e}")))?;
        Ok(Provenance {
            version: VERSION.to_string(),
            command: command.to_string(),
            seed,
            config,
        })
    }

    pub fn csv_header(&self) -> String {
        format!(
            "# mebk {}\n# command: {}\n# seed: {}\n# config: {}\n",
            self.version, self.command, self.seed, self.config
        )
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    result: &'a T,
}

/// A result as read back from one of our JSON files.
#[derive(Debug, Deserialize)]
pub struct Document<T> {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub result: T,
}

pub fn json_text<T: Serialize>(provenance: &Provenance, result: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { provenance, result })
        .map_err(|e| CliError::Numeric(format!("cannot serialize result: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// CSV of serializable records, headed by the provenance lines.
pub fn csv_records<T: Serialize>(provenance: &Provenance, rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Numeric(format!("cannot write CSV: {e}")))?;
    }
    finish(provenance, w)
}

/// CSV with an explicit header row and pre-formatted cells.
pub fn csv_table(provenance: &Provenance, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Numeric(format!("cannot write CSV: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    finish(provenance, w)
}

fn finish(provenance: &Provenance, w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let body = w.into_inner().map_err(|e| CliError::Numeric(format!("cannot write CSV: {e}")))?;
    let body = String::from_utf8(body).expect("CSV output is UTF-8");
    Ok(provenance.csv_header() + &body)
}

pub fn render<T: Serialize>(format: Format, provenance: &Provenance, csv: impl FnOnce() -> CliResult<String>, json: &T) -> CliResult<String> {
    match format {
        Format::Csv => csv(),
        Format::Json => json_text(provenance, json),
    }
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Output {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Output {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        n: usize,
        t: f64,
    }

    #[test]
    fn csv_carries_provenance() {
        let p = Provenance::new("benchmark", 7, &serde_json::json!({"sizes": [10, 20]})).unwrap();
        let text = csv_records(&p, &[Row { n: 10, t: 0.5 }]).unwrap();
        let expected = format!("# mebk {VERSION}\n# command: benchmark\n# seed: 7\n# config: {{\"sizes\":[10,20]}}\nn,t\n10,0.5\n");
        assert_eq!(text, expected);
    }

    #[test]
    fn json_round_trips_floats() {
        let p = Provenance::new("x", 1, &serde_json::json!({})).unwrap();
        let v = vec![0.1 + 0.2, 1e-300, 1.0 / 3.0];
        let text = json_text(&p, &v).unwrap();
        let back: Document<Vec<f64>> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.result, v);
        assert_eq!(back.provenance, p);
    }
}
