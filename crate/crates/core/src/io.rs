//! CSV tables with `# key=value` metadata headers, and the JSON run manifest.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every value
//! reads back bit-exactly and output never depends on the locale.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Leading `# key=value` lines of a file.
pub fn parse_metadata(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .map(str::trim)
        .take_while(|l| l.starts_with('#') || l.is_empty())
        .filter_map(|l| {
            let (k, v) = l.trim_start_matches('#').split_once('=')?;
            Some((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

/// Numeric column `name` of a CSV text.
pub fn read_column(path: &Path, text: &str, name: &str) -> Result<Vec<f64>> {
    let table = read_table(path, text)?;
    table
        .column(name)
        .map(<[f64]>::to_vec)
        .ok_or_else(|| Error::data(path, format!("missing column `{name}`")))
}

/// A numeric CSV table held column-wise.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: BTreeMap<String, String>,
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            metadata: BTreeMap::new(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            columns: vec![Vec::new(); headers.len()],
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        for (col, &v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let idx = self.headers.iter().position(|h| h == name)?;
        Some(&self.columns[idx])
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(&self.headers)?;
        for r in 0..self.rows() {
            wtr.write_record(self.columns.iter().map(|c| format_number(c[r])))?;
        }
        let bytes = wtr
            .into_inner()
            .map_err(|e| Error::io("<memory>", e.into_error()))?;
        out.push_str(std::str::from_utf8(&bytes).expect("csv output is ascii"));
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        read_table(path, &text)
    }
}

fn read_table(path: &Path, text: &str) -> Result<Table> {
    let mut rdr = reader(text);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.iter().all(String::is_empty) {
        return Err(Error::data(path, "file has no header line"));
    }
    let mut table = Table {
        metadata: parse_metadata(text),
        columns: vec![Vec::new(); headers.len()],
        headers,
    };
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != table.headers.len() {
            return Err(Error::data(path, format!("row {} has {} fields", line + 1, record.len())));
        }
        for (col, field) in table.columns.iter_mut().zip(record.iter()) {
            let v = field
                .parse::<f64>()
                .map_err(|_| Error::data(path, format!("row {}: `{field}` is not a number", line + 1)))?;
            col.push(v);
        }
    }
    Ok(table)
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:?}")
}

/// Everything needed to reproduce one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved argument vector (without the program name); replaying it
    /// reproduces the outputs byte for byte.
    pub args: Vec<String>,
    pub parameters: serde_json::Value,
    pub tool_version: String,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, parameters: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            args,
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::data(path, e.to_string()))
    }
}

/// `<out>.manifest.json` next to an output file.
pub fn manifest_path(out: &Path) -> std::path::PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn metadata_stops_at_first_data_line() {
        let meta = parse_metadata("# a=1\n#b = two\nx\n# c=3\n1.0\n");
        assert_eq!(meta.len(), 2);
        assert_eq!(meta["b"], "two");
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["a", "b"]).with_meta("N", 10);
        t.push_row(&[0.1, -2.5e-300]);
        t.push_row(&[f64::MAX, 3.0]);
        t.write_csv(&path).unwrap();
        assert_eq!(Table::read_csv(&path).unwrap(), t);
    }

    #[test]
    fn bad_cells_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "x\n1.0\nabc\n").unwrap();
        let err = Table::read_csv(&path).unwrap_err().to_string();
        assert!(err.contains("bad.csv") && err.contains("abc"), "{err}");
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(manifest_path(Path::new("out/p.csv")), Path::new("out/p.csv.manifest.json"));
    }

    proptest! {
        #[test]
        fn numbers_round_trip_exactly(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_number(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }
}
