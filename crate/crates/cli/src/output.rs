//! Table export: CSV or JSON, written atomically (temp file + rename).
//!
//! Floating-point cells are serialized with 17 significant digits in CSV so
//! every value round-trips bit-exactly through parse; JSON uses the
//! serializer's exact shortest encoding, which also round-trips.

use crate::config::OutputFormat;
use crate::CliError;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

/// One typed cell of an output table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    UInt(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv_string(&self) -> String {
        match self {
            // 17 significant digits: exact f64 round-trip.
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::UInt(v) => v.to_string(),
            Cell::Bool(v) => if *v { "1" } else { "0" }.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json_value(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::UInt(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }
}

/// Column-named rows ready for export.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.write_record(row.iter().map(Cell::csv_string))?;
        }
        writer.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    fn to_json_bytes(&self) -> Result<Vec<u8>, CliError> {
        let objects: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let map: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(name, cell)| (name.to_string(), cell.json_value()))
                    .collect();
                Value::Object(map)
            })
            .collect();
        let mut bytes = serde_json::to_vec_pretty(&objects)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// Writes `<dir>/<stem>.<ext>` atomically and returns the path.
    pub fn write(&self, dir: &Path, stem: &str, format: OutputFormat) -> Result<PathBuf, CliError> {
        let (ext, bytes) = match format {
            OutputFormat::Csv => ("csv", self.to_csv_bytes()?),
            OutputFormat::Json => ("json", self.to_json_bytes()?),
        };
        let path = dir.join(format!("{stem}.{ext}"));
        write_atomic(&path, &bytes)?;
        Ok(path)
    }
}

/// Write-then-rename so readers never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| CliError::Io(e.to_string()))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

/// FNV-1a over the canonical (sorted-key) JSON encoding of a value; stable
/// across runs and platforms, used as the manifest's config fingerprint.
pub fn fnv1a_hex(value: &Value) -> String {
    let canonical = value.to_string(); // serde_json maps are sorted by key
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Parses a float serialized by the CSV cell encoder (or any f64 literal).
pub fn parse_float(text: &str, context: &'static str) -> Result<f64, CliError> {
    text.parse::<f64>()
        .map_err(|e| CliError::Io(format!("bad float in {context}: {text:?} ({e})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip_exactly() {
        for v in [0.1, 0.875, 23.0 / 42.0, 1e-300, -0.5476190476190476] {
            let s = Cell::Float(v).csv_string();
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn table_csv_shape() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![Cell::Int(1), Cell::Bool(true)]);
        let bytes = t.to_csv_bytes().unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, "a,b\n1,1\n");
    }

    #[test]
    fn json_is_array_of_objects() {
        let mut t = Table::new(vec!["x"]);
        t.push(vec![Cell::Float(0.5)]);
        let bytes = t.to_json_bytes().unwrap();
        let parsed: Vec<serde_json::Map<String, Value>> = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(parsed[0]["x"], json!(0.5));
    }

    #[test]
    fn fnv_hash_stable_and_key_order_free() {
        let a: Value = serde_json::from_str(r#"{"x": 1, "y": 2}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"y": 2, "x": 1}"#).unwrap();
        assert_eq!(fnv1a_hex(&a), fnv1a_hex(&b));
        assert_eq!(fnv1a_hex(&a).len(), 16);
    }
}
