//! Rectangular result tables with units, written as CSV plus a JSON metadata sidecar.
//!
//! CSV layout (RFC 4180 quoting, `.` decimal separator):
//!
//! ```text
//! name_1,name_2,...,config_hash
//! unit_1,unit_2,...,-
//! v_11,v_12,...,<hash>
//! ```
//!
//! Numbers use the shortest representation that round-trips. The sidecar `<name>.json`
//! records the config hash, the crate version, the SHA-256 of the CSV bytes, an optional
//! plot description and free-form summary values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fracwave_core::sim::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::outcome::HarnessError;

pub const HASH_COLUMN: &str = "config_hash";
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "NaN".into(),
            Cell::Num(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(s: &str) -> Cell {
        match s.parse::<f64>() {
            Ok(v) => Cell::Num(v),
            Err(_) => Cell::Text(s.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Num(v as f64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::NAN))
    }
}

/// How `figures` should draw a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub x: String,
    pub y: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
    /// Slope of a dashed reference line through the first point of the first series.
    pub reference_slope: Option<f64>,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub table: String,
    pub columns: Vec<Column>,
    pub rows: usize,
    pub config_hash: String,
    pub code_version: String,
    pub csv_sha256: String,
    pub plot: Option<PlotSpec>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: Option<PlotSpec>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl ResultTable {
    /// `columns` are `(name, unit)` pairs; every unit must be non-empty (use `1` for
    /// dimensionless numbers and `-` for labels).
    pub fn new(name: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|(n, u)| Column { name: n.to_string(), unit: u.to_string() }).collect(),
            rows: Vec::new(),
            plot: None,
            summary: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), HarnessError> {
        if row.len() != self.columns.len() {
            return Err(HarnessError::Usage(format!(
                "table {}: row has {} cells, schema has {} columns",
                self.name,
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn with_plot(mut self, plot: PlotSpec) -> Self {
        self.plot = Some(plot);
        self
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(value).expect("summary value serialises"));
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Numeric values of a column; `None` if it is missing or holds text.
    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column(name)?;
        self.rows.iter().map(|r| r[idx].as_f64()).collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(HarnessError::Usage(format!("invalid table name {:?}", self.name)));
        }
        for c in &self.columns {
            if c.unit.is_empty() {
                return Err(HarnessError::Usage(format!("table {}: column {} has no unit", self.name, c.name)));
            }
            if c.name == HASH_COLUMN {
                return Err(HarnessError::Usage(format!("table {}: column name {HASH_COLUMN} is reserved", self.name)));
            }
        }
        if let Some(r) = self.rows.iter().find(|r| r.len() != self.columns.len()) {
            return Err(HarnessError::Usage(format!("table {}: ragged row of {} cells", self.name, r.len())));
        }
        Ok(())
    }

    /// CSV bytes with the hash column appended.
    pub fn to_csv(&self, config_hash: &str) -> Result<Vec<u8>, HarnessError> {
        self.validate()?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let names = self.columns.iter().map(|c| c.name.as_str()).chain([HASH_COLUMN]);
        w.write_record(names)?;
        w.write_record(self.columns.iter().map(|c| c.unit.as_str()).chain(["-"]))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render).chain([config_hash.to_string()]))?;
        }
        w.into_inner().map_err(|e| HarnessError::Io(std::io::Error::other(e.to_string())))
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`, returning the CSV path.
    pub fn write(&self, dir: &Path, config_hash: &str) -> Result<PathBuf, HarnessError> {
        std::fs::create_dir_all(dir)?;
        let bytes = self.to_csv(config_hash)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        std::fs::write(&csv_path, &bytes)?;
        let meta = TableMeta {
            table: self.name.clone(),
            columns: self.columns.clone(),
            rows: self.rows.len(),
            config_hash: config_hash.to_string(),
            code_version: CODE_VERSION.to_string(),
            csv_sha256: sha256_hex(&bytes),
            plot: self.plot.clone(),
            summary: self.summary.clone(),
        };
        let json = serde_json::to_string_pretty(&meta).expect("metadata serialises");
        std::fs::write(dir.join(format!("{}.json", self.name)), json + "\n")?;
        Ok(csv_path)
    }

    /// Reads a table back from its CSV and sidecar. Returns the table and the hash found in
    /// the sidecar.
    pub fn read(csv_path: &Path) -> Result<(Self, TableMeta), HarnessError> {
        let meta_path = csv_path.with_extension("json");
        let meta: TableMeta = serde_json::from_slice(&std::fs::read(&meta_path)?)
            .map_err(|e| HarnessError::Usage(format!("{}: bad metadata: {e}", meta_path.display())))?;
        let schema = |m: String| HarnessError::Usage(format!("{}: schema error: {m}", csv_path.display()));
        let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_path(csv_path)?;
        let mut records = r.records();
        let names = records.next().ok_or_else(|| schema("missing header".into()))??;
        let units = records.next().ok_or_else(|| schema("missing units row".into()))??;
        if names.len() != units.len() || names.iter().next_back() != Some(HASH_COLUMN) {
            return Err(schema("header and units rows disagree or lack the hash column".into()));
        }
        let width = names.len() - 1;
        let columns: Vec<Column> =
            (0..width).map(|i| Column { name: names[i].to_string(), unit: units[i].to_string() }).collect();
        if columns != meta.columns {
            return Err(schema("columns differ from the metadata".into()));
        }
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec?;
            if rec.len() != width + 1 {
                return Err(schema(format!("row {} has {} fields, expected {}", rows.len() + 1, rec.len(), width + 1)));
            }
            rows.push((0..width).map(|i| Cell::parse(&rec[i])).collect());
        }
        let table = ResultTable {
            name: meta.table.clone(),
            columns,
            rows,
            plot: meta.plot.clone(),
            summary: meta.summary.clone(),
        };
        Ok((table, meta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new("demo", &[("r", "1"), ("value", "1"), ("label", "-")]);
        t.push(vec![10.0.into(), 0.1.into(), "a, \"quoted\"".into()]).unwrap();
        t.push(vec![100.0.into(), f64::NAN.into(), "b".into()]).unwrap();
        t
    }

    #[test]
    fn csv_layout_and_quoting() {
        let text = String::from_utf8(sample().to_csv("abc").unwrap()).unwrap();
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert_eq!(lines[0], "r,value,label,config_hash");
        assert_eq!(lines[1], "1,1,-,-");
        assert_eq!(lines[2], "10,0.1,\"a, \"\"quoted\"\"\",abc");
        assert_eq!(lines[3], "100,NaN,b,abc");
    }

    #[test]
    fn ragged_rows_and_missing_units_are_rejected() {
        let mut t = sample();
        assert!(t.push(vec![1.0.into()]).is_err());
        t.columns[0].unit.clear();
        assert!(t.to_csv("h").is_err());
    }

    #[test]
    fn write_then_read_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = sample();
        t.note("slope", -2.0);
        let path = t.write(dir.path(), "h1").unwrap();
        let (back, meta) = ResultTable::read(&path).unwrap();
        assert_eq!(meta.config_hash, "h1");
        assert_eq!(meta.csv_sha256, sha256_hex(&std::fs::read(&path).unwrap()));
        assert_eq!(back.columns, t.columns);
        assert_eq!(back.rows[0][1], Cell::Num(0.1));
        assert_eq!(back.rows[0][2], Cell::Text("a, \"quoted\"".into()));
        assert!(matches!(back.rows[1][1], Cell::Num(v) if v.is_nan()));
        assert_eq!(back.summary["slope"], serde_json::json!(-2.0));
    }
}
