//! Tabular command output with CSV and JSON encodings.

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1.0";

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    /// CSV encoding; floats keep 17 significant digits.
    pub fn to_csv_field(&self) -> String {
        match self {
            Cell::Num(x) => format_full(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => Value::from(*x),
            Cell::Num(x) => Value::from(format_full(*x)),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(i64::from(x))
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// `{:.16e}` with `inf`/`nan` spelled out.
pub fn format_full(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Four-decimal display rounding.
pub fn format_display(x: f64) -> String {
    format!("{x:.4}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub schema_version: String,
    /// Canonical command line, without output and execution flags.
    pub command: String,
    /// Ordered `(key, value)` pairs: spec hash, seed, tolerances, ...
    pub metadata: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl OutputRecord {
    pub fn new(command: String, columns: &[&str]) -> Self {
        OutputRecord {
            schema_version: SCHEMA_VERSION.to_string(),
            command,
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.metadata.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Header plus one line per row, RFC-4180 quoting, LF terminators.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv_field))
                .expect("writing to memory");
        }
        w.into_inner().expect("flushing to memory")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("serializing to memory");
        out.push(b'\n');
        out
    }
}

/// CSV writer with the output conventions used throughout.
pub fn csv_writer<W: std::io::Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(inner)
}

/// Parses CSV and writes it back with the same conventions.
pub fn reencode_csv(bytes: &[u8]) -> csv::Result<Vec<u8>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes);
    let mut w = csv_writer(Vec::new());
    for record in r.records() {
        w.write_record(&record?)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

struct Row<'a> {
    columns: &'a [String],
    cells: &'a [Cell],
}

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(c, &v.to_json())?;
        }
        map.end()
    }
}

struct Metadata<'a>(&'a [(String, Value)]);

impl Serialize for Metadata<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for OutputRecord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Row<'_>> = self
            .rows
            .iter()
            .map(|cells| Row {
                columns: &self.columns,
                cells,
            })
            .collect();
        let mut map = s.serialize_map(Some(4))?;
        map.serialize_entry("schema_version", &self.schema_version)?;
        map.serialize_entry("command", &self.command)?;
        map.serialize_entry("metadata", &Metadata(&self.metadata))?;
        map.serialize_entry("rows", &rows)?;
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OutputRecord {
        let mut r = OutputRecord::new("demo --x 1".into(), &["a", "b", "c"]);
        r.meta("seed", 7);
        r.push(vec![Cell::Num(0.1), Cell::Int(3), Cell::text("—")]);
        r.push(vec![
            Cell::Num(-1.0 / 3.0),
            Cell::Empty,
            Cell::text("x,\"y\""),
        ]);
        r
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(sample().to_csv()).unwrap();
        assert_eq!(
            text,
            "a,b,c\n1.0000000000000001e-1,3,—\n-3.3333333333333331e-1,,\"x,\"\"y\"\"\"\n"
        );
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let bytes = sample().to_csv();
        assert_eq!(reencode_csv(&bytes).unwrap(), bytes);
    }

    #[test]
    fn full_precision_survives_parsing() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17] {
            let s = format_full(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_slice(&sample().to_json()).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["metadata"]["seed"], 7);
        assert_eq!(v["rows"][0]["a"], 0.1);
        assert_eq!(v["rows"][1]["b"], Value::Null);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
    }
}
