//! Tabular output shared by all subcommands.

use serde_json::{json, Map, Value};

use crate::config::{OutputFormat, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) => json!(x),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<u8> for Cell {
    fn from(i: u8) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Column-ordered rows plus `key=value` metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: &'static str,
    pub meta: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&str]) -> Self {
        Self {
            command,
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(command: &'static str, columns: Vec<String>) -> Self {
        Self {
            command,
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Comment lines with the schema version and metadata, then a header
    /// row and one line per row.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema_version={SCHEMA_VERSION}\n# command={}\n", self.command);
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={}\n", v.csv()));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(Cell::csv))
                .expect("in-memory write");
        }
        let bytes = writer.into_inner().expect("in-memory flush");
        out.push_str(&String::from_utf8(bytes).expect("utf-8 output"));
        out
    }

    pub fn to_json_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
        obj.insert("command".into(), json!(self.command));
        for (k, v) in &self.meta {
            obj.insert(k.clone(), v.json());
        }
        obj.insert("columns".into(), json!(self.columns));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let fields: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), v.json()))
                    .collect();
                Value::Object(fields)
            })
            .collect();
        obj.insert("rows".into(), Value::Array(rows));
        Value::Object(obj)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}
