//! Number formatting, the three output formats and atomic file writes.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Twelve significant digits, trailing zeros dropped. Scientific notation
/// outside `[1e-5, 1e12)`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let digits = (11 - exp).max(0) as usize;
        trim(&format!("{x:.digits$}")).to_string()
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rounds every float in a JSON tree to twelve significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            num(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Printed in text mode as an aligned block.
    pub in_text: bool,
}

impl Table {
    pub fn new(name: &str, header: &[&str], in_text: bool) -> Self {
        Table { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new(), in_text }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| std::iter::once(&self.header).chain(&self.rows).map(|r| r[j].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

/// What a subcommand produces.
pub struct Report {
    /// Base name of the JSON file written under `--output`.
    pub name: String,
    pub value: Value,
    pub tables: Vec<Table>,
    /// Additional JSON files written under `--output`.
    pub extra: Vec<(String, Value)>,
    /// Top-level keys left out of text output (shown as tables instead).
    pub text_skip: Vec<String>,
}

impl Report {
    pub fn new(name: &str, value: Value) -> Self {
        Report { name: name.into(), value: round_json(value), tables: Vec::new(), extra: Vec::new(), text_skip: Vec::new() }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => pretty(&self.value),
            Format::Csv => match self.tables.first() {
                Some(t) => t.to_csv(),
                None => {
                    let mut t = Table::new(&self.name, &["key", "value"], false);
                    t.rows = flatten(&self.value).into_iter().map(|(k, v)| vec![k, v]).collect();
                    t.to_csv()
                }
            },
            Format::Text => {
                let mut shown = self.value.clone();
                if let Value::Object(map) = &mut shown {
                    map.retain(|k, _| !self.text_skip.contains(k));
                }
                let lines = flatten(&shown);
                let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                let mut out: String = lines.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect();
                for t in self.tables.iter().filter(|t| t.in_text) {
                    out.push('\n');
                    out.push_str(&t.to_text());
                }
                out
            }
        }
    }

    pub fn write_files(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        write_atomic(dir, &format!("{}.json", self.name), &pretty(&self.value))?;
        for t in &self.tables {
            write_atomic(dir, &format!("{}.csv", t.name), &t.to_csv())?;
        }
        for (name, value) in &self.extra {
            write_atomic(dir, name, &pretty(&round_json(value.clone())))?;
        }
        Ok(())
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

/// Writes to a temporary file in `dir` and renames it into place.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}

/// `(dotted key, display value)` pairs. Arrays of scalars print as tuples.
fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    match v {
        Value::Object(map) => flatten_into(map, "", &mut out),
        other => out.push(("value".into(), scalar(other))),
    }
    out
}

fn flatten_into(map: &Map<String, Value>, prefix: &str, out: &mut Vec<(String, String)>) {
    for (k, v) in map {
        let key = format!("{prefix}{k}");
        match v {
            Value::Object(inner) => flatten_into(inner, &format!("{key}."), out),
            Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
                for (i, item) in items.iter().enumerate() {
                    match item {
                        Value::Object(inner) => flatten_into(inner, &format!("{key}[{i}]."), out),
                        other => out.push((format!("{key}[{i}]"), scalar(other))),
                    }
                }
            }
            other => out.push((key, scalar(other))),
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), |x| if n.is_f64() { num(x) } else { n.to_string() }),
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Bool(b) => b.to_string(),
        Value::Array(items) => format!("({})", items.iter().map(scalar).collect::<Vec<_>>().join(", ")),
        Value::Object(_) => unreachable!("objects are flattened"),
    }
}
