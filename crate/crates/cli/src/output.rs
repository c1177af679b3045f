//! Output records and their table, JSON and CSV renderings.

use std::io::{self, Write};
use std::time::Instant;

use clap::ValueEnum;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use specgap::bounds::Flag;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<usize> for Field {
    fn from(x: usize) -> Self {
        Field::Int(x as i64)
    }
}

impl From<bool> for Field {
    fn from(x: bool) -> Self {
        Field::Bool(x)
    }
}

impl From<&str> for Field {
    fn from(x: &str) -> Self {
        Field::Text(x.to_string())
    }
}

impl From<String> for Field {
    fn from(x: String) -> Self {
        Field::Text(x)
    }
}

/// Non-finite numbers are written as the strings "inf", "-inf" and "nan".
fn nonfinite(x: f64) -> &'static str {
    if x.is_nan() {
        "nan"
    } else if x > 0.0 {
        "inf"
    } else {
        "-inf"
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Field::Num(x) if x.is_finite() => s.serialize_f64(*x),
            Field::Num(x) => s.serialize_str(nonfinite(*x)),
            Field::Int(i) => s.serialize_i64(*i),
            Field::Bool(b) => s.serialize_bool(*b),
            Field::Text(t) => s.serialize_str(t),
        }
    }
}

impl Field {
    /// Full precision: the shortest decimal that parses back to the same bits.
    fn full(&self) -> String {
        match self {
            Field::Num(x) if x.is_finite() => format!("{x:?}"),
            Field::Num(x) => nonfinite(*x).to_string(),
            Field::Int(i) => i.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(t) => t.clone(),
        }
    }

    fn display(&self) -> String {
        match self {
            Field::Num(x) => significant(*x, 6),
            other => other.full(),
        }
    }
}

/// `%g`-style rendering with `digits` significant digits.
pub fn significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return nonfinite(x).to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let sci = format!("{:.*e}", digits - 1, x);
    // Rounding can carry into the next decade, so read the exponent back.
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().unwrap_or(exp);
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if e < -4 || e >= digits as i32 {
        format!("{}e{}", trim(mantissa), e)
    } else {
        let decimals = (digits as i32 - 1 - e).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

type Entries = Vec<(String, Field)>;

/// One evaluated query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record {
    pub command: String,
    pub query: Entries,
    pub results: Entries,
    pub flags: Vec<Flag>,
    pub timings: Vec<(String, f64)>,
}

struct Ordered<'a>(&'a [(String, Field)]);

impl Serialize for Ordered<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let timings: Entries = self
            .timings
            .iter()
            .map(|(k, v)| (k.clone(), Field::Num(*v)))
            .collect();
        let mut m = s.serialize_map(Some(6))?;
        m.serialize_entry("schema_version", SCHEMA_VERSION)?;
        m.serialize_entry("command", &self.command)?;
        m.serialize_entry("query", &Ordered(&self.query))?;
        m.serialize_entry("results", &Ordered(&self.results))?;
        m.serialize_entry("flags", &self.flags)?;
        m.serialize_entry("timings", &Ordered(&timings))?;
        m.end()
    }
}

impl Record {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn query(mut self, key: &str, v: impl Into<Field>) -> Self {
        self.query.push((key.into(), v.into()));
        self
    }

    pub fn result(&mut self, key: &str, v: impl Into<Field>) {
        self.results.push((key.into(), v.into()));
    }

    pub fn opt_result(&mut self, key: &str, v: Option<f64>) {
        if let Some(v) = v {
            self.result(key, v);
        }
    }

    pub fn flag(&mut self, name: &str, pass: bool) {
        self.flags.push(Flag::new(name, pass));
    }

    pub fn time(&mut self, stage: &str, since: Instant) {
        self.timings
            .push((stage.into(), since.elapsed().as_secs_f64()));
    }

    fn cells(&self) -> Vec<(String, &Field)> {
        let mut out: Vec<(String, &Field)> = Vec::new();
        out.extend(self.query.iter().map(|(k, v)| (k.clone(), v)));
        out.extend(self.results.iter().map(|(k, v)| (k.clone(), v)));
        out
    }

    fn flag_cells(&self) -> Vec<(String, String)> {
        self.flags
            .iter()
            .map(|f| (format!("flag:{}", f.name), if f.pass { "pass" } else { "FAIL" }.into()))
            .collect()
    }

    fn timing_cells(&self, full: bool) -> Vec<(String, String)> {
        self.timings
            .iter()
            .map(|(k, v)| {
                let s = if full { format!("{v:?}") } else { significant(*v, 3) };
                (format!("time:{k}"), s)
            })
            .collect()
    }

    /// Ordered `(column, value)` pairs for tabular output.
    fn columns(&self, full: bool) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = vec![("command".into(), self.command.clone())];
        for (k, v) in self.cells() {
            out.push((k, if full { v.full() } else { v.display() }));
        }
        out.extend(self.flag_cells());
        out.extend(self.timing_cells(full));
        out
    }
}

/// Union of column names in first-seen order.
fn header(rows: &[Vec<(String, String)>]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for row in rows {
        for (k, _) in row {
            if !cols.contains(k) {
                cols.push(k.clone());
            }
        }
    }
    cols
}

fn lookup<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    row.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .unwrap_or("")
}

pub fn write_records(out: &mut impl Write, records: &[Record], format: Format) -> io::Result<()> {
    match format {
        Format::Json => {
            for r in records {
                serde_json::to_writer(&mut *out, r)?;
                writeln!(out)?;
            }
            Ok(())
        }
        Format::Csv => {
            let rows: Vec<_> = records.iter().map(|r| r.columns(true)).collect();
            let cols = header(&rows);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&cols)?;
            for row in &rows {
                w.write_record(cols.iter().map(|c| lookup(row, c)))?;
            }
            w.flush()
        }
        Format::Table => {
            let rows: Vec<_> = records.iter().map(|r| r.columns(false)).collect();
            if rows.len() == 1 {
                let width = rows[0].iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &rows[0] {
                    writeln!(out, "{k:<width$}  {v}")?;
                }
                return Ok(());
            }
            let cols = header(&rows);
            let widths: Vec<usize> = cols
                .iter()
                .map(|c| {
                    rows.iter()
                        .map(|r| lookup(r, c).len())
                        .max()
                        .unwrap_or(0)
                        .max(c.len())
                })
                .collect();
            let line = |cells: Vec<&str>| -> String {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            writeln!(out, "{}", line(cols.iter().map(String::as_str).collect()))?;
            for row in &rows {
                writeln!(out, "{}", line(cols.iter().map(|c| lookup(row, c)).collect()))?;
            }
            Ok(())
        }
    }
}
