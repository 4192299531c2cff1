//! Tabular output in CSV and JSON.
//!
//! Floats are written with 17 significant digits in CSV and with the
//! shortest round-trip representation in JSON, so a table read back gives
//! the exact doubles that were computed. Nothing time- or host-dependent
//! is written unless a caller puts it in a column, which keeps repeated
//! runs byte-identical.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde_json::{Map, Number, Value as Json};

use crate::error::{invalid, Error, Result};
use crate::rng::GENERATOR_ID;
use crate::VERSION;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Int(v) => Json::from(*v),
            Cell::Float(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Cell::Text(s) => Json::String(s.clone()),
            Cell::Bool(b) => Json::Bool(*b),
            Cell::Empty => Json::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any double.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

/// A rectangular table with named columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a column, or `None` if it does not exist.
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    fn json_rows(&self) -> Json {
        Json::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut obj = Map::new();
                    for (name, cell) in self.columns.iter().zip(r) {
                        obj.insert(name.clone(), cell.json());
                    }
                    Json::Object(obj)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(invalid("format", format!("expected csv or json, got `{s}`"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// A result table plus the configuration that produced it and any fits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    /// Resolved configuration, in the order it should be printed.
    pub config: Vec<(String, Cell)>,
    pub rows: Table,
    pub fits: Table,
}

impl Report {
    pub fn new(rows: Table) -> Self {
        Report {
            config: Vec::new(),
            rows,
            fits: Table::default(),
        }
    }

    pub fn with_config(mut self, key: impl Into<String>, value: impl Into<Cell>) -> Self {
        self.config.push((key.into(), value.into()));
        self
    }

    pub fn with_fits(mut self, fits: Table) -> Self {
        self.fits = fits;
        self
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn to_bytes(&self, format: Format) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write(format, &mut buf)?;
        Ok(buf)
    }

    /// Metadata lines start with `#`; fits, if any, follow the rows after a
    /// blank line with their own header. Lines end in CRLF.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "# version={VERSION}\r\n")?;
        write!(out, "# generator={GENERATOR_ID}\r\n")?;
        for (k, v) in &self.config {
            write!(out, "# {k}={}\r\n", v.csv().replace(['\r', '\n'], " "))?;
        }
        write_csv_table(&self.rows, &mut out)?;
        if !self.fits.columns().is_empty() {
            write!(out, "\r\n# fits\r\n")?;
            write_csv_table(&self.fits, &mut out)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let mut config = Map::new();
        for (k, v) in &self.config {
            config.insert(k.clone(), v.json());
        }
        let mut top = Map::new();
        top.insert("version".into(), Json::String(VERSION.into()));
        top.insert("generator".into(), Json::String(GENERATOR_ID.into()));
        top.insert("config".into(), Json::Object(config));
        top.insert("rows".into(), self.rows.json_rows());
        top.insert("fits".into(), self.fits.json_rows());
        serde_json::to_writer_pretty(&mut out, &Json::Object(top)).map_err(|e| Error::Output(e.to_string()))?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }
}

fn write_csv_table<W: Write>(t: &Table, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    let wrap = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(t.columns()).map_err(wrap)?;
    for row in t.rows() {
        w.write_record(row.iter().map(Cell::csv)).map_err(wrap)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut t = Table::new(["eps", "n_under", "note"]);
        t.push(vec![0.1.into(), 7usize.into(), "a,b".into()]);
        t.push(vec![(1.0 / 3.0).into(), 2usize.into(), Cell::Empty]);
        Report::new(t).with_config("kernel", "sq-exp").with_config("sigma", 0.02)
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let text = String::from_utf8(sample().to_bytes(Format::Csv).unwrap()).unwrap();
        assert!(!text.replace("\r\n", "").contains('\n'));
        let lines: Vec<&str> = text.split("\r\n").collect();
        assert!(lines[0].starts_with("# version="));
        assert_eq!(lines[2], "# kernel=sq-exp");
        assert!(text.contains("eps,n_under,note\r\n"));
        assert!(text.contains("\"a,b\""));
    }

    #[test]
    fn json_layout() {
        let bytes = sample().to_bytes(Format::Json).unwrap();
        let v: Json = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["config"]["kernel"], "sq-exp");
        assert_eq!(v["rows"][1]["n_under"], 2);
        assert_eq!(v["rows"][1]["eps"].as_f64().unwrap(), 1.0 / 3.0);
        assert!(v["rows"][1]["note"].is_null());
        assert!(v["fits"].as_array().unwrap().is_empty());
    }

    #[test]
    fn output_is_deterministic() {
        assert_eq!(sample().to_bytes(Format::Csv).unwrap(), sample().to_bytes(Format::Csv).unwrap());
        assert_eq!(sample().to_bytes(Format::Json).unwrap(), sample().to_bytes(Format::Json).unwrap());
    }
}
