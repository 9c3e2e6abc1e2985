//! Canonical text output: numbers at 12 significant digits, CSV tables with
//! a fixed header, JSON with sorted keys and plain decimal literals.

use std::io::{self, Read, Write};

use serde_json::{Map, Number, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Decimal exponent (after rounding) from which exponent notation is used.
const EXPONENT_FROM: i32 = 6;

/// Formats `x` with [`SIGNIFICANT_DIGITS`] significant digits and trailing
/// zeros removed. Values below 1e6 in magnitude are written as plain
/// decimals. Non-finite values become `nan`, `inf` or `-inf`.
///
/// Formatting is idempotent: parsing the result and formatting it again
/// yields the same string.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();

    if exp >= EXPONENT_FROM {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let (int, frac) = if exp >= 0 {
        let e = exp as usize + 1;
        let padded = if digits.len() < e {
            format!("{digits}{}", "0".repeat(e - digits.len()))
        } else {
            digits
        };
        let (i, f) = padded.split_at(e);
        (i.to_owned(), f.to_owned())
    } else {
        ("0".to_owned(), format!("{}{digits}", "0".repeat((-exp - 1) as usize)))
    };
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// JSON number with canonical formatting; non-finite values map to `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    // the canonical string is already a valid JSON number; parsing it
    // would rewrite `1e13` as `1e+13`
    Value::Number(Number::from_string_unchecked(format_number(x)))
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// Builds a JSON object; keys are kept sorted by the map type.
pub fn object<I, K>(entries: I) -> Value
where
    I: IntoIterator<Item = (K, Value)>,
    K: Into<String>,
{
    Value::Object(entries.into_iter().map(|(k, v)| (k.into(), v)).collect::<Map<_, _>>())
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn parse(s: &str) -> Cell {
        let numeric_start = s.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '.');
        match s.parse::<f64>() {
            Ok(x) if numeric_start => Cell::Num(x),
            _ if s == "nan" => Cell::Num(f64::NAN),
            _ if s == "inf" => Cell::Num(f64::INFINITY),
            _ if s == "-inf" => Cell::Num(f64::NEG_INFINITY),
            _ => Cell::Text(s.to_owned()),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(x as f64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Num(x as f64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A rectangular table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[j]).collect())
    }

    /// Numeric column values; text cells are skipped.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        Some(
            self.column(name)?
                .into_iter()
                .filter_map(|c| match c {
                    Cell::Num(x) => Some(*x),
                    Cell::Text(_) => None,
                })
                .collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn read_csv<R: Read>(input: R) -> csv::Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header = r.headers()?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(Cell::parse).collect());
        }
        Ok(Self { header, rows })
    }

    /// One object per row, keyed by header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| object(self.header.iter().cloned().zip(r.iter().map(Cell::to_json))))
                .collect(),
        )
    }
}

/// Re-emits CSV text in canonical form.
pub fn canonicalize_csv(text: &str) -> csv::Result<String> {
    Ok(Table::read_csv(text.as_bytes())?.to_csv_string())
}
