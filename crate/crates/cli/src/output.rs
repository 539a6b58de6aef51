//! Rendering of result tables. Floats carry 9 significant digits; exact
//! values print as `p/q`.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value as Json};
use sos_rates::numeric::{fmt_rational, Rational};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Exact(Rational),
    Float(f64),
    Count(usize),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Exact(r) => fmt_rational(r),
            Cell::Float(x) => fmt_float(*x),
            Cell::Count(n) => n.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::Text(s) => Json::String(s.clone()),
            Cell::Exact(r) => Json::String(fmt_rational(r)),
            // round-trip through the printed digits so all formats agree
            Cell::Float(x) => fmt_float(*x).parse::<f64>().ok().and_then(Number::from_f64).map_or(Json::Null, Json::Number),
            Cell::Count(n) => Json::Number((*n).into()),
            Cell::Missing => Json::Null,
        }
    }
}

/// Nine significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exponent) {
        format!("{:.*}", (8 - exponent) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// A single row as `name value` lines, several rows as aligned columns.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.rows.len() == 1 {
            for (name, cell) in self.columns.iter().zip(&self.rows[0]) {
                if *cell != Cell::Missing {
                    let _ = writeln!(out, "{name} {}", cell.render());
                }
            }
            return out;
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| cells.iter().map(|r| r[j].len()).chain([c.len()]).max().unwrap_or(0))
            .collect();
        let line = |items: Vec<&str>| {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        let _ = writeln!(out, "{}", line(self.columns.iter().map(String::as_str).collect()));
        for row in &cells {
            let _ = writeln!(out, "{}", line(row.iter().map(String::as_str).collect()));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let object: Map<String, Json> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
            out.push_str(&Json::Object(object).to_string());
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Csv => self.to_csv(),
            Format::JsonLines => self.to_json_lines(),
        }
    }
}
