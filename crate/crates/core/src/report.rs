//! Stable key-value reports.
//!
//! One entry per line in insertion order. Floats are written as the shortest
//! round-trip decimal followed by the hexadecimal literal in parentheses, so equal
//! inputs give byte-identical reports:
//!
//! ```text
//! residual = 0.25 (0x1p-2)
//! direction = [1.0, 0.0] ([0x1p+0, 0x0p+0])
//! ```

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::hexfloat::format_hex;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Floats(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    entries: Vec<(String, Value)>,
}

/// Serializes as a map in insertion order.
impl Serialize for Report {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.entries.len()))?;
        for (k, v) in &self.entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

fn decimal(x: f64) -> String {
    format!("{x:?}")
}

fn list(xs: &[f64], f: fn(f64) -> String) -> String {
    format!("[{}]", xs.iter().map(|&x| f(x)).collect::<Vec<_>>().join(", "))
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut r = Report::default();
        r.text("command", command);
        r.int("seed", seed as i64);
        r
    }

    pub fn push(&mut self, key: &str, value: Value) -> &mut Self {
        self.entries.push((key.to_string(), value));
        self
    }

    pub fn bool(&mut self, key: &str, v: bool) -> &mut Self {
        self.push(key, Value::Bool(v))
    }

    pub fn int(&mut self, key: &str, v: i64) -> &mut Self {
        self.push(key, Value::Int(v))
    }

    pub fn float(&mut self, key: &str, v: f64) -> &mut Self {
        self.push(key, Value::Float(v))
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) -> &mut Self {
        self.push(key, Value::Text(v.into()))
    }

    pub fn vector(&mut self, key: &str, v: &DVector<f64>) -> &mut Self {
        self.push(key, Value::Floats(v.iter().copied().collect()))
    }

    pub fn matrix(&mut self, key: &str, m: &DMatrix<f64>) -> &mut Self {
        let rows = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        self.push(key, Value::Rows(rows))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn entries(&self) -> &[(String, Value)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            match v {
                Value::Bool(b) => writeln!(out, "{k} = {b}"),
                Value::Int(i) => writeln!(out, "{k} = {i}"),
                Value::Float(x) => writeln!(out, "{k} = {} ({})", decimal(*x), format_hex(*x)),
                Value::Text(s) => writeln!(out, "{k} = {s}"),
                Value::Floats(xs) => writeln!(out, "{k} = {} ({})", list(xs, decimal), list(xs, format_hex)),
                Value::Rows(rows) => {
                    writeln!(out, "{k} = {}x{}", rows.len(), rows.first().map_or(0, Vec::len)).unwrap();
                    for (i, row) in rows.iter().enumerate() {
                        writeln!(out, "{k}[{i}] = {} ({})", list(row, decimal), list(row, format_hex)).unwrap();
                    }
                    Ok(())
                }
            }
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_layout() {
        let mut r = Report::new("reach", 7);
        r.float("residual", 0.25).bool("ok", true).vector("dir", &DVector::from_vec(vec![1.0, 0.0]));
        r.matrix("m", &DMatrix::identity(2, 2));
        let text = r.to_text();
        assert_eq!(
            text,
            "command = reach\nseed = 7\nresidual = 0.25 (0x1p-2)\nok = true\n\
             dir = [1.0, 0.0] ([0x1p+0, 0x0p+0])\nm = 2x2\n\
             m[0] = [1.0, 0.0] ([0x1p+0, 0x0p+0])\nm[1] = [0.0, 1.0] ([0x0p+0, 0x1p+0])\n"
        );
    }
}
