//! Deterministic analysis reports.
//!
//! A [`Report`] is an ordered list of fields. Rendering is byte-stable: the
//! same fields render to the same text and the same JSON, with floats always
//! printed in scientific notation in text mode so tolerances read uniformly.

use crate::io::format_scalar;
use crate::{CMatrix, Trilean};
use serde_json::{Map, Value};

/// One report field.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Bool(bool),
    Trilean(Trilean),
    Int(i64),
    Float(f64),
    Text(String),
    Matrix(CMatrix),
    /// A nested sub-report (one per decomposition component, for instance).
    Nested(Report),
    /// A list of nested sub-reports under one key.
    List(Vec<Report>),
}

/// Ordered collection of named fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    entries: Vec<(String, Field)>,
}

impl Report {
    #[must_use]
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, field: Field) {
        self.entries.push((key.into(), field));
    }

    pub fn bool(&mut self, key: impl Into<String>, v: bool) {
        self.push(key, Field::Bool(v));
    }

    pub fn trilean(&mut self, key: impl Into<String>, v: Trilean) {
        self.push(key, Field::Trilean(v));
    }

    pub fn int(&mut self, key: impl Into<String>, v: i64) {
        self.push(key, Field::Int(v));
    }

    pub fn float(&mut self, key: impl Into<String>, v: f64) {
        self.push(key, Field::Float(v));
    }

    pub fn text(&mut self, key: impl Into<String>, v: impl Into<String>) {
        self.push(key, Field::Text(v.into()));
    }

    pub fn matrix(&mut self, key: impl Into<String>, m: CMatrix) {
        self.push(key, Field::Matrix(m));
    }

    pub fn nested(&mut self, key: impl Into<String>, r: Report) {
        self.push(key, Field::Nested(r));
    }

    pub fn list(&mut self, key: impl Into<String>, rs: Vec<Report>) {
        self.push(key, Field::List(rs));
    }

    /// Looks up a field by key (first match).
    #[must_use]
    pub fn get(&self, key: &str) -> Option<&Field> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, f)| f)
    }

    /// True if any boolean field (recursively) is `false` or any trilean is
    /// `False`. Used for exit-code policy.
    #[must_use]
    pub fn any_false(&self) -> bool {
        self.entries.iter().any(|(_, f)| match f {
            Field::Bool(b) => !b,
            Field::Trilean(t) => *t == Trilean::False,
            Field::Nested(r) => r.any_false(),
            Field::List(rs) => rs.iter().any(Report::any_false),
            _ => false,
        })
    }

    /// True if any trilean field (recursively) is `Inconclusive` or any text
    /// field equals `"not-found"`.
    #[must_use]
    pub fn any_inconclusive(&self) -> bool {
        self.entries.iter().any(|(_, f)| match f {
            Field::Trilean(t) => *t == Trilean::Inconclusive,
            Field::Text(s) => s == "not-found",
            Field::Nested(r) => r.any_inconclusive(),
            Field::List(rs) => rs.iter().any(Report::any_inconclusive),
            _ => false,
        })
    }

    fn write_text(&self, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        out.push_str(&format!("{pad}[{}]\n", self.title));
        for (key, field) in &self.entries {
            match field {
                Field::Bool(b) => out.push_str(&format!("{pad}{key} = {b}\n")),
                Field::Trilean(t) => out.push_str(&format!("{pad}{key} = {}\n", t.as_str())),
                Field::Int(v) => out.push_str(&format!("{pad}{key} = {v}\n")),
                Field::Float(v) => out.push_str(&format!("{pad}{key} = {v:e}\n")),
                Field::Text(s) => out.push_str(&format!("{pad}{key} = {s}\n")),
                Field::Matrix(m) => {
                    out.push_str(&format!(
                        "{pad}{key} = matrix {} {}\n",
                        m.nrows(),
                        m.ncols()
                    ));
                    for i in 0..m.nrows() {
                        let row: Vec<String> =
                            (0..m.ncols()).map(|j| format_scalar(&m[(i, j)])).collect();
                        out.push_str(&format!("{pad}  {}\n", row.join(" ")));
                    }
                }
                Field::Nested(r) => r.write_text(out, indent + 1),
                Field::List(rs) => {
                    out.push_str(&format!("{pad}{key} = list of {}\n", rs.len()));
                    for r in rs {
                        r.write_text(out, indent + 1);
                    }
                }
            }
        }
    }

    /// Plain-text rendering.
    #[must_use]
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(&mut out, 0);
        out
    }

    fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("title".into(), Value::String(self.title.clone()));
        for (key, field) in &self.entries {
            let v = match field {
                Field::Bool(b) => Value::Bool(*b),
                Field::Trilean(t) => Value::String(t.as_str().into()),
                Field::Int(v) => Value::Number((*v).into()),
                Field::Float(v) => serde_json::Number::from_f64(*v)
                    .map_or_else(|| Value::String(format!("{v:e}")), Value::Number),
                Field::Text(s) => Value::String(s.clone()),
                Field::Matrix(m) => {
                    let rows: Vec<Value> = (0..m.nrows())
                        .map(|i| {
                            Value::Array(
                                (0..m.ncols())
                                    .map(|j| Value::String(format_scalar(&m[(i, j)])))
                                    .collect(),
                            )
                        })
                        .collect();
                    Value::Array(rows)
                }
                Field::Nested(r) => r.to_value(),
                Field::List(rs) => Value::Array(rs.iter().map(Report::to_value).collect()),
            };
            map.insert(key.clone(), v);
        }
        Value::Object(map)
    }

    /// JSON rendering (insertion order preserved).
    #[must_use]
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }
}
