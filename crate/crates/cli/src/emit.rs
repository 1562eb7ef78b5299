//! Report serialization: JSON with 17 significant digits and CSV tables.

use std::cell::RefCell;
use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::rc::Rc;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}` (expected json or csv)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug)]
pub enum EmitError {
    NonFinite { field: String },
    Io { path: String, source: io::Error },
    Csv(String),
    NotTabular(String),
}

impl fmt::Display for EmitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmitError::NonFinite { field } => {
                write!(f, "refusing to serialize a NaN or infinite value in field `{field}`")
            }
            EmitError::Io { path, source } => write!(f, "cannot write {path}: {source}"),
            EmitError::Csv(m) => write!(f, "csv: {m}"),
            EmitError::NotTabular(m) => write!(f, "report has no CSV form: {m}"),
        }
    }
}

impl std::error::Error for EmitError {}

/// Floats with 17 significant digits, which round-trip every f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON whose floats carry 17 significant digits.
///
/// serde_json turns non-finite floats into `null`. Reports contain no optional fields,
/// so any null is a NaN or infinity and is refused; the last key seen names the field.
struct Json17 {
    pretty: PrettyFormatter<'static>,
    in_key: bool,
    key: Rc<RefCell<String>>,
}

fn nonfinite() -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, "non-finite float")
}

impl Formatter for Json17 {
    fn write_null<W: ?Sized + Write>(&mut self, _: &mut W) -> io::Result<()> {
        Err(nonfinite())
    }

    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn write_string_fragment<W: ?Sized + Write>(&mut self, w: &mut W, fragment: &str) -> io::Result<()> {
        if self.in_key {
            self.key.borrow_mut().push_str(fragment);
        }
        w.write_all(fragment.as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.in_key = true;
        self.key.borrow_mut().clear();
        self.pretty.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.in_key = false;
        self.pretty.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

/// JSON text of `value`, fields in declaration order, trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String, EmitError> {
    let mut buf = Vec::new();
    let key = Rc::new(RefCell::new(String::new()));
    let fmt = Json17 {
        pretty: PrettyFormatter::with_indent(b"  "),
        in_key: false,
        key: key.clone(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    if value.serialize(&mut ser).is_err() {
        let key = key.borrow();
        let field = if key.is_empty() { "<top level>".to_string() } else { key.clone() };
        return Err(EmitError::NonFinite { field });
    }
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes utf-8"))
}

/// A CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Flattens a JSON value: an object of scalars becomes one row, an array of such
    /// objects one row each. Nested objects get dotted column names.
    pub fn from_json(value: &serde_json::Value) -> Result<Table, EmitError> {
        use serde_json::Value;
        fn flatten(prefix: &str, v: &Value, cols: &mut Vec<(String, Cell)>) -> Result<(), EmitError> {
            match v {
                Value::Object(map) => {
                    for (k, x) in map {
                        let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                        flatten(&name, x, cols)?;
                    }
                }
                Value::Number(n) => {
                    let cell = if let Some(i) = n.as_i64() {
                        Cell::Int(i)
                    } else if let Some(u) = n.as_u64() {
                        Cell::Text(u.to_string())
                    } else {
                        Cell::Float(n.as_f64().unwrap_or(f64::NAN))
                    };
                    cols.push((prefix.to_string(), cell));
                }
                Value::String(s) => cols.push((prefix.to_string(), Cell::Text(s.clone()))),
                Value::Bool(b) => cols.push((prefix.to_string(), Cell::from(*b))),
                Value::Null => {
                    return Err(EmitError::NonFinite {
                        field: prefix.to_string(),
                    })
                }
                Value::Array(_) => return Err(EmitError::NotTabular(format!("nested array in `{prefix}`"))),
            }
            Ok(())
        }
        let items: Vec<&Value> = match value {
            Value::Array(xs) => xs.iter().collect(),
            other => vec![other],
        };
        let mut table = Table::default();
        for (i, item) in items.iter().enumerate() {
            let mut cols = Vec::new();
            flatten("", item, &mut cols)?;
            let names: Vec<String> = cols.iter().map(|(n, _)| n.clone()).collect();
            if i == 0 {
                table.header = names;
            } else if names != table.header {
                return Err(EmitError::NotTabular("rows with different fields".into()));
            }
            table.rows.push(cols.into_iter().map(|(_, c)| c).collect());
        }
        Ok(table)
    }
}

fn cell_text(cell: &Cell, column: &str) -> Result<String, EmitError> {
    Ok(match cell {
        Cell::Float(x) if !x.is_finite() => {
            return Err(EmitError::NonFinite {
                field: column.to_string(),
            })
        }
        Cell::Float(x) => fmt_f64(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    })
}

/// RFC-4180 CSV with a header row.
pub fn to_csv(table: &Table) -> Result<String, EmitError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    let err = |e: csv::Error| EmitError::Csv(e.to_string());
    w.write_record(&table.header).map_err(err)?;
    for row in &table.rows {
        let fields = row
            .iter()
            .zip(&table.header)
            .map(|(c, h)| cell_text(c, h))
            .collect::<Result<Vec<_>, _>>()?;
        w.write_record(&fields).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| EmitError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// Writes `text` to `path`, or to stdout when there is no path.
pub fn write_out(text: &str, path: Option<&Path>) -> Result<(), EmitError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| EmitError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| EmitError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        b: f64,
        a: u64,
        list: Vec<f64>,
    }

    #[test]
    fn floats_have_17_digits_and_keys_keep_order() {
        let s = to_json(&Sample { b: 0.1, a: 3, list: vec![] }).unwrap();
        assert!(s.contains("\"b\": 1.0000000000000001e-1"), "{s}");
        assert!(s.find("\"b\"").unwrap() < s.find("\"a\"").unwrap());
        assert!(s.contains("\"list\": []"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn nan_is_refused_with_field_name() {
        let e = to_json(&Sample { b: 1.0, a: 1, list: vec![1.0, f64::NAN] }).unwrap_err();
        assert!(matches!(&e, EmitError::NonFinite { field } if field == "list"), "{e}");
        let mut t = Table::new(&["x"]);
        t.push(vec![Cell::Float(f64::INFINITY)]);
        assert!(matches!(to_csv(&t), Err(EmitError::NonFinite { .. })));
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(&["name", "x"]);
        t.push(vec![Cell::from("a,b \"c\""), Cell::Float(2.5)]);
        let s = to_csv(&t).unwrap();
        assert_eq!(s, "name,x\r\n\"a,b \"\"c\"\"\",2.5000000000000000e0\r\n");
    }

    #[test]
    fn flatten_json_rows() {
        let v = serde_json::json!([{"q": 5, "inner": {"x": 1.5}}, {"q": 7, "inner": {"x": 2.0}}]);
        let t = Table::from_json(&v).unwrap();
        assert_eq!(t.header, vec!["q", "inner.x"]);
        assert_eq!(t.rows[1], vec![Cell::Int(7), Cell::Float(2.0)]);
        assert!(Table::from_json(&serde_json::json!({"a": [1]})).is_err());
    }
}
