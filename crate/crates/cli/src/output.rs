//! Result tables and their CSV / JSON encodings.
//!
//! A CSV file starts with `#`-prefixed provenance lines (`# key = value`),
//! followed by a header row and one row per grid point. The JSON encoding is
//! an object `{"experiment", "config", "rows"}` whose `rows` array mirrors the
//! CSV rows as objects keyed by column name. Floats are written in Rust's
//! shortest round-trip form, so identical results give identical bytes.

use std::io::{self, Write};

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_nan() => String::new(),
            Cell::Float(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }

    fn summary(&self) -> String {
        match self {
            Cell::Float(v) if v.is_nan() => "-".into(),
            Cell::Float(v) if *v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) => format!("{v:.4e}"),
            Cell::Float(v) => format!("{v:.5}"),
            other => other.csv(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn write_csv<W: Write>(&self, mut w: W, provenance: &[(&str, String)]) -> io::Result<()> {
        writeln!(w, "# purf-lab")?;
        for (k, v) in provenance {
            writeln!(w, "# {k} = {v}")?;
        }
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.columns)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(Cell::csv))?;
        }
        csv.flush()
    }

    pub fn write_json<W: Write>(&self, mut w: W, experiment: &str, provenance: &[(&str, String)]) -> io::Result<()> {
        let config: Map<String, Value> = provenance
            .iter()
            .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .map(|c| c.to_string())
                        .zip(row.iter().map(Cell::json))
                        .collect(),
                )
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("experiment".into(), Value::String(experiment.to_string()));
        doc.insert("config".into(), Value::Object(config));
        doc.insert("rows".into(), Value::Array(rows));
        serde_json::to_writer_pretty(&mut w, &Value::Object(doc))?;
        writeln!(w)
    }

    /// Fixed-width text rendering of the selected columns.
    pub fn render_summary(&self, columns: &[&str]) -> String {
        let idx: Vec<usize> = columns.iter().filter_map(|c| self.column(c)).collect();
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i].summary()).collect())
            .collect();
        let widths: Vec<usize> = idx
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([self.columns[i].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |vals: Vec<&str>| {
            vals.iter()
                .zip(&widths)
                .map(|(v, w)| format!("{v:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                + "\n"
        };
        out.push_str(&line(idx.iter().map(|&i| self.columns[i]).collect()));
        for r in &cells {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["k", "mean", "ok", "model"]);
        t.push(vec![3usize.into(), 0.1.into(), true.into(), "sine-uniform".into()]);
        t.push(vec![4usize.into(), f64::NAN.into(), false.into(), "x".into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf, &[("seed", "42".into())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# purf-lab\n# seed = 42\nk,mean,ok,model\n3,0.1,true,sine-uniform\n4,,false,x\n"
        );
    }

    #[test]
    fn json_rows_mirror_csv() {
        let mut buf = Vec::new();
        sample().write_json(&mut buf, "m12", &[("seed", "42".into())]).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["experiment"], "m12");
        assert_eq!(v["config"]["seed"], "42");
        assert_eq!(v["rows"][0]["k"], 3);
        assert_eq!(v["rows"][0]["mean"], 0.1);
        assert!(v["rows"][1]["mean"].is_null());
        let keys: Vec<&String> = v["rows"][0].as_object().unwrap().keys().collect();
        assert_eq!(keys, vec!["k", "mean", "ok", "model"]);
    }

    #[test]
    fn summary_is_aligned() {
        let s = sample().render_summary(&["k", "mean"]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
    }
}
