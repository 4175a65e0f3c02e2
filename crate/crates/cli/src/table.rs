//! Long-format result tables and their serialisations.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // 17 significant digits round-trip every f64
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::Number((*v).into()),
            Cell::Float(v) => Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or(Value::Null),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
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
        Cell::Int(v as u64)
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

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// How a table should be drawn.
#[derive(Debug, Clone, Copy)]
pub struct PlotHint {
    pub x: &'static str,
    pub y: &'static [&'static str],
    pub group: &'static [&'static str],
    pub log_y: bool,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: Option<PlotHint>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            plot: None,
        }
    }

    pub fn with_plot(mut self, hint: PlotHint) -> Self {
        self.plot = Some(hint);
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, command: &str) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    obj.insert((*c).to_string(), v.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("command".into(), Value::String(command.into()));
        doc.insert(
            "columns".into(),
            Value::Array(
                self.columns
                    .iter()
                    .map(|c| Value::String((*c).into()))
                    .collect(),
            ),
        );
        doc.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc))
            .expect("JSON values are always serialisable");
        s.push('\n');
        s
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// A gnuplot script drawing `data_path` (a CSV written from this table).
    pub fn gnuplot_script(&self, data_path: &str, title: &str) -> Option<String> {
        let hint = self.plot?;
        let x = self.column(hint.x)? + 1;
        let groups: Vec<usize> = hint.group.iter().filter_map(|g| self.column(g)).collect();

        let mut seen = BTreeSet::new();
        let mut keys: Vec<Vec<String>> = Vec::new();
        for row in &self.rows {
            let key: Vec<String> = groups.iter().map(|&g| row[g].csv()).collect();
            if seen.insert(key.clone()) {
                keys.push(key);
            }
        }

        let mut s = String::new();
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set title '{title}'");
        let _ = writeln!(s, "set xlabel '{}'", hint.x);
        let _ = writeln!(s, "set key outside right");
        if hint.log_y {
            let _ = writeln!(s, "set logscale y");
        }
        let mut clauses = Vec::new();
        for y in hint.y {
            let Some(yc) = self.column(y) else { continue };
            for key in &keys {
                let cond: Vec<String> = groups
                    .iter()
                    .zip(key)
                    .map(|(&g, v)| format!("strcol({}) eq \"{v}\"", g + 1))
                    .collect();
                let label: Vec<String> = hint
                    .group
                    .iter()
                    .zip(key)
                    .map(|(g, v)| format!("{g}={v}"))
                    .chain(std::iter::once(y.to_string()))
                    .collect();
                let using = if cond.is_empty() {
                    format!("{x}:{}", yc + 1)
                } else {
                    format!("({} ? ${x} : 1/0):{}", cond.join(" && "), yc + 1)
                };
                clauses.push(format!(
                    "'{data_path}' using {using} with linespoints title \"{}\"",
                    label.join(" ")
                ));
            }
        }
        let _ = writeln!(s, "plot {}", clauses.join(", \\\n     "));
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["rule", "n", "wce", "flag"]).with_plot(PlotHint {
            x: "n",
            y: &["wce"],
            group: &["rule"],
            log_y: true,
        });
        t.push(vec!["gh".into(), 1usize.into(), 0.5.into(), true.into()]);
        t.push(vec!["kq".into(), 1usize.into(), Cell::Empty, false.into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        assert_eq!(
            csv,
            "rule,n,wce,flag\ngh,1,5.0000000000000000e-1,true\nkq,1,,false\n"
        );
        let v: f64 = "1.0000000000000002e0".parse().unwrap();
        assert_eq!(
            Cell::Float(v).csv().parse::<f64>().unwrap().to_bits(),
            v.to_bits()
        );
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_str(&sample().to_json("wce-sweep")).unwrap();
        assert_eq!(v["command"], "wce-sweep");
        assert_eq!(v["rows"][0]["wce"], 0.5);
        assert!(v["rows"][1]["wce"].is_null());
        assert_eq!(Cell::Float(f64::NAN).json(), Value::Null);
    }

    #[test]
    fn plot_script() {
        let s = sample().gnuplot_script("out.csv", "t").unwrap();
        assert!(s.contains("set logscale y"));
        assert!(s.contains("strcol(1) eq \"gh\""));
        assert!(s.contains("strcol(1) eq \"kq\""));
        assert!(Table::new(&["a"]).gnuplot_script("x", "t").is_none());
    }
}
