//! Row-oriented output: CSV (stable headers, LF, full-precision
//! decimals) and JSON (`meta` envelope plus a `data` array).

use std::io::{self, Write};

use serde_json::{json, Map, Value};

/// One table cell. Floats are emitted with 17 significant digits in
/// CSV so every value round-trips.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Str(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Str(v) => v.clone(),
            Cell::Bool(v) => v.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Str(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Empty => Value::Null,
        }
    }
}

/// An ordered table with a fixed column schema.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn data_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut object = Map::new();
                    for (name, cell) in self.columns.iter().zip(row) {
                        object.insert((*name).to_string(), cell.json());
                    }
                    Value::Object(object)
                })
                .collect(),
        )
    }

    pub fn write_json<W: Write>(&self, meta: Value, mut w: W) -> io::Result<()> {
        let doc = json!({ "meta": meta, "data": self.data_json() });
        writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)
    }
}

/// The `meta` envelope: version, command, effective seed, config echo.
pub fn meta(command: &str, seed: u64, config: &impl serde::Serialize) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config": serde_json::to_value(config).expect("config serializes"),
    })
}
