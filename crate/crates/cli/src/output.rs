use std::fmt::Write as _;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::{Format, RunConfig};
use crate::Failure;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Rectangular table with unique column names plus free-form metadata.
#[derive(Clone, Debug)]
pub struct SweepResult {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn new(columns: &[&str]) -> Self {
        for (i, c) in columns.iter().enumerate() {
            assert!(!columns[..i].contains(c), "duplicate column {c}");
        }
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "ragged row");
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    /// Config snapshot and version; the timestamp is added at emission.
    pub fn with_config(mut self, cfg: &RunConfig) -> Self {
        self.meta("code_version", env!("CARGO_PKG_VERSION"));
        self.meta("seed", cfg.seed);
        self.meta("config", serde_json::to_string(cfg).expect("config serializes"));
        self
    }

    /// Header and rows only, LF-terminated.
    pub fn csv_body(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `# key: value` metadata lines followed by the body.
    pub fn to_csv(&self, timestamp: u64) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        writeln!(out, "# timestamp: {timestamp}").unwrap();
        out + &self.csv_body()
    }

    /// Numbers are written as decimal strings.
    pub fn to_json(&self, timestamp: u64) -> String {
        let mut meta = serde_json::Map::new();
        for (k, v) in &self.metadata {
            meta.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        meta.insert("timestamp".into(), serde_json::Value::String(timestamp.to_string()));
        let rows: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let doc = serde_json::json!({
            "columns": self.columns,
            "rows": rows,
            "metadata": meta,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json serializes");
        s.push('\n');
        s
    }

    pub fn emit(&self, cfg: &RunConfig) -> Result<(), Failure> {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let text = match cfg.format {
            Format::Csv => self.to_csv(ts),
            Format::Json => self.to_json(ts),
        };
        match &cfg.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Usage(format!("cannot write stdout: {e}"))),
        }
    }
}
