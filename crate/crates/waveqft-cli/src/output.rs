use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits, which round-trips every f64.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(fmt_float(*v)),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect()))
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("table serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Where the primary artifact goes.
#[derive(Debug, Clone, PartialEq)]
pub enum Sink {
    Stdout(Format),
    File(PathBuf, Format),
}

impl Sink {
    pub fn resolve(out: &str, format: Option<&str>) -> Result<Self> {
        let explicit = match format {
            None => None,
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(other) => return Err(CliError::config("format", format!("unknown format '{other}' (csv|json)"))),
        };
        Ok(match out {
            "-" | "csv" => Sink::Stdout(explicit.unwrap_or(Format::Csv)),
            "json" => Sink::Stdout(explicit.unwrap_or(Format::Json)),
            path => {
                let by_ext = if path.ends_with(".json") { Format::Json } else { Format::Csv };
                Sink::File(PathBuf::from(path), explicit.unwrap_or(by_ext))
            }
        })
    }

    pub fn format(&self) -> Format {
        match self {
            Sink::Stdout(f) | Sink::File(_, f) => *f,
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            Sink::File(p, _) => Some(p),
            Sink::Stdout(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<OutputRecord> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(OutputRecord { path: path.display().to_string(), bytes: bytes.len(), sha256: sha256_hex(bytes) })
}

/// Writes a table to the sink.
pub fn emit_table(table: &Table, sink: &Sink) -> Result<OutputRecord> {
    let text = match sink.format() {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match sink {
        Sink::File(p, _) => write_file(p, text.as_bytes()),
        Sink::Stdout(_) => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| CliError::Io(format!("stdout: {e}")))?;
            Ok(OutputRecord { path: "-".into(), bytes: text.len(), sha256: sha256_hex(text.as_bytes()) })
        }
    }
}

/// Row-major little-endian f64 payload of stacked equal-shape blocks, plus `<path>.json`.
pub fn emit_matrices(path: &Path, blocks: &[(&str, &DMatrix<f64>)], lattice: Value) -> Result<Vec<OutputRecord>> {
    let (rows, cols) = blocks.first().map(|(_, m)| m.shape()).unwrap_or((0, 0));
    if blocks.iter().any(|(_, m)| m.shape() != (rows, cols)) {
        return Err(CliError::Io("covariance blocks differ in shape".into()));
    }
    let mut payload = Vec::with_capacity(blocks.len() * rows * cols * 8);
    for (_, m) in blocks {
        for i in 0..rows {
            for j in 0..cols {
                payload.extend_from_slice(&m[(i, j)].to_le_bytes());
            }
        }
    }
    let shape: Vec<usize> = if blocks.len() == 1 { vec![rows, cols] } else { vec![blocks.len(), rows, cols] };
    let bin = write_file(path, &payload)?;
    let header = json!({
        "file": path.file_name().map(|f| f.to_string_lossy().into_owned()),
        "dtype": "f64",
        "endianness": "little",
        "order": "row-major",
        "shape": shape,
        "blocks": blocks.iter().map(|(name, _)| *name).collect::<Vec<_>>(),
        "sha256": bin.sha256,
        "lattice": lattice,
    });
    let sidecar = PathBuf::from(format!("{}.json", path.display()));
    let mut text = serde_json::to_string_pretty(&header).expect("header serializes");
    text.push('\n');
    let side = write_file(&sidecar, text.as_bytes())?;
    Ok(vec![bin, side])
}

#[derive(Debug, Clone, Serialize)]
pub struct PointTiming {
    pub index: usize,
    pub wall_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Map<String, Value>,
    pub threads: usize,
    pub points: Vec<PointTiming>,
    pub total_wall_s: f64,
    pub outputs: Vec<OutputRecord>,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(path, text.as_bytes()).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1usize.into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn sinks() {
        assert_eq!(Sink::resolve("csv", None).unwrap(), Sink::Stdout(Format::Csv));
        assert_eq!(Sink::resolve("r.json", None).unwrap().format(), Format::Json);
        assert_eq!(Sink::resolve("r.dat", Some("json")).unwrap().format(), Format::Json);
        assert!(Sink::resolve("r.csv", Some("xml")).is_err());
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
