use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
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
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// A named table with its header.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Metadata written next to each CSV.
#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    table: &'a str,
    generated_unix: u64,
    config: &'a ExperimentConfig,
    results: &'a BTreeMap<String, toml::Value>,
}

/// Writes `<stem>.csv`, `<stem>.meta.toml` and `<stem>.gp` into the output directory.
pub fn emit(
    cfg: &ExperimentConfig,
    command: &str,
    stem: &str,
    table: &Table,
    results: &BTreeMap<String, toml::Value>,
    plot: Option<(usize, &[usize], bool)>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out)?;
    let base = format!("{}_{stem}", cfg.name);
    let csv_path = cfg.out.join(format!("{base}.csv"));
    table.write(&csv_path)?;
    let generated_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = Sidecar { command, table: &base, generated_unix, config: cfg, results };
    let meta_path = cfg.out.join(format!("{base}.meta.toml"));
    std::fs::write(&meta_path, toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))?)?;
    let mut files = vec![csv_path, meta_path];
    if let Some((x, ys, log)) = plot {
        let gp = plot_script(&base, &table.header, x, ys, log);
        let gp_path = cfg.out.join(format!("{base}.gp"));
        std::fs::write(&gp_path, gp)?;
        files.push(gp_path);
    }
    Ok(files)
}

/// A gnuplot script plotting the chosen columns (0-based) against column `x`.
pub fn plot_script(base: &str, header: &[String], x: usize, ys: &[usize], log: bool) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{base}.png'\n"));
    s.push_str(&format!("set xlabel '{}'\n", header[x]));
    if log {
        s.push_str("set logscale xy\n");
    }
    let parts: Vec<String> = ys
        .iter()
        .map(|&y| {
            let col = if log { format!("(abs(${}))", y + 1) } else { format!("{}", y + 1) };
            format!("'{base}.csv' using {}:{col} skip 1 with linespoints title '{}'", x + 1, header[y])
        })
        .collect();
    s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
    s
}

pub fn results() -> BTreeMap<String, toml::Value> {
    BTreeMap::new()
}

pub fn put(map: &mut BTreeMap<String, toml::Value>, key: &str, v: impl Into<toml::Value>) {
    map.insert(key.to_string(), v.into());
}
