//! Result tables, checks and the files written for each run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::svg::Plot;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
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

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Text(String::new()), Cell::Float)
    }
}

impl Cell {
    /// Floats keep 17 significant digits.
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Self { file: file.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One verdict-bearing check. `z` is reported when the check is a z-test.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub z: Option<f64>,
    pub value: f64,
    pub pass: bool,
    pub mandatory: bool,
}

impl Check {
    pub fn z(name: impl Into<String>, z: f64, limit: f64) -> Self {
        Self { name: name.into(), z: Some(z), value: z, pass: z.abs() <= limit, mandatory: true }
    }

    pub fn value(name: impl Into<String>, value: f64, pass: bool) -> Self {
        Self { name: name.into(), z: None, value, pass, mandatory: true }
    }

    pub fn informational(mut self) -> Self {
        self.mandatory = false;
        self
    }
}

/// What an experiment produces. The first table is `results.csv`.
#[derive(Clone, Debug)]
pub struct Report {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub plot: Option<Plot>,
    /// Experiment-specific plain values for the summary.
    pub notes: Vec<(String, String)>,
}

impl Report {
    pub fn new(results: Table) -> Self {
        Self { tables: vec![results], checks: Vec::new(), plot: None, notes: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass || !c.mandatory)
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        json_string(&v.to_string())
    }
}

pub struct RunInfo<'a> {
    pub experiment: &'a str,
    pub seed: u64,
    pub wall_time: f64,
}

/// Writes the summary as a flat JSON object.
pub fn write_summary(
    dir: &Path,
    info: &RunInfo,
    verdict: &str,
    report: Option<&Report>,
    artifacts: &[PathBuf],
    error: Option<&str>,
) -> anyhow::Result<PathBuf> {
    let mut s = String::from("{\n");
    let _ = writeln!(s, "  \"experiment\": {},", json_string(info.experiment));
    let _ = writeln!(s, "  \"verdict\": {},", json_string(verdict));
    let _ = writeln!(s, "  \"seed\": {},", info.seed);
    let _ = writeln!(s, "  \"wall_time_s\": {:.3},", info.wall_time);
    if let Some(e) = error {
        let _ = writeln!(s, "  \"error\": {},", json_string(e));
    }
    if let Some(r) = report {
        for (k, v) in &r.notes {
            let _ = writeln!(s, "  {}: {},", json_string(k), json_string(v));
        }
        s.push_str("  \"checks\": [\n");
        for (i, c) in r.checks.iter().enumerate() {
            let _ = write!(
                s,
                "    {{\"name\": {}, \"value\": {}, \"z\": {}, \"pass\": {}, \"mandatory\": {}}}",
                json_string(&c.name),
                json_number(c.value),
                c.z.map_or("null".into(), json_number),
                c.pass,
                c.mandatory
            );
            s.push_str(if i + 1 < r.checks.len() { ",\n" } else { "\n" });
        }
        s.push_str("  ],\n");
    }
    let files: Vec<String> = artifacts.iter().map(|p| json_string(&p.display().to_string())).collect();
    let _ = writeln!(s, "  \"artifacts\": [{}]", files.join(", "));
    s.push_str("}\n");
    let path = dir.join("summary.txt");
    std::fs::write(&path, s).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}
