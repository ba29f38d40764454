//! Flat TOML run configuration, command-line overrides and diagnostics.

use std::fmt;
use std::path::Path;

use clap::Args;
use pathspace::{ManifoldSpec, NuSpec};
use serde::Deserialize;

use crate::experiments::EXPERIMENTS;

/// Every key a config file may hold. All optional; defaults depend on the
/// experiment.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<String>,
    pub manifold: Option<String>,
    pub dt: Option<f64>,
    pub paths: Option<usize>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub tolerance: Option<f64>,
    pub plot: Option<bool>,
    pub horizons: Option<Vec<f64>>,
    pub time: Option<f64>,
    pub probes: Option<Vec<f64>>,
    pub thresholds: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub shift: Option<f64>,
    pub sites: Option<usize>,
    pub length: Option<f64>,
    pub duration: Option<f64>,
    pub nu: Option<String>,
    pub radius: Option<f64>,
    pub c1: Option<f64>,
    pub eps: Option<f64>,
    pub function: Option<String>,
    pub point: Option<Vec<f64>>,
    pub weight_site: Option<usize>,
    pub cutoff_m: Option<f64>,
    pub cutoff_horizon: Option<f64>,
    pub snapshots: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Text,
    Bool,
    /// Integer ≥ 0.
    Count,
    /// Integer ≥ 1.
    PositiveCount,
    Positive,
    Finite,
    PositiveList,
    FiniteList,
}

const FIELDS: &[(&str, Kind)] = &[
    ("experiment", Kind::Text),
    ("manifold", Kind::Text),
    ("dt", Kind::Positive),
    ("paths", Kind::PositiveCount),
    ("horizon", Kind::Positive),
    ("seed", Kind::Count),
    ("out", Kind::Text),
    ("tolerance", Kind::Positive),
    ("plot", Kind::Bool),
    ("horizons", Kind::PositiveList),
    ("time", Kind::Positive),
    ("probes", Kind::PositiveList),
    ("thresholds", Kind::PositiveList),
    ("times", Kind::FiniteList),
    ("shift", Kind::Finite),
    ("sites", Kind::PositiveCount),
    ("length", Kind::Positive),
    ("duration", Kind::Positive),
    ("nu", Kind::Text),
    ("radius", Kind::Positive),
    ("c1", Kind::Positive),
    ("eps", Kind::Positive),
    ("function", Kind::Text),
    ("point", Kind::FiniteList),
    ("weight_site", Kind::PositiveCount),
    ("cutoff_m", Kind::Positive),
    ("cutoff_horizon", Kind::Positive),
    ("snapshots", Kind::PositiveCount),
];

/// Keys a config file must hold to describe a run on its own.
const REQUIRED: &[&str] = &["experiment", "manifold", "dt", "paths", "seed"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn diag(field: impl Into<String>, message: impl Into<String>) -> Diagnostic {
    Diagnostic { field: field.into(), message: message.into() }
}

fn number(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn check_value(field: &str, kind: Kind, v: &toml::Value, out: &mut Vec<Diagnostic>) {
    match kind {
        Kind::Text if !v.is_str() => out.push(diag(field, "expected a string")),
        Kind::Bool if !v.is_bool() => out.push(diag(field, "expected true or false")),
        Kind::Count | Kind::PositiveCount => match v.as_integer() {
            None => out.push(diag(field, "expected an integer")),
            Some(i) if i < 0 => out.push(diag(field, format!("must be non-negative, got {i}"))),
            Some(0) if kind == Kind::PositiveCount => out.push(diag(field, "must be positive, got 0")),
            _ => {}
        },
        Kind::Positive | Kind::Finite => match number(v) {
            None => out.push(diag(field, "expected a number")),
            Some(x) if !x.is_finite() => out.push(diag(field, format!("must be finite, got {x}"))),
            Some(x) if kind == Kind::Positive && x <= 0.0 => out.push(diag(field, format!("must be positive, got {x}"))),
            _ => {}
        },
        Kind::PositiveList | Kind::FiniteList => match v.as_array() {
            None => out.push(diag(field, "expected an array of numbers")),
            Some(a) if a.is_empty() => out.push(diag(field, "must not be empty")),
            Some(a) => {
                let inner = if kind == Kind::PositiveList { Kind::Positive } else { Kind::Finite };
                for (i, x) in a.iter().enumerate() {
                    check_value(&format!("{field}[{i}]"), inner, x, out);
                }
            }
        },
        _ => {}
    }
}

/// Semantic checks shared by files and merged run configurations.
fn check_semantics(cfg: &ExperimentConfig, out: &mut Vec<Diagnostic>) {
    if let Some(e) = &cfg.experiment {
        if !EXPERIMENTS.iter().any(|(id, _)| id == e) {
            out.push(diag("experiment", format!("unknown experiment '{e}'")));
        }
    }
    if let Some(m) = &cfg.manifold {
        if let Err(e) = m.parse::<ManifoldSpec>() {
            out.push(diag("manifold", e.to_string()));
        }
    }
    if let Some(nu) = &cfg.nu {
        if !["uniform", "point", "truncated"].contains(&nu.as_str()) {
            out.push(diag("nu", format!("expected one of uniform, point, truncated, got '{nu}'")));
        }
    }
    if let Some(eps) = cfg.eps {
        if cfg.experiment.as_deref() == Some("poincare") && !(eps < 1.0) {
            out.push(diag("eps", format!("must lie in (0, 1), got {eps}")));
        }
    }
}

/// All problems with a config file, in field order. Never fails.
pub fn validate_text(text: &str) -> Vec<Diagnostic> {
    let table: toml::Table = match text.parse() {
        Ok(t) => t,
        Err(e) => return vec![diag("<file>", format!("not valid TOML: {}", e.message()))],
    };
    let mut out = Vec::new();
    for key in table.keys() {
        if !FIELDS.iter().any(|(k, _)| k == key) {
            out.push(diag(key.as_str(), "unknown field"));
        }
    }
    for (key, kind) in FIELDS {
        match table.get(*key) {
            Some(v) => check_value(key, *kind, v, &mut out),
            None if REQUIRED.contains(key) => out.push(diag(*key, "missing required field")),
            None => {}
        }
    }
    if out.is_empty() {
        match toml::from_str::<ExperimentConfig>(text) {
            Ok(cfg) => check_semantics(&cfg, &mut out),
            Err(e) => out.push(diag("<file>", e.message().to_string())),
        }
    }
    out
}

pub fn validate_file(path: &Path) -> Vec<Diagnostic> {
    match std::fs::read_to_string(path) {
        Ok(text) => validate_text(&text),
        Err(e) => vec![diag("<file>", format!("cannot read {}: {e}", path.display()))],
    }
}

/// Reads a config file for `run`. Missing keys are allowed here; the
/// returned diagnostics cover everything else.
pub fn load(path: &Path) -> Result<ExperimentConfig, Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![diag("<file>", format!("cannot read {}: {e}", path.display()))])?;
    let errors: Vec<Diagnostic> = validate_text(&text).into_iter().filter(|d| d.message != "missing required field").collect();
    if !errors.is_empty() {
        return Err(errors);
    }
    toml::from_str(&text).map_err(|e| vec![diag("<file>", e.message().to_string())])
}

/// Command-line overrides; each mirrors a config key.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    #[arg(long)]
    pub manifold: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Write plot.svg.
    #[arg(long)]
    pub plot: bool,
    /// Horizons T, comma separated.
    #[arg(long = "T", alias = "horizons", value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    /// Evolution time.
    #[arg(long = "t", alias = "time")]
    pub time: Option<f64>,
    /// Probe positions, comma separated.
    #[arg(long = "x", alias = "probes", value_delimiter = ',')]
    pub probes: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub times: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<f64>,
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub nu: Option<String>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<f64>>,
    #[arg(long)]
    pub weight_site: Option<usize>,
    #[arg(long)]
    pub cutoff_m: Option<f64>,
    #[arg(long)]
    pub cutoff_horizon: Option<f64>,
    #[arg(long)]
    pub snapshots: Option<usize>,
}

impl ExperimentConfig {
    /// Flags win over the file.
    pub fn apply(&mut self, o: Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f; } )* };
        }
        take!(
            manifold, dt, paths, horizon, tolerance, horizons, time, probes, thresholds, times, shift, sites, length,
            duration, nu, radius, c1, eps, function, point, weight_site, cutoff_m, cutoff_horizon, snapshots
        );
        if o.plot {
            self.plot = Some(true);
        }
    }

    /// Range checks on the merged configuration.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut pos = |field: &str, v: Option<f64>| {
            if let Some(x) = v {
                if !(x > 0.0) || !x.is_finite() {
                    out.push(diag(field, format!("must be positive, got {x}")));
                }
            }
        };
        pos("dt", self.dt);
        pos("horizon", self.horizon);
        pos("tolerance", self.tolerance);
        pos("time", self.time);
        pos("length", self.length);
        pos("duration", self.duration);
        pos("radius", self.radius);
        pos("c1", self.c1);
        pos("eps", self.eps);
        pos("cutoff_m", self.cutoff_m);
        pos("cutoff_horizon", self.cutoff_horizon);
        for (field, list) in [("horizons", &self.horizons), ("probes", &self.probes), ("thresholds", &self.thresholds)] {
            for (i, x) in list.iter().flatten().enumerate() {
                if !(*x > 0.0) || !x.is_finite() {
                    out.push(diag(format!("{field}[{i}]"), format!("must be positive, got {x}")));
                }
            }
        }
        for (field, v) in [("paths", self.paths), ("sites", self.sites), ("weight_site", self.weight_site), ("snapshots", self.snapshots)] {
            if v == Some(0) {
                out.push(diag(field, "must be positive, got 0"));
            }
        }
        check_semantics(self, &mut out);
        out
    }

    pub fn spec(&self, default: ManifoldSpec) -> anyhow::Result<ManifoldSpec> {
        match &self.manifold {
            Some(m) => Ok(m.parse()?),
            None => Ok(default),
        }
    }

    pub fn nu_spec(&self, spec: ManifoldSpec) -> anyhow::Result<NuSpec> {
        let default = if spec.is_compact() { "uniform" } else { "point" };
        Ok(match self.nu.as_deref().unwrap_or(default) {
            "uniform" => NuSpec::UniformOnCompact,
            "point" => NuSpec::PointMass(spec.origin()),
            "truncated" => NuSpec::TruncatedLebesgue { radius: self.radius.unwrap_or(3.0) },
            other => anyhow::bail!("unknown start measure '{other}'"),
        })
    }
}
