//! Run configuration: `key = value` files with `#` comments, overridden by
//! command-line flags.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gaqb_core::{Direction, Metric, Topology};

use crate::CliError;

/// Every key accepted in a config file.
pub const KNOWN_KEYS: [&str; 17] = [
    "topology",
    "theta",
    "gamma",
    "omega0",
    "tmax",
    "dt",
    "sample_stride",
    "out",
    "format",
    "theta_min",
    "theta_max",
    "theta_steps",
    "metrics",
    "gamma_max",
    "tau_scaled",
    "direction",
    "threads",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Params,
    Charge,
    Sweep,
    Chiral,
}

impl Command {
    pub fn required_keys(self) -> &'static [&'static str] {
        match self {
            Command::Params | Command::Charge | Command::Sweep => &["topology"],
            Command::Chiral => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err("expected `csv` or `json`".into()),
        }
    }
}

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

/// Parse config text into entries, rejecting unknown and duplicate keys.
pub fn parse_config(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {line}: expected `key = value`, got `{content}`"
            )));
        };
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {line}: unknown key `{key}`")));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(CliError::Config(format!(
                "line {line}: duplicate key `{key}` (first set at {})",
                prev.origin
            )));
        }
        entries.push(Entry {
            key: key.to_string(),
            value: value.trim().to_string(),
            origin: Origin::Line(line),
        });
    }
    Ok(entries)
}

pub fn load_config(path: &Path) -> Result<Vec<Entry>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub topology: Option<Topology>,
    pub theta: f64,
    pub gamma: f64,
    pub omega0: f64,
    pub t_max: Option<f64>,
    pub dt: f64,
    pub sample_stride: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_steps: usize,
    pub metrics: Vec<Metric>,
    pub gamma_max: f64,
    pub tau_scaled: f64,
    pub direction: Direction,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            topology: None,
            theta: FRAC_PI_2,
            gamma: 0.1,
            omega0: 1.0,
            t_max: None,
            dt: 0.005,
            sample_stride: 50,
            out: None,
            format: Format::Csv,
            theta_min: 0.0,
            theta_max: 2.0 * PI,
            theta_steps: 201,
            metrics: vec![Metric::Energy, Metric::Ergotropy, Metric::Sigma, Metric::Power],
            gamma_max: 0.1,
            tau_scaled: 10.0,
            direction: Direction::RightToBattery,
            threads: None,
        }
    }

    /// Merge file entries and flag entries (flags win) into a validated config.
    pub fn resolve(command: Command, file: &[Entry], flags: &[Entry]) -> Result<Self, CliError> {
        let mut merged: BTreeMap<&str, &Entry> = BTreeMap::new();
        for e in file.iter().chain(flags.iter()) {
            merged.insert(e.key.as_str(), e);
        }
        let missing: Vec<&str> = command
            .required_keys()
            .iter()
            .copied()
            .filter(|k| !merged.contains_key(k))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Config(format!(
                "missing required keys: {}",
                missing.join(", ")
            )));
        }
        let mut c = RunConfig::defaults(command);
        for (key, e) in merged {
            c.set(key, e)?;
        }
        c.validate()?;
        Ok(c)
    }

    fn set(&mut self, key: &str, e: &Entry) -> Result<(), CliError> {
        let bad = |reason: String| {
            CliError::Config(format!(
                "{}: invalid value `{}` for `{key}`: {reason}",
                e.origin, e.value
            ))
        };
        let num = || parse_finite(&e.value).map_err(bad);
        let count = || e.value.parse::<usize>().map_err(|err| bad(err.to_string()));
        match key {
            "topology" => {
                self.topology = Some(match e.value.as_str() {
                    "braided" => Topology::Braided,
                    "separated" => Topology::Separated,
                    "nested" => Topology::Nested,
                    _ => return Err(bad("expected braided, separated or nested".into())),
                })
            }
            "theta" => self.theta = num()?,
            "gamma" => self.gamma = num()?,
            "omega0" => self.omega0 = num()?,
            "tmax" => self.t_max = Some(num()?),
            "dt" => self.dt = num()?,
            "sample_stride" => self.sample_stride = count()?,
            "out" => self.out = Some(PathBuf::from(&e.value)),
            "format" => self.format = e.value.parse().map_err(bad)?,
            "theta_min" => self.theta_min = num()?,
            "theta_max" => self.theta_max = num()?,
            "theta_steps" => self.theta_steps = count()?,
            "metrics" => {
                self.metrics = e
                    .value
                    .split(',')
                    .map(|m| m.parse::<Metric>().map_err(|err| bad(err.to_string())))
                    .collect::<Result<_, _>>()?
            }
            "gamma_max" => self.gamma_max = num()?,
            "tau_scaled" => self.tau_scaled = num()?,
            "direction" => {
                self.direction = match e.value.as_str() {
                    "right" => Direction::RightToBattery,
                    "left" => Direction::LeftToCharger,
                    _ => return Err(bad("expected right or left".into())),
                }
            }
            "threads" => self.threads = Some(count()?),
            _ => return Err(CliError::Config(format!("{}: unknown key `{key}`", e.origin))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("gamma", self.gamma),
            ("omega0", self.omega0),
            ("dt", self.dt),
            ("gamma_max", self.gamma_max),
            ("tau_scaled", self.tau_scaled),
        ];
        for (key, v) in positive {
            if v <= 0.0 {
                return Err(CliError::Config(format!("`{key}` must be > 0, got {v}")));
            }
        }
        if let Some(t) = self.t_max {
            if t <= 0.0 {
                return Err(CliError::Config(format!("`tmax` must be > 0, got {t}")));
            }
        }
        if self.sample_stride == 0 {
            return Err(CliError::Config("`sample_stride` must be >= 1".into()));
        }
        if self.theta_steps < 2 {
            return Err(CliError::Config(format!(
                "`theta_steps` must be >= 2, got {}",
                self.theta_steps
            )));
        }
        if self.theta_max <= self.theta_min {
            return Err(CliError::Config(format!(
                "`theta_max` ({}) must exceed `theta_min` ({})",
                self.theta_max, self.theta_min
            )));
        }
        if self.metrics.is_empty() {
            return Err(CliError::Config("`metrics` must list at least one metric".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("`threads` must be >= 1".into()));
        }
        Ok(())
    }

    /// Charging window; the chiral default is three protocol times.
    pub fn t_max_or_default(&self) -> f64 {
        self.t_max.unwrap_or(match self.command {
            Command::Chiral => 3.0 * self.tau_scaled / self.gamma_max,
            _ => 100.0,
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology.expect("topology is required for this command")
    }

    /// θ values `theta_min + i·h`, ending exactly at `theta_max`.
    pub fn thetas(&self) -> Vec<f64> {
        let h = (self.theta_max - self.theta_min) / (self.theta_steps - 1) as f64;
        (0..self.theta_steps)
            .map(|i| {
                if i + 1 == self.theta_steps {
                    self.theta_max
                } else {
                    self.theta_min + i as f64 * h
                }
            })
            .collect()
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| "expected a number".to_string())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}
