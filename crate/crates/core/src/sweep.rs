//! θ × t sweep grids with global maxima.
//!
//! Each θ is an independent charging run; runs are distributed over a rayon
//! pool and collected in θ order, so the result does not depend on the
//! number of threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CouplingLayout, Topology};
use crate::integrator::{evolve, propagate, TimeGrid};
use crate::liouville::{DensityMatrix, LiouvillianSpec};
use crate::metrics::{self, MetricsRecord};

const GOLDEN_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Energy,
    Ergotropy,
    Sigma,
    Power,
    EnergyPower,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Energy,
        Metric::Ergotropy,
        Metric::Sigma,
        Metric::Power,
        Metric::EnergyPower,
    ];

    /// Column name used in output files.
    pub fn name(self) -> &'static str {
        match self {
            Metric::Energy => "E",
            Metric::Ergotropy => "ergotropy",
            Metric::Sigma => "sigma",
            Metric::Power => "power",
            Metric::EnergyPower => "energy_power",
        }
    }

    pub fn value(self, r: &MetricsRecord) -> f64 {
        match self {
            Metric::Energy => r.energy,
            Metric::Ergotropy => r.ergotropy,
            Metric::Sigma => r.sigma,
            Metric::Power => r.power,
            Metric::EnergyPower => r.energy_power,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "E" | "energy" => Ok(Metric::Energy),
            "ergotropy" => Ok(Metric::Ergotropy),
            "sigma" | "fluctuation" => Ok(Metric::Sigma),
            "power" => Ok(Metric::Power),
            "energy_power" => Ok(Metric::EnergyPower),
            other => Err(Error::invalid("metrics", format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub topology: Topology,
    pub gamma: f64,
    pub omega0: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_steps: usize,
    pub t_max: f64,
    pub dt: f64,
    pub sample_stride: usize,
    pub metrics: Vec<Metric>,
    /// Worker count; `None` uses all available processors.
    pub threads: Option<usize>,
    pub initial_state: DensityMatrix,
}

impl SweepConfig {
    /// Defaults: γ = 0.1ω₀, θ ∈ [0, 2π] on 201 points, ω₀t ∈ [0, 100] with
    /// 400 samples.
    pub fn new(topology: Topology) -> Self {
        SweepConfig {
            topology,
            gamma: 0.1,
            omega0: 1.0,
            theta_min: 0.0,
            theta_max: 2.0 * std::f64::consts::PI,
            theta_steps: 201,
            t_max: 100.0,
            dt: 0.005,
            sample_stride: 50,
            metrics: vec![Metric::Energy, Metric::Ergotropy, Metric::Sigma, Metric::Power],
            threads: None,
            initial_state: DensityMatrix::charger_excited(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_steps < 2 {
            return Err(Error::invalid(
                "theta_steps",
                format!("need >= 2, got {}", self.theta_steps),
            ));
        }
        if !(self.theta_min.is_finite() && self.theta_max.is_finite() && self.theta_max > self.theta_min) {
            return Err(Error::invalid(
                "theta_max",
                format!(
                    "need finite theta_max > theta_min, got [{}, {}]",
                    self.theta_min, self.theta_max
                ),
            ));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::invalid("omega0", format!("must be > 0, got {}", self.omega0)));
        }
        if self.metrics.is_empty() {
            return Err(Error::invalid("metrics", "at least one metric is required"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads", "must be >= 1"));
        }
        CouplingLayout::new(self.topology, self.theta_min, self.gamma)?;
        self.grid()?;
        Ok(())
    }

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

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(0.0, self.t_max, self.dt, self.sample_stride)
    }

    fn spec(&self, theta: f64) -> Result<LiouvillianSpec> {
        LiouvillianSpec::from_layout(&CouplingLayout::new(self.topology, theta, self.gamma)?, self.omega0)
    }
}

/// All time samples at one θ.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub theta: f64,
    pub records: Vec<MetricsRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricMaximum {
    pub metric: Metric,
    /// Best of the grid value and the refined value.
    pub value: f64,
    pub theta: f64,
    pub t: f64,
    /// Largest value on the sampled grid.
    pub grid_value: f64,
    pub grid_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub maxima: Vec<MetricMaximum>,
}

impl SweepSummary {
    pub fn get(&self, metric: Metric) -> Option<&MetricMaximum> {
        self.maxima.iter().find(|m| m.metric == metric)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub summary: SweepSummary,
}

impl SweepResult {
    /// `(θ, record)` rows in θ-major, then t, order.
    pub fn rows(&self) -> impl Iterator<Item = (f64, &MetricsRecord)> + '_ {
        self.cells
            .iter()
            .flat_map(|c| c.records.iter().map(move |r| (c.theta, r)))
    }
}

fn run_cell(config: &SweepConfig, grid: &TimeGrid, theta: f64) -> Result<SweepCell> {
    let spec = config.spec(theta)?;
    let traj = evolve(&spec, &config.initial_state, grid).map_err(|e| Error::SweepCell {
        theta,
        source: Box::new(e),
    })?;
    Ok(SweepCell {
        theta,
        records: traj.metrics,
    })
}

/// Evaluate every θ, then locate and refine the maximum of each metric.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let grid = config.grid()?;
    let thetas = config.thetas();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::WorkerPool(e.to_string()))?;
    let cells = pool.install(|| {
        thetas
            .par_iter()
            .map(|&theta| run_cell(config, &grid, theta))
            .collect::<Vec<Result<SweepCell>>>()
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;

    let maxima = config
        .metrics
        .iter()
        .map(|&m| maximise(config, &grid, &cells, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        cells,
        summary: SweepSummary { maxima },
    })
}

fn maximise(config: &SweepConfig, grid: &TimeGrid, cells: &[SweepCell], metric: Metric) -> Result<MetricMaximum> {
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    for (i, cell) in cells.iter().enumerate() {
        for (k, r) in cell.records.iter().enumerate() {
            let v = metric.value(r);
            if v > best.0 {
                best = (v, i, k);
            }
        }
    }
    let (grid_value, i, k) = best;
    let theta = cells[i].theta;
    let grid_t = cells[i].records[k].t;
    let (t, refined) = refine_in_time(config, grid, theta, &cells[i].records, k, metric)?;
    let (value, t) = if refined > grid_value {
        (refined, t)
    } else {
        (grid_value, grid_t)
    };
    Ok(MetricMaximum {
        metric,
        value,
        theta,
        t,
        grid_value,
        grid_t,
    })
}

/// Golden-section search for the metric maximum between the samples
/// neighbouring index `k`.
fn refine_in_time(
    config: &SweepConfig,
    grid: &TimeGrid,
    theta: f64,
    records: &[MetricsRecord],
    k: usize,
    metric: Metric,
) -> Result<(f64, f64)> {
    let lo_idx = k.saturating_sub(1);
    let hi_idx = (k + 1).min(records.len() - 1);
    if lo_idx == hi_idx {
        return Ok((records[k].t, metric.value(&records[k])));
    }
    let spec = config.spec(theta)?;
    let traj = evolve(&spec, &config.initial_state, grid)?;
    let start = &traj.snapshots[lo_idx];
    let b_0 = metrics::partial_trace_battery(&config.initial_state);
    let eval = |t: f64| -> Result<f64> {
        let rho = propagate(&spec, &start.rho, start.t, t, config.dt)?;
        Ok(metric.value(&metrics::record(t, &rho, &b_0, config.omega0)?))
    };

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (records[lo_idx].t, records[hi_idx].t);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while b - a > GOLDEN_TOL {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = eval(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = eval(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
