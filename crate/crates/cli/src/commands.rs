use gaqb_core::metrics::MetricsRecord;
use gaqb_core::{
    evolve, run_sweep, run_transfer, ChiralProtocol, CouplingLayout, DensityMatrix, LiouvillianSpec, SweepConfig,
    TimeGrid,
};

use crate::config::RunConfig;
use crate::output::Table;
use crate::CliError;

const RECORD_COLUMNS: [&str; 9] = [
    "t",
    "p_a",
    "p_b",
    "E",
    "ergotropy",
    "sigma",
    "power",
    "energy_power",
    "purity",
];

fn record_row(r: &MetricsRecord) -> Vec<f64> {
    vec![
        r.t,
        r.p_a,
        r.p_b,
        r.energy,
        r.ergotropy,
        r.sigma,
        r.power,
        r.energy_power,
        r.purity,
    ]
}

/// Coupling parameters over the θ grid.
pub fn cmd_params(c: &RunConfig) -> Result<Table, CliError> {
    let mut table = Table::new([
        "theta",
        "g_ab",
        "Gamma_a",
        "Gamma_b",
        "Gamma_coll",
        "delta_a",
        "delta_b",
    ]);
    for theta in c.thetas() {
        let p = CouplingLayout::new(c.topology(), theta, c.gamma)?.params()?;
        table.push(vec![
            theta,
            p.g_ab,
            p.gamma_a,
            p.gamma_b,
            p.gamma_coll,
            p.delta_omega_a,
            p.delta_omega_b,
        ]);
    }
    Ok(table)
}

/// Single charging run from `|e_a g_b>`.
pub fn cmd_charge(c: &RunConfig) -> Result<Table, CliError> {
    let layout = CouplingLayout::new(c.topology(), c.theta, c.gamma)?;
    let spec = LiouvillianSpec::from_layout(&layout, c.omega0)?;
    let grid = TimeGrid::new(0.0, c.t_max_or_default(), c.dt, c.sample_stride)?;
    let traj = evolve(&spec, &DensityMatrix::charger_excited(), &grid)?;
    let mut table = Table::new(RECORD_COLUMNS);
    for r in &traj.metrics {
        table.push(record_row(r));
    }
    Ok(table)
}

pub fn sweep_config(c: &RunConfig) -> SweepConfig {
    SweepConfig {
        gamma: c.gamma,
        omega0: c.omega0,
        theta_min: c.theta_min,
        theta_max: c.theta_max,
        theta_steps: c.theta_steps,
        t_max: c.t_max_or_default(),
        dt: c.dt,
        sample_stride: c.sample_stride,
        metrics: c.metrics.clone(),
        threads: c.threads,
        ..SweepConfig::new(c.topology())
    }
}

/// Long-format θ × t grid with refined global maxima.
pub fn cmd_sweep(c: &RunConfig) -> Result<Table, CliError> {
    let config = sweep_config(c);
    let result = run_sweep(&config)?;
    let mut table = Table::new(
        ["theta".to_string(), "t".to_string()]
            .into_iter()
            .chain(config.metrics.iter().map(|m| m.name().to_string())),
    );
    for (theta, r) in result.rows() {
        let mut row = vec![theta, r.t];
        row.extend(config.metrics.iter().map(|m| m.value(r)));
        table.push(row);
    }
    for m in &result.summary.maxima {
        let name = m.metric.name();
        table.summary.extend([
            (format!("max_{name}"), m.value),
            (format!("max_{name}_theta"), m.theta),
            (format!("max_{name}_t"), m.t),
            (format!("grid_max_{name}"), m.grid_value),
            (format!("grid_max_{name}_t"), m.grid_t),
        ]);
    }
    Ok(table)
}

/// Cascaded pitch-catch transfer.
pub fn cmd_chiral(c: &RunConfig) -> Result<Table, CliError> {
    let protocol = ChiralProtocol::from_scaled(c.gamma_max, c.tau_scaled, c.direction)?.with_theta(c.theta)?;
    let grid = TimeGrid::new(0.0, c.t_max_or_default(), c.dt, c.sample_stride)?;
    let run = run_transfer(&protocol, &protocol.default_initial_state(), &grid, c.omega0)?;
    let mut table = Table::new(RECORD_COLUMNS.iter().copied().chain(["leakage"]));
    for (r, leak) in run.trajectory.metrics.iter().zip(run.leakage()) {
        let mut row = record_row(r);
        row.push(leak);
        table.push(row);
    }
    table.summary = vec![
        ("final_battery_energy".into(), run.final_battery_energy),
        ("final_charger_energy".into(), run.final_charger_energy),
        ("total_leakage".into(), run.total_leakage),
        ("efficiency".into(), run.efficiency),
    ];
    Ok(table)
}
