//! Battery figures of merit computed from the reduced state of atom b.
//!
//! The battery Hamiltonian is `H_B = ω0 σ_b⁺σ_b⁻`, i.e. `diag(0, ω0)` in the
//! `{|g>, |e>}` basis.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::integrator::Snapshot;
use crate::liouville::{Atom, DensityMatrix, QubitOperator, C64};

/// Reduced density matrix of the battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    rho: QubitOperator,
}

impl BatteryState {
    pub fn new(rho: QubitOperator) -> Result<Self> {
        let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "battery state not Hermitian ({herm:e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvalidDensityMatrix(format!("battery trace {tr} is not 1")));
        }
        let state = BatteryState { rho };
        let (lo, hi) = state.eigenvalues();
        if lo < -1e-8 || hi > 1.0 + 1e-8 {
            return Err(Error::InvalidDensityMatrix(format!(
                "battery eigenvalues ({lo}, {hi}) outside [0, 1]"
            )));
        }
        Ok(state)
    }

    /// Diagonal state with excited population `p`.
    pub fn diagonal(p: f64) -> Result<Self> {
        Self::new(QubitOperator::new(
            C64::new(1.0 - p, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(p, 0.0),
        ))
    }

    /// State with population `p` and coherence `c = <e|ρ|g>`.
    pub fn with_coherence(p: f64, c: C64) -> Result<Self> {
        Self::new(QubitOperator::new(
            C64::new(1.0 - p, 0.0),
            c.conj(),
            c,
            C64::new(p, 0.0),
        ))
    }

    pub fn matrix(&self) -> &QubitOperator {
        &self.rho
    }

    /// Excited-state population.
    pub fn p(&self) -> f64 {
        self.rho[(1, 1)].re
    }

    /// Coherence `<e|ρ_B|g>`.
    pub fn coherence(&self) -> C64 {
        self.rho[(1, 0)]
    }

    /// Eigenvalues `(smallest, largest)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let h = (self.rho + self.rho.adjoint()).scale(0.5);
        let ev = SymmetricEigen::new(h).eigenvalues;
        if ev[0] <= ev[1] {
            (ev[0], ev[1])
        } else {
            (ev[1], ev[0])
        }
    }
}

/// `ρ_B = Tr_a ρ`.
pub fn partial_trace_battery(rho: &DensityMatrix) -> BatteryState {
    BatteryState {
        rho: rho.reduced(Atom::B),
    }
}

/// `E = Tr[ρ_B H_B]`.
pub fn energy(b: &BatteryState, omega0: f64) -> f64 {
    omega0 * b.p()
}

/// Ergotropy via the passive state: eigenvalues of `ρ_B` in descending order
/// are paired with the `H_B` levels in ascending order.
pub fn ergotropy(b: &BatteryState, omega0: f64) -> f64 {
    let h = (b.rho + b.rho.adjoint()).scale(0.5);
    let ev = SymmetricEigen::new(h).eigenvalues;
    let mut populations = [(ev[0], 0usize), (ev[1], 1usize)];
    populations.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let levels = [0.0, omega0];
    let passive: f64 = populations.iter().zip(levels.iter()).map(|((r, _), s)| r * s).sum();
    (energy(b, omega0) - passive).max(0.0)
}

/// Qubit closed form `ω0 (p − ½ + √((p − ½)² + |c|²))`.
pub fn ergotropy_closed_form(b: &BatteryState, omega0: f64) -> f64 {
    let x = b.p() - 0.5;
    omega0 * (x + x.hypot(b.coherence().norm()))
}

fn energy_std(b: &BatteryState, omega0: f64) -> f64 {
    let mean = energy(b, omega0);
    let second = omega0 * omega0 * b.p();
    (second - mean * mean).max(0.0).sqrt()
}

/// Change of the battery-energy standard deviation since `b_0`.
pub fn fluctuation(b_t: &BatteryState, b_0: &BatteryState, omega0: f64) -> f64 {
    energy_std(b_t, omega0) - energy_std(b_0, omega0)
}

/// `ergotropy / t`, defined as 0 at `t = 0`.
pub fn average_power(ergotropy_t: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::invalid("t", format!("charging time must be >= 0, got {t}")));
    }
    Ok(if t == 0.0 { 0.0 } else { ergotropy_t / t })
}

/// One row of battery metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub t: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub energy: f64,
    pub ergotropy: f64,
    pub sigma: f64,
    /// Ergotropy-based average power.
    pub power: f64,
    /// Stored energy per unit time, `E / t`.
    pub energy_power: f64,
    /// `Tr ρ²` of the full two-atom state.
    pub purity: f64,
}

pub fn record(t: f64, rho: &DensityMatrix, b_0: &BatteryState, omega0: f64) -> Result<MetricsRecord> {
    let b = partial_trace_battery(rho);
    let e = energy(&b, omega0);
    let w = ergotropy(&b, omega0);
    Ok(MetricsRecord {
        t,
        p_a: rho.population(Atom::A),
        p_b: rho.population(Atom::B),
        energy: e,
        ergotropy: w,
        sigma: fluctuation(&b, b_0, omega0),
        power: average_power(w, t)?,
        energy_power: average_power(e, t)?,
        purity: rho.purity(),
    })
}

/// Metrics for every snapshot, relative to the first one. Times are taken
/// from the start of the trajectory.
pub fn records(snapshots: &[Snapshot], omega0: f64) -> Result<Vec<MetricsRecord>> {
    let Some(first) = snapshots.first() else {
        return Ok(Vec::new());
    };
    let b_0 = partial_trace_battery(&first.rho);
    snapshots
        .iter()
        .map(|s| record(s.t - first.t, &s.rho, &b_0, omega0))
        .collect()
}
