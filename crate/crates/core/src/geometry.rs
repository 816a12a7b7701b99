//! Waveguide-mediated couplings of two two-point giant atoms.
//!
//! Every rate and shift is expressed in units of the transition frequency
//! `omega0`; the phase `theta = k0 * d` is the phase picked up between
//! neighbouring connection points, so a coordinate difference `dx` (in units
//! of the spacing `d`) contributes a phase `theta * |dx|`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Values this close to zero (relative to the bare rate) are trigonometric
/// round-off at exact phase multiples and are stored as exact zeros.
const ROUNDOFF_SNAP: f64 = 1e-14;

const SCAN_POINTS: usize = 10_000;
const ROOT_TOLERANCE: f64 = 1e-10;

/// Ordering of the four connection points along the waveguide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Braided,
    Separated,
    Nested,
    /// Arbitrary connection points, in units of the neighbour spacing.
    Custom {
        a: [f64; 2],
        b: [f64; 2],
    },
}

impl Topology {
    pub const BUILT_IN: [Topology; 3] = [Topology::Braided, Topology::Separated, Topology::Nested];

    /// Connection-point coordinates `(a, b)` in units of the spacing `d`.
    pub fn coordinates(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Topology::Braided => ([0.0, 2.0], [1.0, 3.0]),
            Topology::Separated => ([0.0, 1.0], [2.0, 3.0]),
            Topology::Nested => ([0.0, 3.0], [1.0, 2.0]),
            Topology::Custom { a, b } => (a, b),
        }
    }

    pub fn is_built_in(&self) -> bool {
        !matches!(self, Topology::Custom { .. })
    }

    /// The same connection points expressed as a `Custom` layout.
    pub fn to_custom(&self) -> Topology {
        let (a, b) = self.coordinates();
        Topology::Custom { a, b }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Topology::Braided => "braided",
            Topology::Separated => "separated",
            Topology::Nested => "nested",
            Topology::Custom { .. } => "custom",
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = self.coordinates();
        if a.iter().chain(b.iter()).all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(
                "topology",
                "connection-point coordinates must be finite",
            ))
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Custom { a, b } => {
                write!(f, "custom(a=[{}, {}], b=[{}, {}])", a[0], a[1], b[0], b[1])
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "braided" => Ok(Topology::Braided),
            "separated" => Ok(Topology::Separated),
            "nested" => Ok(Topology::Nested),
            other => Err(Error::invalid(
                "topology",
                format!("unknown topology `{other}` (expected braided, separated or nested)"),
            )),
        }
    }
}

/// Topology together with the accumulated phase and the bare per-point rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingLayout {
    pub topology: Topology,
    /// Phase `k0 * d` in radians.
    pub theta: f64,
    /// Bare relaxation rate at each connection point, units of `omega0`.
    pub gamma: f64,
}

impl CouplingLayout {
    pub fn new(topology: Topology, theta: f64, gamma: f64) -> Result<Self> {
        let layout = CouplingLayout { topology, theta, gamma };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite"));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must be finite and >= 0, got {}", self.gamma),
            ));
        }
        Ok(())
    }

    /// Master-equation parameters: closed forms for built-in topologies,
    /// positional sums otherwise.
    pub fn params(&self) -> Result<CouplingParams> {
        if self.topology.is_built_in() {
            closed_form_params(self)
        } else {
            positional_params(self)
        }
    }
}

/// Lamb shifts, exchange coupling and decay rates entering the master equation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingParams {
    pub delta_omega_a: f64,
    pub delta_omega_b: f64,
    pub g_ab: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_coll: f64,
}

impl CouplingParams {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.delta_omega_a,
            self.delta_omega_b,
            self.g_ab,
            self.gamma_a,
            self.gamma_b,
            self.gamma_coll,
        ]
    }

    pub fn max_abs_diff(&self, other: &CouplingParams) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the decay matrix `[[Γa, Γc], [Γc, Γb]]`.
    pub fn decay_matrix_min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.gamma_a + self.gamma_b);
        let half_diff = 0.5 * (self.gamma_a - self.gamma_b);
        mean - half_diff.hypot(self.gamma_coll)
    }

    pub fn is_zero(&self) -> bool {
        self.as_array().iter().all(|&v| v == 0.0)
    }

    fn snapped(mut self, gamma: f64) -> Self {
        let cutoff = ROUNDOFF_SNAP * gamma;
        for v in [
            &mut self.delta_omega_a,
            &mut self.delta_omega_b,
            &mut self.g_ab,
            &mut self.gamma_a,
            &mut self.gamma_b,
            &mut self.gamma_coll,
        ] {
            if v.abs() <= cutoff {
                *v = 0.0;
            }
        }
        self
    }
}

/// Closed-form parameters of the three built-in topologies.
pub fn closed_form_params(layout: &CouplingLayout) -> Result<CouplingParams> {
    layout.validate()?;
    let CouplingLayout {
        topology,
        theta: t,
        gamma: g,
    } = *layout;
    let p = match topology {
        Topology::Braided => CouplingParams {
            delta_omega_a: g * (2.0 * t).sin(),
            delta_omega_b: g * (2.0 * t).sin(),
            g_ab: g * (3.0 * t.sin() + (3.0 * t).sin()) / 2.0,
            gamma_a: 2.0 * g * (1.0 + (2.0 * t).cos()),
            gamma_b: 2.0 * g * (1.0 + (2.0 * t).cos()),
            gamma_coll: g * (3.0 * t.cos() + (3.0 * t).cos()),
        },
        Topology::Separated => CouplingParams {
            delta_omega_a: g * t.sin(),
            delta_omega_b: g * t.sin(),
            g_ab: g * (t.sin() + 2.0 * (2.0 * t).sin() + (3.0 * t).sin()) / 2.0,
            gamma_a: 2.0 * g * (1.0 + t.cos()),
            gamma_b: 2.0 * g * (1.0 + t.cos()),
            gamma_coll: g * (t.cos() + 2.0 * (2.0 * t).cos() + (3.0 * t).cos()),
        },
        Topology::Nested => CouplingParams {
            delta_omega_a: g * (3.0 * t).sin(),
            delta_omega_b: g * t.sin(),
            g_ab: g * (t.sin() + (2.0 * t).sin()),
            gamma_a: 2.0 * g * (1.0 + (3.0 * t).cos()),
            gamma_b: 2.0 * g * (1.0 + t.cos()),
            gamma_coll: 2.0 * g * (t.cos() + (2.0 * t).cos()),
        },
        Topology::Custom { .. } => return Err(Error::UnsupportedTopology(topology.to_string())),
    };
    Ok(p.snapped(g))
}

/// Parameters from the sums over all connection-point pairs.
///
/// Self terms run over the four ordered pairs of one atom's points, the
/// collective terms over the four cross pairs `(a_n, b_m)`.
pub fn positional_params(layout: &CouplingLayout) -> Result<CouplingParams> {
    layout.validate()?;
    let (xa, xb) = layout.topology.coordinates();
    let theta = layout.theta;
    let gamma = layout.gamma;

    let sum = |p: &[f64; 2], q: &[f64; 2], f: fn(f64) -> f64| -> f64 {
        let mut acc = 0.0;
        for x in p {
            for y in q {
                acc += f(theta * (x - y).abs());
            }
        }
        acc
    };

    Ok(CouplingParams {
        delta_omega_a: 0.5 * gamma * sum(&xa, &xa, f64::sin),
        delta_omega_b: 0.5 * gamma * sum(&xb, &xb, f64::sin),
        g_ab: 0.5 * gamma * sum(&xa, &xb, f64::sin),
        gamma_a: gamma * sum(&xa, &xa, f64::cos),
        gamma_b: gamma * sum(&xb, &xb, f64::cos),
        gamma_coll: gamma * sum(&xa, &xb, f64::cos),
    }
    .snapped(gamma))
}

/// Phases in `[0, 2π)` where every decay channel vanishes while the exchange
/// coupling survives.
///
/// Each atom's decay rate is `γ |Σ_n exp(iθ x_n)|²`, whose signed square root
/// for two points is `cos(θ Δx / 2)`. Sign changes of atom a's amplitude are
/// bracketed on a uniform grid and bisected; a root is kept when atom b and
/// the collective rate vanish there too and `g_ab` does not.
pub fn decoherence_free_phases(topology: Topology) -> Result<Vec<f64>> {
    if !topology.is_built_in() {
        return Err(Error::UnsupportedTopology(topology.to_string()));
    }
    let (xa, _) = topology.coordinates();
    let span_a = (xa[1] - xa[0]).abs();
    let amplitude = |theta: f64| (0.5 * theta * span_a).cos();

    let step = TAU / SCAN_POINTS as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut lo = 0.0;
    let mut f_lo = amplitude(lo);
    for i in 1..=SCAN_POINTS {
        let hi = step * i as f64;
        let f_hi = amplitude(hi);
        if f_lo == 0.0 {
            roots.push(lo);
        } else if f_lo * f_hi < 0.0 {
            roots.push(bisect(amplitude, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
    }

    // Probe with unit rate so the thresholds are relative.
    let mut phases = Vec::new();
    for root in roots {
        let theta = root.rem_euclid(TAU);
        let p = closed_form_params(&CouplingLayout::new(topology, theta, 1.0)?)?;
        let lossless = p.gamma_a.abs() < 1e-8 && p.gamma_b.abs() < 1e-8 && p.gamma_coll.abs() < 1e-8;
        if lossless && p.g_ab.abs() > 1e-6 && !phases.iter().any(|&q: &f64| (q - theta).abs() < 1e-8) {
            phases.push(theta);
        }
    }
    phases.sort_by(f64::total_cmp);
    Ok(phases)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    while hi - lo > ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    0.5 * (lo + hi)
}

/// Distance between neighbouring connection points, in wavelengths, that
/// realises the braided decoherence-free phase `θ = (n + 1/2)π`.
pub fn decoherence_free_spacing(n: u32) -> f64 {
    (1.0 + 2.0 * n as f64) / 4.0
}

/// Phase `θ = k0 d` for a spacing `d` given in wavelengths.
pub fn phase_for_spacing(spacing_in_wavelengths: f64) -> f64 {
    2.0 * PI * spacing_in_wavelengths
}
