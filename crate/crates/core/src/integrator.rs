//! Explicit Runge–Kutta time stepping of the master equation.
//!
//! The default stepper is classical RK4 on a fixed grid. An embedded
//! Dormand–Prince 5(4) pair is available for adaptive stepping. After every
//! accepted step the state is replaced by its Hermitian part and, if the
//! trace has drifted by more than `1e-12`, renormalised. Generator
//! breakpoints (kinks in time-dependent rates) always fall on a step
//! boundary.

use crate::error::{Error, Result};
use crate::liouville::{DensityMatrix, LiouvillianSpec, Operator};
use crate::metrics::{self, MetricsRecord};

const RENORMALIZE_ABOVE: f64 = 1e-12;
const POSITIVITY_FLOOR: f64 = -1e-6;
const MAX_ADAPTIVE_STEPS: usize = 50_000_000;

/// Right-hand side of a (possibly time-dependent) linear master equation.
pub trait Generator: Sync {
    fn derivative(&self, t: f64, rho: &Operator) -> Operator;

    /// Instantaneous rate at which excitation leaves through monitored jumps.
    fn emission_rate(&self, _t: f64, _rho: &Operator) -> f64 {
        0.0
    }

    /// Times where the generator is only piecewise smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn omega0(&self) -> f64 {
        1.0
    }
}

impl Generator for LiouvillianSpec {
    fn derivative(&self, t: f64, rho: &Operator) -> Operator {
        self.apply(t, rho)
    }

    fn emission_rate(&self, t: f64, rho: &Operator) -> f64 {
        LiouvillianSpec::emission_rate(self, t, rho)
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self.couplings() {
            crate::liouville::Couplings::Chiral(p) => vec![p.tau],
            crate::liouville::Couplings::Static(_) => Vec::new(),
        }
    }

    fn omega0(&self) -> f64 {
        LiouvillianSpec::omega0(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper {
    Rk4,
    DormandPrince { rel_tol: f64, abs_tol: f64 },
}

/// Integration window and sampling.
///
/// Snapshots are taken every `sample_stride` steps of size `dt` (for the
/// adaptive stepper, every `sample_stride * dt` of simulated time) and at
/// `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub sample_stride: usize,
    pub stepper: Stepper,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64, sample_stride: usize) -> Result<Self> {
        let grid = TimeGrid {
            t_start,
            t_end,
            dt,
            sample_stride,
            stepper: Stepper::Rk4,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn adaptive(
        t_start: f64,
        t_end: f64,
        dt: f64,
        sample_stride: usize,
        rel_tol: f64,
        abs_tol: f64,
    ) -> Result<Self> {
        let grid = TimeGrid {
            stepper: Stepper::DormandPrince { rel_tol, abs_tol },
            ..TimeGrid::new(t_start, t_end, dt, sample_stride)?
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::InvalidGrid(format!(
                "need finite t_end > t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidGrid("sample_stride must be >= 1".into()));
        }
        if let Stepper::DormandPrince { rel_tol, abs_tol } = self.stepper {
            if !(rel_tol > 0.0 && abs_tol > 0.0 && rel_tol.is_finite() && abs_tol.is_finite()) {
                return Err(Error::InvalidGrid("tolerances must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Number of regular steps of size `dt`; the last one may be shorter.
    pub fn steps(&self) -> usize {
        (((self.t_end - self.t_start) / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    fn node(&self, i: usize) -> f64 {
        if i >= self.steps() {
            self.t_end
        } else {
            self.t_start + i as f64 * self.dt
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub rho: DensityMatrix,
    /// Excitation emitted through monitored channels since `t_start`.
    pub emitted: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Largest `|Tr ρ − 1|` after a step, before renormalisation.
    pub max_trace_drift: f64,
    /// Smallest eigenvalue over all snapshots.
    pub min_eigenvalue: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub renormalizations: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            max_trace_drift: 0.0,
            min_eigenvalue: f64::INFINITY,
            steps: 0,
            rejected_steps: 0,
            renormalizations: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChargingTrajectory {
    pub snapshots: Vec<Snapshot>,
    pub metrics: Vec<MetricsRecord>,
    pub diagnostics: Diagnostics,
}

impl ChargingTrajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|s| s.t)
    }
}

#[derive(Clone, Copy)]
struct State {
    rho: Operator,
    emitted: f64,
}

impl State {
    fn axpy(&self, h: f64, k: &State) -> State {
        State {
            rho: self.rho + k.rho.scale(h),
            emitted: self.emitted + h * k.emitted,
        }
    }
}

fn eval<G: Generator + ?Sized>(gen: &G, t: f64, y: &State) -> State {
    State {
        rho: gen.derivative(t, &y.rho),
        emitted: gen.emission_rate(t, &y.rho),
    }
}

fn rk4_step<G: Generator + ?Sized>(gen: &G, t: f64, y: &State, h: f64) -> State {
    let k1 = eval(gen, t, y);
    let k2 = eval(gen, t + 0.5 * h, &y.axpy(0.5 * h, &k1));
    let k3 = eval(gen, t + 0.5 * h, &y.axpy(0.5 * h, &k2));
    let k4 = eval(gen, t + h, &y.axpy(h, &k3));
    State {
        rho: y.rho + (k1.rho + (k2.rho + k3.rho).scale(2.0) + k4.rho).scale(h / 6.0),
        emitted: y.emitted + h / 6.0 * (k1.emitted + 2.0 * (k2.emitted + k3.emitted) + k4.emitted),
    }
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: fifth-order solution and scaled error norm.
fn dp_step<G: Generator + ?Sized>(gen: &G, t: f64, y: &State, h: f64, rel_tol: f64, abs_tol: f64) -> (State, f64) {
    let mut k: [State; 7] = [State {
        rho: Operator::zeros(),
        emitted: 0.0,
    }; 7];
    for stage in 0..7 {
        let mut ys = *y;
        for (j, a) in DP_A[stage].iter().enumerate().take(stage) {
            if *a != 0.0 {
                ys = ys.axpy(h * a, &k[j]);
            }
        }
        k[stage] = eval(gen, t + DP_C[stage] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = State {
        rho: Operator::zeros(),
        emitted: 0.0,
    };
    for stage in 0..7 {
        y5 = y5.axpy(h * DP_B5[stage], &k[stage]);
        err = err.axpy(h * (DP_B5[stage] - DP_B4[stage]), &k[stage]);
    }
    let mut norm: f64 = 0.0;
    for (e, (a, b)) in err.rho.iter().zip(y.rho.iter().zip(y5.rho.iter())) {
        let scale = abs_tol + rel_tol * a.norm().max(b.norm());
        norm = norm.max(e.norm() / scale);
    }
    let scale = abs_tol + rel_tol * y.emitted.abs().max(y5.emitted.abs());
    norm = norm.max(err.emitted.abs() / scale);
    (y5, norm)
}

struct Recorder {
    snapshots: Vec<Snapshot>,
    diagnostics: Diagnostics,
}

impl Recorder {
    /// Hermitise, renormalise and check an accepted step.
    fn accept(&mut self, t: f64, y: &mut State) -> Result<()> {
        if y.rho.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) || !y.emitted.is_finite() {
            return Err(Error::Divergence { t });
        }
        y.rho = (y.rho + y.rho.adjoint()).scale(0.5);
        let tr = y.rho.trace().re;
        let drift = (tr - 1.0).abs();
        self.diagnostics.max_trace_drift = self.diagnostics.max_trace_drift.max(drift);
        if drift > RENORMALIZE_ABOVE {
            y.rho = y.rho.unscale(tr);
            self.diagnostics.renormalizations += 1;
        }
        self.diagnostics.steps += 1;
        Ok(())
    }

    fn snapshot(&mut self, t: f64, y: &State) -> Result<()> {
        let rho = DensityMatrix::from_matrix_unchecked(y.rho);
        let min = rho.min_eigenvalue();
        self.diagnostics.min_eigenvalue = self.diagnostics.min_eigenvalue.min(min);
        if min < POSITIVITY_FLOOR {
            return Err(Error::PositivityViolation { t, min_eigenvalue: min });
        }
        self.snapshots.push(Snapshot {
            t,
            rho,
            emitted: y.emitted,
        });
        Ok(())
    }
}

fn breakpoints_inside<G: Generator + ?Sized>(gen: &G, grid: &TimeGrid) -> Vec<f64> {
    let mut bps: Vec<f64> = gen
        .breakpoints()
        .into_iter()
        .filter(|b| b.is_finite() && *b > grid.t_start && *b < grid.t_end)
        .collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    bps
}

/// Integrate from `rho0` over `grid`, recording snapshots and metrics.
pub fn evolve<G: Generator + ?Sized>(gen: &G, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<ChargingTrajectory> {
    grid.validate()?;
    let mut rec = Recorder {
        snapshots: Vec::with_capacity(grid.steps() / grid.sample_stride + 2),
        diagnostics: Diagnostics::default(),
    };
    let mut y = State {
        rho: *rho0.matrix(),
        emitted: 0.0,
    };
    rec.snapshot(grid.t_start, &y)?;
    let bps = breakpoints_inside(gen, grid);

    match grid.stepper {
        Stepper::Rk4 => evolve_fixed(gen, grid, &bps, &mut y, &mut rec)?,
        Stepper::DormandPrince { rel_tol, abs_tol } => {
            evolve_adaptive(gen, grid, &bps, rel_tol, abs_tol, &mut y, &mut rec)?
        }
    }

    let metrics = metrics::records(&rec.snapshots, gen.omega0())?;
    Ok(ChargingTrajectory {
        snapshots: rec.snapshots,
        metrics,
        diagnostics: rec.diagnostics,
    })
}

fn evolve_fixed<G: Generator + ?Sized>(
    gen: &G,
    grid: &TimeGrid,
    bps: &[f64],
    y: &mut State,
    rec: &mut Recorder,
) -> Result<()> {
    let n = grid.steps();
    let eps = 1e-9 * grid.dt;
    let mut next_bp = 0;
    let mut t = grid.t_start;
    for i in 1..=n {
        let target = grid.node(i);
        while next_bp < bps.len() && bps[next_bp] < target - eps {
            let b = bps[next_bp];
            next_bp += 1;
            if b > t + eps {
                *y = rk4_step(gen, t, y, b - t);
                rec.accept(b, y)?;
                t = b;
            }
        }
        if next_bp < bps.len() && (bps[next_bp] - target).abs() <= eps {
            next_bp += 1;
        }
        *y = rk4_step(gen, t, y, target - t);
        rec.accept(target, y)?;
        t = target;
        if i % grid.sample_stride == 0 || i == n {
            rec.snapshot(t, y)?;
        }
    }
    Ok(())
}

fn evolve_adaptive<G: Generator + ?Sized>(
    gen: &G,
    grid: &TimeGrid,
    bps: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    y: &mut State,
    rec: &mut Recorder,
) -> Result<()> {
    let n = grid.steps();
    let mut h = grid.dt;
    let mut t = grid.t_start;
    let mut stops: Vec<f64> = bps.to_vec();
    let mut outputs = Vec::new();
    let mut i = grid.sample_stride;
    while i < n {
        outputs.push(grid.node(i));
        i += grid.sample_stride;
    }
    outputs.push(grid.t_end);
    stops.extend_from_slice(&outputs);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut out_idx = 0;
    let mut attempts = 0usize;
    for stop in stops {
        while t < stop {
            attempts += 1;
            if attempts > MAX_ADAPTIVE_STEPS {
                return Err(Error::StepSizeUnderflow { t });
            }
            let remaining = stop - t;
            let last = h >= remaining * (1.0 - 1e-12);
            let step = if last { remaining } else { h };
            let (mut candidate, err) = dp_step(gen, t, y, step, rel_tol, abs_tol);
            if !err.is_finite() {
                return Err(Error::Divergence { t });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                let t_new = if last { stop } else { t + step };
                rec.accept(t_new, &mut candidate)?;
                *y = candidate;
                t = t_new;
                h = if last { h.max(step * factor) } else { step * factor };
            } else {
                rec.diagnostics.rejected_steps += 1;
                h = step * factor;
                if h < 1e-14 * grid.dt.max(t.abs()) {
                    return Err(Error::StepSizeUnderflow { t });
                }
            }
        }
        if out_idx < outputs.len() && outputs[out_idx] == stop {
            rec.snapshot(stop, y)?;
            out_idx += 1;
        }
    }
    Ok(())
}

/// State at `t_end` only, starting from `rho` at `t_start`.
pub fn propagate<G: Generator + ?Sized>(
    gen: &G,
    rho: &DensityMatrix,
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if t_end <= t_start {
        return Ok(rho.clone());
    }
    let grid = TimeGrid::new(t_start, t_end, dt, usize::MAX)?;
    Ok(evolve(gen, rho, &grid)?.snapshots.pop().expect("final snapshot").rho)
}

/// Empirical convergence order from runs at `dt`, `dt/2` and `dt/4`:
/// `log2(|y_dt − y_dt/2| / |y_dt/2 − y_dt/4|)` at `t_end`.
pub fn convergence_order<G: Generator + ?Sized>(gen: &G, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<f64> {
    let finals = [dt, 0.5 * dt, 0.25 * dt]
        .iter()
        .map(|&h| {
            let grid = TimeGrid::new(0.0, t_end, h, usize::MAX)?;
            Ok(evolve(gen, rho0, &grid)?.snapshots.pop().expect("final snapshot"))
        })
        .collect::<Result<Vec<_>>>()?;
    let diff = |a: &Snapshot, b: &Snapshot| a.rho.max_abs_diff(&b.rho).max((a.emitted - b.emitted).abs());
    let coarse = diff(&finals[0], &finals[1]);
    let fine = diff(&finals[1], &finals[2]);
    Ok((coarse / fine).log2())
}
