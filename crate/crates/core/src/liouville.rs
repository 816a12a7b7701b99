//! Two-atom density matrices and the master-equation right-hand side.
//!
//! Basis order is `{|gg>, |ge>, |eg>, |ee>}` with index `2 * n_a + n_b`, so
//! the battery (atom b) is the fast index. The generator is written in the
//! interaction picture: only the waveguide-induced shifts and couplings appear
//! in the Hamiltonian.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::chiral::{ChiralProtocol, Direction};
use crate::error::{Error, Result};
use crate::geometry::{CouplingLayout, CouplingParams};

pub type C64 = Complex64;
/// Operator on the charger ⊗ battery space.
pub type Operator = Matrix4<C64>;
/// Operator on a single two-level atom, basis `{|g>, |e>}`.
pub type QubitOperator = Matrix2<C64>;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Charger.
    A,
    /// Battery.
    B,
}

impl Atom {
    pub fn other(self) -> Atom {
        match self {
            Atom::A => Atom::B,
            Atom::B => Atom::A,
        }
    }
}

/// Lowering operator `|g><e|` of one atom, identity on the other.
pub fn sigma_minus(atom: Atom) -> Operator {
    let mut m = Operator::zeros();
    let one = C64::new(1.0, 0.0);
    match atom {
        Atom::A => {
            m[(0, 2)] = one;
            m[(1, 3)] = one;
        }
        Atom::B => {
            m[(0, 1)] = one;
            m[(2, 3)] = one;
        }
    }
    m
}

pub fn sigma_plus(atom: Atom) -> Operator {
    sigma_minus(atom).adjoint()
}

/// Excitation number `σ⁺σ⁻` of one atom.
pub fn number(atom: Atom) -> Operator {
    sigma_plus(atom) * sigma_minus(atom)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

/// `D[A]ρ = AρA† − ½{A†A, ρ}`.
pub fn dissipator(a: &Operator, rho: &Operator) -> Operator {
    let ad = a.adjoint();
    let ada = ad * a;
    a * rho * ad - (ada * rho + rho * ada).scale(0.5)
}

/// `D[A,B]ρ + H.c.` with `D[A,B]ρ = AρB† − ½(A†Bρ + ρA†B)`, for Hermitian `ρ`.
pub fn cross_dissipator(a: &Operator, b: &Operator, rho: &Operator) -> Operator {
    let adb = a.adjoint() * b;
    let d = a * rho * b.adjoint() - (adb * rho + rho * adb).scale(0.5);
    d + d.adjoint()
}

/// Hermitian, unit-trace and positivity bounds a state is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl Tolerance {
    /// Bounds every stored state satisfies.
    pub const STRICT: Tolerance = Tolerance {
        hermiticity: 1e-12,
        trace: 1e-9,
        min_eigenvalue: -1e-8,
    };
    /// Looser bounds used for states handed to the generator, tolerating
    /// integrator drift.
    pub const INPUT: Tolerance = Tolerance {
        hermiticity: 1e-10,
        trace: 1e-8,
        min_eigenvalue: -1e-6,
    };
}

/// Largest entry of `|X − X†|`.
pub fn hermiticity_error(m: &Operator) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in i..4 {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &Operator) -> [f64; 4] {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut ev = [
        eig.eigenvalues[0],
        eig.eigenvalues[1],
        eig.eigenvalues[2],
        eig.eigenvalues[3],
    ];
    ev.sort_by(f64::total_cmp);
    ev
}

fn check_state(m: &Operator, tol: &Tolerance) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidDensityMatrix("non-finite entries".into()));
    }
    let herm = hermiticity_error(m);
    if herm > tol.hermiticity {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian (|ρ−ρ†| = {herm:e})"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr} is not 1")));
    }
    let min = hermitian_eigenvalues(m)[0];
    if min < tol.min_eigenvalue {
        return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// State of the charger ⊗ battery pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(m: Operator) -> Result<Self> {
        Self::with_tolerance(m, &Tolerance::STRICT)
    }

    pub fn with_tolerance(m: Operator, tol: &Tolerance) -> Result<Self> {
        check_state(&m, tol)?;
        Ok(DensityMatrix(m))
    }

    pub(crate) fn from_matrix_unchecked(m: Operator) -> Self {
        DensityMatrix(m)
    }

    /// Projector onto basis state `index = 2 n_a + n_b`.
    pub fn basis_state(index: usize) -> Self {
        assert!(index < 4, "basis index out of range");
        let mut m = Operator::zeros();
        m[(index, index)] = C64::new(1.0, 0.0);
        DensityMatrix(m)
    }

    /// `|g_a g_b>`.
    pub fn ground() -> Self {
        Self::basis_state(0)
    }

    /// `|e_a g_b>`: charger excited, battery empty.
    pub fn charger_excited() -> Self {
        Self::basis_state(2)
    }

    /// `|g_a e_b>`: battery excited, charger empty.
    pub fn battery_excited() -> Self {
        Self::basis_state(1)
    }

    pub fn from_pure(psi: &Vector4<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidDensityMatrix("state vector has zero norm".into()));
        }
        let v = psi.unscale(norm);
        Ok(DensityMatrix(v * v.adjoint()))
    }

    /// `ρ_a ⊗ ρ_b`.
    pub fn product(charger: &QubitOperator, battery: &QubitOperator) -> Result<Self> {
        Self::new(charger.kronecker(battery))
    }

    pub fn matrix(&self) -> &Operator {
        &self.0
    }

    pub fn into_matrix(self) -> Operator {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    /// Excited-state population `<σ⁺σ⁻>` of one atom.
    pub fn population(&self, atom: Atom) -> f64 {
        match atom {
            Atom::A => self.0[(2, 2)].re + self.0[(3, 3)].re,
            Atom::B => self.0[(1, 1)].re + self.0[(3, 3)].re,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)[0]
    }

    /// Reduced state of one atom; the other is traced out.
    pub fn reduced(&self, keep: Atom) -> QubitOperator {
        let m = &self.0;
        let mut r = QubitOperator::zeros();
        for i in 0..2 {
            for j in 0..2 {
                r[(i, j)] = match keep {
                    // Tr_a: sum the two diagonal blocks indexed by n_a.
                    Atom::B => m[(i, j)] + m[(2 + i, 2 + j)],
                    Atom::A => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
                };
            }
        }
        r
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipatorKind {
    /// Individual plus collective decay into both propagation directions.
    Bidirectional,
    /// Single collective jump into right-propagating modes (charger → battery).
    CascadedRight,
    /// Single collective jump into left-propagating modes (battery → charger).
    CascadedLeft,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Couplings {
    Static(CouplingParams),
    Chiral(ChiralProtocol),
}

/// Generator in the form `ρ̇ = Kρ + ρK† + Σ c A ρ B†`, with
/// `K = −iH − ½ Σ c B†A`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CompiledGenerator {
    k: Operator,
    k_adj: Operator,
    jumps: Vec<(Operator, Operator, f64)>,
    /// Nonzero `(row, col, value)` entries of the superoperator acting on
    /// column-major `vec(ρ)`, built for time-independent generators.
    superop: Option<Vec<(usize, usize, C64)>>,
}

impl CompiledGenerator {
    fn new(h: &Operator, jumps: Vec<(Operator, Operator, f64)>) -> Self {
        let mut k = -h * I;
        for (a, b, c) in &jumps {
            k -= (b.adjoint() * a).scale(0.5 * c);
        }
        let k_adj = k.adjoint();
        CompiledGenerator {
            k,
            k_adj,
            jumps,
            superop: None,
        }
    }

    fn with_superoperator(mut self) -> Self {
        let mut entries = Vec::new();
        for col in 0..16 {
            let mut e = Operator::zeros();
            e[(col % 4, col / 4)] = C64::new(1.0, 0.0);
            for (row, v) in self.apply_dense(&e).iter().enumerate() {
                if *v != C64::new(0.0, 0.0) {
                    entries.push((row, col, *v));
                }
            }
        }
        entries.sort_by_key(|&(row, col, _)| (row, col));
        self.superop = Some(entries);
        self
    }

    pub(crate) fn apply(&self, rho: &Operator) -> Operator {
        match &self.superop {
            Some(entries) => {
                let src = rho.as_slice();
                let mut out = Operator::zeros();
                let dst = out.as_mut_slice();
                for &(row, col, v) in entries {
                    dst[row] += v * src[col];
                }
                out
            }
            None => self.apply_dense(rho),
        }
    }

    fn apply_dense(&self, rho: &Operator) -> Operator {
        let mut out = self.k * rho + rho * self.k_adj;
        for (a, b, c) in &self.jumps {
            out += (a * rho * b.adjoint()).scale(*c);
        }
        out
    }
}

fn bidirectional_jumps(p: &CouplingParams) -> Vec<(Operator, Operator, f64)> {
    let sa = sigma_minus(Atom::A);
    let sb = sigma_minus(Atom::B);
    let mut jumps = Vec::with_capacity(4);
    if p.gamma_a != 0.0 {
        jumps.push((sa, sa, p.gamma_a));
    }
    if p.gamma_b != 0.0 {
        jumps.push((sb, sb, p.gamma_b));
    }
    if p.gamma_coll != 0.0 {
        jumps.push((sa, sb, p.gamma_coll));
        jumps.push((sb, sa, p.gamma_coll));
    }
    jumps
}

/// Complete description of the master-equation generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvillianSpec {
    omega0: f64,
    couplings: Couplings,
    compiled: Option<CompiledGenerator>,
}

impl LiouvillianSpec {
    pub fn bidirectional(params: CouplingParams, omega0: f64) -> Result<Self> {
        check_omega0(omega0)?;
        if params.as_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("params", "coupling parameters must be finite"));
        }
        let compiled =
            CompiledGenerator::new(&static_hamiltonian(&params), bidirectional_jumps(&params)).with_superoperator();
        Ok(LiouvillianSpec {
            omega0,
            couplings: Couplings::Static(params),
            compiled: Some(compiled),
        })
    }

    pub fn from_layout(layout: &CouplingLayout, omega0: f64) -> Result<Self> {
        Self::bidirectional(layout.params()?, omega0)
    }

    pub fn cascaded(protocol: ChiralProtocol, omega0: f64) -> Result<Self> {
        check_omega0(omega0)?;
        protocol.validate()?;
        Ok(LiouvillianSpec {
            omega0,
            couplings: Couplings::Chiral(protocol),
            compiled: None,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn kind(&self) -> DissipatorKind {
        match &self.couplings {
            Couplings::Static(_) => DissipatorKind::Bidirectional,
            Couplings::Chiral(p) => match p.direction {
                Direction::RightToBattery => DissipatorKind::CascadedRight,
                Direction::LeftToCharger => DissipatorKind::CascadedLeft,
            },
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.couplings, Couplings::Chiral(_))
    }

    /// Collective jump operator of the cascaded kinds.
    pub fn jump_operator(&self, t: f64) -> Option<Operator> {
        match &self.couplings {
            Couplings::Static(_) => None,
            Couplings::Chiral(p) => Some(p.jump_operator(t)),
        }
    }

    pub(crate) fn compiled_at(&self, t: f64) -> std::borrow::Cow<'_, CompiledGenerator> {
        match (&self.compiled, &self.couplings) {
            (Some(c), _) => std::borrow::Cow::Borrowed(c),
            (None, Couplings::Chiral(p)) => {
                let l = p.jump_operator(t);
                std::borrow::Cow::Owned(CompiledGenerator::new(&p.hamiltonian(t), vec![(l, l, 1.0)]))
            }
            (None, Couplings::Static(params)) => std::borrow::Cow::Owned(CompiledGenerator::new(
                &static_hamiltonian(params),
                bidirectional_jumps(params),
            )),
        }
    }

    /// Generator applied to an arbitrary matrix, without input validation.
    pub fn apply(&self, t: f64, rho: &Operator) -> Operator {
        self.compiled_at(t).apply(rho)
    }

    /// Rate `Tr[L ρ L†]` of emission through the cascaded jump, zero otherwise.
    pub fn emission_rate(&self, t: f64, rho: &Operator) -> f64 {
        match &self.couplings {
            Couplings::Static(_) => 0.0,
            Couplings::Chiral(p) => {
                let l = p.jump_operator(t);
                (l.adjoint() * l * rho).trace().re
            }
        }
    }
}

fn check_omega0(omega0: f64) -> Result<()> {
    if omega0.is_finite() && omega0 > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "omega0",
            format!("must be finite and > 0, got {omega0}"),
        ))
    }
}

fn static_hamiltonian(p: &CouplingParams) -> Operator {
    let exchange = sigma_plus(Atom::A) * sigma_minus(Atom::B) + sigma_plus(Atom::B) * sigma_minus(Atom::A);
    number(Atom::A).scale(p.delta_omega_a) + number(Atom::B).scale(p.delta_omega_b) + exchange.scale(p.g_ab)
}

/// Interaction-picture Hamiltonian at time `t`.
pub fn effective_hamiltonian(spec: &LiouvillianSpec, t: f64) -> Operator {
    match &spec.couplings {
        Couplings::Static(p) => static_hamiltonian(p),
        Couplings::Chiral(p) => p.hamiltonian(t),
    }
}

/// Right-hand side built term by term from the dissipator definitions.
pub fn rhs_reference(spec: &LiouvillianSpec, t: f64, rho: &Operator) -> Operator {
    let h = effective_hamiltonian(spec, t);
    let coherent = -commutator(&h, rho) * I;
    match &spec.couplings {
        Couplings::Static(p) => {
            let sa = sigma_minus(Atom::A);
            let sb = sigma_minus(Atom::B);
            coherent
                + dissipator(&sa, rho).scale(p.gamma_a)
                + dissipator(&sb, rho).scale(p.gamma_b)
                + cross_dissipator(&sa, &sb, rho).scale(p.gamma_coll)
        }
        Couplings::Chiral(p) => coherent + dissipator(&p.jump_operator(t), rho),
    }
}

/// `ρ̇` at time `t`; `rho` must be a valid state within integrator tolerances.
pub fn rhs(spec: &LiouvillianSpec, t: f64, rho: &Operator) -> Result<Operator> {
    check_state(rho, &Tolerance::INPUT)?;
    Ok(rhs_reference(spec, t, rho))
}
