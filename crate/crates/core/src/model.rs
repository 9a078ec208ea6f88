//! Battery parameters and Hamiltonian assembly.
//!
//! Sites are indexed from 0 in code. The chain is open: nearest-neighbour
//! coupling has no bond between the last and first site.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pauli::{Axis, PauliSum, PauliTerm};
use crate::C64;

pub use crate::pauli::SparseOperator;

/// Largest chain for which dense `2^N × 2^N` operators are built.
pub const MAX_DENSE_SPINS: usize = 14;

/// Spatial profile of the pairwise interaction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    /// No interactions at all.
    None,
    /// `g_ij = g` for adjacent sites only.
    NearestNeighbor,
    /// `g_ij = g / |i - j|^p`; `p = 0` is uniform all-to-all coupling.
    LongRange { p: f64 },
}

/// Physical parameters of one battery. Energies are in units of the Zeeman
/// splitting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatterySpec {
    pub n_spins: usize,
    /// Zeeman splitting `B` of the static field.
    pub field_b: f64,
    /// Strength `ω` of the transverse charging field.
    pub omega: f64,
    /// Interaction constant `g` (attractive, non-negative).
    pub g_strength: f64,
    /// Anisotropy: 0 is the Ising chain, 1 the isotropic XXX chain.
    pub alpha: f64,
    pub coupling: Coupling,
}

impl BatterySpec {
    pub fn new(
        n_spins: usize,
        field_b: f64,
        omega: f64,
        g_strength: f64,
        alpha: f64,
        coupling: Coupling,
    ) -> Result<Self> {
        let spec = Self { n_spins, field_b, omega, g_strength, alpha, coupling };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        fn non_negative(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidSpec { field, reason: format!("must be finite and >= 0, got {v}") })
            }
        }
        if self.n_spins == 0 {
            return Err(Error::InvalidSpec { field: "n_spins", reason: "must be at least 1".into() });
        }
        non_negative("field_b", self.field_b)?;
        non_negative("omega", self.omega)?;
        non_negative("g_strength", self.g_strength)?;
        if !(self.alpha.is_finite() && self.alpha.abs() <= 1.0) {
            return Err(Error::InvalidSpec {
                field: "alpha",
                reason: format!("must lie in [-1, 1], got {}", self.alpha),
            });
        }
        if let Coupling::LongRange { p } = self.coupling {
            non_negative("p", p)?;
        }
        Ok(())
    }

    fn require_dense(&self) -> Result<()> {
        self.validate()?;
        if self.n_spins > MAX_DENSE_SPINS {
            return Err(Error::TooManySpins { n_spins: self.n_spins, max: MAX_DENSE_SPINS });
        }
        Ok(())
    }
}

/// Symmetric pair couplings `g_ij` (`i < j`) and their total `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    n_spins: usize,
    /// Row-major strict upper triangle.
    entries: Vec<f64>,
    total: f64,
}

impl CouplingMatrix {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    fn index(&self, i: usize, j: usize) -> usize {
        // Offset of row i in the packed strict upper triangle.
        i * (2 * self.n_spins - i - 1) / 2 + (j - i - 1)
    }

    /// `g_ij`, symmetric in its arguments; zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n_spins && j < self.n_spins, "site out of range");
        match i.cmp(&j) {
            core::cmp::Ordering::Equal => 0.0,
            core::cmp::Ordering::Less => self.entries[self.index(i, j)],
            core::cmp::Ordering::Greater => self.entries[self.index(j, i)],
        }
    }

    /// `G = Σ_{i<j} g_ij`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Sum of couplings attached to site `m`.
    pub fn site_total(&self, m: usize) -> f64 {
        (0..self.n_spins).map(|j| self.get(m, j)).sum()
    }

    /// Iterator over `(i, j, g_ij)` with `i < j`, including zero entries.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n_spins;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.get(i, j))))
    }
}

pub fn build_coupling(spec: &BatterySpec) -> Result<CouplingMatrix> {
    spec.validate()?;
    let n = spec.n_spins;
    let g = spec.g_strength;
    let mut entries = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let d = (j - i) as f64;
            entries.push(match spec.coupling {
                Coupling::None => 0.0,
                Coupling::NearestNeighbor => {
                    if j == i + 1 {
                        g
                    } else {
                        0.0
                    }
                }
                // p = 0 must give exactly g on every pair.
                Coupling::LongRange { p: 0.0 } => g,
                Coupling::LongRange { p } => g / libm::pow(d, p),
            });
        }
    }
    let total = entries.iter().sum();
    Ok(CouplingMatrix { n_spins: n, entries, total })
}

/// Dense real-symmetric operator on the full spin space.
///
/// Every operator of the battery model has real matrix elements in the
/// computational basis, so the storage is real.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    n_spins: usize,
    matrix: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn from_matrix(n_spins: usize, matrix: DMatrix<f64>) -> Self {
        assert_eq!(matrix.nrows(), 1 << n_spins, "matrix dimension must be 2^N");
        assert!(matrix.is_square(), "matrix must be square");
        Self { n_spins, matrix }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Complex copy, for callers mixing with complex operators.
    pub fn to_complex(&self) -> DMatrix<C64> {
        self.matrix.map(|v| C64::new(v, 0.0))
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &OperatorMatrix) -> DMatrix<f64> {
        &self.matrix * &other.matrix - &other.matrix * &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `⟨v|A|v⟩`, real since `A` is symmetric.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        assert_eq!(v.len(), self.dim(), "state dimension mismatch");
        let m = &self.matrix;
        let mut total = 0.0;
        for (col, &amp) in v.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (row, &bra) in v.iter().enumerate() {
                acc += bra.conj() * m[(row, col)];
            }
            total += (acc * amp).re;
        }
        total
    }
}

impl core::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.n_spins, rhs.n_spins, "operators act on different chains");
        OperatorMatrix { n_spins: self.n_spins, matrix: &self.matrix + &rhs.matrix }
    }
}

/// `H_B = B Σ_i σ_i^z` as Pauli strings.
pub fn zeeman_terms(spec: &BatterySpec) -> Result<PauliSum> {
    spec.validate()?;
    let mut sum = PauliSum::new(spec.n_spins);
    for i in 0..spec.n_spins {
        sum.push(PauliTerm::single(spec.field_b, i, Axis::Z))?;
    }
    Ok(sum)
}

/// `H_g = -Σ_{i<j} g_ij [σ_i^z σ_j^z + α(σ_i^x σ_j^x + σ_i^y σ_j^y)]`.
///
/// Each `σ^y σ^y` string has real matrix elements, so the transverse part
/// assembles into the real flip-flop `2(σ^+σ^- + σ^-σ^+)`.
pub fn interaction_terms(spec: &BatterySpec, coupling: &CouplingMatrix) -> Result<PauliSum> {
    spec.validate()?;
    if coupling.n_spins() != spec.n_spins {
        return Err(Error::DimensionMismatch { expected: spec.n_spins, found: coupling.n_spins() });
    }
    let mut sum = PauliSum::new(spec.n_spins);
    for (i, j, g) in coupling.pairs() {
        if g == 0.0 {
            continue;
        }
        sum.push(PauliTerm::pair(-g, (i, Axis::Z), (j, Axis::Z))?)?;
        sum.push(PauliTerm::pair(-g * spec.alpha, (i, Axis::X), (j, Axis::X))?)?;
        sum.push(PauliTerm::pair(-g * spec.alpha, (i, Axis::Y), (j, Axis::Y))?)?;
    }
    Ok(sum)
}

/// `V = ω Σ_i σ_i^x`.
pub fn charging_terms(spec: &BatterySpec) -> Result<PauliSum> {
    spec.validate()?;
    let mut sum = PauliSum::new(spec.n_spins);
    for i in 0..spec.n_spins {
        sum.push(PauliTerm::single(spec.omega, i, Axis::X))?;
    }
    Ok(sum)
}

/// Static Hamiltonian `H_0 = H_B + H_g` as Pauli strings.
pub fn static_terms(spec: &BatterySpec) -> Result<PauliSum> {
    let coupling = build_coupling(spec)?;
    let mut sum = zeeman_terms(spec)?;
    sum.extend(interaction_terms(spec, &coupling)?)?;
    Ok(sum)
}

/// Charging Hamiltonian `H = H_g + V` as Pauli strings.
pub fn charging_hamiltonian_terms(spec: &BatterySpec) -> Result<PauliSum> {
    let coupling = build_coupling(spec)?;
    let mut sum = interaction_terms(spec, &coupling)?;
    sum.extend(charging_terms(spec)?)?;
    Ok(sum)
}

pub fn build_zeeman(spec: &BatterySpec) -> Result<OperatorMatrix> {
    spec.require_dense()?;
    zeeman_terms(spec)?.to_dense()
}

pub fn build_interaction(spec: &BatterySpec) -> Result<OperatorMatrix> {
    spec.require_dense()?;
    interaction_terms(spec, &build_coupling(spec)?)?.to_dense()
}

pub fn build_charging_field(spec: &BatterySpec) -> Result<OperatorMatrix> {
    spec.require_dense()?;
    charging_terms(spec)?.to_dense()
}

/// The two Hamiltonians of a charging cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct ChargingHamiltonians {
    /// `H_0 = H_B + H_g`, whose energy defines the stored work.
    pub static_h: OperatorMatrix,
    /// `H = H_g + V`, which generates the evolution while charging. The
    /// Zeeman term is absent during charging.
    pub charging_h: OperatorMatrix,
}

pub fn assemble(spec: &BatterySpec) -> Result<ChargingHamiltonians> {
    spec.require_dense()?;
    let zeeman = build_zeeman(spec)?;
    let interaction = build_interaction(spec)?;
    let field = build_charging_field(spec)?;
    Ok(ChargingHamiltonians { static_h: &zeeman + &interaction, charging_h: &interaction + &field })
}

/// Product state with every spin down, as a dense amplitude vector.
pub(crate) fn all_down_amplitudes(n_spins: usize) -> Vec<C64> {
    let dim = 1usize << n_spins;
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[dim - 1] = C64::new(1.0, 0.0);
    v
}
