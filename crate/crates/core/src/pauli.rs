//! Sparse Pauli-string operators on the `2^N`-dimensional spin space.
//!
//! Basis convention: site 0 is the most significant bit of the basis index,
//! and a set bit means spin down (the `-1` eigenstate of `σ^z`). With `N = 1`
//! the basis order is therefore `(|↑⟩, |↓⟩)` and the all-down state sits at
//! index `2^N - 1`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{OperatorMatrix, MAX_DENSE_SPINS};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Real coefficient times a tensor product of single-site Pauli matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    coefficient: f64,
    factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    /// Builds a term; sites must be distinct.
    pub fn new(coefficient: f64, factors: Vec<(usize, Axis)>) -> Result<Self> {
        for (k, &(site, _)) in factors.iter().enumerate() {
            if factors[..k].iter().any(|&(s, _)| s == site) {
                return Err(Error::RepeatedSite { site });
            }
        }
        Ok(Self { coefficient, factors })
    }

    /// A multiple of the identity.
    pub fn identity(coefficient: f64) -> Self {
        Self { coefficient, factors: Vec::new() }
    }

    pub fn single(coefficient: f64, site: usize, axis: Axis) -> Self {
        Self { coefficient, factors: vec![(site, axis)] }
    }

    pub fn pair(coefficient: f64, first: (usize, Axis), second: (usize, Axis)) -> Result<Self> {
        Self::new(coefficient, vec![first, second])
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    /// True when every matrix element is real, i.e. the string holds an even
    /// number of `σ^y` factors.
    pub fn is_real(&self) -> bool {
        self.factors.iter().filter(|(_, a)| *a == Axis::Y).count() % 2 == 0
    }

    /// Image of basis state `basis`: the string maps it to
    /// `i^phase · |target⟩` (coefficient not included).
    fn act(&self, n_spins: usize, basis: usize) -> (u8, usize) {
        let mut phase = 0u8;
        let mut target = basis;
        for &(site, axis) in &self.factors {
            let shift = n_spins - 1 - site;
            let down = (basis >> shift) & 1 == 1;
            match axis {
                Axis::X => target ^= 1 << shift,
                Axis::Y => {
                    target ^= 1 << shift;
                    // σ^y|↑⟩ = i|↓⟩, σ^y|↓⟩ = -i|↑⟩
                    phase += if down { 3 } else { 1 };
                }
                Axis::Z => {
                    if down {
                        phase += 2;
                    }
                }
            }
        }
        (phase % 4, target)
    }
}

fn phase_value(phase: u8) -> C64 {
    match phase {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Sum of Pauli strings on a chain of fixed length.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_spins: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSum {
    pub fn new(n_spins: usize) -> Self {
        Self { n_spins, terms: Vec::new() }
    }

    /// Appends a term, checking its sites against the chain length. Terms with
    /// a zero coefficient are dropped.
    pub fn push(&mut self, term: PauliTerm) -> Result<()> {
        if let Some(&(site, _)) = term.factors.iter().find(|(s, _)| *s >= self.n_spins) {
            return Err(Error::SiteOutOfRange { site, n_spins: self.n_spins });
        }
        if term.coefficient != 0.0 {
            self.terms.push(term);
        }
        Ok(())
    }

    pub fn extend(&mut self, other: PauliSum) -> Result<()> {
        if other.n_spins != self.n_spins {
            return Err(Error::DimensionMismatch { expected: self.n_spins, found: other.n_spins });
        }
        self.terms.extend(other.terms);
        Ok(())
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        for t in &mut self.terms {
            t.coefficient *= factor;
        }
        self
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn is_real(&self) -> bool {
        self.terms.iter().all(PauliTerm::is_real)
    }

    /// Calls `f(row, value)` for every nonzero contribution of column `basis`.
    /// Contributions to the same row are not merged.
    pub fn for_each_in_column<F: FnMut(usize, C64)>(&self, basis: usize, mut f: F) {
        for term in &self.terms {
            let (phase, target) = term.act(self.n_spins, basis);
            f(target, phase_value(phase) * term.coefficient);
        }
    }

    /// `out = self · v` for a complex vector.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) -> Result<()> {
        let dim = self.dim();
        if v.len() != dim || out.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len().min(out.len()) });
        }
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for (basis, &amp) in v.iter().enumerate() {
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            self.for_each_in_column(basis, |row, value| out[row] += value * amp);
        }
        Ok(())
    }

    /// `⟨v|self|v⟩`, real part only.
    pub fn expectation(&self, v: &[C64]) -> Result<f64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(v, &mut out)?;
        Ok(v.iter().zip(&out).map(|(a, b)| (a.conj() * b).re).sum())
    }

    /// Dense real matrix. Fails for strings with an odd number of `σ^y`
    /// factors and for chains longer than [`MAX_DENSE_SPINS`].
    pub fn to_dense(&self) -> Result<OperatorMatrix> {
        if self.n_spins > MAX_DENSE_SPINS {
            return Err(Error::TooManySpins { n_spins: self.n_spins, max: MAX_DENSE_SPINS });
        }
        if !self.is_real() {
            return Err(Error::NotReal);
        }
        let dim = self.dim();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for col in 0..dim {
            self.for_each_in_column(col, |row, value| m[(row, col)] += value.re);
        }
        Ok(OperatorMatrix::from_matrix(self.n_spins, m))
    }

    /// Compressed real sparse form with merged duplicate entries.
    pub fn to_sparse(&self) -> Result<SparseOperator> {
        if !self.is_real() {
            return Err(Error::NotReal);
        }
        let dim = self.dim();
        let mut offsets = Vec::with_capacity(dim + 1);
        let mut entries: Vec<(usize, f64)> = Vec::new();
        let mut column: Vec<(usize, f64)> = Vec::new();
        offsets.push(0);
        // The operators handled here are Hermitian and real, hence symmetric:
        // column `b` doubles as row `b`.
        for basis in 0..dim {
            column.clear();
            self.for_each_in_column(basis, |row, value| column.push((row, value.re)));
            column.sort_unstable_by_key(|&(r, _)| r);
            let mut k = 0;
            while k < column.len() {
                let row = column[k].0;
                let mut sum = 0.0;
                while k < column.len() && column[k].0 == row {
                    sum += column[k].1;
                    k += 1;
                }
                if sum != 0.0 {
                    entries.push((row, sum));
                }
            }
            offsets.push(entries.len());
        }
        Ok(SparseOperator { dim, offsets, entries })
    }
}

/// Real symmetric operator in compressed column form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    offsets: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl SparseOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn column(&self, col: usize) -> &[(usize, f64)] {
        &self.entries[self.offsets[col]..self.offsets[col + 1]]
    }

    /// `⟨v|A|v⟩` for real symmetric `A`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        assert_eq!(v.len(), self.dim, "state dimension mismatch");
        let mut total = 0.0;
        for (col, &amp) in v.iter().enumerate() {
            if amp.re == 0.0 && amp.im == 0.0 {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for &(row, value) in self.column(col) {
                acc += v[row].conj() * value;
            }
            total += (acc * amp).re;
        }
        total
    }
}
