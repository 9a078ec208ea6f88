//! Exact charging dynamics.
//!
//! The charging Hamiltonian is time independent, so it is diagonalized once
//! per battery and the state at any time follows from phase factors on its
//! eigenbasis.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{self, BatterySpec, OperatorMatrix, SparseOperator};
use crate::pauli::{Axis, PauliSum, PauliTerm};
use crate::trace::{uniform_grid, Warning, WorkTrace};
use crate::C64;

pub use crate::trace::Extremum;

/// Normalized pure state on the `2^N`-dimensional spin space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_spins: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(n_spins: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n_spins;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
        }
        Ok(Self { n_spins, amplitudes })
    }

    /// Every spin down: the ferromagnetic ground state of the static chain.
    pub fn all_down(n_spins: usize) -> Self {
        Self { n_spins, amplitudes: model::all_down_amplitudes(n_spins) }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amplitudes.iter().map(|a| a.norm_sqr()).sum())
    }

    /// `(⟨σ^x⟩, ⟨σ^y⟩, ⟨σ^z⟩)` of one site, i.e. its reduced Bloch vector.
    pub fn bloch_vector(&self, site: usize) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (slot, axis) in out.iter_mut().zip([Axis::X, Axis::Y, Axis::Z]) {
            let mut op = PauliSum::new(self.n_spins);
            op.push(PauliTerm::single(1.0, site, axis))?;
            *slot = op.expectation(&self.amplitudes)?;
        }
        Ok(out)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }
}

pub fn initial_state(spec: &BatterySpec) -> Result<StateVector> {
    spec.validate()?;
    if spec.n_spins > model::MAX_DENSE_SPINS {
        return Err(Error::TooManySpins { n_spins: spec.n_spins, max: model::MAX_DENSE_SPINS });
    }
    Ok(StateVector::all_down(spec.n_spins))
}

/// Anything with a real expectation value on a state vector.
pub trait Observable {
    fn dim(&self) -> usize;
    fn expectation(&self, psi: &[C64]) -> f64;
}

impl Observable for OperatorMatrix {
    fn dim(&self) -> usize {
        OperatorMatrix::dim(self)
    }

    fn expectation(&self, psi: &[C64]) -> f64 {
        OperatorMatrix::expectation(self, psi)
    }
}

impl Observable for SparseOperator {
    fn dim(&self) -> usize {
        SparseOperator::dim(self)
    }

    fn expectation(&self, psi: &[C64]) -> f64 {
        SparseOperator::expectation(self, psi)
    }
}

impl<O: Observable + ?Sized> Observable for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn expectation(&self, psi: &[C64]) -> f64 {
        (**self).expectation(psi)
    }
}

/// Spectral decomposition `H = Q diag(λ) Qᵀ` with ascending eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

pub fn diagonalize(h: &OperatorMatrix) -> Result<Propagator> {
    let dim = h.dim();
    let m = h.matrix();
    let faer_h = faer::Mat::<f64>::from_fn(dim, dim, |r, c| m[(r, c)]);
    let Ok(eigen) = faer_h.self_adjoint_eigen(faer::Side::Lower) else {
        return Err(Error::EigenSolver { dim, norm: h.norm(), asymmetry: h.hermiticity_defect() });
    };
    let (values, vectors) = (eigen.S(), eigen.U());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&k| values[k]));
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| vectors[(r, order[c])]);
    Ok(Propagator { eigenvalues, eigenvectors })
}

/// Smallest eigenvalue of a real symmetric matrix.
fn lowest_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    faer::Mat::<f64>::from_fn(n, n, |r, c| m[(r, c)])
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| Error::EigenSolver { dim: n, norm: m.norm(), asymmetry: (m - m.transpose()).amax() })?
        .into_iter()
        .reduce(f64::min)
        .ok_or(Error::DimensionMismatch { expected: 1, found: 0 })
}

impl Propagator {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `max |Q diag(λ) Qᵀ - H|`.
    pub fn reconstruction_defect(&self, h: &OperatorMatrix) -> f64 {
        let q = &self.eigenvectors;
        let rebuilt = q * DMatrix::from_diagonal(&self.eigenvalues) * q.transpose();
        (rebuilt - h.matrix()).amax()
    }

    /// Dense `U_t = exp(-iHt)`.
    pub fn evolution_operator(&self, t: f64) -> DMatrix<C64> {
        let q = self.eigenvectors.map(|v| C64::new(v, 0.0));
        let phases = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&l| phase(-l * t)));
        &q * DMatrix::from_diagonal(&phases) * q.transpose()
    }

    /// Overlaps `Qᵀ ψ` of a state with the eigenbasis.
    pub fn overlaps(&self, psi: &StateVector) -> Result<Vec<C64>> {
        let dim = self.dim();
        if psi.amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: psi.amplitudes.len() });
        }
        Ok((0..dim)
            .map(|k| {
                self.eigenvectors
                    .column(k)
                    .iter()
                    .zip(&psi.amplitudes)
                    .map(|(&q, &a)| a * q)
                    .sum()
            })
            .collect())
    }
}

fn phase(angle: f64) -> C64 {
    C64::new(libm::cos(angle), libm::sin(angle))
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::argument("t", "time must be finite and >= 0"))
    }
}

/// `ψ(t) = U_t ψ0`.
pub fn evolve(prop: &Propagator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    check_time(t)?;
    let modes = ActiveModes::new(prop, psi0)?;
    Ok(modes.state_at(psi0.n_spins, t))
}

/// Eigenmodes of `H` that the initial state actually populates.
#[derive(Clone, Debug)]
struct ActiveModes {
    energies: Vec<f64>,
    overlaps: Vec<C64>,
    /// Eigenvector columns of the populated modes.
    vectors: DMatrix<f64>,
}

/// Overlaps at or below this magnitude are round-off from symmetry-forbidden
/// sectors and are skipped.
const NEGLIGIBLE_OVERLAP: f64 = 1e-15;

impl ActiveModes {
    fn new(prop: &Propagator, psi0: &StateVector) -> Result<Self> {
        let overlaps = prop.overlaps(psi0)?;
        let keep: Vec<usize> = (0..overlaps.len()).filter(|&k| crate::modulus(overlaps[k]) > NEGLIGIBLE_OVERLAP).collect();
        let dim = prop.dim();
        let vectors = DMatrix::from_fn(dim, keep.len(), |r, c| prop.eigenvectors[(r, keep[c])]);
        Ok(Self {
            energies: keep.iter().map(|&k| prop.eigenvalues[k]).collect(),
            overlaps: keep.iter().map(|&k| overlaps[k]).collect(),
            vectors,
        })
    }

    fn spectral_range(&self) -> f64 {
        let lo = self.energies.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            hi - lo
        } else {
            0.0
        }
    }

    fn state_at(&self, n_spins: usize, t: f64) -> StateVector {
        let k = self.energies.len();
        let mut re = DVector::<f64>::zeros(k);
        let mut im = DVector::<f64>::zeros(k);
        for j in 0..k {
            let d = self.overlaps[j] * phase(-self.energies[j] * t);
            re[j] = d.re;
            im[j] = d.im;
        }
        let psi_re = &self.vectors * re;
        let psi_im = &self.vectors * im;
        let amplitudes = psi_re.iter().zip(psi_im.iter()).map(|(&a, &b)| C64::new(a, b)).collect();
        StateVector { n_spins, amplitudes }
    }
}

/// Work deposited by a fixed charging Hamiltonian, measured with a fixed
/// static Hamiltonian: `W(t) = ⟨ψ(t)|H_0|ψ(t)⟩ - ⟨ψ0|H_0|ψ0⟩`.
#[derive(Clone, Debug)]
pub struct WorkMeter<O> {
    n_spins: usize,
    modes: ActiveModes,
    static_h: O,
    initial_energy: f64,
}

impl<O: Observable> WorkMeter<O> {
    pub fn new(prop: &Propagator, psi0: &StateVector, static_h: O) -> Result<Self> {
        if static_h.dim() != prop.dim() {
            return Err(Error::DimensionMismatch { expected: prop.dim(), found: static_h.dim() });
        }
        let modes = ActiveModes::new(prop, psi0)?;
        let initial_energy = static_h.expectation(&psi0.amplitudes);
        Ok(Self { n_spins: psi0.n_spins, modes, static_h, initial_energy })
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    pub fn state_at(&self, t: f64) -> Result<StateVector> {
        check_time(t)?;
        Ok(self.modes.state_at(self.n_spins, t))
    }

    pub fn work_at(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.work_unchecked(t))
    }

    fn work_unchecked(&self, t: f64) -> f64 {
        let psi = self.modes.state_at(self.n_spins, t);
        self.static_h.expectation(&psi.amplitudes) - self.initial_energy
    }

    /// Samples `n_samples` uniformly spaced times on `[0, t_max]` and locates
    /// the maxima of work and average power.
    pub fn trace(&self, t_max: f64, n_samples: usize) -> Result<WorkTrace> {
        let times = uniform_grid(t_max, n_samples)?;
        let work: Vec<f64> = times.iter().map(|&t| self.work_unchecked(t)).collect();
        let mut trace = WorkTrace::from_samples(times, work, |t| self.work_unchecked(t.max(0.0)));
        let range = self.modes.spectral_range();
        if range > 0.0 {
            let spacing = t_max / (n_samples - 1) as f64;
            let required = core::f64::consts::PI / range;
            if spacing > required {
                trace.warnings.push(Warning::Undersampled { spacing, required });
            }
        }
        Ok(trace)
    }
}

pub fn work_at<O: Observable>(prop: &Propagator, psi0: &StateVector, static_h: O, t: f64) -> Result<f64> {
    WorkMeter::new(prop, psi0, static_h)?.work_at(t)
}

pub fn trace<O: Observable>(
    prop: &Propagator,
    psi0: &StateVector,
    static_h: O,
    t_max: f64,
    n_samples: usize,
) -> Result<WorkTrace> {
    WorkMeter::new(prop, psi0, static_h)?.trace(t_max, n_samples)
}

/// Everything needed to charge one battery from the all-down state.
#[derive(Clone, Debug)]
pub struct ChargingSimulation {
    spec: BatterySpec,
    propagator: Propagator,
    meter: WorkMeter<SparseOperator>,
}

impl ChargingSimulation {
    pub fn new(spec: &BatterySpec) -> Result<Self> {
        let hamiltonians = model::assemble(spec)?;
        let propagator = diagonalize(&hamiltonians.charging_h)?;
        let psi0 = initial_state(spec)?;
        let static_h = model::static_terms(spec)?.to_sparse()?;
        let meter = WorkMeter::new(&propagator, &psi0, static_h)?;
        Ok(Self { spec: *spec, propagator, meter })
    }

    pub fn spec(&self) -> &BatterySpec {
        &self.spec
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn state_at(&self, t: f64) -> Result<StateVector> {
        self.meter.state_at(t)
    }

    pub fn work_at(&self, t: f64) -> Result<f64> {
        self.meter.work_at(t)
    }

    pub fn trace(&self, t_max: f64, n_samples: usize) -> Result<WorkTrace> {
        self.meter.trace(t_max, n_samples)
    }
}

/// Charging with the interactions switched off: the state evolves under the
/// field alone while the work is still measured with the interacting `H_0`.
pub fn frozen_interaction_trace(spec: &BatterySpec, t_max: f64, n_samples: usize) -> Result<WorkTrace> {
    let field = model::build_charging_field(spec)?;
    let prop = diagonalize(&field)?;
    let psi0 = initial_state(spec)?;
    let static_h = model::static_terms(spec)?.to_sparse()?;
    trace(&prop, &psi0, static_h, t_max, n_samples)
}

/// Emergent coupling between the all-down and all-up states of a strongly
/// interacting chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SlowCoupling {
    /// Half the splitting of the two lowest eigenvalues of `H`.
    pub half_splitting: f64,
    /// Mean energy of the low-energy doublet.
    pub doublet_energy: f64,
    /// Distance from the doublet to the rest of the spectrum divided by the
    /// doublet splitting.
    pub separation_ratio: f64,
    pub warnings: Vec<Warning>,
}

/// Minimum doublet separation ratio accepted as strong coupling.
pub const STRONG_COUPLING_RATIO: f64 = 10.0;

/// Half the splitting of the two lowest eigenvalues of the charging
/// Hamiltonian, i.e. the effective coupling between the all-down and all-up
/// states.
///
/// The splitting shrinks like `ω^N / g^(N-1)` and soon drops below the
/// absolute accuracy of a dense eigensolver, so it is not obtained by
/// subtracting eigenvalues. Instead every basis state other than all-down and
/// all-up is eliminated exactly: with `P` the projector on those two states
/// and `Q = 1 - P`, the doublet energies are the eigenvalues of
/// `P H P + P H Q (E - Q H Q)^(-1) Q H P`, solved self-consistently at the
/// doublet energy `E`. The off-diagonal element of that 2×2 matrix is computed
/// directly, without cancellation.
pub fn slow_coupling_gap(spec: &BatterySpec) -> Result<SlowCoupling> {
    if spec.n_spins < 2 {
        return Err(Error::argument("n_spins", "the all-down/all-up doublet needs at least 2 spins"));
    }
    let h = model::assemble(spec)?.charging_h.into_matrix();
    let dim = h.nrows();
    let (up, down) = (0, dim - 1);
    let rest = dim - 2;
    let qhq = h.view((1, 1), (rest, rest)).into_owned();
    let from_down: DVector<f64> = h.column(down).rows(1, rest).into_owned();
    let from_up: DVector<f64> = h.column(up).rows(1, rest).into_owned();

    let mut warnings = Vec::new();
    if spec.g_strength < 5.0 * spec.omega {
        let g_over_omega = if spec.omega > 0.0 { spec.g_strength / spec.omega } else { f64::INFINITY };
        warnings.push(Warning::WeakCouplingForGap { g_over_omega });
    }

    let rest_floor = lowest_eigenvalue(&qhq)?;
    let not_strong = || Error::NotStrongCoupling { ratio: 0.0, threshold: STRONG_COUPLING_RATIO };
    let resolve = |e: f64| -> Result<(DVector<f64>, DVector<f64>)> {
        if e >= rest_floor {
            return Err(not_strong());
        }
        let lu = (DMatrix::<f64>::identity(rest, rest) * e - &qhq).lu();
        let x_down = lu.solve(&from_down).ok_or(Error::SingularResolvent)?;
        let x_up = lu.solve(&from_up).ok_or(Error::SingularResolvent)?;
        Ok((x_down, x_up))
    };

    // Reference energy: the self-consistent mean of the two diagonal entries.
    let mut energy = 0.5 * (h[(down, down)] + h[(up, up)]);
    let mut reference = resolve(energy)?;
    for _ in 0..100 {
        let (x_down, x_up) = &reference;
        let next = 0.5 * (h[(down, down)] + from_down.dot(x_down) + h[(up, up)] + from_up.dot(x_up));
        let converged = (next - energy).abs() <= 1e-15 * f64::max(1.0, energy.abs());
        energy = next;
        reference = resolve(energy)?;
        if converged {
            break;
        }
    }

    // Each doublet level E = energy + δ solves δ = eig_±(M(E) - energy). The
    // diagonal shift is carried exactly through the resolvent identity
    // R(E) - R(energy) = -δ R(E) R(energy), so δ never comes from
    // subtracting two large energies.
    let (ref_down, ref_up) = &reference;
    let base_down = h[(down, down)] + from_down.dot(ref_down) - energy;
    let base_up = h[(up, up)] + from_up.dot(ref_up) - energy;
    let mut levels = [0.0f64; 2];
    for (slot, sign) in levels.iter_mut().zip([-1.0, 1.0]) {
        let mut delta = 0.0f64;
        for _ in 0..100 {
            let (x_down, x_up) = if delta == 0.0 { reference.clone() } else { resolve(energy + delta)? };
            let d_down = base_down - delta * x_down.dot(ref_down);
            let d_up = base_up - delta * x_up.dot(ref_up);
            let offdiag = h[(up, down)] + from_up.dot(&x_down);
            let next = 0.5 * (d_down + d_up) + sign * libm::hypot(0.5 * (d_down - d_up), offdiag);
            let converged = (next - delta).abs() <= 1e-14 * next.abs().max(f64::MIN_POSITIVE);
            delta = next;
            if converged {
                break;
            }
        }
        *slot = delta;
    }
    let half_splitting = 0.5 * (levels[1] - levels[0]);
    let energy = energy + 0.5 * (levels[0] + levels[1]);

    let separation_ratio = (rest_floor - energy) / (2.0 * half_splitting);
    if !(separation_ratio >= STRONG_COUPLING_RATIO) {
        return Err(Error::NotStrongCoupling { ratio: separation_ratio, threshold: STRONG_COUPLING_RATIO });
    }
    Ok(SlowCoupling { half_splitting, doublet_energy: energy, separation_ratio, warnings })
}

/// Half the gap between the two lowest eigenvalues read directly off a
/// spectrum. Only meaningful while that gap is well above the eigensolver's
/// absolute accuracy.
pub fn doublet_half_splitting(prop: &Propagator) -> f64 {
    let l = prop.eigenvalues();
    if l.len() < 2 {
        return 0.0;
    }
    0.5 * (l[1] - l[0])
}

/// `⟨ψ|A|ψ⟩` for every sample of a trajectory; used by conservation checks.
pub fn expectations_along<O: Observable>(sim: &ChargingSimulation, observable: &O, times: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; times.len()];
    for (slot, &t) in out.iter_mut().zip(times) {
        *slot = observable.expectation(sim.state_at(t)?.amplitudes());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Coupling;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn spec(n: usize, omega: f64, g: f64, alpha: f64, coupling: Coupling) -> BatterySpec {
        BatterySpec::new(n, 1.0, omega, g, alpha, coupling).unwrap()
    }

    #[test]
    fn single_spin_initial_state() {
        let psi = initial_state(&spec(1, 1.0, 0.0, 0.0, Coupling::None)).unwrap();
        assert_eq!(psi.amplitudes(), &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    }

    #[test]
    fn initial_state_energies() {
        let s = spec(4, 1.5, 0.8, 0.3, Coupling::LongRange { p: 1.0 });
        let psi = initial_state(&s).unwrap();
        let ham = model::assemble(&s).unwrap();
        let g_total = model::build_coupling(&s).unwrap().total();
        assert_relative_eq!(ham.static_h.expectation(psi.amplitudes()), -4.0 - g_total, epsilon = 1e-12);
        let v = model::build_charging_field(&s).unwrap();
        assert_eq!(v.expectation(psi.amplitudes()), 0.0);
    }

    #[test]
    fn single_spin_field_spectrum() {
        let v = model::build_charging_field(&spec(1, 0.7, 0.0, 0.0, Coupling::None)).unwrap();
        let prop = diagonalize(&v).unwrap();
        assert_relative_eq!(prop.eigenvalues()[0], -0.7, epsilon = 1e-14);
        assert_relative_eq!(prop.eigenvalues()[1], 0.7, epsilon = 1e-14);
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let s = spec(3, 1.0, 0.5, 0.2, Coupling::NearestNeighbor);
        let sim = ChargingSimulation::new(&s).unwrap();
        let psi = sim.state_at(0.0).unwrap();
        assert!((psi.fidelity(&StateVector::all_down(3)) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn single_spin_rabi_rotation() {
        let omega = 0.9;
        let sim = ChargingSimulation::new(&spec(1, omega, 0.0, 0.0, Coupling::None)).unwrap();
        for k in 0..20 {
            let t = 0.137 * k as f64;
            let sz = sim.state_at(t).unwrap().bloch_vector(0).unwrap()[2];
            assert!((sz + libm::cos(2.0 * omega * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_time_is_rejected() {
        let sim = ChargingSimulation::new(&spec(1, 1.0, 0.0, 0.0, Coupling::None)).unwrap();
        assert!(sim.work_at(-1.0).is_err());
    }

    #[test]
    fn single_spin_trace_maximum_work() {
        let sim = ChargingSimulation::new(&spec(1, 1.0, 0.0, 0.0, Coupling::None)).unwrap();
        let tr = sim.trace(PI, 2001).unwrap();
        assert!((tr.max_work.value - 2.0).abs() < 1e-9);
        assert!((tr.max_work.time - PI / 2.0).abs() < 1e-6);
        assert!(tr.warnings.is_empty());
    }

    #[test]
    fn undersampled_trace_warns() {
        let sim = ChargingSimulation::new(&spec(2, 5.0, 20.0, 0.0, Coupling::NearestNeighbor)).unwrap();
        let tr = sim.trace(50.0, 10).unwrap();
        assert!(matches!(tr.warnings[0], Warning::Undersampled { .. }));
    }

    #[test]
    fn two_spin_strong_coupling_spectrum_gap() {
        let prop = diagonalize(&model::assemble(&spec(2, 3.0, 20.0, 0.0, Coupling::NearestNeighbor)).unwrap().charging_h).unwrap();
        let l = prop.eigenvalues();
        let gap = l[2] - l[1];
        assert!((gap - 40.0).abs() < 3.0 * 9.0 / 20.0 * 4.0, "gap {gap}");
    }

    #[test]
    fn slow_gap_matches_spectrum_where_resolvable() {
        for n in 2..=6 {
            for coupling in [Coupling::NearestNeighbor, Coupling::LongRange { p: 0.0 }] {
                let s = spec(n, 4.0, 60.0, 0.0, coupling);
                let partitioned = slow_coupling_gap(&s).unwrap().half_splitting;
                let prop = diagonalize(&model::assemble(&s).unwrap().charging_h).unwrap();
                let direct = doublet_half_splitting(&prop);
                // The direct gap carries the eigensolver's absolute rounding.
                let scale = prop.eigenvalues().iter().fold(0.0f64, |m, l| m.max(l.abs()));
                let allowed = 1e-6 * direct + 100.0 * f64::EPSILON * scale;
                assert!((partitioned - direct).abs() < allowed, "N = {n}, {coupling:?}: {partitioned} vs {direct}");
            }
        }
    }

    #[test]
    fn slow_gap_rejects_weak_coupling() {
        let err = slow_coupling_gap(&spec(3, 4.0, 1.0, 0.0, Coupling::NearestNeighbor)).unwrap_err();
        assert!(matches!(err, Error::NotStrongCoupling { .. }));
        assert!(slow_coupling_gap(&spec(1, 4.0, 100.0, 0.0, Coupling::None)).is_err());
    }

    #[test]
    fn slow_gap_warns_below_five_omega() {
        let res = slow_coupling_gap(&spec(2, 4.0, 19.0, 0.0, Coupling::NearestNeighbor)).unwrap();
        assert!(matches!(res.warnings[0], Warning::WeakCouplingForGap { .. }));
    }
}
