//! Correlation-free dynamics.
//!
//! Each spin is a unit Bloch vector `S_m`. The classical energy is the
//! quantum Hamiltonian with every Pauli operator replaced by the matching
//! component of `S_m`, and the vectors precess as
//! `dS_m/dt = 2 (∂H_C/∂S_m) × S_m`, integrated with fixed-step RK4 and no
//! renormalization, so the norm drift measures the integration error.

use alloc::vec::Vec;

use nalgebra::{DMatrix, Vector3};

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::model::{build_coupling, BatterySpec, Coupling, MAX_DENSE_SPINS};
use crate::pauli::{Axis, PauliSum, PauliTerm};
use crate::trace::{uniform_grid, Warning, WorkTrace};
use crate::C64;

pub type Vec3 = Vector3<f64>;

/// Bloch vectors of every spin in the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochChainState {
    spins: Vec<Vec3>,
}

impl BlochChainState {
    pub fn all_down(n_spins: usize) -> Self {
        Self { spins: alloc::vec![Vec3::new(0.0, 0.0, -1.0); n_spins] }
    }

    pub fn from_spins(spins: Vec<Vec3>) -> Self {
        Self { spins }
    }

    pub fn spins(&self) -> &[Vec3] {
        &self.spins
    }

    pub fn n_spins(&self) -> usize {
        self.spins.len()
    }

    /// `max_m | |S_m| - 1 |`.
    pub fn norm_defect(&self) -> f64 {
        self.spins.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn mean_spin(&self) -> Vec3 {
        let n = self.spins.len().max(1) as f64;
        self.spins.iter().sum::<Vec3>() / n
    }
}

/// Product state whose single-site Bloch vectors are those of `state`
/// (each normalized to the unit sphere).
pub fn product_state(state: &BlochChainState) -> Result<StateVector> {
    let n = state.n_spins();
    if n == 0 || n > MAX_DENSE_SPINS {
        return Err(Error::TooManySpins { n_spins: n, max: MAX_DENSE_SPINS });
    }
    let mut amplitudes = alloc::vec![C64::new(1.0, 0.0)];
    for s in &state.spins {
        let u = s.normalize();
        let theta = libm::acos(u.z.clamp(-1.0, 1.0));
        let phi = libm::atan2(u.y, u.x);
        let up = C64::new(libm::cos(theta / 2.0), 0.0);
        let down = C64::new(libm::cos(phi), libm::sin(phi)) * libm::sin(theta / 2.0);
        let mut next = Vec::with_capacity(amplitudes.len() * 2);
        for a in &amplitudes {
            next.push(a * up);
            next.push(a * down);
        }
        amplitudes = next;
    }
    StateVector::from_amplitudes(n, amplitudes)
}

/// Classical counterpart of the battery with its couplings laid out densely.
#[derive(Clone, Debug)]
pub struct ClassicalChain {
    spec: BatterySpec,
    couplings: DMatrix<f64>,
}

impl ClassicalChain {
    pub fn new(spec: &BatterySpec) -> Result<Self> {
        let c = build_coupling(spec)?;
        let n = spec.n_spins;
        Ok(Self { spec: *spec, couplings: DMatrix::from_fn(n, n, |i, j| c.get(i, j)) })
    }

    pub fn spec(&self) -> &BatterySpec {
        &self.spec
    }

    fn check(&self, state: &BlochChainState) -> Result<()> {
        if state.n_spins() != self.spec.n_spins {
            return Err(Error::DimensionMismatch { expected: self.spec.n_spins, found: state.n_spins() });
        }
        Ok(())
    }

    /// Classical energy: of `H_0 = H_B + H_g` when `charging` is false, of
    /// `H = H_g + V` when it is true.
    pub fn energy(&self, state: &BlochChainState, charging: bool) -> Result<f64> {
        self.check(state)?;
        Ok(self.energy_unchecked(&state.spins, charging))
    }

    fn energy_unchecked(&self, spins: &[Vec3], charging: bool) -> f64 {
        let alpha = self.spec.alpha;
        let n = spins.len();
        let mut pair = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let g = self.couplings[(i, j)];
                if g != 0.0 {
                    let (a, b) = (&spins[i], &spins[j]);
                    pair += g * (a.z * b.z + alpha * (a.x * b.x + a.y * b.y));
                }
            }
        }
        let single: f64 = if charging {
            self.spec.omega * spins.iter().map(|s| s.x).sum::<f64>()
        } else {
            self.spec.field_b * spins.iter().map(|s| s.z).sum::<f64>()
        };
        single - pair
    }

    /// `∂H_C/∂S_m` of the charging Hamiltonian,
    /// `(ω - α Σ_j g_mj S_j^x, -α Σ_j g_mj S_j^y, -Σ_j g_mj S_j^z)`.
    pub fn torque_field(&self, state: &BlochChainState, m: usize) -> Result<Vec3> {
        self.check(state)?;
        if m >= state.n_spins() {
            return Err(Error::SiteOutOfRange { site: m, n_spins: state.n_spins() });
        }
        Ok(self.field_on(&state.spins, m))
    }

    fn field_on(&self, spins: &[Vec3], m: usize) -> Vec3 {
        let mut sum = Vec3::zeros();
        for (j, s) in spins.iter().enumerate() {
            let g = self.couplings[(m, j)];
            if g != 0.0 {
                sum += s * g;
            }
        }
        let alpha = self.spec.alpha;
        Vec3::new(self.spec.omega - alpha * sum.x, -alpha * sum.y, -sum.z)
    }

    fn rhs(&self, spins: &[Vec3], out: &mut [Vec3]) {
        for (m, slot) in out.iter_mut().enumerate() {
            *slot = 2.0 * self.field_on(spins, m).cross(&spins[m]);
        }
    }

    fn rk4_step(&self, spins: &[Vec3], dt: f64, scratch: &mut Rk4Scratch) -> Vec<Vec3> {
        rk4(spins, dt, scratch, |s, out| self.rhs(s, out))
    }
}

#[derive(Default)]
struct Rk4Scratch {
    k: [Vec<Vec3>; 4],
    tmp: Vec<Vec3>,
}

fn rk4<F>(y: &[Vec3], dt: f64, scratch: &mut Rk4Scratch, mut f: F) -> Vec<Vec3>
where
    F: FnMut(&[Vec3], &mut [Vec3]),
{
    let n = y.len();
    for k in &mut scratch.k {
        k.resize(n, Vec3::zeros());
    }
    scratch.tmp.resize(n, Vec3::zeros());
    let [k1, k2, k3, k4] = &mut scratch.k;
    let tmp = &mut scratch.tmp;
    f(y, k1);
    for i in 0..n {
        tmp[i] = y[i] + k1[i] * (0.5 * dt);
    }
    f(tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + k2[i] * (0.5 * dt);
    }
    f(tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + k3[i] * dt;
    }
    f(tmp, k4);
    (0..n).map(|i| y[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0)).collect()
}

pub fn classical_energy(spec: &BatterySpec, state: &BlochChainState, charging: bool) -> Result<f64> {
    ClassicalChain::new(spec)?.energy(state, charging)
}

pub fn torque_field(spec: &BatterySpec, state: &BlochChainState, m: usize) -> Result<Vec3> {
    ClassicalChain::new(spec)?.torque_field(state, m)
}

/// Largest Bloch-vector norm drift tolerated before a run is rejected.
pub const MAX_NORM_DRIFT: f64 = 1e-6;
/// Step size times fastest rate above which a warning is attached.
pub const STEP_WARNING: f64 = 0.05;

/// Result of a classical chain integration.
#[derive(Clone, Debug)]
pub struct ClassicalRun {
    /// Classical work, measured with the static energy.
    pub trace: WorkTrace,
    /// Average Bloch vector at every grid time.
    pub mean_spin: Vec<Vec3>,
    pub final_state: BlochChainState,
    /// `max_{t,m} | |S_m(t)| - 1 |`.
    pub norm_drift: f64,
    /// Largest change of the charging energy relative to its initial value
    /// (absolute when the initial value is zero).
    pub energy_drift: f64,
}

fn step_count(t_max: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::argument("dt", "time step must be finite and > 0"));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::argument("t_max", "must be finite and > 0"));
    }
    let steps = libm::ceil(t_max / dt - 1e-9) as usize;
    Ok(steps.max(1))
}

/// Integrates the classical chain from the all-down state over `[0, t_max]`
/// with step `dt` (shrunk slightly so the steps tile the window exactly).
pub fn integrate_chain(spec: &BatterySpec, t_max: f64, dt: f64) -> Result<ClassicalRun> {
    let chain = ClassicalChain::new(spec)?;
    let steps = step_count(t_max, dt)?;
    let times = uniform_grid(t_max, steps + 1)?;
    let dt = t_max / steps as f64;
    let n = spec.n_spins;

    let rate = spec.omega.max(spec.g_strength * n as f64).max(spec.field_b);
    let mut warnings = Vec::new();
    if dt * rate > STEP_WARNING {
        warnings.push(Warning::LargeTimeStep { step_times_rate: dt * rate });
    }

    let mut scratch = Rk4Scratch::default();
    let mut states: Vec<Vec<Vec3>> = Vec::with_capacity(steps + 1);
    states.push(BlochChainState::all_down(n).spins);
    for _ in 0..steps {
        let next = chain.rk4_step(states.last().unwrap(), dt, &mut scratch);
        states.push(next);
    }

    let e_static0 = chain.energy_unchecked(&states[0], false);
    let e_charge0 = chain.energy_unchecked(&states[0], true);
    let mut norm_drift = 0.0f64;
    let mut energy_dev = 0.0f64;
    let mut work = Vec::with_capacity(steps + 1);
    let mut mean_spin = Vec::with_capacity(steps + 1);
    for s in &states {
        for v in s {
            norm_drift = norm_drift.max((v.norm() - 1.0).abs());
        }
        energy_dev = energy_dev.max((chain.energy_unchecked(s, true) - e_charge0).abs());
        work.push(chain.energy_unchecked(s, false) - e_static0);
        mean_spin.push(s.iter().sum::<Vec3>() / n as f64);
    }
    if norm_drift > MAX_NORM_DRIFT {
        return Err(Error::NormDrift { drift: norm_drift, dt });
    }
    let energy_drift = if e_charge0 != 0.0 { energy_dev / e_charge0.abs() } else { energy_dev };

    let mut trace = WorkTrace::from_samples(times, work, |t| {
        let k = libm::floor(t / dt).clamp(0.0, steps as f64) as usize;
        let h = t - k as f64 * dt;
        let s = if h > 0.0 { chain.rk4_step(&states[k], h, &mut scratch) } else { states[k].clone() };
        chain.energy_unchecked(&s, false) - e_static0
    });
    trace.warnings = warnings;
    let final_state = BlochChainState { spins: states.pop().unwrap() };
    Ok(ClassicalRun { trace, mean_spin, final_state, norm_drift, energy_drift })
}

/// Result of the collective-spin integration.
#[derive(Clone, Debug)]
pub struct CollectiveRun {
    pub trace: WorkTrace,
    /// Average spin `s(t)` at every grid time.
    pub spin: Vec<Vec3>,
    pub norm_drift: f64,
}

/// Infinite-range chain as a single classical spin `s`:
///
/// ```text
/// ds_x/dt =  2gN(1-α) s_y s_z
/// ds_y/dt = -2ω s_z - 2gN(1-α) s_x s_z
/// ds_z/dt =  2ω s_y
/// ```
///
/// Work is `N [e(s(t)) - e(s(0))]` with the per-spin static energy
/// `e(s) = B s_z - (gN/2)[s_z² + α(s_x² + s_y²)]`.
pub fn integrate_collective(spec: &BatterySpec, t_max: f64, dt: f64) -> Result<CollectiveRun> {
    spec.validate()?;
    if spec.coupling != (Coupling::LongRange { p: 0.0 }) {
        return Err(Error::NotInfiniteRange);
    }
    let steps = step_count(t_max, dt)?;
    let times = uniform_grid(t_max, steps + 1)?;
    let dt = t_max / steps as f64;
    let n = spec.n_spins as f64;
    let omega = spec.omega;
    let alpha = spec.alpha;
    let gn = spec.g_strength * n;
    let c = gn * (1.0 - alpha);
    let flow = move |s: &[Vec3], out: &mut [Vec3]| {
        let v = s[0];
        out[0] = Vec3::new(2.0 * c * v.y * v.z, -2.0 * omega * v.z - 2.0 * c * v.x * v.z, 2.0 * omega * v.y);
    };
    let energy = |v: &Vec3| spec.field_b * v.z - 0.5 * gn * (v.z * v.z + alpha * (v.x * v.x + v.y * v.y));

    let mut scratch = Rk4Scratch::default();
    let mut spin = Vec::with_capacity(steps + 1);
    spin.push(Vec3::new(0.0, 0.0, -1.0));
    for _ in 0..steps {
        let next = rk4(&spin[spin.len() - 1..], dt, &mut scratch, flow)[0];
        spin.push(next);
    }
    let e0 = energy(&spin[0]);
    let work: Vec<f64> = spin.iter().map(|v| n * (energy(v) - e0)).collect();
    let norm_drift = spin.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max);
    let trace = WorkTrace::from_samples(times, work, |t| {
        let k = libm::floor(t / dt).clamp(0.0, steps as f64) as usize;
        let h = t - k as f64 * dt;
        let v = if h > 0.0 { rk4(&spin[k..k + 1], h, &mut Rk4Scratch::default(), flow)[0] } else { spin[k] };
        n * (energy(&v) - e0)
    });
    Ok(CollectiveRun { trace, spin, norm_drift })
}

/// Algebra of the average spin operators `s̃_k = (1/N) Σ_j σ_j^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorReport {
    pub n_spins: usize,
    /// `‖[s̃_x, s̃_y] - (2i/N) s̃_z‖`.
    pub commutator_defect: f64,
    /// `‖[s̃_x, s̃_y]‖`, which equals `2/N`.
    pub commutator_norm: f64,
    /// `max_k ‖[s̃², s̃_k]‖`.
    pub casimir_defect: f64,
    /// `⟨↓…↓| s̃² |↓…↓⟩`, which equals `1 + 2/N`.
    pub casimir_expectation: f64,
}

/// Largest chain for [`commutator_scaling_check`].
pub const MAX_COMMUTATOR_SPINS: usize = 10;

/// Builds the average spin operators of an `N`-spin chain and checks their
/// commutation relations. Norms are induced 1-norms (largest absolute column
/// sum), evaluated column by column on the sparse Pauli form.
pub fn commutator_scaling_check(n_spins: usize) -> Result<CommutatorReport> {
    if n_spins == 0 || n_spins > MAX_COMMUTATOR_SPINS {
        return Err(Error::argument("n_spins", alloc::format!("must lie in 1..={MAX_COMMUTATOR_SPINS}")));
    }
    let inv_n = 1.0 / n_spins as f64;
    let average = |axis: Axis| -> Result<PauliSum> {
        let mut s = PauliSum::new(n_spins);
        for j in 0..n_spins {
            s.push(PauliTerm::single(inv_n, j, axis))?;
        }
        Ok(s)
    };
    let (sx, sy, sz) = (average(Axis::X)?, average(Axis::Y)?, average(Axis::Z)?);
    let mut s2 = PauliSum::new(n_spins);
    for axis in [Axis::X, Axis::Y, Axis::Z] {
        for i in 0..n_spins {
            for j in 0..n_spins {
                let coef = inv_n * inv_n;
                if i == j {
                    s2.push(PauliTerm::identity(coef))?;
                } else {
                    s2.push(PauliTerm::pair(coef, (i, axis), (j, axis))?)?;
                }
            }
        }
    }

    let mut ws = ColumnWorkspace::new(1 << n_spins);
    let expected = C64::new(0.0, 2.0 * inv_n);
    let commutator_defect = ws.commutator_norm(&sx, &sy, Some((&sz, expected)));
    let commutator_norm = ws.commutator_norm(&sx, &sy, None);
    let casimir_defect = [&sx, &sy, &sz]
        .into_iter()
        .map(|s| ws.commutator_norm(&s2, s, None))
        .fold(0.0, f64::max);
    let down = crate::model::all_down_amplitudes(n_spins);
    let casimir_expectation = s2.expectation(&down)?;
    Ok(CommutatorReport { n_spins, commutator_defect, commutator_norm, casimir_defect, casimir_expectation })
}

struct ColumnWorkspace {
    column: Vec<C64>,
    touched: Vec<usize>,
    scratch: Vec<(usize, C64)>,
}

impl ColumnWorkspace {
    fn new(dim: usize) -> Self {
        Self { column: alloc::vec![C64::new(0.0, 0.0); dim], touched: Vec::new(), scratch: Vec::new() }
    }

    fn add(&mut self, row: usize, value: C64) {
        if self.column[row] == C64::new(0.0, 0.0) {
            self.touched.push(row);
        }
        self.column[row] += value;
    }

    /// Adds `scale · A B e_basis` to the column.
    fn add_product(&mut self, a: &PauliSum, b: &PauliSum, basis: usize, scale: f64) {
        self.scratch.clear();
        let scratch = &mut self.scratch;
        b.for_each_in_column(basis, |row, v| scratch.push((row, v)));
        let inner = core::mem::take(&mut self.scratch);
        for &(mid, v) in &inner {
            a.for_each_in_column(mid, |row, w| self.add(row, w * v * scale));
        }
        self.scratch = inner;
    }

    /// `max_b Σ_r |([A, B] - c D)_{rb}|`.
    fn commutator_norm(&mut self, a: &PauliSum, b: &PauliSum, minus: Option<(&PauliSum, C64)>) -> f64 {
        let dim = self.column.len();
        let mut worst = 0.0f64;
        for basis in 0..dim {
            self.add_product(a, b, basis, 1.0);
            self.add_product(b, a, basis, -1.0);
            if let Some((d, c)) = minus {
                d.for_each_in_column(basis, |row, v| self.add(row, -(c * v)));
            }
            let mut sum = 0.0;
            for &row in &self.touched {
                sum += crate::modulus(self.column[row]);
                self.column[row] = C64::new(0.0, 0.0);
            }
            self.touched.clear();
            worst = worst.max(sum);
        }
        worst
    }
}
