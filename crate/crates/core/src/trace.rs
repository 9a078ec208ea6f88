use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::optimize::{earliest_argmax, golden_section_max};

/// Location and value of a maximum in time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub time: f64,
    pub value: f64,
}

/// Non-fatal diagnostics attached to a result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Warning {
    /// The time grid is coarser than the fastest oscillation it should resolve.
    Undersampled { spacing: f64, required: f64 },
    /// Strong-coupling reduction requested with `g < 5ω`.
    WeakCouplingForGap { g_over_omega: f64 },
    /// Integrator step is large compared with the fastest rate in the flow.
    LargeTimeStep { step_times_rate: f64 },
}

impl core::fmt::Display for Warning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match *self {
            Warning::Undersampled { spacing, required } => {
                write!(f, "grid spacing {spacing:e} exceeds {required:e}; fastest oscillation is undersampled")
            }
            Warning::WeakCouplingForGap { g_over_omega } => {
                write!(f, "g/omega = {g_over_omega} is below 5; two-level reduction is unreliable")
            }
            Warning::LargeTimeStep { step_times_rate } => {
                write!(f, "dt times fastest rate = {step_times_rate:e} exceeds 0.05")
            }
        }
    }
}

/// Work samples on a uniform time grid with located maxima of work and
/// average power.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkTrace {
    pub times: Vec<f64>,
    pub work: Vec<f64>,
    /// `W(t)/t`; zero at `t = 0`.
    pub power: Vec<f64>,
    pub max_work: Extremum,
    pub max_power: Extremum,
    pub warnings: Vec<Warning>,
}

/// Relative tolerance for "reaches the global grid maximum".
const TIE_TOLERANCE: f64 = 1e-9;
/// Bracket width at which golden-section refinement stops, relative to the grid step.
const REFINE_TOLERANCE: f64 = 1e-10;

pub(crate) fn uniform_grid(t_max: f64, n_samples: usize) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::argument("t_max", "must be finite and > 0"));
    }
    if n_samples < 2 {
        return Err(Error::argument("n_samples", "need at least 2 samples"));
    }
    let step = t_max / (n_samples - 1) as f64;
    Ok((0..n_samples).map(|k| if k + 1 == n_samples { t_max } else { step * k as f64 }).collect())
}

pub(crate) fn power_of(t: f64, w: f64) -> f64 {
    if t > 0.0 {
        w / t
    } else {
        0.0
    }
}

impl WorkTrace {
    /// Builds a trace from grid samples. `work_at` evaluates the work at any
    /// time inside the grid and is used to refine both maxima between the
    /// neighbours of the earliest best grid point.
    pub fn from_samples<F>(times: Vec<f64>, work: Vec<f64>, mut work_at: F) -> Self
    where
        F: FnMut(f64) -> f64,
    {
        assert_eq!(times.len(), work.len(), "times and work differ in length");
        assert!(times.len() >= 2, "a trace needs at least two samples");
        let power: Vec<f64> = times.iter().zip(&work).map(|(&t, &w)| power_of(t, w)).collect();
        let max_work = refine(&times, &work, &mut work_at);
        let max_power = refine(&times, &power, |t| power_of(t, work_at(t)));
        Self { times, work, power, max_work, max_power, warnings: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn refine<F: FnMut(f64) -> f64>(times: &[f64], values: &[f64], mut f: F) -> Extremum {
    let best = earliest_argmax(values, TIE_TOLERANCE).unwrap_or(0);
    let grid = Extremum { time: times[best], value: values[best] };
    let lo = times[best.saturating_sub(1)];
    let hi = times[(best + 1).min(times.len() - 1)];
    if hi <= lo {
        return grid;
    }
    let step = (hi - lo) / 2.0;
    let (t, v) = golden_section_max(&mut f, lo, hi, REFINE_TOLERANCE * step.max(f64::MIN_POSITIVE));
    if v > grid.value {
        Extremum { time: t, value: v }
    } else {
        grid
    }
}
