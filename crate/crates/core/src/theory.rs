//! Closed-form references for the single spin, the weakly interacting chain
//! and the strongly interacting two- and three-spin chains.

use libm::{acos, cos, sin};

use crate::error::{Error, Result};
use crate::model::{build_coupling, BatterySpec, Coupling};
use crate::optimize::grid_then_golden_max;
use crate::trace::Extremum;

use core::f64::consts::{FRAC_PI_2, PI};

fn sin2(x: f64) -> f64 {
    let s = sin(x);
    s * s
}

/// Bracket width for the power maximizations, in units of `1/ω`.
const POWER_TOLERANCE: f64 = 1e-10;
const POWER_GRID: usize = 2001;

/// Work on one spin after charging for `t`: `2B sin²(ωt)`.
pub fn single_spin_work(field_b: f64, omega: f64, t: f64) -> f64 {
    2.0 * field_b * sin2(omega * t)
}

/// Maximum of `2B sin²(ωT)/T` over `T ∈ (0, π/ω]`.
pub fn single_spin_max_power(field_b: f64, omega: f64) -> Extremum {
    if omega <= 0.0 {
        return Extremum { time: 0.0, value: 0.0 };
    }
    let f = |t: f64| if t > 0.0 { single_spin_work(field_b, omega, t) / t } else { 0.0 };
    let (time, value) = grid_then_golden_max(f, 0.0, PI / omega, POWER_GRID, POWER_TOLERANCE / omega);
    Extremum { time, value }
}

/// Total pair coupling `G` of a spec.
pub fn total_coupling(spec: &BatterySpec) -> Result<f64> {
    Ok(build_coupling(spec)?.total())
}

/// First-order weak-coupling work, `2BN sin²(ωt) + (1-α) G sin²(2ωt)`.
///
/// Exact for charging with the interactions switched off; for the interacting
/// chain it holds while `G t ≲ 1` and `G ≪ Nω`.
pub fn weak_coupling_work(spec: &BatterySpec, t: f64) -> Result<f64> {
    let g_total = total_coupling(spec)?;
    Ok(weak_work(spec, g_total, t))
}

fn weak_work(spec: &BatterySpec, g_total: f64, t: f64) -> f64 {
    let n = spec.n_spins as f64;
    let wt = spec.omega * t;
    2.0 * spec.field_b * n * sin2(wt) + (1.0 - spec.alpha) * g_total * sin2(2.0 * wt)
}

/// Weak-coupling average power in the factored form
/// `4ω [BN/2 + (1-α) G cos²(ωT)] sin²(ωT) / (ωT)`.
pub fn weak_coupling_power(spec: &BatterySpec, t: f64) -> Result<f64> {
    let g_total = total_coupling(spec)?;
    Ok(weak_power(spec, g_total, t))
}

fn weak_power(spec: &BatterySpec, g_total: f64, t: f64) -> f64 {
    let x = spec.omega * t;
    if x <= 0.0 {
        return 0.0;
    }
    let n = spec.n_spins as f64;
    let c = cos(x);
    4.0 * spec.omega * (0.5 * spec.field_b * n + (1.0 - spec.alpha) * g_total * c * c) * sin2(x) / x
}

/// Extrema of the weak-coupling work and power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakCouplingPrediction {
    /// First time of the independent-spin maximum, `π/2ω`.
    pub t_max1: f64,
    /// `2BN`.
    pub w_max1: f64,
    /// Interaction-enhanced maximum, present only when `2(1-α)G/BN > 1`.
    pub second: Option<Extremum>,
    pub p_max: Extremum,
    /// `G` used for the prediction.
    pub g_total: f64,
}

/// Locates the weak-coupling maxima.
///
/// When `2(1-α)G > BN` the times `nπ/2ω` turn into local minima and the
/// maximum moves to `cos(2ωT) = -BN / (2(1-α)G)` (principal branch, earliest
/// time). The power maximum has no closed form and is found numerically on
/// `(0, π/ω]`.
pub fn weak_coupling_extrema(spec: &BatterySpec) -> Result<WeakCouplingPrediction> {
    let g_total = total_coupling(spec)?;
    if spec.omega <= 0.0 {
        return Err(Error::argument("omega", "weak-coupling extrema need a charging field"));
    }
    let b = spec.field_b;
    let n = spec.n_spins as f64;
    let bn = b * n;
    let anisotropic = (1.0 - spec.alpha) * g_total;
    let second = if anisotropic > 0.0 && 2.0 * anisotropic / bn > 1.0 {
        let c = -2.0 * bn / (4.0 * anisotropic);
        let time = acos(c) / (2.0 * spec.omega);
        let ratio = 1.0 + 2.0 * anisotropic / bn;
        let value = b * b * n * n * ratio * ratio / (4.0 * anisotropic);
        Some(Extremum { time, value })
    } else {
        None
    };
    let (time, value) = grid_then_golden_max(
        |t| weak_power(spec, g_total, t),
        0.0,
        PI / spec.omega,
        POWER_GRID,
        POWER_TOLERANCE / spec.omega,
    );
    Ok(WeakCouplingPrediction {
        t_max1: FRAC_PI_2 / spec.omega,
        w_max1: 2.0 * bn,
        second,
        p_max: Extremum { time, value },
        g_total,
    })
}

/// Fast strong-coupling oscillation of the two-spin chain,
/// `(4ω²/g) sin²(gt)`, valid for `t ≪ g/ω²`.
pub fn strong_coupling_fast(omega: f64, g: f64, t: f64) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    4.0 * omega * omega / g * sin2(g * t)
}

/// Slow strong-coupling oscillation, valid for `t ≫ 1/g`.
///
/// `N = 2`: `2ω²/g + 4B sin²(ω²t/g)`. `N = 3` (all pairs coupled with `g`):
/// `6B sin²(3ω³t/8g²)`, without the offset from the averaged fast motion.
pub fn strong_coupling_slow(field_b: f64, omega: f64, g: f64, n_spins: usize, t: f64) -> Result<f64> {
    let p = strong_coupling_prediction(field_b, omega, g, n_spins)?;
    Ok(p.slow_offset + p.slow_amplitude * sin2(p.slow_rabi_frequency * t))
}

/// Parameters of the fast and slow strong-coupling oscillations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StrongCouplingPrediction {
    /// `4ω²/g`; zero for `N = 3` where no fast form is given.
    pub fast_amplitude: f64,
    /// Angular frequency `g` of `sin²(gt)`.
    pub fast_frequency: f64,
    pub slow_offset: f64,
    pub slow_amplitude: f64,
    /// `ω²/g` for two spins, `3ω³/8g²` for three.
    pub slow_rabi_frequency: f64,
    /// Fast form holds for `t` well below this (`g/ω²`).
    pub fast_valid_until: f64,
    /// Slow form holds for `t` well above this (`1/g`).
    pub slow_valid_after: f64,
}

pub fn strong_coupling_prediction(field_b: f64, omega: f64, g: f64, n_spins: usize) -> Result<StrongCouplingPrediction> {
    if !(g > 0.0) {
        return Err(Error::argument("g_strength", "strong-coupling forms need g > 0"));
    }
    let w2 = omega * omega;
    let (fast_amplitude, slow_offset, slow_amplitude, slow_rabi_frequency) = match n_spins {
        2 => (4.0 * w2 / g, 2.0 * w2 / g, 4.0 * field_b, w2 / g),
        3 => (0.0, 0.0, 6.0 * field_b, 3.0 * w2 * omega / (8.0 * g * g)),
        n => return Err(Error::UnsupportedSpinCount { n_spins: n, supported: "N = 2 or N = 3" }),
    };
    Ok(StrongCouplingPrediction {
        fast_amplitude,
        fast_frequency: g,
        slow_offset,
        slow_amplitude,
        slow_rabi_frequency,
        fast_valid_until: if w2 > 0.0 { g / w2 } else { f64::INFINITY },
        slow_valid_after: 1.0 / g,
    })
}

/// Growth class of a quantity with chain length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GrowthClass {
    Constant,
    LogN,
    Linear,
    NLogN,
    Quadratic,
    /// `N^exponent` with a non-integer exponent (long range with `0 < p < 1`).
    Power { exponent: f64 },
}

/// How `G` grows with `N` and the resulting power enhancement over
/// independent spins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GScaling {
    pub total_coupling: GrowthClass,
    pub power_enhancement: GrowthClass,
}

pub fn g_scaling_class(coupling: Coupling) -> GScaling {
    use GrowthClass::*;
    let (total_coupling, power_enhancement) = match coupling {
        Coupling::None => (Constant, Constant),
        Coupling::NearestNeighbor => (Linear, Constant),
        Coupling::LongRange { p } if p > 1.0 => (Linear, Constant),
        Coupling::LongRange { p: 1.0 } => (NLogN, LogN),
        Coupling::LongRange { p: 0.0 } => (Quadratic, Linear),
        Coupling::LongRange { p } => (Power { exponent: 2.0 - p }, Power { exponent: 1.0 - p }),
    };
    GScaling { total_coupling, power_enhancement }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_spin_work_values() {
        assert_relative_eq!(single_spin_work(1.0, 2.0, PI / 4.0), 2.0, epsilon = 1e-15);
        assert_eq!(single_spin_work(1.0, 2.0, 0.0), 0.0);
        assert!(single_spin_work(1.0, 2.0, PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_spin_power_near_one_point_four() {
        let p = single_spin_max_power(1.0, 1.0);
        assert!((p.value - 1.4).abs() / 1.4 < 0.05);
        assert!((p.time - 1.2).abs() < 0.05);
    }

    #[test]
    fn weak_work_two_spins_quarter_period() {
        let s = BatterySpec::new(2, 1.0, 1.0, 0.7, 0.0, Coupling::NearestNeighbor).unwrap();
        assert_relative_eq!(weak_coupling_work(&s, PI / 4.0).unwrap(), 2.0 + 0.7, epsilon = 1e-14);
    }

    #[test]
    fn isotropic_weak_work_is_independent() {
        let s = BatterySpec::new(5, 1.0, 2.0, 3.0, 1.0, Coupling::LongRange { p: 0.0 }).unwrap();
        for k in 0..10 {
            let t = 0.31 * k as f64;
            assert_eq!(weak_coupling_work(&s, t).unwrap(), 10.0 * sin2(2.0 * t));
        }
        let pred = weak_coupling_extrema(&s).unwrap();
        assert!(pred.second.is_none());
        assert_relative_eq!(pred.p_max.value, 5.0 * single_spin_max_power(1.0, 2.0).value, max_relative = 1e-12);
    }

    #[test]
    fn power_form_matches_work_over_time() {
        let s = BatterySpec::new(4, 1.0, 3.0, 1.5, 0.3, Coupling::LongRange { p: 1.0 }).unwrap();
        for k in 1..30 {
            let t = 0.05 * k as f64;
            let w = weak_coupling_work(&s, t).unwrap();
            assert_relative_eq!(weak_coupling_power(&s, t).unwrap(), w / t, max_relative = 1e-12);
        }
    }

    #[test]
    fn enhanced_maximum_continuous_at_threshold() {
        // 2(1-α)G = BN with N = 2: G = 1, α = 0.
        let s = BatterySpec::new(2, 1.0, 1.0, 1.0 + 1e-12, 0.0, Coupling::NearestNeighbor).unwrap();
        let second = weak_coupling_extrema(&s).unwrap().second.unwrap();
        assert_relative_eq!(second.value, 4.0, max_relative = 1e-9);
        assert_relative_eq!(second.time, FRAC_PI_2, max_relative = 1e-5);
    }

    #[test]
    fn strong_coupling_values() {
        assert_relative_eq!(strong_coupling_fast(3.0, 20.0, PI / 40.0), 1.8, epsilon = 1e-14);
        assert_eq!(strong_coupling_fast(3.0, 20.0, 0.0), 0.0);
        assert_relative_eq!(strong_coupling_slow(1.0, 3.0, 20.0, 2, 0.0).unwrap(), 0.9, epsilon = 1e-15);
        let (w, g) = (4.0, 100.0);
        let t = 4.0 * PI * g * g / (3.0 * w * w * w);
        assert_relative_eq!(strong_coupling_slow(1.0, w, g, 3, t).unwrap(), 6.0, epsilon = 1e-12);
        assert!(matches!(
            strong_coupling_slow(1.0, w, g, 4, t),
            Err(Error::UnsupportedSpinCount { n_spins: 4, .. })
        ));
    }

    #[test]
    fn scaling_classes() {
        use GrowthClass::*;
        assert_eq!(g_scaling_class(Coupling::NearestNeighbor).total_coupling, Linear);
        assert_eq!(g_scaling_class(Coupling::LongRange { p: 2.0 }).power_enhancement, Constant);
        assert_eq!(g_scaling_class(Coupling::LongRange { p: 1.0 }), GScaling { total_coupling: NLogN, power_enhancement: LogN });
        assert_eq!(g_scaling_class(Coupling::LongRange { p: 0.0 }), GScaling { total_coupling: Quadratic, power_enhancement: Linear });
        assert_eq!(
            g_scaling_class(Coupling::LongRange { p: 0.5 }).total_coupling,
            Power { exponent: 1.5 }
        );
    }
}
