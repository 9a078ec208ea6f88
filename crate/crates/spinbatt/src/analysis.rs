//! Post-processing of sampled work curves.

use spinbatt_core::optimize::golden_section_max;

/// Best fit of `a + b sin²(Ωt)` to samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RabiFit {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

impl RabiFit {
    pub fn peak(&self) -> f64 {
        self.offset + self.amplitude
    }
}

/// Linear least squares for `(a, b)` at fixed `Ω`; returns `(a, b, rms)`.
fn fit_at(times: &[f64], work: &[f64], omega: f64) -> (f64, f64, f64) {
    let n = times.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (&t, &w) in times.iter().zip(work) {
        let x = (omega * t).sin().powi(2);
        sx += x;
        sy += w;
        sxx += x * x;
        sxy += x * w;
    }
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return (sy / n, 0.0, f64::INFINITY);
    }
    let b = (n * sxy - sx * sy) / det;
    let a = (sy - b * sx) / n;
    let ss: f64 = times
        .iter()
        .zip(work)
        .map(|(&t, &w)| {
            let r = w - a - b * (omega * t).sin().powi(2);
            r * r
        })
        .sum();
    (a, b, (ss / n).sqrt())
}

/// Fits `a + b sin²(Ωt)` to the samples with `t ∈ [t_lo, t_hi]`, scanning
/// `Ω ∈ [omega_lo, omega_hi]` on a grid and refining the best point.
pub fn fit_rabi_envelope(times: &[f64], work: &[f64], t_lo: f64, t_hi: f64, omega_lo: f64, omega_hi: f64) -> Option<RabiFit> {
    let (ts, ws): (Vec<f64>, Vec<f64>) =
        times.iter().zip(work).filter(|(&t, _)| t >= t_lo && t <= t_hi).map(|(&t, &w)| (t, w)).unzip();
    if ts.len() < 3 || !(omega_hi > omega_lo && omega_lo > 0.0) {
        return None;
    }
    const GRID: usize = 2000;
    let step = (omega_hi - omega_lo) / (GRID - 1) as f64;
    let score = |om: f64| -fit_at(&ts, &ws, om).2;
    let best = (0..GRID)
        .map(|k| omega_lo + step * k as f64)
        .map(|om| (om, score(om)))
        .fold((omega_lo, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let lo = (best.0 - step).max(omega_lo);
    let hi = (best.0 + step).min(omega_hi);
    let (frequency, _) = golden_section_max(score, lo, hi, 1e-12 * omega_hi);
    let (offset, amplitude, rms) = fit_at(&ts, &ws, frequency);
    Some(RabiFit { offset, amplitude, frequency, rms })
}

/// Mean of `f` over `[center - half_width, center + half_width]`
/// (composite Simpson rule).
pub fn window_average<F: FnMut(f64) -> f64>(mut f: F, center: f64, half_width: f64, intervals: usize) -> f64 {
    let m = (intervals.max(2) + 1) & !1;
    let a = center - half_width;
    let h = 2.0 * half_width / m as f64;
    let mut sum = f(a) + f(a + 2.0 * half_width);
    for k in 1..m {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * k as f64);
    }
    sum * h / 3.0 / (2.0 * half_width)
}
