//! One-dimensional maximization helpers shared by the time-extremum searches.

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Assumes `f` is unimodal on the bracket. Only interior points are
/// evaluated, so `f` may be singular at the endpoints. Stops once the bracket
/// is narrower than `tol`; returns the best point seen and its value.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // Each iteration shrinks the bracket by INV_PHI; 200 covers any f64 span.
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Index of the earliest sample that reaches the global maximum within `rel_tol`
/// (relative to `max(1, |max|)`). Returns `None` for an empty slice or one
/// without a finite value.
pub fn earliest_argmax(values: &[f64], rel_tol: f64) -> Option<usize> {
    let max = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let slack = rel_tol * f64::max(1.0, max.abs());
    values.iter().position(|&v| v >= max - slack)
}

/// Dense grid scan of `f` on `[lo, hi]` followed by golden-section refinement
/// around the best grid point.
pub fn grid_then_golden_max<F>(mut f: F, lo: f64, hi: f64, samples: usize, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let samples = samples.max(3);
    let step = (hi - lo) / (samples - 1) as f64;
    let values: alloc::vec::Vec<f64> = (0..samples).map(|k| f(lo + step * k as f64)).collect();
    let best = earliest_argmax(&values, 0.0).unwrap_or(0);
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = lo + step * (best + 1).min(samples - 1) as f64;
    let (x, fx) = golden_section_max(&mut f, a, b, tol);
    if fx >= values[best] {
        (x, fx)
    } else {
        (lo + step * best as f64, values[best])
    }
}
