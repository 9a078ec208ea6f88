use std::f64::consts::PI;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use rayon::ThreadPool;

use spinbatt_core::dynamics::{doublet_half_splitting, slow_coupling_gap, ChargingSimulation};
use spinbatt_core::meanfield::integrate_chain;
use spinbatt_core::optimize::{earliest_argmax, golden_section_max};
use spinbatt_core::theory::{
    single_spin_max_power, strong_coupling_fast, strong_coupling_prediction, strong_coupling_slow,
    weak_coupling_extrema, weak_coupling_power, weak_coupling_work,
};
use spinbatt_core::{BatterySpec, Coupling, Extremum, WorkTrace};

use crate::analysis::fit_rabi_envelope;
use crate::config::{Figure, Mode, RunConfig, SweepAxis};
use crate::error::{HarnessError, Result};
use crate::table::ResultTable;

/// Default window for traces and sweeps, in units of `1/ω`.
const TRACE_WINDOW: f64 = 5.0 * PI;

fn pool(workers: Option<usize>) -> Result<ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

/// Runs a configuration and, when an output path is set, writes the CSV.
pub fn run(config: &RunConfig) -> Result<ResultTable> {
    let started = Instant::now();
    let unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let pool = pool(config.workers)?;
    let mut table = pool.install(|| dispatch(config))?;

    let mut header = vec![
        format!("spinbatt {}", env!("CARGO_PKG_VERSION")),
        format!("command = {}", config.command_line()),
        format!("started_unix = {unix}"),
    ];
    header.append(&mut table.header);
    header.push(format!("elapsed_s = {:.3}", started.elapsed().as_secs_f64()));
    table.header = header;

    if let Some(path) = &config.out {
        table.write(path)?;
    }
    Ok(table)
}

fn dispatch(config: &RunConfig) -> Result<ResultTable> {
    match config.mode {
        Mode::Trace => trace_mode(config),
        Mode::SweepAlpha | Mode::SweepN | Mode::Sweep => {
            let axis = config.axis.ok_or_else(|| HarnessError::usage("sweep needs --axis"))?;
            sweep(config, axis, &config.values)
        }
        Mode::StrongCoupling => strong_mode(config),
        Mode::WeakCoupling => weak_mode(config),
        Mode::QuantumVsClassical => classical_mode(config),
        Mode::Figure(fig) => figure(config, fig),
    }
}

fn window_or(config: &RunConfig, spec: &BatterySpec, periods: f64) -> Result<f64> {
    match config.t_max {
        Some(t) => Ok(t),
        None if spec.omega > 0.0 => Ok(periods / spec.omega),
        None => Err(HarnessError::usage("omega = 0 has no natural time window; pass --tmax")),
    }
}

fn note_warnings(table: &mut ResultTable, label: &str, trace: &WorkTrace) {
    for w in &trace.warnings {
        table.note(format!("warning ({label}): {w}"));
    }
}

fn note_extrema(table: &mut ResultTable, label: &str, trace: &WorkTrace) {
    table.note(format!("{label}: max work {:.11e} at t = {:.11e}", trace.max_work.value, trace.max_work.time));
    table.note(format!("{label}: max power {:.11e} at t = {:.11e}", trace.max_power.value, trace.max_power.time));
}

fn trace_mode(config: &RunConfig) -> Result<ResultTable> {
    let spec = config.spec;
    let t_max = window_or(config, &spec, TRACE_WINDOW)?;
    let trace = ChargingSimulation::new(&spec)?.trace(t_max, config.samples)?;
    let mut table = ResultTable::new(["t", "W", "P"]);
    note_extrema(&mut table, "exact", &trace);
    note_warnings(&mut table, "exact", &trace);
    for k in 0..trace.len() {
        table.push_row(vec![trace.times[k], trace.work[k], trace.power[k]]);
    }
    Ok(table)
}

/// One row per value of `axis`, with the located work and power maxima.
/// Rows are computed in parallel and returned in input order.
pub fn sweep(config: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<ResultTable> {
    if values.is_empty() {
        return Err(HarnessError::usage("empty value list"));
    }
    let rows: Vec<Result<(Vec<f64>, Vec<String>)>> =
        values.par_iter().map(|&v| sweep_row(config, axis, v)).collect();
    let mut table = ResultTable::new([axis.name(), "W_max", "T_Wmax", "P_max", "T_Pmax", "P_ind", "slow_gap"]);
    for row in rows {
        let (row, notes) = row?;
        for n in notes {
            table.note(n);
        }
        table.push_row(row);
    }
    Ok(table)
}

fn sweep_row(config: &RunConfig, axis: SweepAxis, value: f64) -> Result<(Vec<f64>, Vec<String>)> {
    let spec = axis.apply(&config.spec, value)?;
    let t_max = window_or(config, &spec, TRACE_WINDOW)?;
    let trace = ChargingSimulation::new(&spec)?.trace(t_max, config.samples)?;
    let p_ind = spec.n_spins as f64 * single_spin_max_power(spec.field_b, spec.omega).value;
    let gap = if spec.n_spins >= 2 && spec.g_strength >= 5.0 * spec.omega && spec.omega > 0.0 {
        slow_coupling_gap(&spec).map(|s| s.half_splitting).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    let notes = trace.warnings.iter().map(|w| format!("warning ({} = {value}): {w}", axis.name())).collect();
    let row = vec![
        value,
        trace.max_work.value,
        trace.max_work.time,
        trace.max_power.value,
        trace.max_power.time,
        p_ind,
        gap,
    ];
    Ok((row, notes))
}

fn strong_mode(config: &RunConfig) -> Result<ResultTable> {
    let spec = config.spec;
    let gap = slow_coupling_gap(&spec)?;
    let t_max = config.t_max.unwrap_or(PI / gap.half_splitting);
    let trace = ChargingSimulation::new(&spec)?.trace(t_max, config.samples)?;
    let (b, omega, g, n) = (spec.field_b, spec.omega, spec.g_strength, spec.n_spins);
    let slow_supported = strong_coupling_slow(b, omega, g, n, 0.0).is_ok();

    let mut table = ResultTable::new(["t", "W_exact", "W_fast", "W_slow"]);
    table.note(format!(
        "emergent coupling {:.11e} (doublet energy {:.11e}, separation ratio {:.3})",
        gap.half_splitting, gap.doublet_energy, gap.separation_ratio
    ));
    for w in &gap.warnings {
        table.note(format!("warning: {w}"));
    }
    if let Ok(pred) = strong_coupling_prediction(b, omega, g, n) {
        table.note(format!("predicted slow Rabi frequency {:.11e}", pred.slow_rabi_frequency));
    }
    note_extrema(&mut table, "exact", &trace);
    note_warnings(&mut table, "exact", &trace);
    for k in 0..trace.len() {
        let t = trace.times[k];
        let slow = if slow_supported { strong_coupling_slow(b, omega, g, n, t)? } else { f64::NAN };
        table.push_row(vec![t, trace.work[k], strong_coupling_fast(omega, g, t), slow]);
    }
    Ok(table)
}

fn weak_mode(config: &RunConfig) -> Result<ResultTable> {
    let spec = config.spec;
    let t_max = window_or(config, &spec, PI)?;
    let trace = ChargingSimulation::new(&spec)?.trace(t_max, config.samples)?;
    let mut table = ResultTable::new(["t", "W_exact", "W_pert", "P_exact", "P_pert"]);
    note_weak_prediction(&mut table, &spec)?;
    note_extrema(&mut table, "exact", &trace);
    note_warnings(&mut table, "exact", &trace);
    push_weak_rows(&mut table, &spec, &trace)?;
    Ok(table)
}

fn note_weak_prediction(table: &mut ResultTable, spec: &BatterySpec) -> Result<()> {
    let pred = weak_coupling_extrema(spec)?;
    table.note(format!("G = {:.11e}", pred.g_total));
    match pred.second {
        Some(e) => table.note(format!("perturbative max work {:.11e} at t = {:.11e}", e.value, e.time)),
        None => table.note(format!("perturbative max work {:.11e} at t = {:.11e}", pred.w_max1, pred.t_max1)),
    }
    table.note(format!("perturbative max power {:.11e} at t = {:.11e}", pred.p_max.value, pred.p_max.time));
    Ok(())
}

fn push_weak_rows(table: &mut ResultTable, spec: &BatterySpec, trace: &WorkTrace) -> Result<()> {
    for k in 0..trace.len() {
        let t = trace.times[k];
        table.push_row(vec![
            t,
            trace.work[k],
            weak_coupling_work(spec, t)?,
            trace.power[k],
            weak_coupling_power(spec, t)?,
        ]);
    }
    Ok(())
}

/// Classical run whose step divides the output grid, so every output time
/// is an integrator node.
fn classical_on_grid(spec: &BatterySpec, t_max: f64, samples: usize, step: f64) -> Result<(WorkTrace, Vec<f64>)> {
    let intervals = samples - 1;
    let stride = ((t_max / intervals as f64) / step).ceil().max(1.0) as usize;
    let dt = t_max / (intervals * stride) as f64;
    let run = integrate_chain(spec, t_max, dt)?;
    let work = (0..samples).map(|k| run.trace.work[k * stride]).collect();
    Ok((run.trace, work))
}

fn classical_mode(config: &RunConfig) -> Result<ResultTable> {
    let spec = config.spec;
    let t_max = window_or(config, &spec, PI)?;
    let quantum = ChargingSimulation::new(&spec)?.trace(t_max, config.samples)?;
    let (classical, c_work) = classical_on_grid(&spec, t_max, config.samples, config.step_for(&spec))?;
    let mut table = ResultTable::new(["t", "W_quantum", "W_classical", "P_quantum", "P_classical"]);
    note_extrema(&mut table, "quantum", &quantum);
    note_extrema(&mut table, "classical", &classical);
    note_warnings(&mut table, "quantum", &quantum);
    note_warnings(&mut table, "classical", &classical);
    for (k, &wc) in c_work.iter().enumerate().take(quantum.len()) {
        let t = quantum.times[k];
        let pc = if t > 0.0 { wc / t } else { 0.0 };
        table.push_row(vec![t, quantum.work[k], wc, quantum.power[k], pc]);
    }
    Ok(table)
}

fn figure(config: &RunConfig, fig: Figure) -> Result<ResultTable> {
    match fig {
        Figure::Anisotropy => anisotropy_figure(config),
        Figure::TwoSpinStrong => two_spin_figure(config),
        Figure::LengthScaling => length_figure(config),
        Figure::WeakCoupling => weak_figure(config),
        Figure::QuantumClassical => classical_figure(config),
    }
}

fn max_power_in_first_period(spec: &BatterySpec, samples: usize) -> Result<f64> {
    let trace = ChargingSimulation::new(spec)?.trace(PI / spec.omega, samples)?;
    Ok(trace.max_power.value)
}

fn anisotropy_figure(config: &RunConfig) -> Result<ResultTable> {
    let base = Figure::Anisotropy.spec();
    let alphas: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let p_ind = base.n_spins as f64 * single_spin_max_power(base.field_b, base.omega).value;
    let rows: Vec<Result<Vec<f64>>> = alphas
        .par_iter()
        .map(|&alpha| {
            let lr = BatterySpec { alpha, coupling: Coupling::LongRange { p: 1.0 }, ..base };
            let nn = BatterySpec { alpha, coupling: Coupling::NearestNeighbor, ..base };
            Ok(vec![
                alpha,
                max_power_in_first_period(&lr, config.samples)?,
                max_power_in_first_period(&nn, config.samples)?,
                p_ind,
            ])
        })
        .collect();
    let mut table = ResultTable::new(["alpha", "P_max_LR", "P_max_NN", "P_ind"]);
    table.note("N = 4, B = 1, omega = 4, g = 1, p = 1; power maximized over (0, pi/omega]");
    for row in rows {
        table.push_row(row?);
    }
    Ok(table)
}

fn two_spin_figure(config: &RunConfig) -> Result<ResultTable> {
    let spec = Figure::TwoSpinStrong.spec();
    let (b, omega, g) = (spec.field_b, spec.omega, spec.g_strength);
    let t_max = 2.0 * PI * g / (omega * omega);
    let trace = ChargingSimulation::new(&spec)?.trace(t_max, config.samples)?;
    let offset = 2.0 * omega * omega / g;

    let mut table = ResultTable::new(["t", "W_exact", "W_slow", "W_slow_plus_fast"]);
    table.note("N = 2, B = 1, omega = 3, g = 20, alpha = 0");
    if let Some(fit) = fit_rabi_envelope(&trace.times, &trace.work, 5.0 / g, t_max, 0.05 * omega * omega / g, 5.0 * omega * omega / g) {
        table.note(format!(
            "slow envelope fit: offset {:.6e}, amplitude {:.6e}, frequency {:.6e}",
            fit.offset, fit.amplitude, fit.frequency
        ));
    }
    note_warnings(&mut table, "exact", &trace);
    for k in 0..trace.len() {
        let t = trace.times[k];
        let slow = strong_coupling_slow(b, omega, g, 2, t)?;
        table.push_row(vec![t, trace.work[k], slow, slow - offset + strong_coupling_fast(omega, g, t)]);
    }
    Ok(table)
}

/// Work and power maxima on `[lo, hi]`, refined between grid neighbours.
fn window_extrema(sim: &ChargingSimulation, lo: f64, hi: f64, samples: usize) -> (Extremum, Extremum) {
    let lo = lo.max(0.0);
    let times: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
    let work_at = |t: f64| sim.work_at(t).unwrap_or(f64::NAN);
    let power_at = |t: f64| if t > 0.0 { work_at(t) / t } else { 0.0 };
    let locate = |f: &dyn Fn(f64) -> f64| {
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        let best = earliest_argmax(&values, 1e-9).unwrap_or(0);
        let a = times[best.saturating_sub(1)];
        let b = times[(best + 1).min(samples - 1)];
        let (t, v) = golden_section_max(f, a, b, 1e-10 * (b - a));
        if v > values[best] {
            Extremum { time: t, value: v }
        } else {
            Extremum { time: times[best], value: values[best] }
        }
    };
    (locate(&work_at), locate(&power_at))
}

/// `W_max, P_max, P_at_Wmax, W_at_Pmax` for one chain.
struct Peaks {
    values: [f64; 4],
    notes: Vec<String>,
}

fn peaks_from(w: Extremum, p: Extremum) -> [f64; 4] {
    [w.value, p.value, w.value / w.time, p.value * p.time]
}

/// Relative mismatch between the spectral doublet splitting and the
/// partitioned estimate above which the slow peak is not trusted.
const SLOW_PEAK_AGREEMENT: f64 = 1e-2;

fn strong_peaks(spec: &BatterySpec, label: &str, samples: usize) -> Result<Peaks> {
    let sim = ChargingSimulation::new(spec)?;
    let g = spec.g_strength;
    let mut notes = Vec::new();
    if spec.alpha == 1.0 {
        let trace = sim.trace(PI / spec.omega, samples)?;
        return Ok(Peaks { values: peaks_from(trace.max_work, trace.max_power), notes });
    }
    let fast = sim.trace(3.0 * PI / g, samples)?;
    let gap = slow_coupling_gap(spec)?;
    let direct = doublet_half_splitting(sim.propagator());
    let j = gap.half_splitting;
    if (direct - j).abs() > SLOW_PEAK_AGREEMENT * j {
        notes.push(format!(
            "{label} N = {}: slow peak near t = {:.3e} is beyond exact-dynamics resolution (spectral splitting {:.3e} vs {:.3e}); W_max and P_at_Wmax set to NaN",
            spec.n_spins,
            PI / (2.0 * j),
            direct,
            j
        ));
        let p = fast.max_power;
        return Ok(Peaks { values: [f64::NAN, p.value, f64::NAN, p.value * p.time], notes });
    }
    let center = PI / (2.0 * j);
    let (slow_w, slow_p) = window_extrema(&sim, center - 3.0 * PI / g, center + 3.0 * PI / g, samples);
    let w = if slow_w.value > fast.max_work.value { slow_w } else { fast.max_work };
    let p = if slow_p.value > fast.max_power.value { slow_p } else { fast.max_power };
    Ok(Peaks { values: peaks_from(w, p), notes })
}

fn length_figure(config: &RunConfig) -> Result<ResultTable> {
    let base = Figure::LengthScaling.spec();
    let families = [
        ("XXX", 1.0, Coupling::NearestNeighbor),
        ("NN", 0.0, Coupling::NearestNeighbor),
        ("LR", 0.0, Coupling::LongRange { p: 1.0 }),
    ];
    let jobs: Vec<(usize, usize)> = (2..=10).flat_map(|n| (0..families.len()).map(move |f| (n, f))).collect();
    let results: Vec<Result<Peaks>> = jobs
        .par_iter()
        .map(|&(n, f)| {
            let (label, alpha, coupling) = families[f];
            strong_peaks(&BatterySpec { n_spins: n, alpha, coupling, ..base }, label, config.samples)
        })
        .collect();

    let mut columns = vec!["N".to_string()];
    for (label, _, _) in families {
        for q in ["W_max", "P_max", "P_at_Wmax", "W_at_Pmax"] {
            columns.push(format!("{q}_{label}"));
        }
    }
    let mut table = ResultTable::new(columns);
    table.note("B = 1, omega = 4, g = 100; XXX alpha = 1, NN and LR (p = 1) alpha = 0");
    let mut results = results.into_iter();
    for n in 2..=10 {
        let mut row = vec![n as f64];
        for _ in 0..families.len() {
            let peaks = results.next().expect("one result per job")?;
            row.extend_from_slice(&peaks.values);
            for note in peaks.notes {
                table.note(format!("warning: {note}"));
            }
        }
        table.push_row(row);
    }
    Ok(table)
}

fn weak_figure(config: &RunConfig) -> Result<ResultTable> {
    let spec = Figure::WeakCoupling.spec();
    let trace = ChargingSimulation::new(&spec)?.trace(PI / spec.omega, config.samples)?;
    let mut table = ResultTable::new(["t", "W_exact", "W_pert", "P_exact", "P_pert"]);
    table.note("N = 7, B = 1, omega = 10, g = 1, alpha = 0, p = 1");
    note_weak_prediction(&mut table, &spec)?;
    note_extrema(&mut table, "exact", &trace);
    note_warnings(&mut table, "exact", &trace);
    push_weak_rows(&mut table, &spec, &trace)?;
    Ok(table)
}

fn classical_figure(config: &RunConfig) -> Result<ResultTable> {
    let base = Figure::QuantumClassical.spec();
    let families =
        [(1.0, Coupling::NearestNeighbor), (0.0, Coupling::NearestNeighbor), (0.0, Coupling::LongRange { p: 1.0 })];
    let jobs: Vec<(usize, usize, bool)> = (2..=8)
        .flat_map(|n| (0..families.len()).flat_map(move |f| [(n, f, false), (n, f, true)]))
        .collect();
    let t_max = PI / base.omega;
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(n, f, classical)| {
            let (alpha, coupling) = families[f];
            let spec = BatterySpec { n_spins: n, alpha, coupling, ..base };
            if classical {
                Ok(integrate_chain(&spec, t_max, config.step_for(&spec))?.trace.max_power.value)
            } else {
                Ok(ChargingSimulation::new(&spec)?.trace(t_max, config.samples)?.max_power.value)
            }
        })
        .collect();
    let mut table =
        ResultTable::new(["N", "Pmax_Q_XXX", "Pmax_C_XXX", "Pmax_Q_NN", "Pmax_C_NN", "Pmax_Q_LR", "Pmax_C_LR"]);
    table.note("B = 1, omega = 4, g = 1; XXX alpha = 1, NN and LR (p = 1) alpha = 0; power maximized over (0, pi/omega]");
    let mut results = results.into_iter();
    for n in 2..=8 {
        let mut row = vec![n as f64];
        for _ in 0..2 * families.len() {
            row.push(results.next().expect("one result per job")?);
        }
        table.push_row(row);
    }
    Ok(table)
}
