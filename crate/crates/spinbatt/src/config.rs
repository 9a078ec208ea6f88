//! Run configuration: modes, flag/file overrides and their resolution into
//! a validated [`RunConfig`].

use std::fmt;
use std::path::PathBuf;

use spinbatt_core::{BatterySpec, Coupling};

use crate::error::{HarnessError, Result};

/// Figure presets with locked physics parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Figure {
    /// Maximum power against anisotropy at `N = 4`.
    Anisotropy,
    /// Work of the strongly coupled two-spin battery.
    TwoSpinStrong,
    /// Maximum work and power against chain length at strong coupling.
    LengthScaling,
    /// Work and power of seven weakly coupled spins.
    WeakCoupling,
    /// Quantum against classical maximum power.
    QuantumClassical,
}

impl Figure {
    pub const ALL: [Figure; 5] =
        [Figure::Anisotropy, Figure::TwoSpinStrong, Figure::LengthScaling, Figure::WeakCoupling, Figure::QuantumClassical];

    pub fn from_number(n: u32) -> Result<Self> {
        Ok(match n {
            2 => Figure::Anisotropy,
            3 => Figure::TwoSpinStrong,
            4 => Figure::LengthScaling,
            5 => Figure::WeakCoupling,
            6 => Figure::QuantumClassical,
            _ => return Err(HarnessError::usage(format!("no figure preset {n}; choose 2, 3, 4, 5 or 6"))),
        })
    }

    pub fn number(self) -> u32 {
        match self {
            Figure::Anisotropy => 2,
            Figure::TwoSpinStrong => 3,
            Figure::LengthScaling => 4,
            Figure::WeakCoupling => 5,
            Figure::QuantumClassical => 6,
        }
    }

    /// Representative parameters of the preset. Presets that scan a
    /// parameter override it row by row.
    pub fn spec(self) -> BatterySpec {
        let (n, omega, g, alpha, coupling) = match self {
            Figure::Anisotropy => (4, 4.0, 1.0, 0.0, Coupling::LongRange { p: 1.0 }),
            Figure::TwoSpinStrong => (2, 3.0, 20.0, 0.0, Coupling::NearestNeighbor),
            Figure::LengthScaling => (2, 4.0, 100.0, 0.0, Coupling::NearestNeighbor),
            Figure::WeakCoupling => (7, 10.0, 1.0, 0.0, Coupling::LongRange { p: 1.0 }),
            Figure::QuantumClassical => (2, 4.0, 1.0, 0.0, Coupling::NearestNeighbor),
        };
        BatterySpec { n_spins: n, field_b: 1.0, omega, g_strength: g, alpha, coupling }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Trace,
    SweepAlpha,
    SweepN,
    Sweep,
    StrongCoupling,
    WeakCoupling,
    QuantumVsClassical,
    Figure(Figure),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Trace => f.write_str("trace"),
            Mode::SweepAlpha => f.write_str("sweep-alpha"),
            Mode::SweepN => f.write_str("sweep-n"),
            Mode::Sweep => f.write_str("sweep"),
            Mode::StrongCoupling => f.write_str("strongcoupling"),
            Mode::WeakCoupling => f.write_str("weakcoupling"),
            Mode::QuantumVsClassical => f.write_str("quantum-vs-classical"),
            Mode::Figure(fig) => write!(f, "figure {}", fig.number()),
        }
    }
}

/// Parameter scanned by a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Alpha,
    NSpins,
    GStrength,
    Omega,
    P,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::NSpins => "n_spins",
            SweepAxis::GStrength => "g_strength",
            SweepAxis::Omega => "omega",
            SweepAxis::P => "p",
        }
    }

    /// Copy of `spec` with this axis set to `value`.
    pub fn apply(self, spec: &BatterySpec, value: f64) -> Result<BatterySpec> {
        let mut s = *spec;
        match self {
            SweepAxis::Alpha => s.alpha = value,
            SweepAxis::GStrength => s.g_strength = value,
            SweepAxis::Omega => s.omega = value,
            SweepAxis::NSpins => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(HarnessError::usage(format!("n_spins values must be positive integers, got {value}")));
                }
                s.n_spins = value as usize;
            }
            SweepAxis::P => match s.coupling {
                Coupling::LongRange { .. } => s.coupling = Coupling::LongRange { p: value },
                _ => return Err(HarnessError::usage("sweeping p needs --coupling lr")),
            },
        }
        s.validate()?;
        Ok(s)
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "alpha" => SweepAxis::Alpha,
            "n_spins" | "n" => SweepAxis::NSpins,
            "g_strength" | "g" => SweepAxis::GStrength,
            "omega" => SweepAxis::Omega,
            "p" => SweepAxis::P,
            _ => {
                return Err(HarnessError::usage(format!(
                    "unknown sweep axis '{s}'; expected alpha, n_spins, g_strength, omega or p"
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    None,
    Nn,
    Lr,
}

impl std::str::FromStr for CouplingKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn" => Ok(CouplingKind::Nn),
            "lr" => Ok(CouplingKind::Lr),
            "none" => Ok(CouplingKind::None),
            _ => Err(HarnessError::usage(format!("unknown coupling '{s}'; expected nn, lr or none"))),
        }
    }
}

/// Settings as given on the command line or in a config file, before
/// defaults are applied.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n_spins: Option<usize>,
    pub field_b: Option<f64>,
    pub omega: Option<f64>,
    pub g_strength: Option<f64>,
    pub alpha: Option<f64>,
    pub coupling: Option<CouplingKind>,
    pub p: Option<f64>,
    pub t_max: Option<f64>,
    pub samples: Option<usize>,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub axis: Option<SweepAxis>,
    pub values: Option<Vec<f64>>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| HarnessError::usage(format!("cannot parse '{value}' for {key}")))
}

/// Parses `1,2,5` or an inclusive range `start:step:stop`.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(HarnessError::usage("empty value list"));
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let start: f64 = parse_value("values", parts[0].trim())?;
        let step: f64 = parse_value("values", parts[1].trim())?;
        let stop: f64 = parse_value("values", parts[2].trim())?;
        if !(step > 0.0) || stop < start {
            return Err(HarnessError::usage("range start:step:stop needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|k| start + step * k as f64).collect());
    }
    text.split(',').map(|v| parse_value("values", v.trim())).collect()
}

impl Overrides {
    /// Reads `key = value` lines; `#` starts a comment.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut ov = Overrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::usage(format!("config line {}: expected key = value", idx + 1)))?;
            ov.set(key.trim(), value.trim()).map_err(|e| match e {
                HarnessError::Usage(m) => HarnessError::usage(format!("config line {}: {m}", idx + 1)),
                other => other,
            })?;
        }
        Ok(ov)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n_spins = Some(parse_value(key, value)?),
            "b" => self.field_b = Some(parse_value(key, value)?),
            "omega" => self.omega = Some(parse_value(key, value)?),
            "g" => self.g_strength = Some(parse_value(key, value)?),
            "alpha" => self.alpha = Some(parse_value(key, value)?),
            "coupling" => self.coupling = Some(value.parse()?),
            "p" => self.p = Some(parse_value(key, value)?),
            "tmax" => self.t_max = Some(parse_value(key, value)?),
            "samples" => self.samples = Some(parse_value(key, value)?),
            "dt" => self.dt = Some(parse_value(key, value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "workers" => self.workers = Some(parse_value(key, value)?),
            "axis" => self.axis = Some(value.parse()?),
            "values" => self.values = Some(parse_values(value)?),
            _ => return Err(HarnessError::usage(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Fields set here win; unset fields fall back to `file`.
    pub fn or(self, file: Overrides) -> Overrides {
        Overrides {
            n_spins: self.n_spins.or(file.n_spins),
            field_b: self.field_b.or(file.field_b),
            omega: self.omega.or(file.omega),
            g_strength: self.g_strength.or(file.g_strength),
            alpha: self.alpha.or(file.alpha),
            coupling: self.coupling.or(file.coupling),
            p: self.p.or(file.p),
            t_max: self.t_max.or(file.t_max),
            samples: self.samples.or(file.samples),
            dt: self.dt.or(file.dt),
            out: self.out.or(file.out),
            workers: self.workers.or(file.workers),
            axis: self.axis.or(file.axis),
            values: self.values.or(file.values),
        }
    }

    /// Names of the settings a figure preset refuses.
    fn locked_settings(&self) -> Vec<&'static str> {
        let mut given = Vec::new();
        let checks = [
            (self.n_spins.is_some(), "n"),
            (self.field_b.is_some(), "b"),
            (self.omega.is_some(), "omega"),
            (self.g_strength.is_some(), "g"),
            (self.alpha.is_some(), "alpha"),
            (self.coupling.is_some(), "coupling"),
            (self.p.is_some(), "p"),
            (self.t_max.is_some(), "tmax"),
            (self.axis.is_some(), "axis"),
            (self.values.is_some(), "values"),
        ];
        for (set, name) in checks {
            if set {
                given.push(name);
            }
        }
        given
    }
}

pub const DEFAULT_SAMPLES: usize = 2000;
/// Integrator step in units of `1/ω`.
pub const DEFAULT_OMEGA_DT: f64 = 1e-3;

/// Fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub spec: BatterySpec,
    /// End of the time window; `None` picks a mode-specific default.
    pub t_max: Option<f64>,
    pub samples: usize,
    /// Classical integrator step times `ω` (absolute step when `ω = 0`).
    pub omega_dt: f64,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub axis: Option<SweepAxis>,
    pub values: Vec<f64>,
}

impl RunConfig {
    pub fn resolve(mode: Mode, ov: Overrides) -> Result<Self> {
        let samples = ov.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples < 2 {
            return Err(HarnessError::usage("samples must be at least 2"));
        }
        let omega_dt = ov.dt.unwrap_or(DEFAULT_OMEGA_DT);
        if !(omega_dt.is_finite() && omega_dt > 0.0) {
            return Err(HarnessError::usage("dt must be finite and > 0"));
        }
        if ov.workers == Some(0) {
            return Err(HarnessError::usage("workers must be at least 1"));
        }
        if let Some(t) = ov.t_max {
            if !(t.is_finite() && t > 0.0) {
                return Err(HarnessError::usage("tmax must be finite and > 0"));
            }
        }

        if let Mode::Figure(fig) = mode {
            let locked = ov.locked_settings();
            if !locked.is_empty() {
                return Err(HarnessError::usage(format!(
                    "figure {} locks its physics parameters and window; remove {}",
                    fig.number(),
                    locked.join(", ")
                )));
            }
            return Ok(RunConfig {
                mode,
                spec: fig.spec(),
                t_max: None,
                samples,
                omega_dt,
                out: ov.out,
                workers: ov.workers,
                axis: None,
                values: Vec::new(),
            });
        }

        let coupling = match (ov.coupling.unwrap_or(CouplingKind::Nn), ov.p) {
            (CouplingKind::Lr, p) => Coupling::LongRange { p: p.unwrap_or(1.0) },
            (_, Some(_)) => return Err(HarnessError::usage("--p only applies to --coupling lr")),
            (CouplingKind::Nn, None) => Coupling::NearestNeighbor,
            (CouplingKind::None, None) => Coupling::None,
        };
        let spec = BatterySpec::new(
            ov.n_spins.unwrap_or(4),
            ov.field_b.unwrap_or(1.0),
            ov.omega.unwrap_or(4.0),
            ov.g_strength.unwrap_or(1.0),
            ov.alpha.unwrap_or(0.0),
            coupling,
        )?;

        let (axis, values) = match mode {
            Mode::SweepAlpha | Mode::SweepN | Mode::Sweep => {
                let (fixed, default) = match mode {
                    Mode::SweepAlpha => (Some(SweepAxis::Alpha), Some("0:0.05:1")),
                    Mode::SweepN => (Some(SweepAxis::NSpins), Some("2:1:10")),
                    _ => (None, None),
                };
                let axis = match (fixed, ov.axis) {
                    (Some(f), Some(a)) if f != a => {
                        return Err(HarnessError::usage(format!("{mode} always sweeps {}", f.name())))
                    }
                    (Some(f), _) => f,
                    (None, Some(a)) => a,
                    (None, None) => return Err(HarnessError::usage("sweep needs --axis")),
                };
                let values = match (ov.values, default) {
                    (Some(v), _) => v,
                    (None, Some(d)) => parse_values(d)?,
                    (None, None) => return Err(HarnessError::usage("sweep needs --values")),
                };
                if values.is_empty() {
                    return Err(HarnessError::usage("empty value list"));
                }
                (Some(axis), values)
            }
            _ => {
                if ov.axis.is_some() || ov.values.is_some() {
                    return Err(HarnessError::usage(format!("--axis and --values only apply to sweeps, not {mode}")));
                }
                (None, Vec::new())
            }
        };

        Ok(RunConfig {
            mode,
            spec,
            t_max: ov.t_max,
            samples,
            omega_dt,
            out: ov.out,
            workers: ov.workers,
            axis,
            values,
        })
    }

    /// Absolute integrator step for `spec`.
    pub fn step_for(&self, spec: &BatterySpec) -> f64 {
        if spec.omega > 0.0 {
            self.omega_dt / spec.omega
        } else {
            self.omega_dt
        }
    }

    /// Command line that reproduces this run (output path excluded).
    pub fn command_line(&self) -> String {
        let mut parts = vec![format!("spinbatt {}", self.mode)];
        if !matches!(self.mode, Mode::Figure(_)) {
            let s = &self.spec;
            parts.push(format!("--n {} --b {} --omega {} --g {} --alpha {}", s.n_spins, s.field_b, s.omega, s.g_strength, s.alpha));
            parts.push(match s.coupling {
                Coupling::None => "--coupling none".to_string(),
                Coupling::NearestNeighbor => "--coupling nn".to_string(),
                Coupling::LongRange { p } => format!("--coupling lr --p {p}"),
            });
            if let Some(t) = self.t_max {
                parts.push(format!("--tmax {t}"));
            }
        }
        parts.push(format!("--samples {} --dt {}", self.samples, self.omega_dt));
        if let Some(axis) = self.axis {
            let values: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
            parts.push(format!("--axis {} --values {}", axis.name(), values.join(",")));
        }
        parts.join(" ")
    }
}
