use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spinbatt::config::{parse_values, CouplingKind};
use spinbatt::{run, Figure, HarnessError, Mode, Overrides, RunConfig, SweepAxis};

/// Spin-chain quantum battery simulator.
#[derive(Debug, Parser)]
#[command(name = "spinbatt", version)]
struct Cli {
    #[command(subcommand)]
    mode: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact work and power against time.
    Trace(Flags),
    /// Maximum work and power against anisotropy.
    SweepAlpha(Flags),
    /// Maximum work and power against chain length.
    SweepN(Flags),
    /// Maximum work and power against any parameter (see --axis).
    Sweep(Flags),
    /// Exact work beside the fast and slow strong-coupling forms.
    #[command(name = "strongcoupling")]
    StrongCoupling(Flags),
    /// Exact work and power beside the first-order weak-coupling forms.
    #[command(name = "weakcoupling")]
    WeakCoupling(Flags),
    /// Quantum chain beside its classical mean-field counterpart.
    QuantumVsClassical(Flags),
    /// Regenerate a figure table (2-6) with locked parameters.
    Figure {
        id: u32,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Args)]
struct Flags {
    /// Number of spins.
    #[arg(long)]
    n: Option<usize>,
    /// Zeeman splitting B (default 1).
    #[arg(long)]
    b: Option<f64>,
    /// Charging field strength (default 4).
    #[arg(long)]
    omega: Option<f64>,
    /// Interaction strength (default 1).
    #[arg(long)]
    g: Option<f64>,
    /// Anisotropy in [-1, 1] (default 0).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Coupling scheme: nn, lr or none (default nn).
    #[arg(long)]
    coupling: Option<String>,
    /// Long-range decay exponent (default 1).
    #[arg(long)]
    p: Option<f64>,
    /// End of the time window.
    #[arg(long)]
    tmax: Option<f64>,
    /// Time samples (default 2000).
    #[arg(long)]
    samples: Option<usize>,
    /// Classical integrator step in units of 1/omega (default 1e-3).
    #[arg(long)]
    dt: Option<f64>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and presets.
    #[arg(long)]
    workers: Option<usize>,
    /// Plain key = value file; flags win over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sweep axis: alpha, n_spins, g_strength, omega or p.
    #[arg(long)]
    axis: Option<String>,
    /// Sweep values: "a,b,c" or "start:step:stop".
    #[arg(long)]
    values: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Result<Overrides, HarnessError> {
        Ok(Overrides {
            n_spins: self.n,
            field_b: self.b,
            omega: self.omega,
            g_strength: self.g,
            alpha: self.alpha,
            coupling: self.coupling.as_deref().map(str::parse::<CouplingKind>).transpose()?,
            p: self.p,
            t_max: self.tmax,
            samples: self.samples,
            dt: self.dt,
            out: self.out.clone(),
            workers: self.workers,
            axis: self.axis.as_deref().map(str::parse::<SweepAxis>).transpose()?,
            values: self.values.as_deref().map(parse_values).transpose()?,
        })
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, HarnessError> {
    let (mode, flags) = match cli.mode {
        Command::Trace(f) => (Mode::Trace, f),
        Command::SweepAlpha(f) => (Mode::SweepAlpha, f),
        Command::SweepN(f) => (Mode::SweepN, f),
        Command::Sweep(f) => (Mode::Sweep, f),
        Command::StrongCoupling(f) => (Mode::StrongCoupling, f),
        Command::WeakCoupling(f) => (Mode::WeakCoupling, f),
        Command::QuantumVsClassical(f) => (Mode::QuantumVsClassical, f),
        Command::Figure { id, flags } => (Mode::Figure(Figure::from_number(id)?), flags),
    };
    let file = match &flags.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
            Overrides::parse_config(&text)?
        }
        None => Overrides::default(),
    };
    RunConfig::resolve(mode, flags.overrides()?.or(file))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = resolve(cli).and_then(|config| {
        let table = run(&config)?;
        if config.out.is_none() {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(table.to_csv().as_bytes())
                .map_err(|source| HarnessError::Io { path: PathBuf::from("<stdout>"), source })?;
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinbatt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
