//! Experiment harness for the spin-chain battery: run configurations,
//! parameter sweeps, figure presets and CSV output.

pub mod analysis;
pub mod config;
pub mod error;
mod run;
pub mod table;

pub use config::{Figure, Mode, Overrides, RunConfig, SweepAxis};
pub use error::{HarnessError, Result};
pub use run::{run, sweep};
pub use table::ResultTable;
