//! Spin-chain quantum battery.
//!
//! An XXZ Heisenberg chain of `N` spin-1/2 sites starts in its ferromagnetic
//! ground state (all spins down) and is charged by a uniform transverse field.
//! This crate provides:
//!
//! - [`model`]: battery parameters, coupling matrices and dense Hamiltonians
//!   assembled from sparse Pauli strings ([`pauli`]).
//! - [`dynamics`]: exact time evolution by diagonalization, deposited work and
//!   average power, interaction-frozen charging and the emergent slow coupling
//!   of the strongly interacting chain.
//! - [`theory`]: closed-form single-spin, weak-coupling and strong-coupling
//!   references.
//! - [`meanfield`]: correlation-free Bloch-vector dynamics of the same chain
//!   and of the infinite-range collective spin.
//!
//! Units: the Zeeman splitting `B` sets the energy scale and `ħ = 1`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod meanfield;
pub mod model;
pub mod optimize;
pub mod pauli;
pub mod theory;
mod trace;

pub use error::{Error, ErrorKind, Result};
pub use model::{BatterySpec, Coupling};
pub use trace::{Extremum, Warning, WorkTrace};

/// Complex amplitude type used for state vectors.
pub type C64 = nalgebra::Complex<f64>;

pub(crate) fn modulus(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}
