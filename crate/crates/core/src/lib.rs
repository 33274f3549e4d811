//! Trapped one-dimensional bosons with contact interactions: exact
//! diagonalization on a truncated Fock space and the Bogoliubov
//! approximation built on a Gross-Pitaevskii condensate orbital.
//!
//! Units are dimensionless throughout (ħ = m = ω = 1): lengths in the
//! oscillator length, energies in ħω, the coupling `g` in ħω times the
//! oscillator length.

pub mod bogoliubov;
pub mod cli;
pub mod error;
pub mod exact;
pub mod fock;
pub mod hamiltonian;
pub mod orbitals;

pub use error::{Error, Result};
