//! Simulation library for periodically kicked, blockade-constrained spin
//! chains.
//!
//! The drive alternates free evolution under a constrained Hamiltonian
//! (PXP, its long-range deformation, or a full-space Rydberg chain) with a
//! global rotation `exp(-iθN)` of the excitation number N. Around θ = π the
//! chain locks into a period-doubled response seeded by quantum many-body
//! scars; the crate provides the state spaces, operators, Floquet
//! propagation, diagnostics (subharmonic weight, entanglement, fidelities,
//! correlators), the scarred-subspace Bloch picture, and the prethermal
//! effective Hamiltonian with its π-paired spectra and emergent timescales.

pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod observables;
pub mod operators;
pub mod prethermal;
pub mod scars;

pub use error::{Error, Result};

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;
