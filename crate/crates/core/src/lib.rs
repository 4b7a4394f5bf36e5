//! Anti-PT symmetric two-mode sensing model.
//!
//! Two cavities coupled only through a shared dissipative bath form an
//! anti-PT symmetric system with exceptional points at `|delta| = 2 Gamma`.
//! This crate computes the spectrum and phase of the effective Hamiltonian,
//! the quadrature transfer function and its lasing singularities, the
//! Gaussian quantum Fisher information of a coherent probe, and the Laurent
//! pole order that sets how the quantum Cramér–Rao bound scales near a
//! critical frequency. A time-domain module cross-checks the amplitude
//! equations against a matrix propagator and a truncated-Fock master
//! equation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod invariants;
pub mod laurent;
pub mod metrology;
pub mod model;
pub mod params;
pub mod transfer;

pub use error::{Error, Result};
pub use grid::{GridSpec, Spacing};
pub use laurent::{
    analytic_laurent, numerical_residue, pole_order_fit, LaurentCase, LaurentExpansion, PoleFit,
};
pub use metrology::{qcrb, qcrb_sweep, qfi, CovarianceMode, ProbeConfig, QcrbSweep, SweepRow};
pub use model::{
    build_effective_hamiltonian, build_full_hamiltonian, classify_phase, eigensystem, Phase,
    Spectrum,
};
pub use params::{FullFrameParams, SystemParams};
pub use transfer::{critical_frequencies, transfer_matrix, CriticalCase, CriticalFrequencies};
