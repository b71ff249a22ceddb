//! Simulation and analysis of transient synchronization in open quantum
//! systems.
//!
//! Two dynamical engines are provided:
//!
//! * [`gaussian`]: harmonic networks with Gaussian states, evolved through the
//!   closed equations for first and second moments in the normal-mode basis.
//! * [`liouvillian`]: arbitrary finite-dimensional Lindblad generators in
//!   Liouville space, evolved through the biorthogonal eigensystem of the
//!   superoperator.
//!
//! [`spin`] builds the two concrete qubit-pair models on top of the
//! Liouvillian engine, and [`sync`] turns observable trajectories into
//! windowed Pearson indicators and coupling/detuning sweeps.
//!
//! Units: `hbar = k_B = m = 1` and all frequencies, rates and times are
//! expressed in units of the first oscillator (or qubit) frequency.

pub mod error;
pub mod gaussian;
pub mod grid;
pub mod linalg;
pub mod liouvillian;
pub mod spin;
pub mod sync;

pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use linalg::{CMatrix, CVector, C64};
