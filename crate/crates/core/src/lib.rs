//! Simulation library for dark-state polaritons in coupled cavity arrays.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`] — sparse complex linear algebra, Krylov propagation and
//!   hermitian eigensolvers,
//! * [`hilbert`] — truncated occupation-number bases and elementary mode
//!   operators on cavity lattices,
//! * [`model`] — the microscopic atom-cavity Hamiltonian, the polariton
//!   transformation, closed-form effective parameters and the effective
//!   Bose-Hubbard Hamiltonian,
//! * [`dynamics`] — deterministic Schrödinger evolution and stochastic
//!   quantum-jump (Monte Carlo wavefunction) trajectories with parameter
//!   schedules,
//! * [`analysis`] — observables, ground-state tracking, W states and
//!   full-vs-effective model comparison metrics.
//!
//! All energies and rates are angular frequencies in s⁻¹ (ħ = 1).

pub mod analysis;
pub mod dynamics;
pub mod hilbert;
pub mod model;
pub mod numerics;

pub use analysis::{ComparisonSeries, ObservableSeries};
pub use dynamics::{JumpOperator, Schedule, Trajectory};
pub use hilbert::{CavityBasisState, CouplingGraph, LatticeBasis, Mode};
pub use model::{AtomCavityParams, EffectiveParams, ValidityReport};
pub use numerics::{SparseOperator, StateVector};
