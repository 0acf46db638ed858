//! Deterministic Schrödinger evolution and stochastic quantum-jump
//! (Monte Carlo wavefunction) trajectories with time-dependent parameter
//! schedules.

mod ensemble;
mod evolve;
mod schedule;
mod time_dep;

pub use ensemble::{ensemble_run, EnsembleStats};
pub use evolve::{
    build_jump_operators, evolve_schrodinger, quantum_jump_trajectory,
    quantum_jump_trajectory_stream, uniform_grid, EvolveOptions, JumpEvent, JumpOperator,
    JumpRate, Trajectory,
};
pub use schedule::{RampKind, Schedule, Segment};
pub use time_dep::{Coefficient, DrivenParams, FrozenOperator, OperatorTerm, TimeDependentOperator};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error("bad run setup: {0}")]
    BadGrid(String),
    #[error("no jump channel has positive weight at t = {t:.6e} s")]
    JumpSelection { t: f64 },
    #[error(transparent)]
    Numerics(#[from] crate::numerics::NumericsError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

pub type Result<T> = std::result::Result<T, DynamicsError>;
