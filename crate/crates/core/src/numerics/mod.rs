//! Sparse complex linear algebra and propagation kernels.

mod dense;
mod eig;
mod krylov;
mod sparse;
mod state;

pub use dense::DenseMatrix;
pub use eig::{lowest_eigenpair, lowest_eigenpair_with, EigOptions};
pub use krylov::{propagate, propagate_step, KrylovStepOutcome, KrylovStepper, PropagatorOptions};
pub use sparse::SparseOperator;
pub use state::StateVector;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("operator dimension {op} does not match vector dimension {vec}")]
    DimensionMismatch { op: usize, vec: usize },
    #[error("operator dimensions {a} and {b} are incompatible")]
    OperatorMismatch { a: usize, b: usize },
    #[error("operator is not hermitian (max relative asymmetry {found:.3e}, tolerance {tol:.3e})")]
    NotHermitian { tol: f64, found: f64 },
    #[error("eigensolver did not converge after {iterations} iterations")]
    EigNotConverged { iterations: usize },
    #[error("hermitian-flagged input required")]
    HermitianRequired,
    #[error("requested {k} eigenpairs from a dimension-{dim} operator")]
    TooManyEigenpairs { k: usize, dim: usize },
    #[error("propagation step rejected below the minimum step size at t = {t:.6e} s")]
    StepRejected { t: f64 },
    #[error("jump-time bisection did not converge after {iterations} iterations")]
    BisectionFailed { iterations: usize },
    #[error("non-finite amplitudes encountered in {context}")]
    NonFinite { context: &'static str },
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Matrix-free linear operator on complex vectors.
pub trait LinearOp {
    fn dim(&self) -> usize;
    /// `y += scale * A x`. `y` must already hold valid data of the same length.
    fn apply_acc(&self, x: &[num_complex::Complex64], scale: num_complex::Complex64, y: &mut [num_complex::Complex64]);
}
