//! Error taxonomy shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator not Hermitian: relative defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("operator not positive-definite: min eigenvalue {min_eig:.3e}")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("Hamiltonian evaluation failed at t = {t}: {reason}")]
    EvaluationFailure { t: f64, reason: String },

    #[error("propagator numerically singular at step {step}: condition estimate {cond:.3e}")]
    SingularPropagator { step: usize, cond: f64 },

    #[error("degenerate spectrum: gap {gap:.3e} at or below gap_tol {gap_tol:.3e}")]
    DegenerateSpectrum { gap: f64, gap_tol: f64 },

    #[error(
        "branch crossing at step {step}: gap {gap:.3e}, successive overlap {overlap:.3e}"
    )]
    BranchCrossing { step: usize, gap: f64, overlap: f64 },

    #[error("non-real energy expectation at t = {t}: imaginary part {imag:.3e}")]
    NonRealExpectation { t: f64, imag: f64 },

    #[error("incomplete branch set: expected {expected}, got {got}")]
    IncompleteBranchSet { expected: usize, got: usize },

    #[error("trajectory not cyclic: |<v0,vT>| = {overlap:.6} below ray-return tolerance")]
    NotCyclic { overlap: f64 },

    #[error("map numerically singular at step {step}: condition estimate {cond:.3e}")]
    SingularMap { step: usize, cond: f64 },

    #[error("evolution operator singular at step {step}: condition estimate {cond:.3e}")]
    SingularEvolution { step: usize, cond: f64 },

    #[error("positivity lost at step {step} (t = {t}): min eigenvalue {min_eig:.3e}")]
    PositivityLost { step: usize, t: f64, min_eig: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid config field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code assigned to this error when it escapes the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation { .. } => 2,
            _ => 3,
        }
    }
}
