//! Time-dependent Hilbert-space metrics: time-ordered propagators, dynamical
//! invariants, Lewis-Riesenfeld phase decompositions, metric-changing symmetry
//! maps, and a Lindblad-type extension of the invariant equation.

pub mod covariance;
pub mod error;
pub mod lindblad;
pub mod metric;
pub mod operator;
pub mod phases;
pub mod propagator;
pub mod scenario;

pub use error::Error;
pub use operator::{eta_inner, EigenSystem, Operator, StateVector};

pub type Result<T> = std::result::Result<T, Error>;

/// Relative hermiticity tolerance (Frobenius, relative to the operator norm).
pub const DEFAULT_HERM_TOL: f64 = 1e-9;
/// Positive-definiteness floor on the minimum eigenvalue.
pub const DEFAULT_PD_TOL: f64 = 1e-10;
/// Minimum admissible spectral gap for eigenbranch tracking.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;
/// Commutator scale below which two Hamiltonians count as equivalent.
pub const DEFAULT_EQUIVALENCE_TOL: f64 = 1e-8;
/// Ray-return tolerance for cyclic phases.
pub const DEFAULT_CYC_TOL: f64 = 1e-6;
/// Smallest successive-overlap modulus accepted during branch tracking.
pub const DEFAULT_OVERLAP_FLOOR: f64 = 0.9;
/// Hermiticity pre-test deciding the spectral vs series path in `matrix_exp`.
pub const EXP_SPLIT_TOL: f64 = 1e-12;
/// Condition-number ceiling for inverses of propagators and maps.
pub const COND_LIMIT: f64 = 1e12;
