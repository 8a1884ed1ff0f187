//! Error type shared by all toolkit modules.

use thiserror::Error;

/// Errors raised by model construction, numerical solvers, and simulations.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix dimensions are inconsistent for the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An input matrix or parameter contains NaN or infinity.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// A parameter violates its documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A linear system to be inverted is singular (e.g. response evaluated
    /// exactly at an undamped pole, or an algebraic feedback loop).
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// An iterative numerical method failed to converge.
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    /// No stabilizing Riccati solution exists (Hamiltonian has eigenvalues on
    /// the imaginary axis) or the invariant subspace is ill-conditioned.
    #[error("no stabilizing solution: {0}")]
    NoStabilizingSolution(String),

    /// An operation that requires a stable system received an unstable one.
    #[error("unstable system: {0}")]
    UnstableSystem(String),

    /// Controller synthesis is infeasible or failed its verification bound.
    #[error("synthesis failure: {0}")]
    SynthesisFailure(String),

    /// A closed-loop simulation exceeded the divergence guard threshold.
    #[error("simulation diverged at t = {time:.3} s (state norm {norm:.3e} exceeds guard {guard:.3e})")]
    SimulationDiverged { time: f64, norm: f64, guard: f64 },
}

/// Convenience result alias for toolkit operations.
pub type Result<T> = std::result::Result<T, Error>;
