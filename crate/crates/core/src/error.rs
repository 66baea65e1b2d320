//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Response value outside the physical range of a ±1-valued observable.
    #[error("response value {0} lies outside [-1, 1]")]
    ResponseOutOfRange(f64),

    /// Shot counts must be at least one.
    #[error("shot budget {given} is too small (need at least {need})")]
    BudgetTooSmall { given: u64, need: u64 },

    /// Branch discovery requires a non-stationary expansion point.
    #[error("response derivative at theta = {theta} is below 1e-9; cannot pick a monotone branch")]
    StationaryAtCenter { theta: f64 },

    /// Scanned a full period without finding a stationary point on one side.
    #[error("no stationary point found within one period of theta = {theta}")]
    BranchScanFailed { theta: f64 },

    /// Dense simulation is capped at 12 qubits.
    #[error("system size n = {0} exceeds the dense-simulation cap of 12 qubits")]
    SystemTooLarge(usize),

    #[error("qubit count n = {0} must be at least 1")]
    SystemTooSmall(usize),

    /// Pauli-Lindblad generator rates must be non-negative.
    #[error("negative generator rate {rate} for Pauli {label}")]
    InvalidRate { label: String, rate: f64 },

    /// Channel reconstruction produced probabilities more negative than tolerated.
    #[error("Pauli channel probability {0} is below the -1e-12 clip tolerance")]
    NegativeProbability(f64),

    #[error("unknown two-qubit Pauli label {0:?}")]
    UnknownPauliLabel(String),

    #[error("noise model file has no entry for site {0}")]
    MissingSite(usize),

    /// Closed-form responses exist only for the depolarizing variants.
    #[error("no closed-form response for this noise variant; use the density-matrix path")]
    UnsupportedVariant,

    #[error("extrapolation nodes must be distinct (nodes {a} and {b} coincide)")]
    DuplicateNodes { a: f64, b: f64 },

    #[error("expected {expected} node estimates, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("trigonometric design matrix is singular")]
    SingularSystem,

    #[error("inference dataset must have {expected} nodes, got {got}")]
    BadNodeCount { expected: usize, got: usize },

    #[error("bound diverges: sin(n theta*) = 0 at theta* = {0}")]
    StationaryBound(f64),

    #[error("depolarizing probability {0} must lie in [0, 1)")]
    InvalidProbability(f64),

    #[error("noise model file: {0}")]
    NoiseFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
