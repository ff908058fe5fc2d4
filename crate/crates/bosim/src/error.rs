//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by state construction, optical transforms, experiment
/// pipelines, tomography, and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A creation operator would push an occupation past the two-photon cap.
    #[error("photon number cap exceeded: {0}")]
    PhotonNumberCap(String),

    /// Normalizing a state whose amplitudes have (numerically) zero norm.
    #[error("cannot normalize a zero-norm state")]
    ZeroNorm,

    /// An operation that requires normalized input received an unnormalized state.
    #[error("state must be normalized first: {0}")]
    NotNormalized(&'static str),

    /// A mode transform and a state disagree about the labels in play.
    #[error("mode domain mismatch: {0}")]
    DomainMismatch(String),

    /// A transform declared unitary fails the unitarity check.
    #[error("matrix is not unitary: {0}")]
    NotUnitary(String),

    /// A parameter is outside its physical or structural range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A post-selection or conditioning branch has zero probability.
    #[error("conditioning on a zero-probability branch: {0}")]
    ZeroProbabilityBranch(String),

    /// A curve is too short or too flat to fit.
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    /// Measurement data unusable for reconstruction.
    #[error("invalid measurement data: {0}")]
    InvalidCounts(String),

    /// A density matrix fails its structural checks.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    /// Configuration file or flag errors.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Artifact parsing failure (CSV/JSON read-back).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
