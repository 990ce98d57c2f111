use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Qubit count outside the supported range.
    #[error("qubit count {requested} outside supported range 1..={max}")]
    Capacity { requested: usize, max: usize },

    /// An operator that must be Hermitian is not.
    #[error("{context}: operator not Hermitian, anti-Hermitian norm {norm:.3e}")]
    NonHermitian { context: &'static str, norm: f64 },

    /// An operator that must be unitary is not.
    #[error("{context}: matrix not unitary, deviation {norm:.3e}")]
    NonUnitary { context: &'static str, norm: f64 },

    /// Matrix or sequence dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Pulse sequence failed a structural invariant.
    #[error("invalid pulse sequence: {0}")]
    InvalidSequence(String),

    /// Noise channels of concatenated sequences do not line up.
    #[error("channel mismatch: {0}")]
    ChannelMismatch(String),

    /// Spectral-density parameters rejected at construction.
    #[error("invalid spectral density: {0}")]
    InvalidSpectrum(String),

    /// The spectrum has no finite variance in the requested configuration.
    #[error("spectrum not integrable: {0}")]
    NotIntegrable(String),

    /// Frequency grid failed validation.
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    /// A time argument fell outside the sequence.
    #[error("time {t} outside sequence duration [0, {tau}]")]
    TimeOutOfRange { t: f64, tau: f64 },

    /// Grids or frames of per-gate control matrices disagree.
    #[error("control-matrix parts inconsistent: {0}")]
    FrameMismatch(String),

    /// The eigensolver left a residual above tolerance.
    #[error("eigendecomposition failed: residual norm {residual:.3e}")]
    EigenFailure { residual: f64 },

    /// Monte-Carlo configuration rejected.
    #[error("invalid trajectory configuration: {0}")]
    InvalidTrajectoryConfig(String),

    /// I/O failure while reading or writing data files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A data file could not be parsed.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}
