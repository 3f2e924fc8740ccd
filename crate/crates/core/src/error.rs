use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value violates its documented invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numeric input that must be finite was NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// Negative pulse width handed to the plant; the controller saturation
    /// should have clamped this.
    #[error("negative pulse width ({0} us); control signal must be >= 0")]
    NegativePulseWidth(f64),

    /// Paired series of different lengths.
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Not enough samples to build even one regression row.
    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    /// Feature vector of unexpected size.
    #[error("feature dimension mismatch: got {got}, model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },

    /// Simulated angle left the physically possible range.
    #[error("simulation diverged at t = {t:.3} s (angle {theta:.3} rad)")]
    Diverged { t: f64, theta: f64 },

    /// Malformed session CSV; `line` is 1-based and counts the header.
    #[error("{path}: line {line}: {msg}")]
    Csv {
        path: String,
        line: usize,
        msg: String,
    },

    /// Session logs from different subjects cannot be merged.
    #[error("cannot merge sessions from different subjects: {0} vs {1}")]
    MixedSubjects(String, String),

    /// Unsupported or corrupt persisted-model document.
    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
