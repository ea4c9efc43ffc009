use thiserror::Error;

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid array configuration: {0}")]
    InvalidArray(String),

    #[error("invalid lens configuration: {0}")]
    InvalidLens(String),

    #[error("invalid signal parameters: {0}")]
    InvalidSignal(String),

    #[error("direction of arrival {0} rad is outside the open interval (-pi/2, pi/2)")]
    DoaOutOfRange(f64),

    #[error("angular support [{lo}, {hi}] is empty or not inside (-pi/2, pi/2)")]
    DegenerateSupport { lo: f64, hi: f64 },

    #[error("invalid search configuration: {0}")]
    InvalidSearch(String),

    #[error("snapshot carries no energy along any candidate direction; gain is unidentifiable")]
    DegenerateSnapshot,

    #[error("trial with seed {seed:#018x} failed: {reason}")]
    TrialFailed { seed: u64, reason: String },

    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),
}
