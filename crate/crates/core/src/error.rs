use thiserror::Error;

/// Errors raised by measure arithmetic, builders and the verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series diverges in block `{block}`: TV norm {norm} >= 1")]
    DivergentSeries { block: String, norm: f64 },

    #[error("measure has total mass {mass}, but the {kind} norm needs zero mass")]
    NonZeroMass { kind: &'static str, mass: f64 },

    #[error("total masses differ ({left} vs {right}); {kind} distance is undefined")]
    MassMismatch {
        kind: &'static str,
        left: f64,
        right: f64,
    },

    #[error("argument {x} is outside the supported range [0, {max}]; build the measure with cp_exponential instead")]
    OutOfRange { x: f64, max: f64 },

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("size guard exceeded: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, Error>;
