use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid value for `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("non-finite {what} encountered")]
    NonFinite { what: &'static str },

    #[error("frequency {freq_hz} Hz is at or above the Nyquist frequency {nyquist_hz} Hz")]
    AboveNyquist { freq_hz: f64, nyquist_hz: f64 },

    #[error("feedback loop is ill-posed: 1 + D_c * D_p = {0}")]
    IllPosedLoop(f64),

    #[error("controller design failed: {0}")]
    DesignInfeasible(String),

    #[error("learning filter inversion failed: {0}")]
    InversionFailed(String),

    #[error("length mismatch: {positions} positions vs {targets} targets")]
    LengthMismatch { positions: usize, targets: usize },

    #[error("Gram matrix of {n} points is not positive definite even with jitter {jitter:e}")]
    IllConditionedGram { n: usize, jitter: f64 },

    #[error("simulation diverged at sample {sample} ({signal}); last valid sample {last_valid:?}")]
    Diverged {
        sample: usize,
        signal: &'static str,
        last_valid: Option<usize>,
    },

    #[error("no complete spatial period in the simulated record")]
    NoCompletePeriod,
}

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what })
    }
}

pub(crate) fn ensure_positive(value: f64, name: &'static str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidArgument {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}
