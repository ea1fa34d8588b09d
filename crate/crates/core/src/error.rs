use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The order-two invariance system has no unique solution.
    #[error("singular manifold system for {param} = {value}, lambda = {lambda}")]
    Singular {
        param: &'static str,
        value: f64,
        lambda: f64,
    },

    /// The Liénard closed form divides by `lambda + 2k`.
    #[error("closed form has a pole at lambda + 2k = 0 (k = {k}, lambda = {lambda})")]
    Pole { k: f64, lambda: f64 },

    /// Generic solve and closed form disagree beyond round-off.
    #[error("manifold cross-check failed: discrepancy {discrepancy:e}")]
    CrossCheck { discrepancy: f64 },

    #[error("integration failed at t = {t_last}: {reason}")]
    Integration { t_last: f64, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no sign change of the averaged radial velocity on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite")))
    }
}
