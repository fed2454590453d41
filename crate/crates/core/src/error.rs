use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The load exceeds the power transfer limit, so no droop equilibrium exists.
    #[error("no equilibrium: load {power} W exceeds the power transfer limit {p_max} W")]
    NoEquilibrium { power: f64, p_max: f64 },

    #[error("voltage collapse at t = {time} s (v = {voltage} V)")]
    VoltageCollapse { time: f64, voltage: f64 },

    #[error("operation requires a finite LPF bandwidth")]
    InfiniteBandwidth,

    #[error("operation requires a loaded equilibrium (P > 0)")]
    ZeroPower,

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("bracket [{p_lo}, {p_hi}] W does not straddle the stability boundary")]
    InvalidBracket { p_lo: f64, p_hi: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}
