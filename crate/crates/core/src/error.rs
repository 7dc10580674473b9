use thiserror::Error;

/// Errors reported by the solvers and samplers in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("convexity check failed at node {index} (x = {x}): second difference {second_diff} below tolerance {tol}")]
    NotConvex {
        index: usize,
        x: f64,
        second_diff: f64,
        tol: f64,
    },

    #[error("enumeration of {configs} configurations exceeds the limit {limit}")]
    EnumerationTooLarge { configs: u128, limit: u128 },

    #[error("no transition detected in bracket [{lo}, {hi}]")]
    NoTransition { lo: f64, hi: f64 },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
