use thiserror::Error;

use crate::trace::TraceRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The oracle produced a NaN or infinite partial derivative.
    #[error("oracle returned a non-finite partial derivative for coordinate {coord}")]
    OracleFailure { coord: usize, point: Vec<f64> },

    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterate became non-finite; the trace gathered so far is attached.
    #[error("iterate became non-finite at iteration {iteration}")]
    Divergence { iteration: u64, trace: Vec<TraceRecord> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid sampling weights: {0}")]
    Weights(String),

    #[error("coordinate {coord}: Lipschitz estimate exceeded {limit:e}, objective is not coordinate-smooth")]
    NonSmooth { coord: usize, limit: f64 },

    #[error("overflow evaluating {what}: exponent {magnitude:e}")]
    Overflow { what: &'static str, magnitude: f64 },

    /// Coordinate steps cannot reach the constrained optimum on this set.
    ///
    /// Counterexample: minimize `(x1 - 2)^2 + (x2 - 1)^2` over
    /// `{x >= 0, x1 + x2 <= 2}` from `x0 = (1, 1)`. Along both coordinate
    /// directions through `x0` the objective restricted to the set is
    /// minimized at `x0`, so no coordinate method moves, while the optimum
    /// is `(1.5, 0.5)` with value 0.5 < 1.
    #[error("feasible set is not coordinate-separable: {0}")]
    NonSeparable(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
