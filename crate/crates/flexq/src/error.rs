use thiserror::Error;

/// All failure modes surfaced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("buffer size must be at least 2, got {0}")]
    BufferTooSmall(i32),

    #[error("queue level {level} outside [-1, {buffer}]")]
    LevelOutOfRange { level: i32, buffer: i32 },

    #[error("state has {got} queues, expected {expected}")]
    QueueCountMismatch { expected: usize, got: usize },

    #[error("state index {index} outside 0..{cardinality}")]
    IndexOutOfRange { index: usize, cardinality: usize },

    #[error("state space ({buffer}+2)^{n} does not fit in usize")]
    StateSpaceOverflow { n: usize, buffer: i32 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error(
        "value iteration did not converge within {iterations} sweeps \
         (last residual {last_residual:e})"
    )]
    NoConvergence {
        iterations: u64,
        last_residual: f64,
        /// Most recent residuals, oldest first, for diagnosing stalls.
        residual_tail: Vec<f64>,
    },

    #[error("policy enumeration refused: {count} feasible policies exceeds cap {cap}")]
    PolicyEnumerationTooLarge { count: u128, cap: u128 },

    #[error("table length {got} does not match state-space cardinality {expected}")]
    TableSizeMismatch { expected: usize, got: usize },

    #[error("states not comparable: {0}")]
    NotComparable(String),

    #[error(
        "stationary distribution did not converge within {iterations} steps \
         (last L1 change {last_change:e})"
    )]
    StationaryNoConvergence { iterations: u64, last_change: f64 },

    #[error("invalid simulation setup: {0}")]
    InvalidSimulation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
