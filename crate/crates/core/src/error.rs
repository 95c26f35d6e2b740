use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A shape description violates its own invariants (bad radius, non-SPD matrix, ...).
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The shape (or a function's support) reaches the edge of the grid.
    #[error("support exceeds the grid extent: {0}")]
    OutOfExtent(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("negative value {value} at cell {index}")]
    NegativeValue { index: usize, value: f64 },

    #[error("function has zero measure")]
    ZeroMeasure,

    #[error("singular affine map (det = {0})")]
    SingularMap(f64),

    /// Second-moment matrix of rank < d.
    #[error("measure-zero thickness: {0}")]
    Degenerate(String),

    #[error("cost estimate {cost:.3e} exceeds budget {budget:.3e}")]
    BudgetExceeded { cost: f64, budget: f64 },

    /// Round-off in an inverse transform produced a negative value larger than the allowed slack.
    #[error("negative correlation value {value:.3e} exceeds round-off slack {slack:.3e}")]
    RoundOff { value: f64, slack: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
