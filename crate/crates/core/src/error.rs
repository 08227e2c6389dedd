use thiserror::Error;

/// Errors raised by the reconstruction kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("insufficient depth: {valid} of {total} pixels have a depth reading")]
    InsufficientDepth { valid: usize, total: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("endpoint has no direction: its segment holds a single point")]
    NoDirection,

    #[error("invalid view: {0}")]
    InvalidView(String),

    #[error("tactile map has no active taxel")]
    EmptyContact,

    #[error("descent overrun: pad went {depth:.4} m below the support plane")]
    DescentOverrun { depth: f64 },

    #[error("probe budget of {0} probes exhausted")]
    ProbeBudgetExhausted(usize),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed {format} data: {msg}")]
    Format { format: &'static str, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
