use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid netlist: {0}")]
    Netlist(String),

    #[error("unknown port `{0}`")]
    UnknownPort(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    /// The nodal system is numerically singular at this frequency.
    #[error("network is singular at {frequency:.6e} Hz (condition number {condition:.3e})")]
    Singular { frequency: f64, condition: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no filter peak found in spectrum: {0}")]
    NoPeak(String),

    #[error("requested {wanted} resonator dips but only found {} (at {found:?} Hz)", found.len())]
    TooFewDips { wanted: usize, found: Vec<f64> },

    #[error("threshold {threshold} is unreachable with steady-state floor {floor}")]
    Unreachable { threshold: f64, floor: f64 },

    #[error("degenerate covariance for label `{0}`")]
    DegenerateCovariance(String),

    #[error("label `{label}` has {count} shots, at least {required} are needed")]
    InsufficientShots { label: String, count: usize, required: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
