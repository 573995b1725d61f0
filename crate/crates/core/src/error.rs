use alloc::string::String;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the declared parameter set of a family.
    #[error("{family}: parameter {value} outside {domain}")]
    Domain {
        family: &'static str,
        value: f64,
        domain: String,
    },
    /// The divergence is infinite because an argument sits on the boundary.
    #[error("{family}: divergence is infinite at boundary value {value}")]
    DivergentBoundary { family: &'static str, value: f64 },
    /// An observation outside the support of the family.
    #[error("{family}: observation {value} outside support")]
    Support { family: &'static str, value: f64 },
    /// Fisher information diverges at an endpoint of the requested set.
    #[error("{family}: Fisher information unbounded at {value}")]
    UnboundedInformation { family: &'static str, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range for design of size {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("iteration {k} beyond final step {kstar}")]
    StepOutOfRange { k: usize, kstar: usize },
    #[error("data length {got} does not match design size {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("reparametrization requires a linear mean map: {0}")]
    NonlinearMeanMap(&'static str),
    #[error("design interior is empty for maximal bandwidth {hmax}")]
    EmptyInterior { hmax: f64 },
    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        reason: &'static str,
    },
    #[error("scenario rejected: {0}")]
    ScenarioRejected(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
