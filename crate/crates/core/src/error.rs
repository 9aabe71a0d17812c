use thiserror::Error;

/// Errors raised across the library. The CLI maps them onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid source distribution: {0}")]
    InvalidSource(String),

    #[error("invalid key set: {0}")]
    InvalidKeys(String),

    #[error("two keys agree on the first {max_depth} characters")]
    DepthExceeded { max_depth: usize },

    #[error("replicate {index}: {source}")]
    Replicate {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("no node at path {0:?}")]
    InvalidPath(Vec<u8>),

    #[error("limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("tree has a node with exactly one child")]
    UnaryNode,

    #[error("toll function {0:?} depends on common prefixes and cannot be pulled back")]
    ShapeDependence(String),

    #[error("Gamma pole at s = {re} + {im}i")]
    PoleAt { re: f64, im: f64 },

    #[error("not convergent: {0}")]
    NonConvergent(String),

    #[error("source is aperiodic (d_p = 0); no Fourier coefficients")]
    Aperiodic,

    #[error("operation needs a nonempty tree")]
    EmptyTree,

    #[error("sample variance is zero")]
    DegenerateVariance,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
