use thiserror::Error;

/// Errors produced by graph construction, sampling and clustering.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex index {index} out of range for graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("edge ({src}, {dst}) has invalid weight {weight}")]
    NegativeWeight { src: usize, dst: usize, weight: f64 },

    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("vertex sets overlap at vertex {0}")]
    OverlappingSets(usize),

    #[error("label {label} out of range for k = {k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("operation requires k = {expected} communities, got {actual}")]
    WrongCommunityCount { expected: usize, actual: usize },

    #[error("invalid model parameters: {0}")]
    BadParams(String),

    #[error("meta-graph does not match model: {0}")]
    MetaMismatch(String),

    #[error("reciprocal edge pair between {0} and {1} cannot be generated by the model")]
    ReciprocalEdge(usize, usize),

    #[error("likelihood is defined for binary graphs only; edge ({src}, {dst}) has weight {weight}")]
    WeightedGraph { src: usize, dst: usize, weight: f64 },

    #[error("instance too large: {size} exceeds limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("k-means needs at least {k} points, got {points}")]
    TooFewPoints { points: usize, k: usize },

    #[error("graph with {n} vertices is too small (need at least {min})")]
    GraphTooSmall { n: usize, min: usize },

    #[error("cluster containing vertex {0} cannot be split further")]
    UnsplittableCluster(usize),

    #[error("degenerate 2x2 core: population eigenvector has equal block values")]
    DegenerateCore,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
