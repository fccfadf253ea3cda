use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("not a Cartan matrix: {0}")]
    NotCartan(String),
    #[error("D·C is not symmetric: {0}")]
    NotSymmetrizer(String),
    #[error("symmetrizer entries must be positive, got {0:?}")]
    NonPositiveSymmetrizer(Vec<i64>),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("vertex {0} out of range")]
    InvalidVertex(usize),
    #[error("invalid orientation: {0}")]
    InvalidOrientation(String),
    #[error("vertex {0} is neither a sink nor a source")]
    NotSinkOrSource(usize),
    #[error("vertex {0} is not a sink")]
    NotSink(usize),
    #[error("vertex {0} is not a source")]
    NotSource(usize),
    #[error("Cartan datum is not of Dynkin type")]
    NotDynkin,
    #[error("word {0:?} is not reduced")]
    NotReduced(Vec<usize>),
    #[error("modules belong to different algebras")]
    SpecMismatch,
    #[error("module is not locally free")]
    NotLocallyFree,
    #[error("internal consistency check failed: {0}")]
    InternalMismatch(String),
    #[error("search budget of {budget} nodes exhausted")]
    SearchBudgetExceeded { budget: usize },
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("point counts are not polynomial within the degree bound: {0}")]
    InterpolationInconsistent(String),
    #[error("mutation closure exceeded {bound} seeds")]
    NonFiniteType { bound: usize },
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("cannot reduce {value} modulo {p}")]
    BadReduction { p: u64, value: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
