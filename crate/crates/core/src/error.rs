use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no responses given")]
    EmptyInput,
    #[error("user {user} answered item {item} more than once")]
    DuplicateAnswer { user: u64, item: u64 },
    #[error("user row {0} has no answers")]
    EmptyRow(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("shift {beta} is below the largest Laplacian degree {required}")]
    BetaTooSmall { beta: f64, required: f64 },
    #[error("operator annihilated the iterate")]
    ZeroIterate,
    #[error("left and right dominant eigenvectors are orthogonal")]
    DegenerateDeflation,
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix has complex eigenvalues")]
    ComplexSpectrum,
    #[error("response graph has {} connected components", .0.len())]
    Disconnected(Vec<Vec<usize>>),
    #[error("{what} of size {size} exceeds the limit {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("answer key has no entry for item {0}")]
    MissingKey(u64),
    #[error("answer key option {option} is out of range for item {item}")]
    InvalidKey { item: u64, option: usize },
    #[error("entry ({row}, {col}) is not binary")]
    NonBinary { row: usize, col: usize },
    #[error("no row order gives consecutive ones")]
    NoC1POrder,
    #[error("GRM thresholds must be strictly increasing")]
    ThresholdOrder,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid generator config: {0}")]
    ConfigInvalid(String),
    #[error("input is constant")]
    ConstantInput,
    #[error("vector norm {0} is not 1")]
    NotUnit(f64),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("{method} exceeded timeout after {elapsed_ms:.1} ms")]
    Timeout { method: String, elapsed_ms: f64 },
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Parse(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
