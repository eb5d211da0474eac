use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("map is not CPTP: {0}")]
    NotCptp(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("bipartite dimension metadata missing")]
    DimMetadataMissing,
    #[error("quantity `{0}` is not computable")]
    NotComputable(&'static str),
    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("dimension {product} exceeds the supported limit {limit}")]
    DimTooLarge { product: usize, limit: usize },
    #[error("argument {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("grid value {0} outside the admissible range")]
    GridOutOfRange(f64),
    #[error("internal numerical inconsistency: {0}")]
    InternalConsistency(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
