use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// Species indices carried by variants are 0-based; `Display` prints them
/// 1-based, which is how the JSON operator files and the CLI count species.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {m}: at least 2 species are required")]
    InvalidDimension { m: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {} is {value:e}, below the admissible mass band", .index + 1)]
    NegativeCoordinate { index: usize, value: f64 },

    #[error("coordinates sum to {sum:.17}, outside the admissible mass band")]
    MassViolation { sum: f64 },

    #[error("non-finite coordinate at position {}", .index + 1)]
    NonFinite { index: usize },

    #[error("negative coefficient p[{}][k={}] = {value:e}", fmt_parents(.parents), .k + 1)]
    NegativeCoefficient {
        parents: Vec<usize>,
        k: usize,
        value: f64,
    },

    #[error("row sum violation at parents {}: sum = {sum:.17} (deviation {deviation:e})", fmt_parents(.parents))]
    RowSumViolation {
        parents: Vec<usize>,
        sum: f64,
        deviation: f64,
    },

    #[error("asymmetric coefficients at parents {} for k={}: deviation {deviation:e}", fmt_parents(.parents), .k + 1)]
    Asymmetry {
        parents: Vec<usize>,
        k: usize,
        deviation: f64,
    },

    #[error("index out of range in entry {entry}: indices must lie in 1..={m}")]
    IndexOutOfRange { entry: usize, m: usize },

    #[error("duplicate coefficient entry {entry}")]
    DuplicateEntry { entry: usize },

    #[error("unsupported degree {0}: only 2 and 3 are supported")]
    UnsupportedDegree(usize),

    #[error("unknown operator name `{0}`")]
    UnknownName(String),

    #[error("parameter `{name}` = {value} is out of range {range}")]
    ParamOutOfRange {
        name: String,
        value: f64,
        range: String,
    },

    #[error("unknown parameter `{0}`")]
    UnknownParam(String),

    #[error("species {} is not assigned to any part of the alpha-partition", .index + 1)]
    NotAPartition { index: usize },

    #[error("trajectory has {len} points, at least {min} are required")]
    TrajectoryTooShort { len: usize, min: usize },

    #[error("point is not a fixed point: residual {residual:e} exceeds {tol:e}")]
    NotAFixedPoint { residual: f64, tol: f64 },

    #[error("fixed-point search failed from every start")]
    NoConvergence,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

fn fmt_parents(p: &[usize]) -> String {
    let inner: Vec<String> = p.iter().map(|i| (i + 1).to_string()).collect();
    format!("({})", inner.join(","))
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable upper-case identifier of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDimension { .. } => "INVALID_DIMENSION",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::NegativeCoordinate { .. } => "NEGATIVE_COORDINATE",
            Error::MassViolation { .. } => "MASS_VIOLATION",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::NegativeCoefficient { .. } => "NEGATIVE_COEFFICIENT",
            Error::RowSumViolation { .. } => "ROW_SUM_VIOLATION",
            Error::Asymmetry { .. } => "ASYMMETRY",
            Error::IndexOutOfRange { .. } => "INDEX_OUT_OF_RANGE",
            Error::DuplicateEntry { .. } => "DUPLICATE_ENTRY",
            Error::UnsupportedDegree(_) => "UNSUPPORTED_DEGREE",
            Error::UnknownName(_) => "UNKNOWN_NAME",
            Error::ParamOutOfRange { .. } => "PARAM_OUT_OF_RANGE",
            Error::UnknownParam(_) => "UNKNOWN_PARAM",
            Error::NotAPartition { .. } => "NOT_A_PARTITION",
            Error::TrajectoryTooShort { .. } => "TRAJECTORY_TOO_SHORT",
            Error::NotAFixedPoint { .. } => "NOT_A_FIXED_POINT",
            Error::NoConvergence => "NO_CONVERGENCE",
            Error::Io(_) => "IO",
            Error::Parse(_) => "PARSE",
        }
    }

    /// Species indices (1-based) named by the error, if any.
    pub fn parents_one_based(&self) -> Option<Vec<usize>> {
        match self {
            Error::NegativeCoefficient { parents, .. }
            | Error::RowSumViolation { parents, .. }
            | Error::Asymmetry { parents, .. } => Some(parents.iter().map(|i| i + 1).collect()),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
