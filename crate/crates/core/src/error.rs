use thiserror::Error;

/// Violations reported by [`crate::geometry::validate_metric`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricViolation {
    #[error("component ({0},{1}) has the wrong parity for an even form")]
    NotEven(usize, usize),
    #[error("components ({0},{1}) and ({1},{0}) violate supersymmetry")]
    NotSupersymmetric(usize, usize),
    #[error("body of the component matrix is degenerate")]
    Degenerate,
    #[error("body is degenerate at the sample point")]
    DegenerateAtSample,
    #[error("odd coordinate count {0} is not even")]
    OddDimension(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operands live over different generator pools")]
    PoolMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
    #[error("too many odd generators ({0}, at most 64 supported)")]
    TooManyGenerators(usize),
    #[error("cannot differentiate with respect to flesh generator `{0}`")]
    FleshDerivative(String),
    #[error("not invertible: {0}")]
    NonInvertible(String),
    #[error("not an exact square: {0}")]
    NotASquare(String),
    #[error("square root of an odd or inhomogeneous superfunction")]
    OddSquareRoot,
    #[error("top Berezin coefficient contains flesh generators")]
    FleshInTopCoefficient,
    #[error("odd-odd block of the supermatrix has singular body")]
    NonInvertibleBlock,
    #[error("inhomogeneous {0}")]
    Inhomogeneous(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("metric violation: {0}")]
    Metric(#[from] MetricViolation),
    #[error("frame does not match the metric: {0}")]
    FrameMismatch(String),
    #[error("unsupported metric for the Killing solver: {0}")]
    UnsupportedMetric(String),
    #[error("integrand is not polynomial in the even coordinates")]
    NonPolynomialIntegrand,
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// True for errors that stem from malformed input text rather than mathematics.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::UnknownVariable(_) | Error::DuplicateName(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
