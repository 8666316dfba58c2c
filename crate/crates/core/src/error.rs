use thiserror::Error;

/// Every failure the library can report.
///
/// The CLI maps these onto exit codes; see [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("denominator is not invertible in the valuation ring")]
    NonInvertibleDenominator,
    #[error("operands belong to different fields")]
    SpecMismatch,
    #[error("division by an element that is zero to its certified precision")]
    DivisionByZeroToPrecision,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("matrix is singular to certified precision")]
    SingularToPrecision,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("lattices are not nested")]
    NotNested,
    #[error("lattices have different ranks")]
    RankMismatch,
    #[error("subspace is not invariant under the map")]
    NotInvariant,
    #[error("lattice saturation did not stabilise within {0} steps")]
    SaturationDiverged(usize),
    #[error("candidate budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::PrecisionExhausted(_) | Error::SaturationDiverged(_) => 3,
            Error::BudgetExceeded(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
