use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines. Input problems and numeric
/// breakdowns are kept apart so the CLI can map them to distinct exit codes.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("value {0} is not inside the unit disk")]
    NotInDisk(Complex64),
    #[error("pole encountered at {0}")]
    Pole(Complex64),
    #[error("reflection of zero is the point at infinity")]
    ZeroReflection,
    #[error("indeterminate 0/0 Moebius action")]
    Indeterminate,
    #[error("matrix is a scalar multiple of the identity; every point is fixed")]
    IdenticallySatisfied,
    #[error("invalid range: {0}")]
    Range(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular linear system: {0}")]
    SingularSolve(String),
    #[error("pole index {0} is not part of the pole vector")]
    PoleNotInVector(usize),
    #[error("repeated pole entries are not supported here")]
    RepeatedPole,
    #[error("branch point at {0}")]
    BranchPoint(Complex64),
    #[error("expected {expected} roots, found {found}")]
    RootCount { expected: usize, found: usize },
    #[error("poles collide within tolerance: {0}")]
    Multiplicity(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("zero count violation: {0}")]
    ZeroCount(String),
    #[error("reconstruction failure, max error {0:e}")]
    Reconstruction(f64),
    #[error("margin too small: need {need}, got {got}")]
    Margin { need: usize, got: usize },
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("rank deficient family at index {0}")]
    RankDeficient(usize),
    #[error("circulant closure overlaps itself: {0}")]
    ClosureOverlap(String),
    #[error("degenerate denominator")]
    DegenerateDenominator,
    #[error("a point with sign -1 carries no mass")]
    NegativeSign,
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotInDisk(_)
                | Error::Range(_)
                | Error::DimensionMismatch(_)
                | Error::PoleNotInVector(_)
                | Error::RepeatedPole
                | Error::Multiplicity(_)
                | Error::NegativeSign
                | Error::Invalid(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
