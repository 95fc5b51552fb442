use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("truncation degree must be at least 1")]
    DegenerateDegree,

    #[error("coefficient sequence must have length >= {need}, got {got}")]
    TooShort { need: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("Blaschke zero {0} lies outside [0, 1)")]
    ZeroOutsideUnitInterval(f64),

    #[error("exp overflows for constant term with real part {0}")]
    ExpOverflow(f64),

    #[error("section size must be at least 1")]
    EmptySection,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("weights must be positive and finite")]
    InvalidWeight,

    #[error("exponent p must be a finite real > 1, got {0}")]
    InvalidExponent(f64),

    #[error("lambda must satisfy Re(lambda) > 0, got {0}")]
    NonPositiveRealPart(num_complex::Complex64),

    #[error("lambda must be nonzero")]
    ZeroLambda,

    #[error("Riesz exponent gamma must be positive, got {0}")]
    InvalidGamma(f64),

    #[error("tabulated kernel samples must be finite with theta(-1) = theta(1) = 0")]
    InvalidTabulatedKernel,

    #[error("kernel evaluation has imaginary residue {0:.3e}; tabulated theta is not even enough")]
    ImaginaryResidue(f64),

    #[error("expected a lower-triangular section")]
    NotLowerTriangular,

    #[error("size list must be strictly increasing")]
    NonIncreasingSizes,

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("bad binary dump: {0}")]
    BadDump(&'static str),
}
