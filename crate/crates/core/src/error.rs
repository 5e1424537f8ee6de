use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Elements or maps built over incompatible generator tables.
    #[error("structural error: {0}")]
    Structural(String),

    /// An operation was applied outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("model construction error: {0}")]
    ModelConstruction(String),

    #[error("iteration cap of {cap} reached while expanding d(s{generator}); the series did not vanish")]
    IterationCap { generator: String, cap: usize },

    /// A computation needed values above the degree bound it was given.
    #[error("degree bound {bound} exceeded (need at least {required})")]
    Bound { bound: u32, required: u32 },

    #[error("degree {degree} is outside the computed range 0..={max}")]
    Range { degree: u32, max: u32 },

    #[error("not a Poincaré duality model in degree {degree}: dim H^{degree} = {dim}")]
    NotPoincare { degree: u32, dim: usize },

    #[error("model not verifiably finite-dimensional: {0}")]
    NotFinite(String),

    #[error("degenerate Poincaré pairing between degrees {low} and {high}")]
    DegeneratePairing { low: u32, high: u32 },

    #[error("purity violation: {0}")]
    Purity(String),

    #[error("element is not a cocycle in degree {0}")]
    NotCocycle(u32),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
