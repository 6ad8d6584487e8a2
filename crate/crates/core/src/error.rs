use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate symbol `{0}` in variable table")]
    DuplicateSymbol(String),
    #[error("variable table holds at most {max} symbols, got {got}")]
    TooManySymbols { max: usize, got: usize },
    #[error("operands belong to different variable tables")]
    TableMismatch,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("expression has an identically zero denominator")]
    ZeroDenominator,
    #[error("denominator vanishes at the evaluation point")]
    SingularPoint,
    #[error("symbol `{0}` is not bound")]
    Unbound(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("symbol `{0}` has no canonical partner")]
    Unpaired(String),
    #[error("invalid canonical structure: {0}")]
    InvalidStructure(String),
    #[error("parameter relation cannot be solved for `{0}`")]
    RelationNotSolvable(String),
    #[error("parameter values violate the relation (residual {0})")]
    RelationViolated(String),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("could not find {wanted} valid sample points after {tries} tries")]
    SamplingFailed { wanted: usize, tries: usize },
    #[error("coordinate change is not invertible: {0}")]
    NotInvertible(String),
    #[error("map has no inverse")]
    MissingInverse,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("singularity guard triggered: {0}")]
    GuardTriggered(String),
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
