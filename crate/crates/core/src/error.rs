use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate symbol `{0}` in registry")]
    DuplicateSymbol(String),
    #[error("operands live over different variable registries")]
    RegistryMismatch,
    #[error("exponent overflow")]
    ExponentOverflow,
    #[error("symbolic division by zero")]
    ZeroDenominator,
    #[error("`{poly}` is not linear in `{var}`")]
    NotLinear { poly: String, var: String },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown generator `{0}` for this system")]
    UnknownGenerator(String),
    #[error("unknown chart `{0}` for this system")]
    UnknownChart(String),
    #[error("series did not terminate within {0} terms")]
    NonTerminatingSeries(usize),
    #[error("inconsistent constraints: {0}")]
    Inconsistent(String),
    #[error("constraint is nonlinear in the unknowns: {0}")]
    NonlinearConstraint(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
