use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("insufficient q-expansion precision: need {required} coefficients, have {available}")]
    InsufficientPrecision { required: usize, available: usize },
    #[error("index {requested} outside available range (bound {bound})")]
    Range { requested: u64, bound: u64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Deligne bound violated at p = {p}: |lambda(p)| = {value}")]
    DeligneViolation { p: u64, value: f64 },
    #[error("no Hecke operator in the fallback chain has a squarefree characteristic polynomial (weight {0})")]
    RepeatedRoots(u32),
    #[error("unsupported L-function: {0}")]
    Unsupported(String),
    #[error("instance not validated: {0}")]
    Unvalidated(String),
    #[error("memory budget exceeded: {needed} bytes requested, budget {budget}")]
    MemoryBudget { needed: u64, budget: u64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
