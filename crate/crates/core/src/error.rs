use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u32),
    #[error("modulus {0} must be odd and at least 3")]
    EvenModulus(u32),
    #[error("{value} is not a unit modulo {p}")]
    NotAUnit { value: u32, p: u32 },
    #[error("index {k} out of range for p = {p}")]
    IndexOutOfRange { k: u32, p: u32 },
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("cell ({row}, {col}) or symbol out of range for order {n}")]
    CellOutOfRange { row: usize, col: usize, n: usize },
    #[error("not a Latin square: {0}")]
    NotLatin(String),
    #[error("not an orthomorphism: {0}")]
    NotOrthomorphism(String),
    #[error("invalid trade: {0}")]
    InvalidTrade(String),
    #[error("symbol {0} does not occur in the trade")]
    SymbolAbsent(u32),
    #[error("matrix error: {0}")]
    Matrix(String),
    #[error("no valid orientation: {0}")]
    NoOrientation(String),
    #[error("row permutation is not orthogonal: {0}")]
    NotOrthogonal(String),
    #[error("invalid dissection: {0}")]
    Dissection(String),
    #[error("p = {0}: p ≢ 1 (mod 6)")]
    NotOneModSix(u32),
    #[error("order {n} exceeds the exhaustive cap {cap}")]
    OrderCap { n: usize, cap: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
