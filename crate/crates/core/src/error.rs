use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("non-finite literal at byte {offset}")]
    NonFiniteLiteral { offset: usize },

    #[error("mobius parameter must satisfy |a| < 1 (got |a| = {modulus})")]
    MobiusOutsideDisk { modulus: f64 },

    #[error("rotation must be unimodular (got |rotation| = {modulus})")]
    NotUnimodular { modulus: f64 },

    #[error("point {re}{im:+}i is outside the admissible domain: {reason}")]
    OutsideDomain { re: f64, im: f64, reason: &'static str },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("taylor coefficient file {path}: {message}")]
    TaylorFile { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
