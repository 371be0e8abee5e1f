use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: u64, modulus: u64 },

    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("dimension {dim} not supported here: {reason}")]
    Dimension { dim: usize, reason: &'static str },

    #[error("matrix is not symplectic modulo {modulus} (det = {det})")]
    NotSymplectic { det: u64, modulus: u64 },

    #[error("Clifford covariance check failed (residual {0:.3e})")]
    Covariance(f64),

    #[error("vector is not a SIC fiducial (residual {0:.3e})")]
    NotSic(f64),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("no stabilizing displaced Zauner operator found (best residual {0:.3e})")]
    NotCentred(f64),

    #[error("no centred candidate satisfies the odd-case phase pattern (best residual {0:.3e})")]
    NoStrongCentre(f64),

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("stride {stride} must be {d} or {dm2}")]
    Stride { stride: usize, d: usize, dm2: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
