//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("matrix is near singular (smallest eigenvalue {min_eigenvalue:.3e})")]
    NearSingular { min_eigenvalue: f64 },
    #[error("2-form is degenerate (|det| = {det:.3e})")]
    DegenerateForm { det: f64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("group closure exceeded {bound} elements")]
    NotFinite { bound: usize },
    #[error("conductor mismatch: {0}")]
    Conductor(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid cyclic data (m = {m}, q = {q}): {reason}")]
    InvalidCyclicData { m: u64, q: u64, reason: String },
    #[error("monodromy is not unimodular (det = {det})")]
    NonUnimodular { det: i64 },
    #[error("point is outside the model domain: {0}")]
    OutOfDomain(String),
    #[error("J is not almost complex at sample {index} (|J^2 + I| = {residual:.3e})")]
    NotAlmostComplex { index: usize, residual: f64 },
    #[error("profile violates its hypotheses: {0}")]
    ProfileViolation(String),
    #[error("finite differences unstable at step {h:.3e} (h vs h/2 disagree by {disagreement:.3e})")]
    Unstable { h: f64, disagreement: f64 },
    #[error("gluing precondition '{check}' fails at {point:?} (value {value:.3e})")]
    Gluing {
        check: String,
        point: [f64; 4],
        value: f64,
    },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("certificate failed: {0}")]
    CertificateFailed(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unsupported(_) => 3,
            Error::CertificateFailed(_) => 4,
            _ => 2,
        }
    }
}
