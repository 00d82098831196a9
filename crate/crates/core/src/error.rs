use thiserror::Error;

/// Coarse error category, used by front ends for exit-code triage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input.
    Validation,
    /// Input is well formed but outside the domain of the operation.
    Precondition,
    /// The numerics could not reach the requested accuracy.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("PT pair validation failed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    PtPairInvalid(Vec<Violation>),

    #[error("Hamiltonian is not PT-symmetric (residual {residual:e})")]
    NotPtSymmetric { residual: f64 },

    #[error("ill-conditioned {what} (achieved residual {residual:e})")]
    IllConditioned { what: String, residual: f64 },

    #[error("matrix is numerically singular")]
    Singular,

    #[error("sign characteristic has {found} entries, decomposition has {expected} real blocks")]
    SignLength { expected: usize, found: usize },

    #[error("Hamiltonian is in the broken phase")]
    BrokenHamiltonian,

    #[error("parameters lie in the broken regime (|r sin(theta) / s| = {0})")]
    BrokenRegime(f64),

    #[error("critical point: cos(alpha) = {0:e} is below the critical tolerance")]
    CriticalPoint(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("trace {0:e} too small to normalize")]
    TraceTooSmall(f64),

    #[error("basis is not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("contraction condition violated (eigenvalue {0:e} of I - c^2 U^dag U)")]
    ContractionViolated(f64),

    #[error("post-selection success probability {0:e} is degenerate")]
    DegeneratePostSelection(f64),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NotSquare { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidInput(_)
            | Error::NotHermitian(_)
            | Error::NotPsd(_)
            | Error::PtPairInvalid(_)
            | Error::SignLength { .. }
            | Error::InvalidDensity(_)
            | Error::NotOrthonormal(_) => ErrorKind::Validation,
            Error::NotPtSymmetric { .. }
            | Error::BrokenHamiltonian
            | Error::BrokenRegime(_)
            | Error::CriticalPoint(_)
            | Error::ContractionViolated(_) => ErrorKind::Precondition,
            Error::IllConditioned { .. }
            | Error::Singular
            | Error::TraceTooSmall(_)
            | Error::DegeneratePostSelection(_) => ErrorKind::Numerical,
        }
    }

    /// Stable snake-case tag for machine-readable reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "not_square",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::NotHermitian(_) => "not_hermitian",
            Error::NotPsd(_) => "not_psd",
            Error::PtPairInvalid(_) => "invalid_pt_pair",
            Error::NotPtSymmetric { .. } => "not_pt_symmetric",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::Singular => "singular",
            Error::SignLength { .. } => "sign_length",
            Error::BrokenHamiltonian => "broken_hamiltonian",
            Error::BrokenRegime(_) => "broken_regime",
            Error::CriticalPoint(_) => "critical_point",
            Error::InvalidDensity(_) => "invalid_density",
            Error::TraceTooSmall(_) => "trace_too_small",
            Error::NotOrthonormal(_) => "not_orthonormal",
            Error::ContractionViolated(_) => "contraction_violated",
            Error::DegeneratePostSelection(_) => "degenerate_post_selection",
        }
    }
}

/// One failed defining identity of a (P, T) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub identity: &'static str,
    pub residual: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (residual {:e})", self.identity, self.residual)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
