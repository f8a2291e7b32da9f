use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter violated its domain (negative θ, non-positive mass, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two operators or states built over different Fock bases were combined.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    /// A construction would need Fock states beyond the basis cutoff.
    #[error("truncation overflow: {0}")]
    TruncationOverflow(String),

    /// A matrix expected to be Hermitian was not, within tolerance.
    #[error("non-Hermitian input: {0}")]
    NonHermitian(String),

    /// The dense eigensolver failed to converge.
    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    /// Adaptive quadrature could not reach its tolerance or met non-finite values.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// The time stepper hit its step-count cap before reaching the tolerance.
    #[error("tolerance unreachable: {0}")]
    ToleranceUnreachable(String),

    /// Phase extraction aborted because states no longer agree up to a phase.
    /// This is a verification failure, not a numerical fault.
    #[error("reference overlap too low at t={t}: |<ref|psi>|={overlap:.6} < {threshold}")]
    OverlapTooLow { t: f64, overlap: f64, threshold: f64 },

    /// Configuration file problems: syntax, unknown keys, missing keys, bad values.
    #[error("config error: {0}")]
    Config(String),

    /// I/O while reading configs or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Exit-status classes for the CLI contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Success,
    ConfigError,
    VerificationFailure,
    NumericalFailure,
}

impl ExitClass {
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Success => 0,
            ExitClass::ConfigError => 1,
            ExitClass::VerificationFailure => 2,
            ExitClass::NumericalFailure => 3,
        }
    }
}

impl Error {
    /// Map an error onto the CLI exit-status contract.
    pub fn exit_class(&self) -> ExitClass {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) | Error::Io(_) => ExitClass::ConfigError,
            Error::OverlapTooLow { .. } => ExitClass::VerificationFailure,
            Error::BasisMismatch(_)
            | Error::TruncationOverflow(_)
            | Error::NonHermitian(_)
            | Error::EigenFailure(_)
            | Error::QuadratureFailure(_)
            | Error::ToleranceUnreachable(_) => ExitClass::NumericalFailure,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
