use thiserror::Error;

use crate::modelspec::SpecError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error("site {site} out of range for a space with {factors} factors")]
    SiteOutOfRange { site: usize, factors: usize },

    #[error("partial trace needs a nonempty set of kept factors")]
    EmptyKeepSet,

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    /// Nullspace extraction produced something a valid finite Lindblad
    /// generator cannot produce.
    #[error("nullspace diagnostics: {message}; singular values (ascending) {profile:?}")]
    Nullspace { message: String, profile: Vec<f64> },

    #[error("Gram matrix is singular (condition {condition:.3e}); singular values {singular_values:?}")]
    SingularGram {
        condition: f64,
        singular_values: Vec<f64>,
    },

    #[error("no adjoint partner for imaginary-axis eigenvalue {frequency}i: {detail}")]
    PairingFailure { frequency: f64, detail: String },

    #[error("negative time {0} (the Lindblad semigroup only runs forward)")]
    NegativeTime(f64),

    #[error("Fock truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("negative argument {0}")]
    NegativeArgument(i64),

    #[error("value not representable: {0}")]
    Overflow(String),

    #[error("series failed to converge within {0} terms")]
    NonConvergence(usize),

    #[error("symmetry search limited to N <= {limit}, got N = {dim}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("projector preconditions violated: {}", .0.join("; "))]
    ProjectorPrecondition(Vec<String>),

    #[error("block structure: {0}")]
    BlockStructure(String),

    #[error("frequencies are not energy differences (residual {residual:.3e})")]
    InconsistentDifferences { residual: f64 },

    #[error(transparent)]
    ModelSpec(#[from] SpecError),
}

impl Error {
    /// Errors caused by malformed input rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidSpace(_)
                | Error::SiteOutOfRange { .. }
                | Error::EmptyKeepSet
                | Error::NonHermitian { .. }
                | Error::NonUnitary { .. }
                | Error::InvalidDensityMatrix(_)
                | Error::NegativeTime(_)
                | Error::TruncationTooSmall(_)
                | Error::NegativeArgument(_)
                | Error::DimensionGuard { .. }
                | Error::ModelSpec(_)
        )
    }
}
