use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// A parameter or argument violates a documented constraint.
    InvalidInput,
    /// The request exceeds what dense linear algebra can hold.
    Capacity,
    /// The numerics ran but the requested quantity is outside its regime of validity.
    Regime,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid battery parameter `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("{n_spins} spins exceed the dense capacity of {max} spins")]
    TooManySpins { n_spins: usize, max: usize },

    #[error("site {site} is out of range for a chain of {n_spins} spins")]
    SiteOutOfRange { site: usize, n_spins: usize },

    #[error("site {site} appears more than once in a Pauli string")]
    RepeatedSite { site: usize },

    #[error("operator has imaginary matrix elements and cannot be assembled as a real matrix")]
    NotReal,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "eigensolver did not converge for a {dim}x{dim} matrix \
         (Frobenius norm {norm:.3e}, max Hermiticity defect {asymmetry:.3e})"
    )]
    EigenSolver { dim: usize, norm: f64, asymmetry: f64 },

    #[error(
        "not in strong-coupling regime: low-energy doublet separation ratio {ratio:.3} is below {threshold}"
    )]
    NotStrongCoupling { ratio: f64, threshold: f64 },

    #[error("singular resolvent while eliminating high-energy states")]
    SingularResolvent,

    #[error("closed form is only available for {supported}; got N = {n_spins}")]
    UnsupportedSpinCount { n_spins: usize, supported: &'static str },

    #[error("collective-spin dynamics require uniform infinite-range coupling (long-range, p = 0)")]
    NotInfiniteRange,

    #[error("Bloch-vector norm drifted by {drift:.3e} (time step {dt:.3e}); use a smaller time step")]
    NormDrift { drift: f64, dt: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::TooManySpins { .. } => ErrorKind::Capacity,
            Error::EigenSolver { .. }
            | Error::NotStrongCoupling { .. }
            | Error::SingularResolvent
            | Error::NormDrift { .. } => ErrorKind::Regime,
            _ => ErrorKind::InvalidInput,
        }
    }

    pub(crate) fn argument(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { name, reason: reason.into() }
    }
}
