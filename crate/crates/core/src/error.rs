use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not symplectic (drift {0:.3e})")]
    NotSymplectic(f64),
    #[error("subspace is not Lagrangian: {0}")]
    NotLagrangian(String),
    #[error("coefficient path has not been certified brake-symmetric")]
    SymmetryNotCertified,
    #[error("brake symmetry violated by {violation:.3e} at t = {at}")]
    SymmetryViolated { violation: f64, at: f64 },
    #[error("endpoint is degenerate (nullity {0}); the winding route needs a nondegenerate endpoint")]
    DegenerateEndpoint(usize),
    #[error("phase tracking could not resolve the path near t = {0}")]
    PhaseResolution(f64),
    #[error("positivity hypothesis failed: {0}")]
    NotPositive(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("splitting number at theta = {theta} is not stable under halving epsilon")]
    SplittingUnstable { theta: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
