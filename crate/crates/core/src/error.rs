use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("Bloch vector norm {0} exceeds 1")]
    InvalidBloch(f64),

    #[error("omega must be positive and finite, got {0}")]
    InvalidOmega(f64),

    #[error("parameter out of domain: {0}")]
    OutOfDomain(String),

    #[error("branch state and derivative blocks are not aligned: {0}")]
    LabelMismatch(String),

    #[error("negative eigenvalue {0:e} in a density block")]
    NegativeEigenvalue(f64),

    #[error("Fisher information matrix is singular (det {0:e})")]
    SingularFisher(f64),

    #[error("degenerate bracket [{0}, {1}]")]
    DegenerateBracket(f64, f64),
}

pub(crate) fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidOmega(omega))
    }
}
