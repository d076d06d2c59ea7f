use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Which clause of the coefficient assumptions failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionClause {
    /// `α_l ≥ 0`, and either `α_l > 0` everywhere or `α_l ≡ 0`, for `l ≤ k-2`.
    SignOrVanishing,
    /// `Σ_{l≤k-2} α_l > 0` everywhere.
    PositiveSum,
    /// `α_l ≥ c_{k,l}` for the supplied floors.
    Floor,
}

impl fmt::Display for AssumptionClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AssumptionClause::SignOrVanishing => "(i) lower coefficients positive or identically zero",
            AssumptionClause::PositiveSum => "(ii) lower coefficients have positive sum",
            AssumptionClause::Floor => "(iii) coefficient below its floor",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("degree {degree} out of range [{min}, {max}]")]
    DegreeOutOfRange { degree: usize, min: usize, max: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("input too large for oracle: n = {n} exceeds {max}")]
    TooLarge { n: usize, max: usize },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("point outside Γ_{degree}: σ_{failing} ≤ 0")]
    OutsideCone { degree: usize, failing: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },
    #[error("imaginary trace residue {residue:e} (input not Hermitian?)")]
    ImaginaryResidue { residue: f64 },
    #[error("Fourier mode {component} exceeds the aliasing bound {bound}")]
    Aliasing { component: i64, bound: usize },
    #[error("assumption {clause} violated for α_{degree} (node {node:?})")]
    Assumption { clause: AssumptionClause, degree: usize, node: Option<usize> },
    #[error("cone violation at node {node}: eigenvalues {eigenvalues:?}")]
    ConeViolation { node: usize, eigenvalues: Vec<f64> },
    #[error("cone condition fails at node {node}: margin {margin:e}")]
    ConeCondition { node: usize, margin: f64 },
    #[error("linear solve stagnated after {iterations} iterations (relative residual {residual:e})")]
    LinearStagnation { iterations: usize, residual: f64 },
    #[error("cone-trapped: step fell below {min_step:e}; worst node {node} has σ_(k-1) = {sigma:e}")]
    ConeTrapped { min_step: f64, node: usize, sigma: f64 },
    #[error("Newton failed in stage {stage} at t = {t} (residual {residual:e})")]
    NewtonFailure { stage: u8, t: f64, residual: f64 },
}

impl Error {
    pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }

    pub(crate) fn check_degree(degree: usize, min: usize, max: usize) -> Result<()> {
        if (min..=max).contains(&degree) {
            Ok(())
        } else {
            Err(Error::DegreeOutOfRange { degree, min, max })
        }
    }
}
