//! Error types shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// The variants map one-to-one onto the CLI exit codes: invalid parameters
/// and malformed input exit with 2, infeasibility with 3, degenerate data
/// with 4 and internal numerical failures with 5.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument left the mathematical domain of an operation
    /// (non-finite input, probability outside (0,1), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A feasibility condition required by the requested estimator fails.
    /// `condition` is a stable machine-readable name such as "Eq. 4.1".
    #[error("infeasible ({condition}): {detail}")]
    Infeasible {
        condition: &'static str,
        detail: String,
    },

    /// The data carry no usable signal for the requested operation
    /// (constant sample, zero variance, ...).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// An iterative scheme failed to converge or produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// CLI exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Domain(_) => 2,
            Error::Infeasible { .. } => 3,
            Error::DegenerateData(_) => 4,
            Error::Numerical(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Condition names used in infeasibility errors. These strings are part of
/// the CLI contract and must stay stable.
pub mod conditions {
    pub const SAMPLE_SIZE_EPS_DEPENDENT: &str = "sample size n > 2 log(1/eps)";
    pub const SAMPLE_SIZE_EPS_FREE: &str = "sample size n > 2(1 + log(1/eps))";
    pub const GRID_SAMPLE_SIZE: &str = "sample size n > 2 log((2s+1)/eps)";
    pub const EQ_4_1: &str = "Eq. 4.1";
    pub const EQ_4_2: &str = "Eq. 4.2";
    pub const EQ_4_4: &str = "Eq. 4.4";
    pub const XI_BELOW_DELTA: &str = "xi < delta";
    pub const Q_ROOT_EXISTS: &str = "y < -psi(-delta)";
    pub const VARIANCE_TOO_UNCERTAIN: &str = "variance too uncertain";
}
