use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative skew part {relative_skew:.3e})")]
    NotHermitian { relative_skew: f64 },
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("{0} did not converge")]
    ConvergenceFailure(&'static str),
    #[error("center eigenvalues cannot be separated at the configured tolerance (min gap {min_gap:.3e})")]
    DegenerateCenter { min_gap: f64 },
    #[error("invalid model: {field}: {reason}")]
    ModelInvalid { field: String, reason: String },
    #[error("not a density matrix: {0}")]
    NotAState(String),
    #[error("state is not invariant (‖L_*(σ)‖ = {residual:.3e})")]
    NotInvariant { residual: f64 },
    #[error("no faithful invariant state")]
    NoFaithfulState,
    #[error("peripheral eigenvalue {re:.3e}{im:+.3e}i is not semisimple")]
    NonSemisimplePeripheral { re: f64, im: f64 },
    #[error("block structure violated: off-block mass {off_block:.3e}")]
    BlockMismatch { off_block: f64 },
    #[error("generators do not commute (residual {residual:.3e})")]
    CommutationFailure { residual: f64 },
    #[error("tolerance field {field} must be finite and positive, got {value}")]
    InvalidTolerance { field: String, value: f64 },
    #[error("unknown tolerance field {0:?}")]
    UnknownToleranceField(String),
}
