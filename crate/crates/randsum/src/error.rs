use thiserror::Error;

/// Errors surfaced by model construction, recursion engines and transform
/// inversions.
///
/// `Divergence`, `UncertifiedTail`, `MassCheck` and `NonConvergence` are
/// "numerical certification" failures: the inputs were structurally valid but
/// the requested quantity cannot be certified at the configured tolerance.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("moment of order {order} is not available for {model}: {reason}")]
    UnboundedMoment {
        model: String,
        order: usize,
        reason: String,
    },

    #[error("truncated tail mass {tail:.3e} exceeds tolerance {tol:.3e} for {what}")]
    UncertifiedTail { what: String, tail: f64, tol: f64 },

    #[error("Panjer recursion diverges: a*P(X=0) = {c0} >= 1")]
    Divergence { c0: f64 },

    #[error("denominator guard tripped at u = {u}: |{what}| = {magnitude:.3e}")]
    SingularEvaluation {
        what: String,
        u: f64,
        magnitude: f64,
    },

    #[error("configuration violation: {0}")]
    ConfigViolation(String),

    #[error("table mismatch: {0}")]
    TableMismatch(String),

    #[error("Stirling number S({n},{k}) overflows u64; use the floating-point path")]
    StirlingOverflow { n: usize, k: usize },

    #[error("mass check failed: |sum - 1| = {deficit:.3e} exceeds {tol:.3e}")]
    MassCheck { deficit: f64, tol: f64 },

    #[error(
        "FST inversion did not converge: partial value {partial}, achieved tolerance {achieved:.3e} (target {target:.3e})"
    )]
    NonConvergence {
        partial: f64,
        achieved: f64,
        target: f64,
    },

    #[error("operation requires a discrete severity model, got {0}")]
    NotDiscrete(String),

    #[error("operation requires a continuous severity model, got {0}")]
    NotContinuous(String),

    #[error("non-finite value from transform evaluator at u = {u}")]
    NonFiniteEvaluation { u: f64 },
}

impl Error {
    /// True when the error signals a numerical-certification failure rather
    /// than a usage/parameter problem (the CLI maps these to exit code 2).
    pub fn is_certification_failure(&self) -> bool {
        matches!(
            self,
            Error::Divergence { .. }
                | Error::UncertifiedTail { .. }
                | Error::MassCheck { .. }
                | Error::NonConvergence { .. }
                | Error::SingularEvaluation { .. }
                | Error::NonFiniteEvaluation { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
