use thiserror::Error;

/// Errors produced by the synthesis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("dictionary entry {index} ({term}) is non-finite at the evaluation point")]
    Domain { index: usize, term: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data matrices are not rich enough: {0}")]
    Richness(String),

    #[error("{constraint} infeasible: {detail}")]
    Infeasible {
        constraint: ConstraintFamily,
        detail: String,
    },

    #[error("conic solver failed: {0}")]
    Solver(String),

    #[error("certificate validation failed: {0}")]
    Validation(String),

    #[error("simulation diverged at t = {time}: state norm {norm:.3e} exceeds overflow bound")]
    Divergence { time: f64, norm: f64 },

    #[error("sliding-output matrix rejected: symmetric part of C*B is not positive definite (lambda_min = {lambda_min:.3e})")]
    SlidingOutput { lambda_min: f64 },

    #[error("artifact provenance mismatch for {artifact}: recorded {recorded}, recomputed {recomputed}")]
    Provenance {
        artifact: String,
        recorded: String,
        recomputed: String,
    },

    #[error("composition is infeasible: max column sum {max_xi:.6e} >= 0; collect different trajectories (longer horizon or new seed) and retry")]
    CompositionInfeasible { max_xi: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
}

/// Constraint families of the synthesis feasibility program, used to name the
/// binding family in infeasibility diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    /// Annihilation of the nonlinear channel. Infeasibility here is the
    /// observable symptom of nonlinearities outside the input channel.
    NonlinearCancellation,
    /// Right-inverse condition on the nonlinear dictionary block.
    DictionaryInverse,
    /// Coupling between the Lyapunov variable and the data.
    LyapunovEquality,
    /// The decay linear matrix inequality.
    DecayLmi,
}

impl std::fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ConstraintFamily::NonlinearCancellation => {
                "nonlinear-channel cancellation (likely unmatched nonlinearities)"
            }
            ConstraintFamily::DictionaryInverse => "dictionary right-inverse equality",
            ConstraintFamily::LyapunovEquality => "Lyapunov-data equality",
            ConstraintFamily::DecayLmi => "decay LMI (try smaller decay rate or weight)",
        };
        write!(f, "{name}")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
