use thiserror::Error;

/// Errors raised while building proposals, stepping samplers or computing diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("invalid mixture specification: {0}")]
    Spec(String),

    #[error("improper tail: {side} slope {slope} must be {expected}")]
    TailSlope {
        side: &'static str,
        slope: f64,
        expected: &'static str,
    },

    #[error("procedure {procedure} needs at least {required} support points, got {got}")]
    InsufficientSupport {
        procedure: &'static str,
        required: usize,
        got: usize,
    },

    #[error("non-finite log-density {value} at x = {x}")]
    NonFiniteValue { x: f64, value: f64 },

    #[error("piece on [{lo}, {hi}] with slope {slope} has divergent area")]
    DivergentArea { lo: f64, hi: f64, slope: f64 },

    #[error("x = {x} duplicates support point {existing}")]
    DuplicatePoint { x: f64, existing: f64 },

    #[error("tangent construction requires the log-density derivative")]
    MissingDerivative,

    #[error("proposal does not dominate the target at x = {x}: log p = {log_p}, log pi = {log_prop}")]
    DominanceViolation { x: f64, log_p: f64, log_prop: f64 },

    #[error("{0} consecutive rejections in the RS loop")]
    RejectionLimit(u64),

    #[error("degenerate chain: {0}")]
    DegenerateChain(&'static str),

    #[error("quadrature grid error: {0}")]
    Grid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step failed at k = {k}, t = {t}, m = {m}: {source}")]
    Step {
        k: u64,
        t: u64,
        m: usize,
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
