use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight is not positive at x = {x} (value {value})")]
    NonPositiveWeight { x: f64, value: f64 },

    #[error("adaptive quadrature on [{a}, {b}] exhausted its budget (estimated error {error:e})")]
    ToleranceNotMet { a: f64, b: f64, error: f64 },

    #[error("integrand overflowed at x = {x}")]
    Overflow { x: f64 },

    #[error("degenerate interval [{a}, {b}]")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("empty family")]
    EmptyFamily,

    #[error("x = {x} lies outside the domain [{lo}, {hi}]")]
    DomainMismatch { x: f64, lo: f64, hi: f64 },

    #[error("invalid exponent p = {0}; need 1 < p < inf")]
    InvalidExponent(f64),

    #[error("weight segments do not tile the domain: {0}")]
    Tiling(String),

    #[error("invalid weight profile: {0}")]
    InvalidProfile(String),

    #[error("conjugate integral over [{a}, {b}] is infinite")]
    InfiniteConjugateIntegral { a: f64, b: f64 },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("unknown ball center: {0}")]
    UnknownCenter(String),

    #[error("component containing vertex {0} has no boundary values and is not flagged free")]
    NoBoundary(usize),

    #[error("solver did not converge after {sweeps} sweeps (max residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("degenerate support: {0}")]
    DegenerateSupport(String),

    #[error("need at least {needed} strictly increasing positive radii, got {got}")]
    InsufficientRadii { needed: usize, got: usize },

    #[error("{0} lies outside the annulus")]
    OutsideAnnulus(String),

    #[error("annulus contains no points of the space")]
    EmptyAnnulus,

    #[error("radius must be positive")]
    ZeroRadius,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}
