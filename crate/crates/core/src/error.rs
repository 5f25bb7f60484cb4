use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("StripViolation: |Im z| = {im} is not below the strip half-width {eta_star}")]
    StripViolation { im: f64, eta_star: f64 },
    #[error("OrderTooHigh: derivative order {0} exceeds 4")]
    OrderTooHigh(usize),
    #[error("DomainError: {0}")]
    DomainError(String),
    #[error("NoRoot: {0}")]
    NoRoot(String),
    #[error("ContourThroughZero: |1 - c0 l| = {value:e} at {at}")]
    ContourThroughZero { value: f64, at: String },
    #[error("NonIntegerWinding: contour integral {0} did not settle on an integer")]
    NonIntegerWinding(f64),
    #[error("AccuracyLoss: {0}")]
    AccuracyLoss(String),
    #[error("PowerOverflow: monomial power {0} is outside the supported range")]
    PowerOverflow(u32),
    #[error("NotSolvable: residual {0:e} after least-squares solve")]
    NotSolvable(f64),
    #[error("RankDeficient: condition ratio {0:e}")]
    RankDeficient(f64),
    #[error("RouteMismatch: {what} differs between routes ({a} vs {b})")]
    RouteMismatch { what: String, a: f64, b: f64 },
    #[error("PersistenceViolation: ripple amplitude {r} does not exceed {bound}")]
    PersistenceViolation { r: f64, bound: f64 },
    #[error("CeilingViolation: |mu| = {mu} exceeds the ceiling {ceiling}")]
    CeilingViolation { mu: f64, ceiling: f64 },
    #[error("AliasingError: top-third spectral energy fraction {0:e}")]
    AliasingError(f64),
    #[error("SingularJacobian: smallest singular value estimate {0:e}")]
    SingularJacobian(f64),
    #[error("NoConvergence: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 4,
            Error::StripViolation { .. }
            | Error::OrderTooHigh(_)
            | Error::DomainError(_)
            | Error::PersistenceViolation { .. }
            | Error::CeilingViolation { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
