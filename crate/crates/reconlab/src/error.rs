//! Error type shared by every module of the crate.

use std::fmt;

/// Errors raised by grid, mollifier, coherence, quasinorm, reconstruction and
/// sewing operations. Each variant names the operation-level failure it
/// signals rather than the call site.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid resolution below the minimum a constructor requires.
    GridTooCoarse { n_max: u32, required: u32 },
    /// A dyadic rescaling was requested below the resolvable scale.
    ScaleTooFine { k: u32, limit: u32 },
    /// Two sampled functions live on different grids.
    GridMismatch,
    /// A ball average was requested with radius under two grid spacings.
    RadiusUnderResolved { radius: f64, spacing: f64 },
    /// The moment-cancellation system is numerically singular.
    SingularSystem,
    /// Post-solve moment residuals exceed the contract tolerance.
    MomentResidual { order: usize, residual: f64 },
    /// A multiscale computation would need test functions finer than the grid.
    ScaleBudgetExceeded { finest: u32, limit: u32 },
    /// Exponent-fit input contains values that are not finite and positive.
    NonpositiveValue,
    /// Quasinorm parameters violate the admissible ranges of their family.
    InvalidQuasinorm(String),
    /// A theorem-level hypothesis does not hold for the supplied data.
    HypothesisViolated(String),
    /// The two evaluation routes of a derivative germ disagree.
    RouteDisagreement { residual: f64, tolerance: f64 },
    /// The partition-of-unity construction failed its residual check.
    PartitionResidual { residual: f64 },
    /// An error-field evaluation was given no test functions.
    EmptyDictionary,
    /// Experiment configuration is invalid; the message names the field.
    Config(String),
    /// File or CSV I/O failure in the experiment driver.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GridTooCoarse { n_max, required } => {
                write!(f, "grid too coarse: n_max = {n_max}, need at least {required}")
            }
            Error::ScaleTooFine { k, limit } => {
                write!(f, "scale 2^-{k} too fine for this grid (limit k <= {limit})")
            }
            Error::GridMismatch => write!(f, "operands live on different grids"),
            Error::RadiusUnderResolved { radius, spacing } => write!(
                f,
                "ball radius {radius} under-resolved (need >= 2 * spacing = {})",
                2.0 * spacing
            ),
            Error::SingularSystem => write!(f, "moment system is singular"),
            Error::MomentResidual { order, residual } => {
                write!(f, "moment residual {residual:.3e} at order {order} exceeds tolerance")
            }
            Error::ScaleBudgetExceeded { finest, limit } => {
                write!(f, "scale budget exceeded: finest level {finest} > limit {limit}")
            }
            Error::NonpositiveValue => write!(f, "exponent fit needs finite positive values"),
            Error::InvalidQuasinorm(msg) => write!(f, "invalid quasinorm: {msg}"),
            Error::HypothesisViolated(msg) => write!(f, "hypothesis violated: {msg}"),
            Error::RouteDisagreement { residual, tolerance } => write!(
                f,
                "evaluation routes disagree: residual {residual:.3e} > tolerance {tolerance:.1e}"
            ),
            Error::PartitionResidual { residual } => {
                write!(f, "partition of unity residual {residual:.3e} exceeds tolerance")
            }
            Error::EmptyDictionary => write!(f, "test dictionary is empty"),
            Error::Config(msg) => write!(f, "config error: {msg}"),
            Error::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
