use alloc::string::String;
use core::fmt;

/// Every failure the library can report.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    InvalidWalk(String),
    NonIrreducibleWalk,
    InvalidParams(String),
    InvalidConfiguration(String),
    SameSite,
    MissingValue,
    StateSpaceTooLarge { size: u128 },
    SolverFailure(String),
    ConditionNotSatisfied(&'static str),
    DimensionMismatch,
    OutOfRange(&'static str),
    InvalidCase(String),
    NotSemiAttracting,
    PremiseViolated(&'static str),
    Unsupported(&'static str),
    NotSkewSymmetric,
    InsufficientData,
    WindowExceedsTrajectory,
    BudgetExceeded { censored: u64, replicas: u64 },
    DegenerateData,
    SupportTooLarge,
    NonSpanningSupport,
    TooFewRelocations { observed: u64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidWalk(m) => write!(f, "invalid walk: {m}"),
            Error::NonIrreducibleWalk => f.write_str("rate graph is not strongly connected"),
            Error::InvalidParams(m) => write!(f, "invalid parameters: {m}"),
            Error::InvalidConfiguration(m) => write!(f, "invalid configuration: {m}"),
            Error::SameSite => f.write_str("move requires two distinct sites"),
            Error::MissingValue => f.write_str("function undefined at a required state"),
            Error::StateSpaceTooLarge { size } => {
                write!(f, "state space has {size} configurations, above the cap")
            }
            Error::SolverFailure(m) => write!(f, "solver failure: {m}"),
            Error::ConditionNotSatisfied(m) => write!(f, "condition not satisfied: {m}"),
            Error::DimensionMismatch => f.write_str("dimension mismatch"),
            Error::OutOfRange(m) => write!(f, "out of range: {m}"),
            Error::InvalidCase(m) => write!(f, "invalid case: {m}"),
            Error::NotSemiAttracting => f.write_str("set is neither attracting nor semi-attracting"),
            Error::PremiseViolated(m) => write!(f, "premise violated: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::NotSkewSymmetric => f.write_str("matrix is not skew-symmetric"),
            Error::InsufficientData => f.write_str("at least three values of N are required"),
            Error::WindowExceedsTrajectory => f.write_str("requested window exceeds the trajectory"),
            Error::BudgetExceeded { censored, replicas } => {
                write!(f, "{censored} of {replicas} replicas hit the step cap")
            }
            Error::DegenerateData => f.write_str("degenerate data for regression"),
            Error::SupportTooLarge => f.write_str("torus side must exceed twice the kernel range"),
            Error::NonSpanningSupport => f.write_str("kernel support does not generate the lattice"),
            Error::TooFewRelocations { observed } => {
                write!(f, "only {observed} condensate relocations observed (need 100)")
            }
        }
    }
}

impl core::error::Error for Error {}
