use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::sim::DiscoveryRecord;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Model parameters violate their constraints (non-positive shapes, etc.).
    Model(String),
    /// An experiment state is invalid for the model it is paired with.
    State(String),
    /// The discovery criterion is degenerate for the given prior.
    Criterion(String),
    /// A policy or simulation configuration is inconsistent.
    Config(String),
    /// An argument lies outside an operation's domain.
    Domain(String),
    /// The Normal state grid cannot represent the requested problem.
    GridTooCoarse(String),
    /// An iterative scheme failed to converge.
    NonConvergence(String),
    /// The acceptance boundary is unreachable at the requested index.
    BoundaryUnreachable { n: u32 },
    /// A state was queried beyond a policy or table horizon.
    HorizonExceeded { n: u32, horizon: u32 },
    /// An empirical truth source ran out of effects before a discovery.
    TruthExhausted { records: Vec<DiscoveryRecord> },
    /// No Beta distribution matches the sample moments.
    InfeasibleMoments { mean: f64, variance: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Model(msg) => write!(f, "invalid model: {msg}"),
            Self::State(msg) => write!(f, "invalid state: {msg}"),
            Self::Criterion(msg) => write!(f, "invalid criterion: {msg}"),
            Self::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::GridTooCoarse(msg) => write!(f, "grid too coarse: {msg}"),
            Self::NonConvergence(msg) => write!(f, "no convergence: {msg}"),
            Self::BoundaryUnreachable { n } => {
                write!(
                    f,
                    "acceptance boundary unreachable at n = {n}; use a larger lookahead horizon"
                )
            }
            Self::HorizonExceeded { n, horizon } => {
                write!(f, "state at n = {n} is beyond the horizon {horizon}")
            }
            Self::TruthExhausted { records } => {
                write!(
                    f,
                    "truth source exhausted after {} experiments with no discovery",
                    records.len()
                )
            }
            Self::InfeasibleMoments { mean, variance } => {
                write!(
                    f,
                    "no Beta distribution has mean {mean} and variance {variance}"
                )
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
