use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A link index outside `0..link_count`.
    InvalidLink { index: usize, link_count: usize },
    /// Shapes of two inputs disagree.
    Dimension(String),
    /// A model configuration the operation does not support.
    Unsupported(String),
    /// A non-finite value appeared in a forward pass.
    NumericOverflow { layer: usize, detail: String },
    /// The linear system for the value function is singular or its solution
    /// fails the residual check.
    ValueUndefined { destination: usize, detail: String },
    /// The destination cannot be reached from a link that needs it.
    Unreachable { from: usize, destination: usize },
    /// The NRL fixed point did not converge.
    NotConverged { iterations: usize, residual: f64 },
    /// A trajectory step that is not a transition of the graph.
    InfeasibleStep { trajectory: usize, step: usize, from: usize, to: usize },
    /// A trajectory that does not end at its destination or is too short.
    MalformedTrajectory { trajectory: usize, detail: String },
    /// Greedy route generation hit its step cap.
    IncompleteRoute { partial: Vec<usize> },
    /// A singular system outside the value solve (flows, information matrix).
    Singular(String),
    /// Optimisation produced a non-finite loss.
    Diverged { epoch: usize, detail: String },
    /// A configuration value outside its domain.
    InvalidConfig(String),
}

impl Error {
    /// Whether this error comes from bad input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidLink { .. }
                | Error::Dimension(_)
                | Error::Unsupported(_)
                | Error::InfeasibleStep { .. }
                | Error::MalformedTrajectory { .. }
                | Error::InvalidConfig(_)
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidLink { index, link_count } => {
                write!(f, "link index {index} out of range (graph has {link_count} links)")
            }
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::NumericOverflow { layer, detail } => {
                write!(f, "non-finite value in residual layer {layer}: {detail}")
            }
            Error::ValueUndefined { destination, detail } => write!(
                f,
                "value function undefined for destination {destination}: {detail} \
                 (likely cause: a cycle with positive total utility)"
            ),
            Error::Unreachable { from, destination } => {
                write!(f, "destination {destination} is unreachable from link {from}")
            }
            Error::NotConverged { iterations, residual } => write!(
                f,
                "fixed point did not converge after {iterations} iterations (last residual {residual:e})"
            ),
            Error::InfeasibleStep { trajectory, step, from, to } => write!(
                f,
                "trajectory {trajectory} step {step}: no transition from link {from} to link {to}"
            ),
            Error::MalformedTrajectory { trajectory, detail } => {
                write!(f, "trajectory {trajectory}: {detail}")
            }
            Error::IncompleteRoute { partial } => write!(
                f,
                "route generation stopped after {} links without reaching the destination",
                partial.len()
            ),
            Error::Singular(msg) => write!(f, "singular system: {msg}"),
            Error::Diverged { epoch, detail } => write!(f, "diverged at epoch {epoch}: {detail}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for Error {}
