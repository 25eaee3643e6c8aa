use thiserror::Error;

/// Errors raised by the solvers, the simulator and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    /// A game parameter violates one of its invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A behavioral plan that leaves probability mass on "never cast".
    #[error("behavioral strategy leaves residual probability {residual} of never casting (last-round cast probability must be 1)")]
    ResidualProbability { residual: f64 },

    /// The indifference system for the device has no interior solution.
    #[error("no interior equilibrium for the device: {0}")]
    NoInteriorEquilibrium(String),

    /// Stackelberg analysis is only defined for the two-round game.
    #[error("unsupported horizon n_max = {0}: Stackelberg analysis requires n_max = 2")]
    UnsupportedHorizon(u32),

    /// A closed-form property that must hold did not.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, GameError>;
