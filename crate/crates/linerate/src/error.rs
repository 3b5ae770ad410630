use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A network description violates one of its invariants.
    #[error("invalid network config: {0}")]
    InvalidConfig(String),

    /// An iterative computation ran out of iterations.
    #[error("{context} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence {
        context: String,
        iterations: u64,
        residual: f64,
    },

    /// A converged solution failed the flow-conservation consistency check.
    #[error("flow conservation violated: residual {residual:.3e} exceeds bound {bound:.3e}")]
    FlowConservation { residual: f64, bound: f64 },

    /// The joint chain is too large to build.
    #[error("state space has {states} states, above the cap of {cap}")]
    StateCapExceeded { states: u128, cap: usize },

    /// The stationary distribution is not unique (more than one recurrent class).
    #[error("transition matrix has no unique stationary distribution")]
    ReducibleChain,

    /// A geometric stage with success probability 0 has infinite expected delay.
    #[error("success probability 0: infinite expected delay")]
    InfiniteDelay,

    /// An arriving packet can never be stored, so its delay is undefined.
    #[error("node permanently full; delay undefined")]
    NodePermanentlyFull,

    /// Delay is undefined when no packet ever reaches the destination.
    #[error("zero throughput; delay undefined")]
    ZeroThroughput,

    /// A PMF tail budget could not be met within the support cap.
    #[error("tail budget {budget:.3e} not reached within {cap} support entries")]
    TailBudgetUnreachable { budget: f64, cap: usize },

    /// Simulation settings are inconsistent.
    #[error("invalid simulation settings: {0}")]
    InvalidSettings(String),

    /// A caller-supplied argument is out of range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
