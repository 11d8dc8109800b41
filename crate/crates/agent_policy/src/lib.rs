//! Optimal experimentation policies of Bayesian agents with geometric lifetimes.
//!
//! Each agent's problem is a Bayes-adaptive MDP over product-Dirichlet count states with
//! effective discount `δγ`.

mod invariance;
mod model;
mod solve;

pub use invariance::{policy_invariance_check, InvarianceReport, SlotMap};
pub use model::{tracked_sets, BeliefModel, ObsClass, Slot, DEFAULT_MAX_STATES, MAX_SLOTS};
pub use solve::{
    effective_horizon, solve_policy, value_iteration_check, DumpState, IterationCheck, Policy, PolicyDump,
    SolveOptions, TIE_TOLERANCE,
};

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error(transparent)]
    Game(#[from] sslab_game::GameError),
    #[error(transparent)]
    Belief(#[from] sslab_beliefs::BeliefError),
    #[error("{0}")]
    BadArgument(String),
    #[error("more than {limit} reachable belief states (count cap {cap}, {slots} tracked counters); lower the cap")]
    StateBudget { limit: usize, cap: u32, slots: usize },
    #[error("{slots} tracked counters exceed the limit of {limit}")]
    TooManySlots { slots: usize, limit: usize },
    #[error("unmapped state: {0}")]
    Unmapped(String),
}
