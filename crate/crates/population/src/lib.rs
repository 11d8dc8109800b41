//! Overlapping generations of learners: population states, the update rule, aggregate
//! responses, steady states and patience sweeps.

mod chain;
mod mc;
mod steady;
mod sweep;

pub use chain::{
    aggregate_response, aggregate_strategy, stationary, strategy_shares, true_kernel, update_rule, PopulationState,
    StepReport,
};
pub use mc::{simulate, McOptions, McResult};
pub use steady::{
    fixed_point, nash_slack, random_profile, steady_state, FixedPoint, FixedPointSummary, Learners, Method,
    SteadyOptions, SteadyReport,
};
pub use sweep::{patient_sweep, CellResult, InnerDiagnostic, Monitor, SweepConfig, SweepResult};

#[derive(Debug, thiserror::Error)]
pub enum PopulationError {
    #[error(transparent)]
    Game(#[from] sslab_game::GameError),
    #[error(transparent)]
    Policy(#[from] sslab_policy::PolicyError),
    #[error("{0}")]
    Mismatch(String),
    #[error("sweep grid: {0}")]
    Grid(String),
}
