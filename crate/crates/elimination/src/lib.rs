//! Dominance, valid elimination sequences under constrained conjectures, and backward
//! induction. Linear programs are solved in exact rational arithmetic.

mod conjecture;
mod dominance;
mod exact;
pub mod lp;
mod sequence;
mod simple;

pub use conjecture::{conjecture_lp, decide, eliminable, grid_feasible, verify_check, Check, Decision, Schedule};
pub use dominance::{check_dominance, dominating_mixture, iterated_strict_dominance, strictly_dominated, weakly_dominated, Dominance};
pub use exact::ExactGame;
pub use sequence::{run_valid_sequence, verify_trace, Certificate, CheckRecord, Deletion, EliminationTrace, Generator, StageRecord};
pub use simple::{bi_profile, is_simple_game, node_heights, SimpleGameReport};

#[derive(Debug, thiserror::Error)]
pub enum EliminationError {
    #[error(transparent)]
    Game(#[from] sslab_game::GameError),
    #[error("{0}")]
    BadArgument(String),
    #[error("linear program: {0}")]
    Solver(String),
    #[error("stage {stage}: role {role} strategy {strategy} cannot be deleted ({reason})")]
    ValidityBreach { stage: usize, role: usize, strategy: String, reason: String },
    #[error("stage {stage} deletes every strategy of role {role}")]
    EmptySet { stage: usize, role: usize },
    #[error("not a simple game: {0}")]
    NotSimple(String),
    #[error("role {role} has no strategy `{name}`")]
    UnknownStrategy { role: usize, name: String },
    #[error("certificate check failed: {0}")]
    BadCertificate(String),
}
