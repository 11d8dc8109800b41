//! Finite extensive-form games without chance moves, together with the
//! per-player terminal-node partitions that describe end-of-game feedback.
//!
//! Roles are 0-based in the API and 1-based in JSON files and on the command line.

mod error;
mod file;
mod kuhn;
mod normal_form;
mod partition;
mod strategy;
mod tree;
mod validate;

pub use error::GameError;
pub use file::{EdgeSpec, GameFile, NodeSpec, PartitionSpec};
pub use kuhn::{behavior_to_mixed, mixed_to_behavior, KuhnBehavior};
pub use normal_form::{
    derive_normal_form, derive_normal_form_capped, p_equivalent_partition, NormalFormGame,
    ProfilePartition, DEFAULT_PROFILE_CAP,
};
pub use partition::{observation_cell, Observation, TerminalPartition};
pub use strategy::{
    expected_payoff, outcome, terminal_distribution, BehaviorProfile, BehaviorStrategy,
    MixedStrategy, PureStrategy,
};
pub use tree::{Game, GameTree, InfoSet, InfoSetId, Node, NodeId, NodeKind, Role};
pub use validate::{validate_game, ValidationReport, Violation, ViolationKind};

/// Tolerance used when checking that probability vectors sum to one.
pub const PROB_TOL: f64 = 1e-12;
