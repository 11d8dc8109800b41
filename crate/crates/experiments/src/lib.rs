//! Replication experiments over the bundled game corpus, and the operations shared by the
//! CLI and the HTTP service.

mod corpus;
pub mod drivers;
pub mod ops;
pub mod report;
pub mod spec;

pub use corpus::{
    check_constraints, corpus_game, corpus_list, corpus_names, corpus_text, load_game, resolve_game, ConstraintCheck,
    CorpusEntry,
};
pub use drivers::{run_check, CheckOutcome, Criterion};
pub use ops::{execute, GameRef, Op};
pub use report::{default_out_dir, replicate, write_report, ReplicationReport, OUT_DIR_ENV};
pub use spec::{Check, PriorSpec, ReplicationSpec, Task, SPEC_IDS};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Game(#[from] sslab_game::GameError),
    #[error(transparent)]
    Belief(#[from] sslab_beliefs::BeliefError),
    #[error(transparent)]
    Policy(#[from] sslab_policy::PolicyError),
    #[error(transparent)]
    Population(#[from] sslab_population::PopulationError),
    #[error(transparent)]
    Elimination(#[from] sslab_elimination::EliminationError),
    #[error(transparent)]
    Transform(#[from] sslab_transforms::TransformError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("no corpus game or file named `{0}`")]
    UnknownGame(String),
    #[error("no replication spec `{0}`")]
    UnknownSpec(String),
    #[error("bad spec: {0}")]
    BadSpec(String),
    #[error("{game} fails its payoff constraints: {}", failed.join(", "))]
    Constraint { game: String, failed: Vec<String> },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<ExperimentError>,
    },
}

impl ExperimentError {
    pub fn context(context: impl Into<String>, e: impl Into<ExperimentError>) -> Self {
        ExperimentError::Context { context: context.into(), source: Box::new(e.into()) }
    }

    /// The innermost error, past any context wrappers.
    pub fn root(&self) -> &ExperimentError {
        match self {
            ExperimentError::Context { source, .. } => source.root(),
            e => e,
        }
    }
}
