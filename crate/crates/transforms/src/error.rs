use sslab_game::GameError;

#[derive(Debug, thiserror::Error)]
pub enum TransformError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("unknown information set `{0}`")]
    UnknownInfoSet(String),
    #[error("information sets `{h1}` and `{h2}` are not consecutive moves of role {role}: {reason}")]
    NotConsecutive { role: usize, h1: String, h2: String, reason: String },
    #[error("mix is outside the open simplex: {0}")]
    Boundary(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("pruning node `{node}` would change the feedback cells of role {role}")]
    WouldChangeCells { node: String, role: usize },
    #[error("node `{0}` cannot be pruned: {1}")]
    BadPrune(String, String),
    #[error("transformed prior is not a product of Dirichlets: pass weight {pass} differs from tail total {tail}")]
    NotDirichlet { pass: f64, tail: f64 },
}
