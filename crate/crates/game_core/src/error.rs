use crate::ValidationReport;

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("game file is not valid JSON for the schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    SchemaAt {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("game is not admissible:\n{0}")]
    Invalid(ValidationReport),
    #[error("profile is missing a strategy for role {0}")]
    MissingRole(usize),
    #[error("strategy for role {role} is malformed: {reason}")]
    BadStrategy { role: usize, reason: String },
    #[error("normal form would have {count} profiles, above the cap of {cap}")]
    TooManyProfiles { count: u128, cap: usize },
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
}
