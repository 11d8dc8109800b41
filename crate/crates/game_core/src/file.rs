use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::GameError;

/// On-disk game description. Unknown keys are rejected so that typos surface early.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: usize,
    pub nodes: Vec<NodeSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partitions: Vec<PartitionSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    /// 1-based owning role of a decision node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub infoset: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub action: String,
    pub child: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    /// 1-based role.
    pub role: usize,
    pub cells: Vec<Vec<String>>,
}

impl NodeSpec {
    pub fn decision(id: &str, owner: usize, infoset: &str, edges: &[(&str, &str)]) -> Self {
        NodeSpec {
            id: id.to_string(),
            owner: Some(owner),
            terminal: None,
            infoset: Some(infoset.to_string()),
            edges: edges
                .iter()
                .map(|(a, c)| EdgeSpec { action: a.to_string(), child: c.to_string() })
                .collect(),
            payoffs: None,
        }
    }

    pub fn terminal(id: &str, payoffs: &[f64]) -> Self {
        NodeSpec {
            id: id.to_string(),
            owner: None,
            terminal: Some(true),
            infoset: None,
            edges: Vec::new(),
            payoffs: Some(payoffs.to_vec()),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal == Some(true)
    }
}

impl GameFile {
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GameError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| GameError::Io { path: path.display().to_string(), source })?;
        serde_json::from_str(&text).map_err(|source| GameError::SchemaAt { path: path.display().to_string(), source })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("game files always serialise")
    }
}
