use std::collections::HashMap;

use crate::{validate, EdgeSpec, GameError, GameFile, NodeSpec, PartitionSpec, TerminalPartition};

pub type NodeId = usize;
pub type InfoSetId = usize;
pub type Role = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    /// `children[k]` is the child reached by the k-th action of the node's information set.
    Decision { owner: Role, infoset: InfoSetId, children: Vec<NodeId> },
    Terminal { payoffs: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: String,
    pub parent: Option<NodeId>,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfoSet {
    pub id: String,
    pub owner: Role,
    pub actions: Vec<String>,
    pub nodes: Vec<NodeId>,
}

/// Immutable, validated game tree. Node, information-set and terminal orders
/// follow a depth-first walk from the root with children in declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct GameTree {
    pub(crate) players: usize,
    pub(crate) nodes: Vec<Node>,
    pub(crate) root: NodeId,
    pub(crate) infosets: Vec<InfoSet>,
    pub(crate) role_infosets: Vec<Vec<InfoSetId>>,
    pub(crate) infoset_pos: Vec<usize>,
    pub(crate) terminals: Vec<NodeId>,
    pub(crate) terminal_pos: Vec<Option<usize>>,
    pub(crate) own_history: Vec<Vec<(InfoSetId, usize)>>,
    pub(crate) path_pairs: Vec<Vec<(InfoSetId, usize)>>,
}

/// A game together with one terminal partition per role.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    pub tree: GameTree,
    pub partitions: Vec<TerminalPartition>,
}

impl GameTree {
    pub fn players(&self) -> usize {
        self.players
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn infosets(&self) -> &[InfoSet] {
        &self.infosets
    }

    pub fn infoset(&self, h: InfoSetId) -> &InfoSet {
        &self.infosets[h]
    }

    /// Information sets of `role`, in discovery order.
    pub fn role_infosets(&self, role: Role) -> &[InfoSetId] {
        &self.role_infosets[role]
    }

    /// Position of `h` within its owner's information-set list.
    pub fn infoset_pos(&self, h: InfoSetId) -> usize {
        self.infoset_pos[h]
    }

    /// Terminal nodes in discovery order.
    pub fn terminals(&self) -> &[NodeId] {
        &self.terminals
    }

    pub fn terminal_pos(&self, node: NodeId) -> Option<usize> {
        self.terminal_pos[node]
    }

    pub fn payoffs(&self, node: NodeId) -> &[f64] {
        match &self.nodes[node].kind {
            NodeKind::Terminal { payoffs } => payoffs,
            NodeKind::Decision { .. } => panic!("node {} is not terminal", self.nodes[node].id),
        }
    }

    /// Own (infoset, action) pairs taken by the owner of `h` before reaching `h`.
    pub fn own_history(&self, h: InfoSetId) -> &[(InfoSetId, usize)] {
        &self.own_history[h]
    }

    /// All (infoset, action) pairs on the path to the terminal at position `t`, sorted.
    pub fn path_pairs(&self, t: usize) -> &[(InfoSetId, usize)] {
        &self.path_pairs[t]
    }

    pub fn find_node(&self, id: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn find_infoset(&self, id: &str) -> Option<InfoSetId> {
        self.infosets.iter().position(|h| h.id == id)
    }

    pub fn action_index(&self, h: InfoSetId, action: &str) -> Option<usize> {
        self.infosets[h].actions.iter().position(|a| a == action)
    }

    /// Smallest and largest payoff of `role` over terminal nodes.
    pub fn payoff_range(&self, role: Role) -> (f64, f64) {
        self.terminals.iter().map(|&z| self.payoffs(z)[role]).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), u| (lo.min(u), hi.max(u)),
        )
    }

    /// Number of pure strategies of `role` (product of action counts).
    pub fn strategy_count(&self, role: Role) -> u128 {
        self.role_infosets[role]
            .iter()
            .map(|&h| self.infosets[h].actions.len() as u128)
            .product()
    }

    /// Serialises the tree back to the file format, with the given partitions.
    pub fn to_file(&self, partitions: &[TerminalPartition]) -> GameFile {
        let nodes = self
            .nodes
            .iter()
            .map(|n| match &n.kind {
                NodeKind::Terminal { payoffs } => NodeSpec::terminal(&n.id, payoffs),
                NodeKind::Decision { owner, infoset, children } => NodeSpec {
                    id: n.id.clone(),
                    owner: Some(owner + 1),
                    terminal: None,
                    infoset: Some(self.infosets[*infoset].id.clone()),
                    edges: children
                        .iter()
                        .zip(&self.infosets[*infoset].actions)
                        .map(|(&c, a)| EdgeSpec { action: a.clone(), child: self.nodes[c].id.clone() })
                        .collect(),
                    payoffs: None,
                },
            })
            .collect();
        let partitions = partitions
            .iter()
            .map(|p| PartitionSpec {
                role: p.role + 1,
                cells: p
                    .cells
                    .iter()
                    .map(|c| c.iter().map(|&t| self.nodes[self.terminals[t]].id.clone()).collect())
                    .collect(),
            })
            .collect();
        GameFile { players: self.players, nodes, partitions }
    }

    pub(crate) fn index_by_id(&self) -> HashMap<&str, NodeId> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect()
    }
}

impl Game {
    /// Builds and validates a game. Any violation is returned as an error.
    pub fn from_file(file: &GameFile) -> Result<Self, GameError> {
        let (game, report) = validate::build(file);
        match game {
            Some(g) if report.is_empty() => Ok(g),
            _ => Err(GameError::Invalid(report)),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GameError> {
        Self::from_file(&GameFile::from_json(text)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, GameError> {
        Self::from_file(&GameFile::load(path)?)
    }

    pub fn players(&self) -> usize {
        self.tree.players
    }

    pub fn partition(&self, role: Role) -> &TerminalPartition {
        &self.partitions[role]
    }

    pub fn to_file(&self) -> GameFile {
        self.tree.to_file(&self.partitions)
    }
}
