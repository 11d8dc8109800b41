use serde::Serialize;

use crate::tree::{GameTree, InfoSetId, NodeId, Role};

/// Feedback structure of one role: which terminal nodes it cannot tell apart.
///
/// Cells hold terminal positions (indices into [`GameTree::terminals`]).
#[derive(Clone, Debug, PartialEq)]
pub struct TerminalPartition {
    pub role: Role,
    pub cells: Vec<Vec<usize>>,
    pub cell_of: Vec<usize>,
    /// Per cell: the (infoset, action) pairs shared by every terminal in it, sorted.
    pub revealed: Vec<Vec<(InfoSetId, usize)>>,
}

/// What a role learns at the end of a match.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation<'a> {
    pub cell: usize,
    pub revealed: &'a [(InfoSetId, usize)],
}

impl TerminalPartition {
    pub(crate) fn from_cells(tree: &GameTree, role: Role, cells: Vec<Vec<usize>>) -> Self {
        let mut cell_of = vec![usize::MAX; tree.terminals().len()];
        for (c, cell) in cells.iter().enumerate() {
            for &t in cell {
                cell_of[t] = c;
            }
        }
        let revealed = cells
            .iter()
            .map(|cell| {
                let mut common: Vec<(InfoSetId, usize)> =
                    cell.first().map(|&t| tree.path_pairs(t).to_vec()).unwrap_or_default();
                for &t in cell.iter().skip(1) {
                    let other = tree.path_pairs(t);
                    common.retain(|p| other.binary_search(p).is_ok());
                }
                common
            })
            .collect();
        TerminalPartition { role, cells, cell_of, revealed }
    }

    /// The partition in which every terminal node is its own cell.
    pub fn discrete(tree: &GameTree, role: Role) -> Self {
        Self::from_cells(tree, role, (0..tree.terminals().len()).map(|t| vec![t]).collect())
    }

    /// Rebuilds a partition from cells of terminal positions.
    pub fn new(tree: &GameTree, role: Role, mut cells: Vec<Vec<usize>>) -> Self {
        for c in &mut cells {
            c.sort_unstable();
        }
        Self::from_cells(tree, role, cells)
    }

    pub fn is_discrete(&self) -> bool {
        self.cells.iter().all(|c| c.len() == 1)
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

/// Locates terminal node `z` in `partition` and lists what the cell reveals.
pub fn observation_cell<'a>(tree: &GameTree, partition: &'a TerminalPartition, z: NodeId) -> Observation<'a> {
    let t = tree.terminal_pos(z).expect("observation_cell needs a terminal node");
    let cell = partition.cell_of[t];
    Observation { cell, revealed: &partition.revealed[cell] }
}
