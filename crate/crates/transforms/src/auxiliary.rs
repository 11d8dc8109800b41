use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sslab_game::{Game, GameFile, GameTree, NodeId, NodeKind, NodeSpec, PartitionSpec, Role};

use crate::TransformError;

/// Which moves of other roles to cut from the auxiliary game.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Pruning {
    /// Every maximal subtree, rooted at another role's node and free of the role's own moves,
    /// whose terminal nodes form exactly one of the role's feedback cells.
    #[default]
    Auto,
    /// Only these nodes; each must satisfy the same condition or the call fails.
    Nodes(Vec<String>),
    None,
}

#[derive(Clone, Debug)]
pub struct Auxiliary {
    pub game: Game,
    pub file: GameFile,
    /// Ids of nodes replaced by terminal nodes (the new terminal keeps the id).
    pub pruned: Vec<String>,
}

fn subtree(tree: &GameTree, v: NodeId, terminals: &mut Vec<usize>, owners: &mut HashSet<Role>) {
    match &tree.node(v).kind {
        NodeKind::Terminal { .. } => terminals.push(tree.terminal_pos(v).expect("terminal")),
        NodeKind::Decision { owner, children, .. } => {
            owners.insert(*owner);
            for &c in children {
                subtree(tree, c, terminals, owners);
            }
        }
    }
}

/// Whether `v` can be collapsed without touching the role's moves or feedback.
fn collapsible(game: &Game, role: Role, v: NodeId) -> Result<(), String> {
    let tree = &game.tree;
    let NodeKind::Decision { .. } = tree.node(v).kind else {
        return Err("not a decision node".into());
    };
    let mut terminals = Vec::new();
    let mut owners = HashSet::new();
    subtree(tree, v, &mut terminals, &mut owners);
    if owners.contains(&role) {
        return Err("the role moves inside the subtree".into());
    }
    let partition = game.partition(role);
    let cell = partition.cell_of[terminals[0]];
    terminals.sort_unstable();
    if partition.cells[cell] != terminals {
        return Err("subtree terminals are not exactly one feedback cell".into());
    }
    Ok(())
}

/// Game in which every role but `role` is indifferent, with irrelevant moves of others pruned.
///
/// The role keeps its payoffs and feedback cells; the other roles get fully revealing
/// partitions.
pub fn auxiliary_game(game: &Game, role: Role, pruning: &Pruning) -> Result<Auxiliary, TransformError> {
    let tree = &game.tree;
    let mut cut: Vec<NodeId> = Vec::new();
    match pruning {
        Pruning::None => {}
        Pruning::Nodes(ids) => {
            for id in ids {
                let v = tree.find_node(id).ok_or_else(|| TransformError::BadPrune(id.clone(), "unknown node".into()))?;
                if let Err(reason) = collapsible(game, role, v) {
                    return Err(if reason.contains("feedback cell") {
                        TransformError::WouldChangeCells { node: id.clone(), role }
                    } else {
                        TransformError::BadPrune(id.clone(), reason)
                    });
                }
                cut.push(v);
            }
        }
        Pruning::Auto => {
            // Preorder so that the outermost candidate wins.
            let mut stack = vec![tree.root()];
            while let Some(v) = stack.pop() {
                if let NodeKind::Decision { owner, children, .. } = &tree.node(v).kind {
                    if *owner != role && collapsible(game, role, v).is_ok() {
                        cut.push(v);
                    } else {
                        stack.extend(children.iter().rev());
                    }
                }
            }
        }
    }

    let mut removed: HashSet<NodeId> = HashSet::new();
    for &v in &cut {
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if u != v {
                removed.insert(u);
            }
            if let NodeKind::Decision { children, .. } = &tree.node(u).kind {
                stack.extend(children);
            }
        }
    }
    if cut.iter().any(|v| removed.contains(v)) {
        return Err(TransformError::BadPrune("(nested)".into(), "pruned nodes must not be nested".into()));
    }

    let players = tree.players();
    let flatten = |payoffs: &[f64]| {
        let mut out = vec![0.0; players];
        out[role] = payoffs[role];
        out
    };
    let partition = game.partition(role);
    let mut nodes = Vec::new();
    for (v, node) in tree.nodes().iter().enumerate() {
        if removed.contains(&v) {
            continue;
        }
        if cut.contains(&v) {
            let mut terminals = Vec::new();
            subtree(tree, v, &mut terminals, &mut HashSet::new());
            nodes.push(NodeSpec::terminal(&node.id, &flatten(tree.payoffs(tree.terminals()[terminals[0]]))));
            continue;
        }
        nodes.push(match &node.kind {
            NodeKind::Terminal { payoffs } => NodeSpec::terminal(&node.id, &flatten(payoffs)),
            NodeKind::Decision { owner, infoset, children } => {
                let info = tree.infoset(*infoset);
                let edges: Vec<(&str, &str)> =
                    info.actions.iter().zip(children).map(|(a, &c)| (a.as_str(), tree.node(c).id.as_str())).collect();
                NodeSpec::decision(&node.id, owner + 1, &info.id, &edges)
            }
        });
    }

    let cells = partition
        .cells
        .iter()
        .map(|cell| {
            let z = tree.terminals()[cell[0]];
            let holder = cut.iter().find(|&&v| is_ancestor(tree, v, z));
            match holder {
                Some(&v) => vec![tree.node(v).id.clone()],
                None => cell.iter().map(|&t| tree.node(tree.terminals()[t]).id.clone()).collect(),
            }
        })
        .collect();
    let file = GameFile { players, nodes, partitions: vec![PartitionSpec { role: role + 1, cells }] };
    let game = Game::from_file(&file)?;
    let pruned = cut.iter().map(|&v| tree.node(v).id.clone()).collect();
    Ok(Auxiliary { game, file, pruned })
}

fn is_ancestor(tree: &GameTree, a: NodeId, mut v: NodeId) -> bool {
    loop {
        if v == a {
            return true;
        }
        match tree.node(v).parent {
            Some(p) => v = p,
            None => return false,
        }
    }
}
