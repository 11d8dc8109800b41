use serde::Serialize;
use sslab_game::{GameTree, NodeKind, PureStrategy};

use crate::EliminationError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimpleGameReport {
    /// Every information set is a single node.
    pub perfect_info: bool,
    /// No role moves twice along any path.
    pub moves_once: bool,
    /// No role gets the same payoff at two terminals.
    pub no_terminal_ties: bool,
    /// Nodes where backward induction meets a tie for the mover's best continuation.
    pub bi_comparison_ties: Vec<String>,
    /// All three strict conditions hold.
    pub simple: bool,
    /// Perfect information, single moves and no ties at the comparisons backward induction makes.
    pub relaxed: bool,
}

/// Longest distance from each node to a terminal below it; terminals have height 0.
pub fn node_heights(tree: &GameTree) -> Vec<u32> {
    let mut height = vec![0u32; tree.nodes().len()];
    // Parents precede children in node order.
    for v in (0..tree.nodes().len()).rev() {
        if let NodeKind::Decision { children, .. } = &tree.node(v).kind {
            height[v] = 1 + children.iter().map(|&c| height[c]).max().unwrap_or(0);
        }
    }
    height
}

/// Backward-induction payoff vector at every node and the chosen action at decision nodes,
/// plus the nodes whose best continuation is tied.
fn solve(tree: &GameTree) -> (Vec<Vec<f64>>, Vec<Option<usize>>, Vec<usize>) {
    let n = tree.nodes().len();
    let mut value: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut choice = vec![None; n];
    let mut ties = Vec::new();
    for v in (0..n).rev() {
        match &tree.node(v).kind {
            NodeKind::Terminal { payoffs } => value[v] = payoffs.clone(),
            NodeKind::Decision { owner, children, .. } => {
                let best = children.iter().map(|&c| value[c][*owner]).fold(f64::NEG_INFINITY, f64::max);
                let top: Vec<usize> = (0..children.len()).filter(|&k| value[children[k]][*owner] == best).collect();
                if top.len() > 1 {
                    ties.push(v);
                }
                choice[v] = Some(top[0]);
                value[v] = value[children[top[0]]].clone();
            }
        }
    }
    ties.reverse();
    (value, choice, ties)
}

fn perfect_info(tree: &GameTree) -> bool {
    tree.infosets().iter().all(|h| h.nodes.len() == 1)
}

pub fn is_simple_game(tree: &GameTree) -> SimpleGameReport {
    let perfect_info = perfect_info(tree);
    let moves_once = (0..tree.infosets().len()).all(|h| tree.own_history(h).is_empty());
    let no_terminal_ties = (0..tree.players()).all(|r| {
        let mut us: Vec<f64> = tree.terminals().iter().map(|&z| tree.payoffs(z)[r]).collect();
        us.sort_by(f64::total_cmp);
        us.windows(2).all(|w| w[0] != w[1])
    });
    let bi_comparison_ties: Vec<String> =
        if perfect_info { solve(tree).2.into_iter().map(|v| tree.node(v).id.clone()).collect() } else { Vec::new() };
    let relaxed = perfect_info && moves_once && bi_comparison_ties.is_empty();
    SimpleGameReport { perfect_info, moves_once, no_terminal_ties, simple: relaxed && no_terminal_ties, relaxed, bi_comparison_ties }
}

/// The backward-induction profile of a perfect-information game.
pub fn bi_profile(tree: &GameTree) -> Result<Vec<PureStrategy>, EliminationError> {
    if !perfect_info(tree) {
        return Err(EliminationError::NotSimple("backward induction needs perfect information".into()));
    }
    let (_, choice, ties) = solve(tree);
    if let Some(&v) = ties.first() {
        return Err(EliminationError::NotSimple(format!("tie for the mover at node {}", tree.node(v).id)));
    }
    Ok((0..tree.players())
        .map(|r| PureStrategy {
            role: r,
            choice: tree.role_infosets(r).iter().map(|&h| choice[tree.infoset(h).nodes[0]].expect("decision node")).collect(),
        })
        .collect())
}

/// Own nodes of `role` with their height and backward-induction action, aligned with the
/// role's information sets.
pub(crate) fn bi_plan(tree: &GameTree, role: usize) -> Result<Vec<(u32, usize)>, EliminationError> {
    let profile = bi_profile(tree)?;
    let heights = node_heights(tree);
    Ok(tree.role_infosets(role).iter().zip(&profile[role].choice).map(|(&h, &a)| (heights[tree.infoset(h).nodes[0]], a)).collect())
}
