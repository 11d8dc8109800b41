use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tree::{Game, GameTree, InfoSet, Node, NodeKind};
use crate::{GameFile, PureStrategy, TerminalPartition};

/// Above this many pure profiles the cylinder check on partition cells is skipped.
const CYLINDER_CHECK_CAP: u128 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    TreeStructure,
    InfoSetInconsistency,
    PerfectRecall,
    PartitionCoverage,
    PayoffMeasurability,
    ActionMeasurability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

/// All problems found in a game file. Empty iff the game is admissible.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Checks that were skipped for size reasons; informational only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation { kind, message: message.into() });
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::TreeStructure => "tree structure violated",
            ViolationKind::InfoSetInconsistency => "information set inconsistency",
            ViolationKind::PerfectRecall => "perfect recall violated",
            ViolationKind::PartitionCoverage => "partition coverage violated",
            ViolationKind::PayoffMeasurability => "payoff measurability violated",
            ViolationKind::ActionMeasurability => "action measurability violated",
        };
        f.write_str(s)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{}: {}", v.kind, v.message)?;
        }
        Ok(())
    }
}

/// Checks a game file against every structural assumption and lists all violations.
pub fn validate_game(file: &GameFile) -> ValidationReport {
    build(file).1
}

pub(crate) fn build(file: &GameFile) -> (Option<Game>, ValidationReport) {
    let mut report = ValidationReport::default();
    let Some(tree) = build_tree(file, &mut report) else {
        return (None, report);
    };
    let partitions = build_partitions(&tree, file, &mut report);
    (Some(Game { tree, partitions }), report)
}

fn build_tree(file: &GameFile, report: &mut ValidationReport) -> Option<GameTree> {
    use ViolationKind::*;
    let players = file.players;
    if players == 0 {
        report.push(TreeStructure, "game must have at least one player");
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, n) in file.nodes.iter().enumerate() {
        if index.insert(n.id.as_str(), i).is_some() {
            report.push(TreeStructure, format!("duplicate node id `{}`", n.id));
        }
    }
    for n in &file.nodes {
        if n.is_terminal() {
            if n.owner.is_some() || !n.edges.is_empty() || n.infoset.is_some() {
                report.push(TreeStructure, format!("terminal node `{}` has an owner, infoset or edges", n.id));
            }
            match &n.payoffs {
                None => report.push(TreeStructure, format!("terminal node `{}` has no payoffs", n.id)),
                Some(p) if p.len() != players => report.push(
                    TreeStructure,
                    format!("terminal node `{}` has {} payoffs for {} players", n.id, p.len(), players),
                ),
                Some(p) if p.iter().any(|u| !u.is_finite()) => {
                    report.push(TreeStructure, format!("terminal node `{}` has a non-finite payoff", n.id))
                }
                _ => {}
            }
        } else {
            match n.owner {
                Some(o) if o >= 1 && o <= players => {}
                Some(o) => report.push(TreeStructure, format!("node `{}` has owner {} outside 1..={}", n.id, o, players)),
                None => report.push(TreeStructure, format!("node `{}` is neither terminal nor owned", n.id)),
            }
            if n.infoset.is_none() {
                report.push(TreeStructure, format!("decision node `{}` has no infoset", n.id));
            }
            if n.edges.is_empty() {
                report.push(TreeStructure, format!("decision node `{}` has no edges", n.id));
            }
            if n.payoffs.is_some() {
                report.push(TreeStructure, format!("decision node `{}` carries payoffs", n.id));
            }
            let labels: BTreeSet<&str> = n.edges.iter().map(|e| e.action.as_str()).collect();
            if labels.len() != n.edges.len() {
                report.push(TreeStructure, format!("node `{}` repeats an action label", n.id));
            }
        }
    }
    let mut parent: Vec<Option<usize>> = vec![None; file.nodes.len()];
    for (i, n) in file.nodes.iter().enumerate() {
        for e in &n.edges {
            match index.get(e.child.as_str()) {
                None => report.push(TreeStructure, format!("edge from `{}` to unknown node `{}`", n.id, e.child)),
                Some(&c) => {
                    if parent[c].is_some() {
                        report.push(TreeStructure, format!("node `{}` has more than one parent", e.child));
                    }
                    parent[c] = Some(i);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..file.nodes.len()).filter(|&i| parent[i].is_none()).collect();
    if roots.len() != 1 {
        report.push(TreeStructure, format!("expected exactly one root, found {}", roots.len()));
    }
    if !report.is_empty() {
        return None;
    }
    let root_file = roots[0];

    // Depth-first discovery from the root fixes every ordering used downstream.
    let mut order = Vec::with_capacity(file.nodes.len());
    let mut seen = vec![false; file.nodes.len()];
    let mut stack = vec![root_file];
    while let Some(i) = stack.pop() {
        if seen[i] {
            report.push(TreeStructure, format!("cycle through node `{}`", file.nodes[i].id));
            return None;
        }
        seen[i] = true;
        order.push(i);
        for e in file.nodes[i].edges.iter().rev() {
            stack.push(index[e.child.as_str()]);
        }
    }
    if order.len() != file.nodes.len() {
        report.push(TreeStructure, "some nodes are unreachable from the root");
        return None;
    }
    let mut new_id = vec![0usize; file.nodes.len()];
    for (k, &i) in order.iter().enumerate() {
        new_id[i] = k;
    }

    let mut infosets: Vec<InfoSet> = Vec::new();
    let mut infoset_index: HashMap<&str, usize> = HashMap::new();
    let mut nodes: Vec<Node> = Vec::with_capacity(order.len());
    let mut terminals = Vec::new();
    let mut consistent = true;
    for &i in &order {
        let spec = &file.nodes[i];
        let parent = parent[i].map(|p| new_id[p]);
        if spec.is_terminal() {
            terminals.push(new_id[i]);
            nodes.push(Node {
                id: spec.id.clone(),
                parent,
                kind: NodeKind::Terminal { payoffs: spec.payoffs.clone().unwrap_or_default() },
            });
            continue;
        }
        let owner = spec.owner.unwrap_or(1) - 1;
        let name = spec.infoset.as_deref().unwrap_or_default();
        let h = *infoset_index.entry(name).or_insert_with(|| {
            infosets.push(InfoSet {
                id: name.to_string(),
                owner,
                actions: spec.edges.iter().map(|e| e.action.clone()).collect(),
                nodes: Vec::new(),
            });
            infosets.len() - 1
        });
        let info = &mut infosets[h];
        if info.owner != owner {
            report.push(
                InfoSetInconsistency,
                format!("information set `{}` mixes owners {} and {}", name, info.owner + 1, owner + 1),
            );
            consistent = false;
        }
        let mine: BTreeSet<&str> = spec.edges.iter().map(|e| e.action.as_str()).collect();
        let theirs: BTreeSet<&str> = info.actions.iter().map(String::as_str).collect();
        if mine != theirs {
            report.push(
                InfoSetInconsistency,
                format!("information set `{}` has different action sets at node `{}`", name, spec.id),
            );
            consistent = false;
        }
        info.nodes.push(new_id[i]);
        let children = info
            .actions
            .iter()
            .map(|a| {
                spec.edges
                    .iter()
                    .find(|e| &e.action == a)
                    .map(|e| new_id[index[e.child.as_str()]])
                    .unwrap_or(usize::MAX)
            })
            .collect();
        nodes.push(Node { id: spec.id.clone(), parent, kind: NodeKind::Decision { owner, infoset: h, children } });
    }
    if !consistent {
        return None;
    }

    let mut role_infosets = vec![Vec::new(); players];
    let mut infoset_pos = vec![0; infosets.len()];
    for (h, info) in infosets.iter().enumerate() {
        infoset_pos[h] = role_infosets[info.owner].len();
        role_infosets[info.owner].push(h);
    }
    let mut terminal_pos = vec![None; nodes.len()];
    for (t, &z) in terminals.iter().enumerate() {
        terminal_pos[z] = Some(t);
    }

    // Histories: full path pairs and each owner's own pairs.
    let mut path: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
    for v in 0..nodes.len() {
        if let NodeKind::Decision { infoset, children, .. } = &nodes[v].kind {
            for (a, &c) in children.iter().enumerate() {
                let mut p = path[v].clone();
                p.push((*infoset, a));
                path[c] = p;
            }
        }
    }
    let mut own_history: Vec<Option<Vec<(usize, usize)>>> = vec![None; infosets.len()];
    for v in 0..nodes.len() {
        if let NodeKind::Decision { owner, infoset, .. } = &nodes[v].kind {
            let own: Vec<(usize, usize)> =
                path[v].iter().copied().filter(|&(h, _)| infosets[h].owner == *owner).collect();
            match &own_history[*infoset] {
                None => own_history[*infoset] = Some(own),
                Some(prev) if *prev != own => report.push(
                    PerfectRecall,
                    format!(
                        "nodes of information set `{}` differ in their owner's own history (at node `{}`)",
                        infosets[*infoset].id, nodes[v].id
                    ),
                ),
                _ => {}
            }
        }
    }
    let path_pairs = terminals
        .iter()
        .map(|&z| {
            let mut p = path[z].clone();
            p.sort_unstable();
            p
        })
        .collect();
    Some(GameTree {
        players,
        nodes,
        root: 0,
        infosets,
        role_infosets,
        infoset_pos,
        terminals,
        terminal_pos,
        own_history: own_history.into_iter().map(Option::unwrap_or_default).collect(),
        path_pairs,
    })
}

fn build_partitions(tree: &GameTree, file: &GameFile, report: &mut ValidationReport) -> Vec<TerminalPartition> {
    use ViolationKind::*;
    let by_id = tree.index_by_id();
    let nz = tree.terminals.len();
    let mut given: Vec<Option<Vec<Vec<usize>>>> = vec![None; tree.players];
    for spec in &file.partitions {
        if spec.role == 0 || spec.role > tree.players {
            report.push(PartitionCoverage, format!("partition for unknown role {}", spec.role));
            continue;
        }
        let r = spec.role - 1;
        if given[r].is_some() {
            report.push(PartitionCoverage, format!("role {} has more than one partition", spec.role));
            continue;
        }
        let mut seen = vec![false; nz];
        let mut cells = Vec::new();
        for cell in &spec.cells {
            let mut ts = Vec::new();
            if cell.is_empty() {
                report.push(PartitionCoverage, format!("role {} has an empty cell", spec.role));
            }
            for id in cell {
                match by_id.get(id.as_str()).and_then(|&n| tree.terminal_pos[n]) {
                    None => report.push(PartitionCoverage, format!("role {} cell names non-terminal `{}`", spec.role, id)),
                    Some(t) => {
                        if seen[t] {
                            report.push(PartitionCoverage, format!("role {} lists terminal `{}` twice", spec.role, id));
                        }
                        seen[t] = true;
                        ts.push(t);
                    }
                }
            }
            ts.sort_unstable();
            ts.dedup();
            cells.push(ts);
        }
        let missing: Vec<&str> =
            (0..nz).filter(|&t| !seen[t]).map(|t| tree.nodes[tree.terminals[t]].id.as_str()).collect();
        if !missing.is_empty() {
            report.push(PartitionCoverage, format!("role {} partition misses terminals {:?}", spec.role, missing));
        }
        given[r] = Some(cells);
    }
    let partitions: Vec<TerminalPartition> = given
        .into_iter()
        .enumerate()
        .map(|(r, cells)| {
            let cells = cells.unwrap_or_else(|| (0..nz).map(|t| vec![t]).collect());
            TerminalPartition::from_cells(tree, r, cells)
        })
        .collect();
    if report.has(PartitionCoverage) {
        return partitions;
    }
    for p in &partitions {
        for cell in &p.cells {
            let u0 = tree.payoffs(tree.terminals[cell[0]])[p.role];
            if cell.iter().any(|&t| tree.payoffs(tree.terminals[t])[p.role] != u0) {
                report.push(
                    PayoffMeasurability,
                    format!("role {} cell containing `{}` pools unequal payoffs", p.role + 1, tree.nodes[tree.terminals[cell[0]]].id),
                );
            }
        }
        for (c, cell) in p.cells.iter().enumerate() {
            let consistent: Vec<usize> = (0..nz)
                .filter(|&t| p.revealed[c].iter().all(|pair| tree.path_pairs[t].binary_search(pair).is_ok()))
                .collect();
            if consistent != *cell {
                report.push(
                    ActionMeasurability,
                    format!(
                        "role {} cell containing `{}` is not the set of terminals consistent with its revealed actions",
                        p.role + 1,
                        tree.nodes[tree.terminals[cell[0]]].id
                    ),
                );
            }
        }
    }
    if !report.has(ActionMeasurability) {
        check_cylinders(tree, &partitions, report);
    }
    partitions
}

/// Every cell must be reached by exactly the pure profiles that agree with its
/// revealed pairs; otherwise the likelihood of a cell is not a product of action
/// probabilities and Dirichlet updating is not exact.
fn check_cylinders(tree: &GameTree, partitions: &[TerminalPartition], report: &mut ValidationReport) {
    let total: u128 = (0..tree.players).map(|r| tree.strategy_count(r)).product();
    if total > CYLINDER_CHECK_CAP {
        report.notes.push(format!("cylinder check skipped: {} pure profiles", total));
        return;
    }
    let strategies: Vec<Vec<PureStrategy>> = (0..tree.players).map(|r| PureStrategy::enumerate(tree, r)).collect();
    let mut choice_of = vec![0usize; tree.infosets.len()];
    let mut idx = vec![0usize; tree.players];
    let mut flagged = vec![BTreeSet::new(); tree.players];
    loop {
        let profile: Vec<&PureStrategy> = idx.iter().enumerate().map(|(r, &k)| &strategies[r][k]).collect();
        for s in &profile {
            for (pos, &h) in tree.role_infosets[s.role].iter().enumerate() {
                choice_of[h] = s.choice[pos];
            }
        }
        let z = crate::strategy::outcome_by_choice(tree, &choice_of);
        let t = tree.terminal_pos[z].expect("outcome is terminal");
        for p in partitions {
            let reached = p.cell_of[t];
            for (c, rev) in p.revealed.iter().enumerate() {
                if c != reached && rev.iter().all(|&(h, a)| choice_of[h] == a) {
                    flagged[p.role].insert(c);
                }
            }
        }
        let mut r = tree.players;
        loop {
            if r == 0 {
                for p in partitions {
                    for &c in &flagged[p.role] {
                        report.push(
                            ViolationKind::ActionMeasurability,
                            format!(
                                "role {} cell containing `{}` can be missed by profiles agreeing with its revealed actions",
                                p.role + 1,
                                tree.nodes[tree.terminals[p.cells[c][0]]].id
                            ),
                        );
                    }
                }
                return;
            }
            r -= 1;
            idx[r] += 1;
            if idx[r] < strategies[r].len() {
                break;
            }
            idx[r] = 0;
        }
    }
}
