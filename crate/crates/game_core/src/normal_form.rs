use serde::Serialize;

use crate::strategy::{outcome_by_choice, PureStrategy};
use crate::tree::{Game, GameTree, NodeId, Role};
use crate::{GameError, GameFile, NodeSpec, PartitionSpec};

pub const DEFAULT_PROFILE_CAP: usize = 1_000_000;

/// Profile-level feedback partition of one role.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfilePartition {
    pub role: Role,
    pub cells: Vec<Vec<usize>>,
    pub cell_of: Vec<usize>,
}

/// Strategic form. Profiles are indexed in mixed radix with role 0 most significant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalFormGame {
    pub players: usize,
    pub names: Vec<Vec<String>>,
    #[serde(skip)]
    pub strategies: Vec<Vec<PureStrategy>>,
    pub payoffs: Vec<Vec<f64>>,
    /// Source-tree terminal reached by each profile, when derived from a tree.
    #[serde(skip)]
    pub outcomes: Vec<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partitions: Option<Vec<ProfilePartition>>,
}

impl NormalFormGame {
    /// Builds a normal form directly from strategy names and per-profile payoff vectors.
    pub fn from_table(names: Vec<Vec<String>>, payoffs: Vec<Vec<f64>>) -> Self {
        let players = names.len();
        let strategies = names
            .iter()
            .enumerate()
            .map(|(r, ns)| (0..ns.len()).map(|k| PureStrategy { role: r, choice: vec![k] }).collect())
            .collect();
        let nf = NormalFormGame { players, names, strategies, payoffs, outcomes: Vec::new(), partitions: None };
        assert_eq!(nf.payoffs.len(), nf.profile_count(), "payoff table size must match strategy lists");
        nf
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.names.iter().map(Vec::len).collect()
    }

    pub fn profile_count(&self) -> usize {
        self.names.iter().map(Vec::len).product()
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.names).fold(0, |acc, (&k, ns)| acc * ns.len() + k)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.players];
        for r in (0..self.players).rev() {
            let n = self.names[r].len();
            out[r] = idx % n;
            idx /= n;
        }
        out
    }

    pub fn payoff(&self, role: Role, profile: &[usize]) -> f64 {
        self.payoffs[self.index(profile)][role]
    }

    pub fn strategy_index(&self, role: Role, name: &str) -> Option<usize> {
        self.names[role].iter().position(|n| n == name)
    }

    /// Simultaneous-move tree with one information set per role whose actions are
    /// the strategies. Profile partitions become terminal partitions.
    pub fn to_game_file(&self) -> GameFile {
        let mut nodes = Vec::new();
        let term_id = |p: &[usize]| {
            let parts: Vec<&str> = p.iter().enumerate().map(|(r, &k)| self.names[r][k].as_str()).collect();
            format!("z:{}", parts.join("|"))
        };
        fn prefix_id(role: usize, prefix: &[usize]) -> String {
            let parts: Vec<String> = prefix.iter().map(usize::to_string).collect();
            format!("s{}:{}", role + 1, parts.join("."))
        }
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for r in 0..self.players {
            let mut next = Vec::new();
            for prefix in &frontier {
                let edges: Vec<(String, String)> = (0..self.names[r].len())
                    .map(|k| {
                        let mut p = prefix.clone();
                        p.push(k);
                        let child = if r + 1 == self.players { term_id(&p) } else { prefix_id(r + 1, &p) };
                        next.push(p);
                        (self.names[r][k].clone(), child)
                    })
                    .collect();
                let e: Vec<(&str, &str)> = edges.iter().map(|(a, c)| (a.as_str(), c.as_str())).collect();
                nodes.push(NodeSpec::decision(&prefix_id(r, prefix), r + 1, &format!("S{}", r + 1), &e));
            }
            frontier = next;
        }
        for p in &frontier {
            nodes.push(NodeSpec::terminal(&term_id(p), &self.payoffs[self.index(p)]));
        }
        let partitions = self
            .partitions
            .iter()
            .flatten()
            .map(|pp| PartitionSpec {
                role: pp.role + 1,
                cells: pp.cells.iter().map(|c| c.iter().map(|&i| term_id(&self.decode(i))).collect()).collect(),
            })
            .collect();
        GameFile { players: self.players, nodes, partitions }
    }
}

pub fn derive_normal_form(tree: &GameTree) -> Result<NormalFormGame, GameError> {
    derive_normal_form_capped(tree, DEFAULT_PROFILE_CAP)
}

/// Enumerates every pure profile and plays it out. Fails when the profile count exceeds `cap`.
pub fn derive_normal_form_capped(tree: &GameTree, cap: usize) -> Result<NormalFormGame, GameError> {
    let count: u128 = (0..tree.players()).map(|r| tree.strategy_count(r)).product();
    if count > cap as u128 {
        return Err(GameError::TooManyProfiles { count, cap });
    }
    let strategies: Vec<Vec<PureStrategy>> = (0..tree.players()).map(|r| PureStrategy::enumerate(tree, r)).collect();
    let names = strategies.iter().map(|ss| ss.iter().map(|s| s.name(tree)).collect()).collect();
    let mut nf = NormalFormGame {
        players: tree.players(),
        names,
        strategies,
        payoffs: Vec::with_capacity(count as usize),
        outcomes: Vec::with_capacity(count as usize),
        partitions: None,
    };
    let mut choice_of = vec![0usize; tree.infosets().len()];
    for idx in 0..count as usize {
        let profile = nf.decode(idx);
        for (r, &k) in profile.iter().enumerate() {
            for (&h, &a) in tree.role_infosets(r).iter().zip(&nf.strategies[r][k].choice) {
                choice_of[h] = a;
            }
        }
        let z = outcome_by_choice(tree, &choice_of);
        nf.payoffs.push(tree.payoffs(z).to_vec());
        nf.outcomes.push(z);
    }
    Ok(nf)
}

/// Profiles share a cell iff the terminals they reach share a cell of the role's partition.
pub fn p_equivalent_partition(game: &Game, nf: &NormalFormGame) -> Vec<ProfilePartition> {
    let tree = &game.tree;
    game.partitions
        .iter()
        .map(|p| {
            let mut cell_ids: Vec<Option<usize>> = vec![None; p.cells.len()];
            let mut cells: Vec<Vec<usize>> = Vec::new();
            let mut cell_of = Vec::with_capacity(nf.outcomes.len());
            for (idx, &z) in nf.outcomes.iter().enumerate() {
                let c = p.cell_of[tree.terminal_pos(z).expect("terminal")];
                let id = *cell_ids[c].get_or_insert_with(|| {
                    cells.push(Vec::new());
                    cells.len() - 1
                });
                cells[id].push(idx);
                cell_of.push(id);
            }
            ProfilePartition { role: p.role, cells, cell_of }
        })
        .collect()
}
