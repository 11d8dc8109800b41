use serde::{Deserialize, Serialize};

use crate::tree::{GameTree, InfoSetId, NodeId, NodeKind, Role};
use crate::{GameError, PROB_TOL};

/// One action per own information set, aligned with [`GameTree::role_infosets`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PureStrategy {
    pub role: Role,
    pub choice: Vec<usize>,
}

/// One probability vector per own information set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorStrategy {
    pub role: Role,
    pub mix: Vec<Vec<f64>>,
}

/// Distribution over the role's pure strategies in enumeration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedStrategy {
    pub role: Role,
    pub dist: Vec<f64>,
}

/// Behavior probabilities for every information set of the game, indexed by infoset id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorProfile {
    pub probs: Vec<Vec<f64>>,
}

impl PureStrategy {
    /// All pure strategies of `role`; the first information set is the most significant digit.
    pub fn enumerate(tree: &GameTree, role: Role) -> Vec<PureStrategy> {
        let sizes: Vec<usize> = tree.role_infosets(role).iter().map(|&h| tree.infoset(h).actions.len()).collect();
        let total: usize = sizes.iter().product();
        (0..total)
            .map(|mut k| {
                let mut choice = vec![0; sizes.len()];
                for (pos, &n) in sizes.iter().enumerate().rev() {
                    choice[pos] = k % n;
                    k /= n;
                }
                PureStrategy { role, choice }
            })
            .collect()
    }

    /// Position of this strategy in [`PureStrategy::enumerate`].
    pub fn index(&self, tree: &GameTree) -> usize {
        tree.role_infosets(self.role)
            .iter()
            .zip(&self.choice)
            .fold(0, |acc, (&h, &a)| acc * tree.infoset(h).actions.len() + a)
    }

    /// Action names joined by `/`, or `-` for a role without moves.
    pub fn name(&self, tree: &GameTree) -> String {
        if self.choice.is_empty() {
            return "-".to_string();
        }
        tree.role_infosets(self.role)
            .iter()
            .zip(&self.choice)
            .map(|(&h, &a)| tree.infoset(h).actions[a].as_str())
            .collect::<Vec<_>>()
            .join("/")
    }

    /// Parses a name produced by [`PureStrategy::name`].
    pub fn parse(tree: &GameTree, role: Role, name: &str) -> Result<Self, GameError> {
        let infosets = tree.role_infosets(role);
        if infosets.is_empty() {
            return Ok(PureStrategy { role, choice: Vec::new() });
        }
        let parts: Vec<&str> = name.split('/').collect();
        if parts.len() != infosets.len() {
            return Err(GameError::Unknown { what: "strategy", name: name.to_string() });
        }
        let choice = infosets
            .iter()
            .zip(parts)
            .map(|(&h, p)| tree.action_index(h, p).ok_or_else(|| GameError::Unknown { what: "action", name: p.to_string() }))
            .collect::<Result<_, _>>()?;
        Ok(PureStrategy { role, choice })
    }

    pub fn check(&self, tree: &GameTree) -> Result<(), GameError> {
        let infosets = tree.role_infosets(self.role);
        if self.choice.len() != infosets.len()
            || infosets.iter().zip(&self.choice).any(|(&h, &a)| a >= tree.infoset(h).actions.len())
        {
            return Err(GameError::BadStrategy { role: self.role, reason: "choice out of range".into() });
        }
        Ok(())
    }
}

impl BehaviorStrategy {
    pub fn uniform(tree: &GameTree, role: Role) -> Self {
        let mix = tree
            .role_infosets(role)
            .iter()
            .map(|&h| {
                let n = tree.infoset(h).actions.len();
                vec![1.0 / n as f64; n]
            })
            .collect();
        BehaviorStrategy { role, mix }
    }

    pub fn pure(tree: &GameTree, s: &PureStrategy) -> Self {
        let mix = tree
            .role_infosets(s.role)
            .iter()
            .zip(&s.choice)
            .map(|(&h, &a)| {
                let mut v = vec![0.0; tree.infoset(h).actions.len()];
                v[a] = 1.0;
                v
            })
            .collect();
        BehaviorStrategy { role: s.role, mix }
    }

    pub fn check(&self, tree: &GameTree) -> Result<(), GameError> {
        let infosets = tree.role_infosets(self.role);
        let bad = |reason: &str| Err(GameError::BadStrategy { role: self.role, reason: reason.to_string() });
        if self.mix.len() != infosets.len() {
            return bad("wrong number of information sets");
        }
        for (&h, v) in infosets.iter().zip(&self.mix) {
            if v.len() != tree.infoset(h).actions.len() {
                return bad("wrong number of actions");
            }
            if v.iter().any(|&p| !(p >= 0.0)) || (v.iter().sum::<f64>() - 1.0).abs() > PROB_TOL * v.len() as f64 {
                return bad("not a probability vector");
            }
        }
        Ok(())
    }
}

impl MixedStrategy {
    pub fn pure(tree: &GameTree, s: &PureStrategy) -> Self {
        let mut dist = vec![0.0; tree.strategy_count(s.role) as usize];
        dist[s.index(tree)] = 1.0;
        MixedStrategy { role: s.role, dist }
    }
}

impl BehaviorProfile {
    pub fn from_strategies(tree: &GameTree, strategies: &[BehaviorStrategy]) -> Result<Self, GameError> {
        let mut probs = vec![Vec::new(); tree.infosets().len()];
        for r in 0..tree.players() {
            let b = strategies.iter().find(|b| b.role == r).ok_or(GameError::MissingRole(r))?;
            b.check(tree)?;
            for (&h, v) in tree.role_infosets(r).iter().zip(&b.mix) {
                probs[h] = v.clone();
            }
        }
        Ok(BehaviorProfile { probs })
    }

    pub fn uniform(tree: &GameTree) -> Self {
        let probs = tree.infosets().iter().map(|i| vec![1.0 / i.actions.len() as f64; i.actions.len()]).collect();
        BehaviorProfile { probs }
    }

    pub fn from_pure(tree: &GameTree, profile: &[PureStrategy]) -> Self {
        let mut probs: Vec<Vec<f64>> = tree.infosets().iter().map(|i| vec![0.0; i.actions.len()]).collect();
        for s in profile {
            for (&h, &a) in tree.role_infosets(s.role).iter().zip(&s.choice) {
                probs[h][a] = 1.0;
            }
        }
        BehaviorProfile { probs }
    }

    pub fn strategy(&self, tree: &GameTree, role: Role) -> BehaviorStrategy {
        BehaviorStrategy { role, mix: tree.role_infosets(role).iter().map(|&h| self.probs[h].clone()).collect() }
    }

    pub fn set_strategy(&mut self, tree: &GameTree, b: &BehaviorStrategy) {
        for (&h, v) in tree.role_infosets(b.role).iter().zip(&b.mix) {
            self.probs[h] = v.clone();
        }
    }

    pub fn prob(&self, h: InfoSetId, a: usize) -> f64 {
        self.probs[h][a]
    }

    /// Largest absolute coordinate difference.
    pub fn sup_distance(&self, other: &BehaviorProfile) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn outcome_by_choice(tree: &GameTree, choice_of: &[usize]) -> NodeId {
    let mut v = tree.root();
    loop {
        match &tree.node(v).kind {
            NodeKind::Terminal { .. } => return v,
            NodeKind::Decision { infoset, children, .. } => v = children[choice_of[*infoset]],
        }
    }
}

/// Terminal node reached when every role follows its pure strategy.
pub fn outcome(tree: &GameTree, profile: &[PureStrategy]) -> Result<NodeId, GameError> {
    let mut choice_of = vec![usize::MAX; tree.infosets().len()];
    for r in 0..tree.players() {
        let s = profile.iter().find(|s| s.role == r).ok_or(GameError::MissingRole(r))?;
        s.check(tree)?;
        for (&h, &a) in tree.role_infosets(r).iter().zip(&s.choice) {
            choice_of[h] = a;
        }
    }
    Ok(outcome_by_choice(tree, &choice_of))
}

/// Probability of each terminal (by terminal position) under a behavior profile.
pub fn terminal_distribution(tree: &GameTree, profile: &BehaviorProfile) -> Vec<f64> {
    let mut out = vec![0.0; tree.terminals().len()];
    let mut stack = vec![(tree.root(), 1.0)];
    while let Some((v, p)) = stack.pop() {
        match &tree.node(v).kind {
            NodeKind::Terminal { .. } => out[tree.terminal_pos(v).expect("terminal")] += p,
            NodeKind::Decision { infoset, children, .. } => {
                for (a, &c) in children.iter().enumerate() {
                    let q = p * profile.probs[*infoset][a];
                    if q > 0.0 {
                        stack.push((c, q));
                    }
                }
            }
        }
    }
    out
}

/// Expected payoff vector under independent behavior strategies.
pub fn expected_payoff(tree: &GameTree, profile: &[BehaviorStrategy]) -> Result<Vec<f64>, GameError> {
    let bp = BehaviorProfile::from_strategies(tree, profile)?;
    Ok(expected_payoff_profile(tree, &bp))
}

pub(crate) fn expected_payoff_profile(tree: &GameTree, profile: &BehaviorProfile) -> Vec<f64> {
    let dist = terminal_distribution(tree, profile);
    let mut u = vec![0.0; tree.players()];
    for (t, &z) in tree.terminals().iter().enumerate() {
        if dist[t] > 0.0 {
            for (ui, pz) in u.iter_mut().zip(tree.payoffs(z)) {
                *ui += dist[t] * pz;
            }
        }
    }
    u
}

impl BehaviorProfile {
    pub fn expected_payoff(&self, tree: &GameTree) -> Vec<f64> {
        expected_payoff_profile(tree, self)
    }
}
