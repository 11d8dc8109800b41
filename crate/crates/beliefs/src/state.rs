use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sslab_game::{BehaviorProfile, GameTree, InfoSetId, PureStrategy, Role};

use crate::{BeliefError, DirichletPrior};

/// Default per-information-set count ceiling.
pub const DEFAULT_CAP: u32 = 64;

/// Sufficient statistic of a role's history under a product-Dirichlet prior.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CountState {
    pub role: Role,
    /// Per information set id; empty for the role's own sets.
    pub counts: Vec<Vec<u32>>,
    /// Times each own pure strategy (by index) was played.
    pub own: BTreeMap<usize, u32>,
}

impl CountState {
    pub fn empty(tree: &GameTree, role: Role) -> Self {
        let counts = tree
            .infosets()
            .iter()
            .map(|info| if info.owner == role { Vec::new() } else { vec![0; info.actions.len()] })
            .collect();
        CountState { role, counts, own: BTreeMap::new() }
    }

    pub fn total(&self, h: InfoSetId) -> u32 {
        self.counts[h].iter().sum()
    }

    pub fn periods(&self) -> u32 {
        self.own.values().sum()
    }
}

/// Records one match: the own strategy played and the pairs revealed by the observed cell.
///
/// A role's opponents are handled as groups: if any revealed set of opponent `r` already holds
/// `cap` observations, none of `r`'s pairs from this match are recorded. Recording only part of
/// one opponent's path would bias the posterior towards the unsaturated sets.
pub fn update(
    tree: &GameTree,
    state: &CountState,
    own: &PureStrategy,
    revealed: &[(InfoSetId, usize)],
    cap: u32,
) -> Result<CountState, BeliefError> {
    let role = state.role;
    if own.role != role {
        return Err(BeliefError::Inconsistent(format!("strategy of role {} for role {}", own.role + 1, role + 1)));
    }
    for &(h, a) in revealed {
        if h >= tree.infosets().len() || a >= tree.infoset(h).actions.len() {
            return Err(BeliefError::Inconsistent(format!("pair ({h}, {a}) does not exist")));
        }
        let info = tree.infoset(h);
        if info.owner == role && own.choice[tree.infoset_pos(h)] != a {
            return Err(BeliefError::Inconsistent(format!(
                "revealed own action `{}` at `{}` was not played",
                info.actions[a], info.id
            )));
        }
    }
    let on_some_path = (0..tree.terminals().len()).any(|t| {
        let path = tree.path_pairs(t);
        revealed.iter().all(|p| path.binary_search(p).is_ok())
    });
    if !on_some_path {
        return Err(BeliefError::Inconsistent("revealed pairs do not lie on a common path".into()));
    }

    let mut next = state.clone();
    *next.own.entry(own.index(tree)).or_insert(0) += 1;
    for r in (0..tree.players()).filter(|&r| r != role) {
        let pairs: Vec<_> = revealed.iter().filter(|&&(h, _)| tree.infoset(h).owner == r).collect();
        if pairs.iter().any(|&&(h, _)| state.total(h) >= cap) {
            continue;
        }
        for &&(h, a) in &pairs {
            next.counts[h][a] += 1;
        }
    }
    Ok(next)
}

/// Posterior mean of every opponent information set; the role's own sets are left uniform.
pub fn posterior_mean(tree: &GameTree, prior: &DirichletPrior, state: &CountState) -> BehaviorProfile {
    let mut profile = BehaviorProfile::uniform(tree);
    for (h, (w, c)) in prior.weights.iter().zip(&state.counts).enumerate() {
        if w.is_empty() {
            continue;
        }
        let post: Vec<f64> = w.iter().zip(c).map(|(&w, &c)| w + f64::from(c)).collect();
        let total: f64 = post.iter().sum();
        profile.probs[h] = post.iter().map(|p| p / total).collect();
    }
    profile
}
