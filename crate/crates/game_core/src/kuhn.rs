use serde::Serialize;

use crate::strategy::{BehaviorStrategy, MixedStrategy, PureStrategy};
use crate::tree::{GameTree, InfoSetId};

/// Result of converting a mixed strategy into behavior form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KuhnBehavior {
    pub strategy: BehaviorStrategy,
    /// Own information sets that the mixed strategy never reaches; they get a uniform mix.
    pub flagged: Vec<InfoSetId>,
}

/// Product formula: each pure strategy gets the product of its action probabilities.
pub fn behavior_to_mixed(tree: &GameTree, b: &BehaviorStrategy) -> MixedStrategy {
    let dist = PureStrategy::enumerate(tree, b.role)
        .iter()
        .map(|s| s.choice.iter().zip(&b.mix).map(|(&a, v)| v[a]).product())
        .collect();
    MixedStrategy { role: b.role, dist }
}

/// Conditional choice probabilities given that each own information set is reached.
pub fn mixed_to_behavior(tree: &GameTree, m: &MixedStrategy) -> KuhnBehavior {
    let role = m.role;
    let strategies = PureStrategy::enumerate(tree, role);
    let mut flagged = Vec::new();
    let mix = tree
        .role_infosets(role)
        .iter()
        .enumerate()
        .map(|(pos, &h)| {
            let n = tree.infoset(h).actions.len();
            let history = tree.own_history(h);
            let mut weights = vec![0.0; n];
            for (s, &p) in strategies.iter().zip(&m.dist) {
                if p > 0.0 && history.iter().all(|&(g, a)| s.choice[tree.infoset_pos(g)] == a) {
                    weights[s.choice[pos]] += p;
                }
            }
            let total: f64 = weights.iter().sum();
            if total > 0.0 {
                weights.iter().map(|w| w / total).collect()
            } else {
                flagged.push(h);
                vec![1.0 / n as f64; n]
            }
        })
        .collect();
    KuhnBehavior { strategy: BehaviorStrategy { role, mix }, flagged }
}
