use serde::{Deserialize, Serialize};
use sslab_game::{BehaviorProfile, Game, GameFile, NodeKind, PureStrategy, Role};

use crate::{phi_unchecked, TransformError};

/// Merge of two consecutive information sets of one role.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoalescePlan {
    pub role: Role,
    /// Earlier information set; one of its actions leads into `h2`.
    pub h1: String,
    pub h2: String,
}

/// How objects of the original game correspond to the coalesced one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Identification {
    pub role: Role,
    pub h1: String,
    pub h2: String,
    /// Index of the pass action at `h1`.
    pub pass: usize,
    pub m: usize,
    pub n: usize,
    /// Actions of the merged set, which keeps the id of `h1`.
    pub merged_actions: Vec<String>,
    /// Original pure-strategy index of `role` to coalesced index (many to one).
    pub strategy_map: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Coalesced {
    pub game: Game,
    pub file: GameFile,
    pub identification: Identification,
}

pub fn coalesce(game: &Game, plan: &CoalescePlan) -> Result<Coalesced, TransformError> {
    let tree = &game.tree;
    let h1 = tree.find_infoset(&plan.h1).ok_or_else(|| TransformError::UnknownInfoSet(plan.h1.clone()))?;
    let h2 = tree.find_infoset(&plan.h2).ok_or_else(|| TransformError::UnknownInfoSet(plan.h2.clone()))?;
    let fail = |reason: &str| TransformError::NotConsecutive {
        role: plan.role,
        h1: plan.h1.clone(),
        h2: plan.h2.clone(),
        reason: reason.to_string(),
    };
    if h1 == h2 {
        return Err(fail("same information set"));
    }
    if tree.infoset(h1).owner != plan.role || tree.infoset(h2).owner != plan.role {
        return Err(fail("both sets must belong to the role"));
    }

    let mut pass = None;
    let mut reached = Vec::new();
    for &v in &tree.infoset(h1).nodes {
        let NodeKind::Decision { children, .. } = &tree.node(v).kind else { unreachable!() };
        let hits: Vec<usize> = children
            .iter()
            .enumerate()
            .filter(|&(_, &c)| matches!(tree.node(c).kind, NodeKind::Decision { infoset, .. } if infoset == h2))
            .map(|(a, _)| a)
            .collect();
        match (hits.as_slice(), pass) {
            ([a], None) => pass = Some(*a),
            ([a], Some(p)) if *a == p => {}
            _ => return Err(fail("every node of h1 must reach h2 through the same single action")),
        }
        reached.push(children[pass.unwrap()]);
    }
    reached.sort_unstable();
    let mut members = tree.infoset(h2).nodes.clone();
    members.sort_unstable();
    if reached != members {
        return Err(fail("pass children are not exactly the nodes of h2"));
    }
    let pass = pass.expect("information sets are non-empty");

    let mut file = game.to_file();
    let h2_ids: Vec<String> = members.iter().map(|&v| tree.node(v).id.clone()).collect();
    let tail: std::collections::HashMap<String, Vec<sslab_game::EdgeSpec>> = file
        .nodes
        .iter()
        .filter(|n| h2_ids.contains(&n.id))
        .map(|n| (n.id.clone(), n.edges.clone()))
        .collect();
    file.nodes.retain(|n| !h2_ids.contains(&n.id));
    for spec in file.nodes.iter_mut().filter(|n| n.infoset.as_deref() == Some(plan.h1.as_str())) {
        let via = spec.edges.remove(pass);
        spec.edges.extend(tail[&via.child].iter().cloned());
    }
    let new_game = Game::from_file(&file)?;

    let first = &tree.infoset(h1).actions;
    let second = &tree.infoset(h2).actions;
    let merged_actions: Vec<String> = first
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != pass)
        .map(|(_, a)| a.clone())
        .chain(second.iter().cloned())
        .collect();
    let m = first.len() - 1;
    let mut ident = Identification {
        role: plan.role,
        h1: plan.h1.clone(),
        h2: plan.h2.clone(),
        pass,
        m,
        n: second.len(),
        merged_actions,
        strategy_map: Vec::new(),
    };
    ident.strategy_map = PureStrategy::enumerate(tree, plan.role)
        .iter()
        .map(|s| ident.map_strategy(game, &new_game, s).index(&new_game.tree))
        .collect();
    Ok(Coalesced { game: new_game, file, identification: ident })
}

impl Identification {
    /// Action at the merged set for a (first, second) action pair.
    pub fn merged_action(&self, first: usize, second: usize) -> usize {
        match first.cmp(&self.pass) {
            std::cmp::Ordering::Equal => self.m + second,
            std::cmp::Ordering::Less => first,
            std::cmp::Ordering::Greater => first - 1,
        }
    }

    pub fn map_strategy(&self, orig: &Game, new: &Game, s: &PureStrategy) -> PureStrategy {
        let (t0, t1) = (&orig.tree, &new.tree);
        let pick = |id: &str| {
            let h = t0.find_infoset(id).expect("identified set");
            s.choice[t0.infoset_pos(h)]
        };
        let choice = t1
            .role_infosets(s.role)
            .iter()
            .map(|&h| {
                let id = &t1.infoset(h).id;
                if s.role == self.role && *id == self.h1 {
                    self.merged_action(pick(&self.h1), pick(&self.h2))
                } else {
                    pick(id)
                }
            })
            .collect();
        PureStrategy { role: s.role, choice }
    }

    /// Carries a behavior profile of the original game to the coalesced game.
    pub fn map_behavior(&self, orig: &Game, new: &Game, b: &BehaviorProfile) -> BehaviorProfile {
        let (t0, t1) = (&orig.tree, &new.tree);
        let old = |id: &str| &b.probs[t0.find_infoset(id).expect("identified set")];
        let probs = t1
            .infosets()
            .iter()
            .map(|info| {
                if info.owner == self.role && info.id == self.h1 {
                    phi_unchecked(old(&self.h1), old(&self.h2), self.pass)
                } else {
                    old(&info.id).clone()
                }
            })
            .collect();
        BehaviorProfile { probs }
    }
}
