use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sslab_game::{GameTree, InfoSetId, Role};

use crate::BeliefError;

/// On-disk prior: `{"role": i, "weights": {infoset: {action: weight}}}` with 1-based role.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorFile {
    pub role: usize,
    pub weights: BTreeMap<String, BTreeMap<String, f64>>,
}

impl PriorFile {
    pub fn from_json(text: &str) -> Result<Self, BeliefError> {
        serde_json::from_str(text).map_err(|e| BeliefError::BadPrior(e.to_string()))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, BeliefError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| BeliefError::BadPrior(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| BeliefError::BadPrior(format!("{}: {e}", path.display())))
    }
}

/// Independent Dirichlet weights for every opponent information set.
///
/// Indexed by information-set id; the role's own sets hold empty vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletPrior {
    pub role: Role,
    pub weights: Vec<Vec<f64>>,
}

impl DirichletPrior {
    /// Same weight on every action of every opponent information set.
    pub fn uniform(tree: &GameTree, role: Role, w: f64) -> Self {
        let weights = tree
            .infosets()
            .iter()
            .map(|info| if info.owner == role { Vec::new() } else { vec![w; info.actions.len()] })
            .collect();
        DirichletPrior { role, weights }
    }

    /// Opponent sets missing from the file get weight 1 on each action.
    pub fn from_file(tree: &GameTree, file: &PriorFile) -> Result<Self, BeliefError> {
        if file.role == 0 || file.role > tree.players() {
            return Err(BeliefError::BadPrior(format!("role {} out of range", file.role)));
        }
        let role = file.role - 1;
        let mut prior = Self::uniform(tree, role, 1.0);
        for (id, actions) in &file.weights {
            let h = tree.find_infoset(id).ok_or_else(|| BeliefError::BadPrior(format!("unknown information set `{id}`")))?;
            if tree.infoset(h).owner == role {
                return Err(BeliefError::BadPrior(format!("`{id}` belongs to the prior's own role")));
            }
            for (a, &w) in actions {
                let k = tree
                    .action_index(h, a)
                    .ok_or_else(|| BeliefError::BadPrior(format!("unknown action `{a}` at `{id}`")))?;
                prior.weights[h][k] = w;
            }
        }
        prior.check(tree)?;
        Ok(prior)
    }

    pub fn from_json(tree: &GameTree, text: &str) -> Result<Self, BeliefError> {
        Self::from_file(tree, &PriorFile::from_json(text)?)
    }

    pub fn to_file(&self, tree: &GameTree) -> PriorFile {
        let weights = tree
            .infosets()
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| !w.is_empty())
            .map(|(info, w)| (info.id.clone(), info.actions.iter().cloned().zip(w.iter().copied()).collect()))
            .collect();
        PriorFile { role: self.role + 1, weights }
    }

    /// Non-doctrinaire: every weight finite and strictly positive.
    pub fn check(&self, tree: &GameTree) -> Result<(), BeliefError> {
        if self.weights.len() != tree.infosets().len() {
            return Err(BeliefError::BadPrior("wrong number of information sets".into()));
        }
        for (info, w) in tree.infosets().iter().zip(&self.weights) {
            let expect = if info.owner == self.role { 0 } else { info.actions.len() };
            if w.len() != expect {
                return Err(BeliefError::BadPrior(format!("wrong number of weights at `{}`", info.id)));
            }
            if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(BeliefError::BadPrior(format!("weights at `{}` must be positive", info.id)));
            }
        }
        Ok(())
    }

    pub fn mean(&self, h: InfoSetId) -> Vec<f64> {
        let total: f64 = self.weights[h].iter().sum();
        self.weights[h].iter().map(|w| w / total).collect()
    }

    /// Sets the weights at one information set by action name.
    pub fn set(&mut self, tree: &GameTree, infoset: &str, weights: &[(&str, f64)]) -> Result<(), BeliefError> {
        let h = tree.find_infoset(infoset).ok_or_else(|| BeliefError::BadPrior(format!("unknown `{infoset}`")))?;
        for &(a, w) in weights {
            let k = tree.action_index(h, a).ok_or_else(|| BeliefError::BadPrior(format!("unknown action `{a}`")))?;
            self.weights[h][k] = w;
        }
        self.check(tree)
    }
}
