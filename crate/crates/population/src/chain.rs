use serde::Serialize;
use sslab_game::{mixed_to_behavior, BehaviorProfile, BehaviorStrategy, GameTree, MixedStrategy};
use sslab_policy::Policy;

use crate::PopulationError;

/// Shares of one role's agents over the belief states of its model, indexed like
/// `policy.model.states`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopulationState {
    pub role: usize,
    pub mass: Vec<f64>,
}

impl PopulationState {
    /// Every agent newborn.
    pub fn newborn(policy: &Policy) -> Self {
        let mut mass = vec![0.0; policy.model.state_count()];
        mass[0] = 1.0;
        PopulationState { role: policy.model.role, mass }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Nonzero entries as (state index, mass).
    pub fn support(&self) -> Vec<(usize, f64)> {
        self.mass.iter().copied().enumerate().filter(|&(_, m)| m > 0.0).collect()
    }
}

/// Class probabilities of every own strategy against opponents playing `pi`.
pub fn true_kernel(policy: &Policy, pi: &BehaviorProfile) -> Vec<Vec<f64>> {
    (0..policy.model.strategies.len()).map(|s| policy.model.true_class_probs(pi, s)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub mass_in: f64,
    pub mass_out: f64,
    /// Mass removed by truncation; `mass_out + dropped = (1 − γ) + γ · mass_in`.
    pub dropped: f64,
}

/// One period: survivors move along the observation kernel, the exiting share is replaced
/// by newborns, and entries below `trunc` are removed.
pub fn update_rule(
    policy: &Policy,
    mu: &PopulationState,
    pi: &BehaviorProfile,
    gamma: f64,
    trunc: f64,
) -> Result<(PopulationState, StepReport), PopulationError> {
    let m = &policy.model;
    if mu.mass.len() != m.state_count() || mu.role != m.role {
        return Err(PopulationError::Mismatch("population state does not belong to this policy".into()));
    }
    let kernel = true_kernel(policy, pi);
    let mut next = vec![0.0; m.state_count()];
    next[0] += 1.0 - gamma;
    for (x, &w) in mu.mass.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let s = policy.choice[x] as usize;
        for (c, &p) in kernel[s].iter().enumerate() {
            next[m.successor(x, s, c)] += gamma * w * p;
        }
    }
    let mut dropped = 0.0;
    for v in next.iter_mut() {
        if *v < trunc {
            dropped += *v;
            *v = 0.0;
        }
    }
    let mass_in = mu.total();
    let out = PopulationState { role: mu.role, mass: next };
    let report = StepReport { mass_in, mass_out: out.total(), dropped };
    Ok((out, report))
}

/// Exact stationary distribution of one role's chain against fixed opponents.
///
/// Counts never decrease, so every state's inflow comes from states with fewer
/// observations (or itself, at saturation); one pass in that order solves the balance
/// equations.
pub fn stationary(policy: &Policy, pi: &BehaviorProfile, gamma: f64) -> PopulationState {
    let m = &policy.model;
    let kernel = true_kernel(policy, pi);
    let n = m.state_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| m.total(m.states[x]));
    let mut inflow = vec![0.0; n];
    inflow[0] = 1.0 - gamma;
    let mut mass = vec![0.0; n];
    for &x in &order {
        let s = policy.choice[x] as usize;
        let stay: f64 =
            kernel[s].iter().enumerate().filter(|&(c, _)| m.successor(x, s, c) == x).map(|(_, p)| p).sum();
        let mx = inflow[x] / (1.0 - gamma * stay);
        mass[x] = mx;
        if mx == 0.0 {
            continue;
        }
        for (c, &p) in kernel[s].iter().enumerate() {
            let y = m.successor(x, s, c);
            if y != x {
                inflow[y] += gamma * mx * p;
            }
        }
    }
    PopulationState { role: m.role, mass }
}

/// Population share of each own pure strategy.
pub fn strategy_shares(policy: &Policy, mu: &PopulationState) -> Vec<f64> {
    let mut dist = vec![0.0; policy.model.strategies.len()];
    for (x, &w) in mu.mass.iter().enumerate() {
        dist[policy.choice[x] as usize] += w;
    }
    dist
}

/// Behavior form of the population mixture. Information sets the mixture never reaches
/// get the uniform mix.
pub fn aggregate_strategy(tree: &GameTree, policy: &Policy, mu: &PopulationState) -> Result<BehaviorStrategy, PopulationError> {
    if mu.mass.len() != policy.model.state_count() {
        return Err(PopulationError::Mismatch("population state does not belong to this policy".into()));
    }
    let total = mu.total();
    if !(total > 0.0) {
        return Err(PopulationError::Mismatch("population state carries no mass".into()));
    }
    Ok(mixed_from_shares(tree, policy, &strategy_shares(policy, mu), total))
}

pub(crate) fn mixed_from_shares(tree: &GameTree, policy: &Policy, shares: &[f64], total: f64) -> BehaviorStrategy {
    let role = policy.model.role;
    let mut dist = vec![0.0; tree.strategy_count(role) as usize];
    for (k, s) in policy.model.strategies.iter().enumerate() {
        dist[s.index(tree)] += shares[k] / total;
    }
    mixed_to_behavior(tree, &MixedStrategy { role, dist }).strategy
}

/// Long-run aggregate strategy of one role when its opponents' aggregate is fixed at `pi`.
pub fn aggregate_response(tree: &GameTree, policy: &Policy, pi: &BehaviorProfile, gamma: f64) -> BehaviorStrategy {
    let mu = stationary(policy, pi, gamma);
    aggregate_strategy(tree, policy, &mu).expect("stationary mass is positive")
}
