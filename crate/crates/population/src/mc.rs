use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sslab_game::{outcome, BehaviorProfile, BehaviorStrategy, PureStrategy};

use crate::chain::mixed_from_shares;
use crate::{Learners, PopulationError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McOptions {
    /// Agents per role.
    pub agents: usize,
    pub burn_in: usize,
    /// Periods averaged after the burn-in.
    pub periods: usize,
    pub seed: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { agents: 100_000, burn_in: 300, periods: 300, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McResult {
    pub profile: BehaviorProfile,
    /// Time-averaged share of each own strategy, per role.
    pub shares: Vec<Vec<f64>>,
    pub agents: usize,
    pub periods: usize,
}

/// Finite population with random matching each period; agents follow their solved policies,
/// update on what they see, and are replaced by newborns with probability `1 − γ`.
pub fn simulate(learners: &Learners, opts: &McOptions) -> Result<McResult, PopulationError> {
    if opts.agents == 0 || opts.periods == 0 {
        return Err(PopulationError::Mismatch("need at least one agent and one period".into()));
    }
    let tree = &learners.game.tree;
    let roles = learners.policies.len();
    let counts: Vec<usize> = learners.policies.iter().map(|p| p.model.strategies.len()).collect();
    let total: usize = counts.iter().product();
    if total > 10_000_000 {
        return Err(PopulationError::Mismatch(format!("{total} strategy profiles are too many to tabulate")));
    }

    // Terminal position reached by every profile of strategy indices.
    let mut table = vec![0u32; total];
    let mut idx = vec![0usize; roles];
    for cell in table.iter_mut() {
        let profile: Vec<PureStrategy> =
            idx.iter().enumerate().map(|(r, &k)| learners.policies[r].model.strategies[k].clone()).collect();
        let z = outcome(tree, &profile)?;
        *cell = tree.terminal_pos(z).expect("terminal") as u32;
        for r in 0..roles {
            idx[r] += 1;
            if idx[r] < counts[r] {
                break;
            }
            idx[r] = 0;
        }
    }
    // Class observed by each role's strategy at each terminal.
    let class_of: Vec<Vec<Vec<u32>>> = learners
        .policies
        .iter()
        .map(|p| {
            p.model
                .classes
                .iter()
                .map(|classes| {
                    let mut v = vec![u32::MAX; tree.terminals().len()];
                    for (c, class) in classes.iter().enumerate() {
                        for &t in &class.terminals {
                            v[t] = c as u32;
                        }
                    }
                    v
                })
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.agents;
    let mut state: Vec<Vec<u32>> = vec![vec![0; n]; roles];
    let mut perm: Vec<Vec<u32>> = (0..roles).map(|_| (0..n as u32).collect()).collect();
    let mut shares: Vec<Vec<f64>> = counts.iter().map(|&k| vec![0.0; k]).collect();
    let mut chosen = vec![0usize; roles];
    for period in 0..opts.burn_in + opts.periods {
        for p in perm.iter_mut().skip(1) {
            p.shuffle(&mut rng);
        }
        let record = period >= opts.burn_in;
        for k in 0..n {
            let mut flat = 0;
            let mut stride = 1;
            for r in 0..roles {
                let a = perm[r][k] as usize;
                let s = learners.policies[r].choice[state[r][a] as usize] as usize;
                chosen[r] = s;
                flat += s * stride;
                stride *= counts[r];
            }
            let t = table[flat] as usize;
            for r in 0..roles {
                let a = perm[r][k] as usize;
                let s = chosen[r];
                if record {
                    shares[r][s] += 1.0;
                }
                let c = class_of[r][s][t] as usize;
                let next = learners.policies[r].model.successor(state[r][a] as usize, s, c) as u32;
                state[r][a] = if rng.random::<f64>() < learners.gamma { next } else { 0 };
            }
        }
    }
    let denom = (n * opts.periods) as f64;
    for v in shares.iter_mut() {
        for x in v.iter_mut() {
            *x /= denom;
        }
    }
    let strategies: Vec<BehaviorStrategy> =
        learners.policies.iter().zip(&shares).map(|(p, sh)| mixed_from_shares(tree, p, sh, 1.0)).collect();
    let profile = BehaviorProfile::from_strategies(tree, &strategies)?;
    Ok(McResult { profile, shares, agents: n, periods: opts.periods })
}
