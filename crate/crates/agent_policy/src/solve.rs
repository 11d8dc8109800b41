use serde::{Deserialize, Serialize};
use sslab_beliefs::{CountState, DirichletPrior, DEFAULT_CAP};
use sslab_game::{Game, GameTree};

use crate::model::{BeliefModel, DEFAULT_MAX_STATES};
use crate::PolicyError;

/// Relative slack within which two action values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Smallest `T` with `(δγ)^T · range / (1 − δγ) < tol`; `1` when `δγ = 0`.
pub fn effective_horizon(delta: f64, gamma: f64, tol: f64, range: f64) -> Result<u32, PolicyError> {
    if !(0.0..1.0).contains(&delta) || !(0.0..1.0).contains(&gamma) || !(tol > 0.0) {
        return Err(PolicyError::BadArgument(format!("need 0 <= delta, gamma < 1 and tol > 0, got {delta}, {gamma}, {tol}")));
    }
    let beta = delta * gamma;
    if beta == 0.0 || range <= 0.0 {
        return Ok(1);
    }
    let tail = |t: u32| beta.powi(t as i32) * range / (1.0 - beta);
    let mut t = ((tol * (1.0 - beta) / range).ln() / beta.ln()).ceil().max(1.0) as u32;
    while tail(t) >= tol {
        t += 1;
    }
    while t > 1 && tail(t - 1) < tol {
        t -= 1;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub cap: u32,
    pub tol: f64,
    pub max_states: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { cap: DEFAULT_CAP, tol: 1e-6, max_states: DEFAULT_MAX_STATES }
    }
}

/// An optimal policy with its values on every reachable state.
#[derive(Clone, Debug)]
pub struct Policy {
    pub model: BeliefModel,
    pub delta: f64,
    pub gamma: f64,
    pub horizon: u32,
    /// Strategy index chosen at each state.
    pub choice: Vec<u32>,
    pub value: Vec<f64>,
    pub bellman_residual: f64,
}

/// Chooses the first index within the tie slack of the best value.
fn pick(q: &[f64]) -> (usize, f64) {
    let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = TIE_TOLERANCE * (1.0 + best.abs());
    let a = q.iter().position(|&x| x >= best - slack).unwrap_or(0);
    (a, best)
}

struct Scratch {
    means: Vec<f64>,
    probs: Vec<f64>,
    q: Vec<f64>,
}

impl Scratch {
    fn new() -> Self {
        Scratch { means: Vec::new(), probs: Vec::new(), q: Vec::new() }
    }
}

/// Action values at state `x` against continuation values `v`. The state's own value
/// enters through `self_value`, or is solved for when that is `None`.
fn action_values(m: &BeliefModel, beta: f64, x: usize, v: &[f64], self_value: Option<f64>, sc: &mut Scratch) {
    m.means(m.states[x], &mut sc.means);
    sc.q.clear();
    for s in 0..m.strategies.len() {
        m.predictive(&sc.means, s, &mut sc.probs);
        let (mut r, mut cont, mut stay) = (0.0, 0.0, 0.0);
        for (c, &p) in sc.probs.iter().enumerate() {
            r += p * m.classes[s][c].payoff;
            let y = m.successor(x, s, c);
            if y == x {
                stay += p;
            } else {
                cont += p * v[y];
            }
        }
        sc.q.push(match self_value {
            Some(vx) => r + beta * (cont + stay * vx),
            None => (r + beta * cont) / (1.0 - beta * stay),
        });
    }
}

fn check_discount(delta: f64, gamma: f64) -> Result<f64, PolicyError> {
    if !(0.0..1.0).contains(&delta) || !(0.0..1.0).contains(&gamma) {
        return Err(PolicyError::BadArgument(format!("discounts must lie in [0, 1), got {delta} and {gamma}")));
    }
    Ok(delta * gamma)
}

impl Policy {
    /// Exact optimal values of the capped model.
    ///
    /// Counts only grow, so states are processed from the most observations down; the only
    /// cycles are self-loops at saturation, which are solved in closed form.
    pub fn solve(model: BeliefModel, delta: f64, gamma: f64, tol: f64) -> Result<Self, PolicyError> {
        let beta = check_discount(delta, gamma)?;
        let n = model.state_count();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| std::cmp::Reverse(model.total(model.states[x])));
        let mut value = vec![0.0; n];
        let mut choice = vec![0u32; n];
        let mut sc = Scratch::new();
        for &x in &order {
            action_values(&model, beta, x, &value, None, &mut sc);
            let (a, best) = pick(&sc.q);
            value[x] = best;
            choice[x] = a as u32;
        }
        let range = payoff_range(&model);
        let horizon = effective_horizon(delta, gamma, tol, range)?;
        let mut policy = Policy { model, delta, gamma, horizon, choice, value, bellman_residual: 0.0 };
        policy.bellman_residual = policy.residual();
        Ok(policy)
    }

    pub fn beta(&self) -> f64 {
        self.delta * self.gamma
    }

    /// `max_x |V(x) − (TV)(x)|`.
    pub fn residual(&self) -> f64 {
        let mut sc = Scratch::new();
        (0..self.model.state_count())
            .map(|x| {
                action_values(&self.model, self.beta(), x, &self.value, Some(self.value[x]), &mut sc);
                (pick(&sc.q).1 - self.value[x]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Strategy index prescribed at a state key.
    pub fn action_at(&self, key: u128) -> Option<usize> {
        self.model.state_index(key).map(|x| self.choice[x] as usize)
    }

    /// Strategy index prescribed after a history summarized by `state`.
    pub fn action(&self, state: &CountState) -> Option<usize> {
        self.action_at(self.model.key_of(state)?)
    }

    /// Action values at one state.
    pub fn q_values(&self, x: usize) -> Vec<f64> {
        let mut sc = Scratch::new();
        action_values(&self.model, self.beta(), x, &self.value, Some(self.value[x]), &mut sc);
        sc.q
    }

    /// Strategy maximizing posterior-mean payoff at every state.
    pub fn myopic_choice(&self) -> Vec<u32> {
        let m = &self.model;
        let mut sc = Scratch::new();
        (0..m.state_count())
            .map(|x| {
                m.means(m.states[x], &mut sc.means);
                let q: Vec<f64> = (0..m.strategies.len())
                    .map(|s| {
                        m.predictive(&sc.means, s, &mut sc.probs);
                        sc.probs.iter().zip(&m.classes[s]).map(|(p, c)| p * c.payoff).sum()
                    })
                    .collect();
                pick(&q).0 as u32
            })
            .collect()
    }

    /// Worst violation of `E[V(next)] ≥ V(x)` over states at most `depth` observations deep,
    /// for every own strategy as the experiment.
    pub fn information_value_gap(&self, depth: u32) -> f64 {
        let m = &self.model;
        let mut sc = Scratch::new();
        let mut worst: f64 = 0.0;
        for x in 0..m.state_count() {
            if m.total(m.states[x]) > depth {
                continue;
            }
            m.means(m.states[x], &mut sc.means);
            for s in 0..m.strategies.len() {
                m.predictive(&sc.means, s, &mut sc.probs);
                let next: f64 = sc.probs.iter().enumerate().map(|(c, p)| p * self.value[m.successor(x, s, c)]).sum();
                worst = worst.max(self.value[x] - next);
            }
        }
        worst
    }

    pub fn dump(&self, tree: &GameTree) -> PolicyDump {
        let m = &self.model;
        let names: Vec<String> = m.strategies.iter().map(|s| s.name(tree)).collect();
        let states = (0..m.state_count())
            .map(|x| DumpState {
                counts: m.counts(m.states[x]),
                strategy: names[self.choice[x] as usize].clone(),
                value: self.value[x],
            })
            .collect();
        PolicyDump {
            role: m.role + 1,
            delta: self.delta,
            gamma: self.gamma,
            cap: m.cap,
            horizon: self.horizon,
            tie_break: "lowest-strategy-index".into(),
            bellman_residual: self.bellman_residual,
            slots: m.slots.iter().map(|s| format!("{}:{}", s.infoset, s.action)).collect(),
            strategies: names,
            states,
        }
    }
}

fn payoff_range(m: &BeliefModel) -> f64 {
    let payoffs = m.classes.iter().flatten().map(|c| c.payoff);
    let (lo, hi) = payoffs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| (lo.min(u), hi.max(u)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DumpState {
    /// Tracked counts in slot order.
    pub counts: Vec<u32>,
    pub strategy: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolicyDump {
    pub role: usize,
    pub delta: f64,
    pub gamma: f64,
    pub cap: u32,
    pub horizon: u32,
    pub tie_break: String,
    pub bellman_residual: f64,
    pub slots: Vec<String>,
    pub strategies: Vec<String>,
    pub states: Vec<DumpState>,
}

/// Builds the belief model of `prior.role` and solves it.
pub fn solve_policy(game: &Game, prior: &DirichletPrior, delta: f64, gamma: f64, opts: &SolveOptions) -> Result<Policy, PolicyError> {
    check_discount(delta, gamma)?;
    let model = BeliefModel::build(game, prior, opts.cap, opts.max_states)?;
    Policy::solve(model, delta, gamma, opts.tol)
}

/// Finite-horizon value iteration from zero, for cross-checking the exact solve.
#[derive(Clone, Debug, Serialize)]
pub struct IterationCheck {
    pub iterations: u32,
    /// Sup-norm change per sweep; nonincreasing for a contraction started at zero.
    pub deltas: Vec<f64>,
    pub max_value_gap: f64,
    pub choice_mismatches: usize,
}

pub fn value_iteration_check(policy: &Policy, iterations: u32) -> IterationCheck {
    let m = &policy.model;
    let n = m.state_count();
    let mut v = vec![0.0; n];
    let mut choice = vec![0u32; n];
    let mut deltas = Vec::new();
    let mut sc = Scratch::new();
    for _ in 0..iterations {
        let mut next = vec![0.0; n];
        for x in 0..n {
            action_values(m, policy.beta(), x, &v, Some(v[x]), &mut sc);
            let (a, best) = pick(&sc.q);
            next[x] = best;
            choice[x] = a as u32;
        }
        deltas.push(next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        v = next;
    }
    let max_value_gap = v.iter().zip(&policy.value).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let choice_mismatches = choice.iter().zip(&policy.choice).filter(|(a, b)| a != b).count();
    IterationCheck { iterations, deltas, max_value_gap, choice_mismatches }
}
