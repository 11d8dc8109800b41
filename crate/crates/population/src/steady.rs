use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sslab_beliefs::DirichletPrior;
use sslab_game::{BehaviorProfile, BehaviorStrategy, Game, PureStrategy};
use sslab_policy::{solve_policy, Policy, SolveOptions};

use crate::chain::aggregate_response;
use crate::mc::{simulate, McOptions};
use crate::PopulationError;

/// Solved policies of every role at one `(δ, γ)`.
#[derive(Clone, Debug)]
pub struct Learners {
    pub game: Game,
    pub delta: f64,
    pub gamma: f64,
    pub policies: Vec<Policy>,
}

impl Learners {
    /// Solves each role's policy, one thread per role.
    pub fn solve(game: &Game, priors: &[DirichletPrior], delta: f64, gamma: f64, opts: &SolveOptions) -> Result<Self, PopulationError> {
        let players = game.players();
        if priors.len() != players || priors.iter().enumerate().any(|(r, p)| p.role != r) {
            return Err(PopulationError::Mismatch(format!("need one prior per role in role order ({players} roles)")));
        }
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> =
                priors.iter().map(|p| scope.spawn(move || solve_policy(game, p, delta, gamma, opts))).collect();
            handles.into_iter().map(|h| h.join().expect("policy solver panicked")).collect()
        });
        let policies = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(Learners { game: game.clone(), delta, gamma, policies })
    }

    /// Aggregate response of every role to `pi`.
    pub fn response(&self, pi: &BehaviorProfile) -> BehaviorProfile {
        let tree = &self.game.tree;
        let strategies: Vec<BehaviorStrategy> = std::thread::scope(|scope| {
            let handles: Vec<_> = self
                .policies
                .iter()
                .map(|p| scope.spawn(move || aggregate_response(tree, p, pi, self.gamma)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("response panicked")).collect()
        });
        BehaviorProfile::from_strategies(tree, &strategies).expect("every role responds")
    }

    pub fn residual(&self, pi: &BehaviorProfile) -> f64 {
        pi.sup_distance(&self.response(pi))
    }

    pub fn max_bellman_residual(&self) -> f64 {
        self.policies.iter().map(|p| p.bellman_residual).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Exact,
    #[serde(rename = "mc")]
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadyOptions {
    pub method: Method,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub starts: usize,
    pub seed: u64,
    pub mc: McOptions,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions { method: Method::Exact, damping: 0.5, tol: 1e-10, max_iter: 5000, starts: 8, seed: 0, mc: McOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    pub start: usize,
    pub profile: BehaviorProfile,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Period of a detected cycle of iterates.
    pub cycle: Option<usize>,
    /// Residual after each iteration, thinned to at most 200 entries.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteadyReport {
    pub method: Method,
    pub delta: f64,
    pub gamma: f64,
    /// Fixed point reached from the supplied initial profile (or the lowest residual if it failed).
    pub best: FixedPoint,
    /// Other converged fixed points found from the random starts.
    pub alternatives: Vec<BehaviorProfile>,
    pub runs: Vec<FixedPointSummary>,
    pub max_bellman_residual: f64,
    /// Several distinct fixed points, or some start failed to converge.
    pub recommend_more_starts: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointSummary {
    pub start: usize,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub cycle: Option<usize>,
}

fn mix(a: &BehaviorProfile, b: &BehaviorProfile, lambda: f64) -> BehaviorProfile {
    let probs = a
        .probs
        .iter()
        .zip(&b.probs)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (1.0 - lambda) * p + lambda * q).collect())
        .collect();
    BehaviorProfile { probs }
}

fn thin(trace: Vec<f64>) -> Vec<f64> {
    if trace.len() <= 200 {
        return trace;
    }
    let step = trace.len().div_ceil(200);
    trace.iter().copied().step_by(step).collect()
}

/// Damped iteration `π ← (1 − λ)π + λ ℛ(π)`, halving `λ` whenever the residual grows and
/// letting it recover towards `opts.damping` while it shrinks.
pub fn fixed_point(learners: &Learners, init: &BehaviorProfile, opts: &SteadyOptions, start: usize) -> FixedPoint {
    let mut pi = init.clone();
    let mut lambda = opts.damping;
    let mut trace = Vec::new();
    let mut history: Vec<BehaviorProfile> = Vec::new();
    let mut cycle = None;
    let mut prev = f64::INFINITY;
    let mut iterations = 0;
    let mut response = learners.response(&pi);
    let mut residual = pi.sup_distance(&response);
    while iterations < opts.max_iter && residual >= opts.tol {
        iterations += 1;
        lambda = if residual > prev { (lambda / 2.0).max(1.0 / 1024.0) } else { (lambda * 1.25).min(opts.damping) };
        prev = residual;
        pi = mix(&pi, &response, lambda);
        response = learners.response(&pi);
        residual = pi.sup_distance(&response);
        trace.push(residual);
        let moved = history.last().is_none_or(|h| h.sup_distance(&pi) >= opts.tol);
        if moved {
            if let Some(p) = (2..=8).find(|&p| history.len() >= p && history[history.len() - p].sup_distance(&pi) < opts.tol) {
                cycle = Some(p);
                break;
            }
        }
        history.push(pi.clone());
        if history.len() > 8 {
            history.remove(0);
        }
    }
    // The undamped image can be closer than the damped iterate.
    let polished = learners.residual(&response);
    if polished < residual {
        pi = response;
        residual = polished;
    }
    FixedPoint { start, converged: residual < opts.tol, profile: pi, residual, iterations, cycle, trace: thin(trace) }
}

/// Random behavior profile with uniform-simplex mixes.
pub fn random_profile(game: &Game, rng: &mut impl Rng) -> BehaviorProfile {
    let probs = game
        .tree
        .infosets()
        .iter()
        .map(|info| {
            let e: Vec<f64> = (0..info.actions.len()).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = e.iter().sum();
            e.iter().map(|x| x / total).collect()
        })
        .collect();
    BehaviorProfile { probs }
}

/// Steady state reached from `init`, plus further fixed points from random starts.
pub fn steady_state(learners: &Learners, init: &BehaviorProfile, opts: &SteadyOptions) -> Result<SteadyReport, PopulationError> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(PopulationError::Mismatch(format!("damping {} must lie in (0, 1]", opts.damping)));
    }
    if init.probs.len() != learners.game.tree.infosets().len() {
        return Err(PopulationError::Mismatch("initial profile does not match the game".into()));
    }
    if opts.method == Method::MonteCarlo {
        let sim = simulate(learners, &opts.mc)?;
        let residual = learners.residual(&sim.profile);
        let best = FixedPoint {
            start: 0,
            profile: sim.profile,
            residual,
            iterations: opts.mc.periods,
            converged: true,
            cycle: None,
            trace: Vec::new(),
        };
        let runs = vec![summary(&best)];
        return Ok(SteadyReport {
            method: Method::MonteCarlo,
            delta: learners.delta,
            gamma: learners.gamma,
            best,
            alternatives: Vec::new(),
            runs,
            max_bellman_residual: learners.max_bellman_residual(),
            recommend_more_starts: false,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut runs = vec![fixed_point(learners, init, opts, 0)];
    for k in 1..opts.starts.max(1) {
        let start = random_profile(&learners.game, &mut rng);
        runs.push(fixed_point(learners, &start, opts, k));
    }
    let best = if runs[0].converged {
        runs[0].clone()
    } else {
        runs.iter().min_by(|a, b| a.residual.total_cmp(&b.residual)).expect("one run").clone()
    };
    let mut alternatives: Vec<BehaviorProfile> = Vec::new();
    for r in runs.iter().filter(|r| r.converged) {
        let fresh = r.profile.sup_distance(&best.profile) > 1e-6
            && alternatives.iter().all(|a| a.sup_distance(&r.profile) > 1e-6);
        if fresh {
            alternatives.push(r.profile.clone());
        }
    }
    let recommend_more_starts = !alternatives.is_empty() || runs.iter().any(|r| !r.converged);
    Ok(SteadyReport {
        method: Method::Exact,
        delta: learners.delta,
        gamma: learners.gamma,
        best,
        alternatives,
        runs: runs.iter().map(summary).collect(),
        max_bellman_residual: learners.max_bellman_residual(),
        recommend_more_starts,
    })
}

fn summary(r: &FixedPoint) -> FixedPointSummary {
    FixedPointSummary { start: r.start, residual: r.residual, iterations: r.iterations, converged: r.converged, cycle: r.cycle }
}

/// Largest gain of any role from a pure deviation against `pi`.
pub fn nash_slack(game: &Game, pi: &BehaviorProfile) -> Vec<f64> {
    let tree = &game.tree;
    let base = pi.expected_payoff(tree);
    (0..tree.players())
        .map(|r| {
            PureStrategy::enumerate(tree, r)
                .iter()
                .map(|s| {
                    let mut q = pi.clone();
                    q.set_strategy(tree, &BehaviorStrategy::pure(tree, s));
                    q.expected_payoff(tree)[r] - base[r]
                })
                .fold(0.0, f64::max)
        })
        .collect()
}
