use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sslab_beliefs::DirichletPrior;
use sslab_game::{BehaviorProfile, Game};
use sslab_policy::SolveOptions;

use crate::steady::{nash_slack, steady_state, Learners, SteadyOptions};
use crate::PopulationError;

/// A scalar read off each cell's profile: `π(h, a)`, optionally divided by `1 − γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monitor {
    pub name: String,
    pub infoset: String,
    pub action: String,
    #[serde(default)]
    pub per_survival: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub deltas: Vec<f64>,
    /// Inner grid for each δ, increasing.
    pub gammas: Vec<Vec<f64>>,
    #[serde(default)]
    pub solve: SolveOptions,
    #[serde(default)]
    pub steady: SteadyOptions,
    #[serde(default)]
    pub monitors: Vec<Monitor>,
    #[serde(default = "default_cauchy")]
    pub cauchy_tol: f64,
}

fn default_cauchy() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub delta: f64,
    pub gamma: f64,
    /// Behavior probabilities per information set, in game order.
    pub profile: Vec<Vec<f64>>,
    pub residual: f64,
    pub converged: bool,
    pub alternatives: usize,
    pub monitors: BTreeMap<String, f64>,
    /// Best pure-deviation gain per role against the cell's profile.
    pub nash_slack: Vec<f64>,
    pub bellman_residual: f64,
    pub states: Vec<usize>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerDiagnostic {
    pub delta: f64,
    /// Sup-norm change between consecutive γ cells.
    pub steps: Vec<f64>,
    /// The last step is within the Cauchy tolerance; only then is the last cell read as the limit.
    pub cauchy: bool,
    pub estimate: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub infosets: Vec<String>,
    pub actions: Vec<Vec<String>>,
    pub cells: Vec<Vec<CellResult>>,
    pub inner: Vec<InnerDiagnostic>,
    pub outer_steps: Vec<f64>,
    pub outer_cauchy: bool,
    /// Terminal-cell profile, offered as the patiently stable candidate.
    pub candidate: Vec<Vec<f64>>,
    /// Every γ satisfies `γ ≥ 1 − (1 − δ)/10`.
    pub discipline: bool,
}

impl SweepResult {
    /// One monitored series per δ, along the γ grid.
    pub fn series(&self, monitor: &str) -> Vec<Vec<f64>> {
        self.cells.iter().map(|row| row.iter().filter_map(|c| c.monitors.get(monitor).copied()).collect()).collect()
    }

    pub fn terminal(&self) -> &CellResult {
        self.cells.last().and_then(|r| r.last()).expect("nonempty sweep")
    }

    /// Probability of `action` at `infoset` in a cell.
    pub fn prob(&self, cell: &CellResult, infoset: &str, action: &str) -> Option<f64> {
        let h = self.infosets.iter().position(|x| x == infoset)?;
        let a = self.actions[h].iter().position(|x| x == action)?;
        Some(cell.profile[h][a])
    }
}

fn distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Steady states over a δ grid with an inner, faster-growing γ grid per δ.
///
/// Each cell starts from the previous cell's steady state.
pub fn patient_sweep(
    game: &Game,
    priors: &[DirichletPrior],
    init: &BehaviorProfile,
    cfg: &SweepConfig,
) -> Result<SweepResult, PopulationError> {
    if cfg.deltas.is_empty() || cfg.deltas.len() != cfg.gammas.len() {
        return Err(PopulationError::Grid("one γ grid per δ is required".into()));
    }
    let mut discipline = true;
    for (&d, row) in cfg.deltas.iter().zip(&cfg.gammas) {
        if row.is_empty() {
            return Err(PopulationError::Grid(format!("empty γ grid for δ = {d}")));
        }
        for &g in row {
            if !(g > d && g < 1.0) {
                return Err(PopulationError::Grid(format!("γ = {g} must lie in (δ, 1) for δ = {d}")));
            }
            discipline &= g >= 1.0 - (1.0 - d) / 10.0 - 1e-12;
        }
    }
    let tree = &game.tree;
    let lookup: Vec<(usize, usize)> = cfg
        .monitors
        .iter()
        .map(|m| {
            let h = tree.find_infoset(&m.infoset).ok_or_else(|| PopulationError::Grid(format!("unknown set {}", m.infoset)))?;
            let a = tree.action_index(h, &m.action).ok_or_else(|| PopulationError::Grid(format!("unknown action {}", m.action)))?;
            Ok((h, a))
        })
        .collect::<Result<_, PopulationError>>()?;

    let mut cells: Vec<Vec<CellResult>> = Vec::new();
    let mut row_start = init.clone();
    for (&delta, row) in cfg.deltas.iter().zip(&cfg.gammas) {
        let mut current = row_start.clone();
        let mut out = Vec::new();
        for &gamma in row {
            let clock = Instant::now();
            let learners = Learners::solve(game, priors, delta, gamma, &cfg.solve)?;
            let report = steady_state(&learners, &current, &cfg.steady)?;
            let pi = report.best.profile.clone();
            let monitors = cfg
                .monitors
                .iter()
                .zip(&lookup)
                .map(|(m, &(h, a))| {
                    let v = pi.prob(h, a);
                    (m.name.clone(), if m.per_survival { v / (1.0 - gamma) } else { v })
                })
                .collect();
            out.push(CellResult {
                delta,
                gamma,
                profile: pi.probs.clone(),
                residual: report.best.residual,
                converged: report.best.converged,
                alternatives: report.alternatives.len(),
                monitors,
                nash_slack: nash_slack(game, &pi),
                bellman_residual: report.max_bellman_residual,
                states: learners.policies.iter().map(|p| p.model.state_count()).collect(),
                seconds: clock.elapsed().as_secs_f64(),
            });
            current = pi;
        }
        row_start = BehaviorProfile { probs: out[0].profile.clone() };
        cells.push(out);
    }

    let inner: Vec<InnerDiagnostic> = cells
        .iter()
        .zip(&cfg.deltas)
        .map(|(row, &delta)| {
            let steps: Vec<f64> = row.windows(2).map(|w| distance(&w[0].profile, &w[1].profile)).collect();
            let cauchy = steps.last().is_some_and(|&s| s <= cfg.cauchy_tol);
            InnerDiagnostic { delta, steps, cauchy, estimate: cauchy.then(|| row.last().expect("row").profile.clone()) }
        })
        .collect();
    let lasts: Vec<&Vec<Vec<f64>>> = cells.iter().map(|r| &r.last().expect("row").profile).collect();
    let outer_steps: Vec<f64> = lasts.windows(2).map(|w| distance(w[0], w[1])).collect();
    let outer_cauchy = outer_steps.last().is_some_and(|&s| s <= cfg.cauchy_tol);
    let candidate = lasts.last().map(|p| (*p).clone()).expect("nonempty");
    Ok(SweepResult {
        infosets: tree.infosets().iter().map(|i| i.id.clone()).collect(),
        actions: tree.infosets().iter().map(|i| i.actions.clone()).collect(),
        cells,
        inner,
        outer_steps,
        outer_cauchy,
        candidate,
        discipline,
    })
}
