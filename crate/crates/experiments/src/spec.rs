//! Replication specs: which games to run, with which priors and grids, and what must hold.

use serde::{Deserialize, Serialize};
use sslab_beliefs::{make_supportive_priors, DirichletPrior, PriorFile};
use sslab_elimination::{Generator, Schedule};
use sslab_game::{BehaviorProfile, Game, PureStrategy};
use sslab_policy::SolveOptions;
use sslab_population::{McOptions, SteadyOptions, SweepConfig};

use crate::ExperimentError;

pub const SPEC_IDS: [&str; 9] = ["claim1", "claim2", "claim3", "claim4", "claim5", "prop2", "prop4", "prop5", "prop6"];

const BUILTIN: [(&str, &str); 9] = [
    ("claim1", include_str!("../specs/claim1.json")),
    ("claim2", include_str!("../specs/claim2.json")),
    ("claim3", include_str!("../specs/claim3.json")),
    ("claim4", include_str!("../specs/claim4.json")),
    ("claim5", include_str!("../specs/claim5.json")),
    ("prop2", include_str!("../specs/prop2.json")),
    ("prop4", include_str!("../specs/prop4.json")),
    ("prop5", include_str!("../specs/prop5.json")),
    ("prop6", include_str!("../specs/prop6.json")),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationSpec {
    pub id: String,
    pub title: String,
    pub budget_seconds: f64,
    pub checks: Vec<Check>,
}

impl ReplicationSpec {
    pub fn builtin(id: &str) -> Result<Self, ExperimentError> {
        let text = BUILTIN
            .iter()
            .find(|(k, _)| *k == id)
            .map(|(_, t)| *t)
            .ok_or_else(|| ExperimentError::UnknownSpec(id.to_string()))?;
        Self::from_json(text).map_err(|e| ExperimentError::context(format!("built-in spec {id}"), e))
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ExperimentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::context(path.display().to_string(), e))?;
        Self::from_json(&text).map_err(|e| ExperimentError::context(path.display().to_string(), e))
    }

    /// Every referenced game resolves and every check names at least one criterion.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.budget_seconds > 0.0) {
            return Err(ExperimentError::BadSpec(format!("{}: budget must be positive", self.id)));
        }
        if self.checks.is_empty() {
            return Err(ExperimentError::BadSpec(format!("{}: no checks", self.id)));
        }
        for c in &self.checks {
            for g in c.task.games() {
                crate::resolve_game(g).map_err(|e| ExperimentError::context(format!("{} / {}", self.id, c.name), e))?;
            }
        }
        Ok(())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(default)]
    pub budget_seconds: Option<f64>,
    #[serde(flatten)]
    pub task: Task,
}

/// Priors for every role of a game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    /// The same weight on every opponent action.
    Uniform {
        #[serde(default = "one")]
        weight: f64,
    },
    /// Per-role files; roles without a file get weight one everywhere.
    Explicit { roles: Vec<PriorFile> },
    /// Constructed to support a target profile of a two-player game.
    Supportive {
        profile: Vec<String>,
        #[serde(default = "default_support_cap")]
        cap: u32,
    },
}

fn one() -> f64 {
    1.0
}

fn default_support_cap() -> u32 {
    64
}

impl PriorSpec {
    pub fn build(&self, game: &Game) -> Result<Vec<DirichletPrior>, ExperimentError> {
        let tree = &game.tree;
        match self {
            PriorSpec::Uniform { weight } => Ok((0..game.players()).map(|r| DirichletPrior::uniform(tree, r, *weight)).collect()),
            PriorSpec::Explicit { roles } => {
                let mut out: Vec<DirichletPrior> = (0..game.players()).map(|r| DirichletPrior::uniform(tree, r, 1.0)).collect();
                for f in roles {
                    let p = DirichletPrior::from_file(tree, f)?;
                    let r = p.role;
                    out[r] = p;
                }
                Ok(out)
            }
            PriorSpec::Supportive { profile, cap } => {
                let target = pure_profile(game, profile)?;
                Ok(make_supportive_priors(tree, &target, *cap)?.0)
            }
        }
    }
}

pub fn pure_profile(game: &Game, names: &[String]) -> Result<Vec<PureStrategy>, ExperimentError> {
    if names.len() != game.players() {
        return Err(ExperimentError::BadSpec(format!("profile {names:?} needs {} strategies", game.players())));
    }
    Ok(names.iter().enumerate().map(|(r, n)| PureStrategy::parse(&game.tree, r, n)).collect::<Result<_, _>>()?)
}

/// Starting profile: the named pure profile, or uniform play when absent.
pub fn initial_profile(game: &Game, init: &Option<Vec<String>>) -> Result<BehaviorProfile, ExperimentError> {
    match init {
        None => Ok(BehaviorProfile::uniform(&game.tree)),
        Some(names) => Ok(BehaviorProfile::from_pure(&game.tree, &pure_profile(game, names)?)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EliminationRun {
    pub generator: Generator,
    /// The generator must refuse the game as not simple.
    #[serde(default)]
    pub not_applicable: bool,
    /// Exact surviving strategies per role.
    #[serde(default)]
    pub survivors: Option<Vec<Vec<String>>>,
    /// Strategies that must be among the first stage's deletions.
    #[serde(default)]
    pub first_stage_includes: Option<Vec<Vec<String>>>,
    /// A profile that must survive.
    #[serde(default)]
    pub contains: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    pub monitor: String,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
    StrictlyDecreasing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trend {
    pub monitor: String,
    pub direction: Direction,
    #[serde(default)]
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioBound {
    pub monitor: String,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRef {
    pub infoset: String,
    pub action: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    /// 1-based role owning both sets.
    pub role: usize,
    pub h1: String,
    pub h2: String,
}

fn default_factor() -> f64 {
    3.0
}

fn default_step() -> u32 {
    50
}

fn default_floor() -> u32 {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    Elimination {
        game: String,
        #[serde(default)]
        schedule: Schedule,
        runs: Vec<EliminationRun>,
    },
    BackwardInduction {
        game: String,
        expect: Vec<String>,
        #[serde(default)]
        schedule: Schedule,
    },
    /// Valid sequences on every corpus game: certified, nonempty, inside iterated strict dominance.
    CorpusElimination {
        #[serde(default)]
        schedule: Schedule,
    },
    GridOracle {
        /// Two-role games; empty means every two-role corpus game.
        #[serde(default)]
        games: Vec<String>,
        /// Rationals such as "1/10".
        eps: Vec<String>,
        #[serde(default = "default_step")]
        steps: u32,
        /// The floor is ε / (floor_divisor · |S_-i|).
        #[serde(default = "default_floor")]
        floor_divisor: u32,
    },
    Supportive {
        game: String,
        profile: Vec<String>,
        #[serde(default = "default_support_cap")]
        cap: u32,
    },
    Steady {
        game: String,
        priors: PriorSpec,
        #[serde(default)]
        init: Option<Vec<String>>,
        cells: Vec<[f64; 2]>,
        expect: Vec<String>,
        tol: f64,
        /// Cells where the steady state must equal `expect` exactly.
        #[serde(default)]
        exact_cells: Vec<[f64; 2]>,
        /// Also require `expect` itself to be an exact fixed point at every cell.
        #[serde(default)]
        verify_expected: bool,
        #[serde(default)]
        solve: SolveOptions,
        #[serde(default)]
        steady: SteadyOptions,
    },
    Sweep {
        game: String,
        priors: PriorSpec,
        #[serde(default)]
        init: Option<Vec<String>>,
        config: SweepConfig,
        #[serde(default)]
        terminal: Vec<Bound>,
        #[serde(default)]
        trends: Vec<Trend>,
        #[serde(default)]
        ratio_bounds: Vec<RatioBound>,
        /// Actions no cell may play with positive probability.
        #[serde(default)]
        never_played: Vec<ActionRef>,
        #[serde(default)]
        candidate: Option<Vec<String>>,
        #[serde(default)]
        candidate_tol: Option<f64>,
        /// Nash slack along the last δ row must not increase.
        #[serde(default)]
        slack_nonincreasing: bool,
    },
    Invariance {
        original: String,
        plan: PlanSpec,
        priors: Vec<PriorFile>,
        cells: Vec<[f64; 2]>,
        tol: f64,
        phi_samples: usize,
        phi_tol: f64,
        boxes: usize,
        box_samples: usize,
        seed: u64,
        #[serde(default)]
        solve: SolveOptions,
        #[serde(default)]
        steady: SteadyOptions,
    },
    Isomorphism {
        game: String,
        priors: Vec<PriorFile>,
        cells: Vec<[f64; 2]>,
        tol: f64,
        #[serde(default)]
        solve: SolveOptions,
        #[serde(default)]
        steady: SteadyOptions,
    },
    MonteCarlo {
        game: String,
        priors: PriorSpec,
        #[serde(default)]
        init: Option<Vec<String>>,
        cells: Vec<[f64; 2]>,
        mc: McOptions,
        /// Agreement bound is factor / √agents.
        #[serde(default = "default_factor")]
        factor: f64,
        #[serde(default)]
        solve: SolveOptions,
        #[serde(default)]
        steady: SteadyOptions,
    },
    Hygiene {
        kuhn_games: Vec<String>,
        kuhn_samples: usize,
        kuhn_tol: f64,
        seed: u64,
        conservation: Conservation,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Conservation {
    pub game: String,
    pub priors: PriorSpec,
    pub delta: f64,
    pub gamma: f64,
    pub steps: usize,
    pub trunc: f64,
    pub tol: f64,
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::Elimination { .. } => "elimination",
            Task::BackwardInduction { .. } => "backward_induction",
            Task::CorpusElimination { .. } => "corpus_elimination",
            Task::GridOracle { .. } => "grid_oracle",
            Task::Supportive { .. } => "supportive",
            Task::Steady { .. } => "steady",
            Task::Sweep { .. } => "sweep",
            Task::Invariance { .. } => "invariance",
            Task::Isomorphism { .. } => "isomorphism",
            Task::MonteCarlo { .. } => "monte_carlo",
            Task::Hygiene { .. } => "hygiene",
        }
    }

    /// Game references the task resolves.
    pub fn games(&self) -> Vec<&str> {
        match self {
            Task::Elimination { game, .. }
            | Task::BackwardInduction { game, .. }
            | Task::Supportive { game, .. }
            | Task::Steady { game, .. }
            | Task::Sweep { game, .. }
            | Task::Isomorphism { game, .. }
            | Task::MonteCarlo { game, .. } => vec![game],
            Task::Invariance { original, .. } => vec![original],
            Task::GridOracle { games, .. } => games.iter().map(String::as_str).collect(),
            Task::Hygiene { kuhn_games, conservation, .. } => {
                kuhn_games.iter().map(String::as_str).chain([conservation.game.as_str()]).collect()
            }
            Task::CorpusElimination { .. } => Vec::new(),
        }
    }
}
