//! Requests understood by both the in-process CLI and the HTTP service.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sslab_beliefs::DirichletPrior;
use sslab_elimination::{run_valid_sequence, verify_trace, Generator, Schedule};
use sslab_game::{derive_normal_form, p_equivalent_partition, validate_game, Game, GameFile};
use sslab_policy::{solve_policy, SolveOptions};
use sslab_population::{patient_sweep, steady_state, Learners, SteadyOptions, SweepConfig};
use sslab_transforms::{coalesce, CoalescePlan};

use crate::spec::{initial_profile, PriorSpec, ReplicationSpec};
use crate::{check_constraints, corpus_list, corpus_text, replicate, ExperimentError};

/// A corpus name or file path, or a game given inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GameRef {
    Named(String),
    Inline(Box<GameFile>),
}

impl GameRef {
    fn file(&self) -> Result<(String, GameFile), ExperimentError> {
        match self {
            GameRef::Inline(f) => Ok(("inline".into(), (**f).clone())),
            GameRef::Named(name) => match corpus_text(name) {
                Some(text) => Ok((name.clone(), GameFile::from_json(text)?)),
                None if std::path::Path::new(name).exists() => {
                    Ok((name.clone(), GameFile::load(name).map_err(|e| ExperimentError::context(name.clone(), e))?))
                }
                None => Err(ExperimentError::UnknownGame(name.clone())),
            },
        }
    }

    pub fn game(&self) -> Result<Game, ExperimentError> {
        match self {
            GameRef::Named(name) => crate::resolve_game(name),
            GameRef::Inline(f) => Ok(Game::from_file(f)?),
        }
    }
}

fn uniform_priors() -> PriorSpec {
    PriorSpec::Uniform { weight: 1.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    Validate {
        game: GameRef,
    },
    NormalForm {
        game: GameRef,
        /// Attach each role's observation partition of strategy profiles.
        #[serde(default)]
        partitions: bool,
    },
    Coalesce {
        game: GameRef,
        /// 1-based.
        role: usize,
        h1: String,
        h2: String,
    },
    Eliminate {
        game: GameRef,
        generator: Generator,
        #[serde(default)]
        schedule: Schedule,
    },
    Policy {
        game: GameRef,
        /// 1-based.
        role: usize,
        #[serde(default = "uniform_priors")]
        priors: PriorSpec,
        delta: f64,
        gamma: f64,
        #[serde(default)]
        solve: SolveOptions,
    },
    Steady {
        game: GameRef,
        #[serde(default = "uniform_priors")]
        priors: PriorSpec,
        #[serde(default)]
        init: Option<Vec<String>>,
        delta: f64,
        gamma: f64,
        #[serde(default)]
        solve: SolveOptions,
        #[serde(default)]
        steady: SteadyOptions,
    },
    Sweep {
        game: GameRef,
        #[serde(default = "uniform_priors")]
        priors: PriorSpec,
        #[serde(default)]
        init: Option<Vec<String>>,
        config: SweepConfig,
    },
    /// A built-in spec by id, or a spec given inline.
    Replicate {
        #[serde(default)]
        id: Option<String>,
        #[serde(default)]
        spec: Option<Box<ReplicationSpec>>,
    },
    CorpusList,
}

fn priors_for(game: &Game, spec: &PriorSpec) -> Result<Vec<DirichletPrior>, ExperimentError> {
    spec.build(game)
}

/// Runs one request and returns its JSON result.
pub fn execute(op: &Op) -> Result<Value, ExperimentError> {
    match op {
        Op::Validate { game } => {
            let (name, file) = game.file()?;
            let report = validate_game(&file);
            let constraints = match (report.is_empty(), corpus_text(&name)) {
                (true, Some(_)) => Some(check_constraints(&name, &Game::from_file(&file)?)?),
                _ => None,
            };
            let valid = report.is_empty() && constraints.as_ref().is_none_or(|c| c.iter().all(|k| k.pass));
            Ok(json!({ "game": name, "valid": valid, "report": report, "constraints": constraints }))
        }
        Op::NormalForm { game, partitions } => {
            let g = game.game()?;
            let mut nf = derive_normal_form(&g.tree)?;
            if *partitions {
                nf.partitions = Some(p_equivalent_partition(&g, &nf));
            }
            Ok(serde_json::to_value(&nf)?)
        }
        Op::Coalesce { game, role, h1, h2 } => {
            let g = game.game()?;
            let plan = CoalescePlan { role: role.checked_sub(1).ok_or_else(|| bad("roles are numbered from 1"))?, h1: h1.clone(), h2: h2.clone() };
            let c = coalesce(&g, &plan)?;
            Ok(json!({ "game": c.file, "identification": c.identification }))
        }
        Op::Eliminate { game, generator, schedule } => {
            let g = game.game()?;
            let nf = derive_normal_form(&g.tree)?;
            let trace = run_valid_sequence(&nf, Some(&g.tree), generator, schedule)?;
            let verified = verify_trace(&nf, &trace).map_err(|e| e.to_string());
            Ok(json!({ "generator": generator.name(), "trace": trace, "verified": verified.is_ok(), "verify_error": verified.err() }))
        }
        Op::Policy { game, role, priors, delta, gamma, solve } => {
            let g = game.game()?;
            let ps = priors_for(&g, priors)?;
            let r = role.checked_sub(1).filter(|&r| r < ps.len()).ok_or_else(|| bad(&format!("no role {role}")))?;
            let policy = solve_policy(&g, &ps[r], *delta, *gamma, solve)?;
            Ok(serde_json::to_value(policy.dump(&g.tree))?)
        }
        Op::Steady { game, priors, init, delta, gamma, solve, steady } => {
            let g = game.game()?;
            let ps = priors_for(&g, priors)?;
            let l = Learners::solve(&g, &ps, *delta, *gamma, solve)?;
            let report = steady_state(&l, &initial_profile(&g, init)?, steady)?;
            let sets: Vec<&str> = g.tree.infosets().iter().map(|i| i.id.as_str()).collect();
            Ok(json!({ "infosets": sets, "report": report }))
        }
        Op::Sweep { game, priors, init, config } => {
            let g = game.game()?;
            let ps = priors_for(&g, priors)?;
            Ok(serde_json::to_value(patient_sweep(&g, &ps, &initial_profile(&g, init)?, config)?)?)
        }
        Op::Replicate { id, spec } => {
            let spec = match (id, spec) {
                (Some(id), None) => ReplicationSpec::builtin(id)?,
                (None, Some(s)) => {
                    s.validate()?;
                    (**s).clone()
                }
                _ => return Err(bad("give exactly one of `id` and `spec`")),
            };
            Ok(serde_json::to_value(replicate(&spec)?)?)
        }
        Op::CorpusList => Ok(serde_json::to_value(corpus_list()?)?),
    }
}

fn bad(msg: &str) -> ExperimentError {
    ExperimentError::BadSpec(msg.to_string())
}
