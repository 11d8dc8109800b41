use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sslab_game::{GameTree, NormalFormGame};

use crate::conjecture::{conjecture_lp, decide, Check, Schedule};
use crate::dominance::{check_dominance, dominating_mixture, strictly_dominated, weakly_dominated, Dominance};
use crate::exact::ExactGame;
use crate::lp::Q;
use crate::simple::bi_plan;
use crate::EliminationError;

/// Which deletions to propose at each stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", deny_unknown_fields)]
pub enum Generator {
    /// All weakly dominated strategies, then strict dominance in each reduced game.
    Sw,
    /// Strategies that first deviate from backward induction one height level at a time.
    Bi,
    /// Explicit deletions: one entry per stage, one name list per role.
    Custom { stages: Vec<Vec<Vec<String>>> },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Sw => "sw",
            Generator::Bi => "bi",
            Generator::Custom { .. } => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub r: u32,
    pub eps: String,
    pub eta: String,
    pub feasible: bool,
    /// Conjecture probabilities over full opponent profiles, in normal-form order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    /// One multiplier per row of the conjecture system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub farkas: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum Certificate {
    WeakDominance {
        /// Dominating mixture: strategy name to exact weight.
        mixture: BTreeMap<String, String>,
        /// Opponent strategy names (own slot `*`) where the mixture does strictly better.
        strict_at: Vec<String>,
    },
    Schedule {
        /// Feasibility at `r = 1..=r_max`.
        feasible: Vec<bool>,
        /// Certified checks at the last two points.
        checks: Vec<CheckRecord>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deletion {
    /// 1-based role.
    pub role: usize,
    pub strategy: String,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageRecord {
    pub stage: usize,
    pub deleted: Vec<Deletion>,
    /// Survivors per role after the stage.
    pub survivors: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EliminationTrace {
    pub generator: Generator,
    pub schedule: Schedule,
    pub strategies: Vec<Vec<String>>,
    pub stages: Vec<StageRecord>,
    /// Final survivors per role.
    pub survivors: Vec<Vec<String>>,
}

impl EliminationTrace {
    pub fn survivor_set(&self, role: usize) -> Vec<&str> {
        self.survivors[role].iter().map(String::as_str).collect()
    }
}

fn q_str(x: &Q) -> String {
    x.to_string()
}

fn parse_q(s: &str) -> Result<Q, EliminationError> {
    Q::from_str(s).map_err(|_| EliminationError::BadCertificate(format!("`{s}` is not a rational")))
}

fn profile_name(nf: &NormalFormGame, role: usize, p: &[usize]) -> Vec<String> {
    p.iter().enumerate().map(|(r, &k)| if r == role { "*".to_string() } else { nf.names[r][k].clone() }).collect()
}

fn weak_certificate(nf: &NormalFormGame, d: &Dominance) -> Certificate {
    Certificate::WeakDominance {
        mixture: d.mixture.iter().map(|(t, w)| (nf.names[d.role][*t].clone(), q_str(w))).collect(),
        strict_at: d.strict_at.as_ref().map(|p| profile_name(nf, d.role, p)).unwrap_or_default(),
    }
}

fn check_record(r: u32, c: &Check) -> CheckRecord {
    CheckRecord {
        r,
        eps: q_str(&c.eps),
        eta: q_str(&c.eta),
        feasible: c.feasible,
        witness: c.witness.as_ref().map(|w| w.iter().map(q_str).collect()),
        farkas: c.farkas.as_ref().map(|y| y.iter().map(q_str).collect()),
    }
}

fn names(nf: &NormalFormGame, sets: &[Vec<usize>]) -> Vec<Vec<String>> {
    sets.iter().enumerate().map(|(r, s)| s.iter().map(|&k| nf.names[r][k].clone()).collect()).collect()
}

/// Stage-0 proposals must be weakly dominated; later ones must pass the schedule.
fn certify(g: &ExactGame, stage: usize, prev: &[Vec<usize>], proposal: &[Vec<usize>], schedule: &Schedule) -> Result<Vec<Deletion>, EliminationError> {
    let nf = g.nf;
    let jobs: Vec<(usize, usize)> = proposal.iter().enumerate().flat_map(|(r, ss)| ss.iter().map(move |&s| (r, s))).collect();
    jobs.par_iter()
        .map(|&(r, s)| {
            let breach = |reason: String| EliminationError::ValidityBreach { stage, role: r + 1, strategy: nf.names[r][s].clone(), reason };
            let certificate = if stage == 0 {
                let d = dominating_mixture(g, r, s, &g.all_sets(), false).ok_or_else(|| breach("not weakly dominated".into()))?;
                weak_certificate(nf, &d)
            } else {
                let dec = decide(g, r, s, prev, schedule)?;
                if !dec.eliminable {
                    return Err(breach(format!("a best reply to some admissible conjecture at ε = 2^-{}", schedule.r_max)));
                }
                Certificate::Schedule { feasible: dec.feasible, checks: dec.last.iter().map(|(r, c)| check_record(*r, c)).collect() }
            };
            Ok(Deletion { role: r + 1, strategy: nf.names[r][s].clone(), certificate })
        })
        .collect()
}

fn resolve(nf: &NormalFormGame, role: usize, name: &str) -> Result<usize, EliminationError> {
    nf.strategy_index(role, name).ok_or_else(|| EliminationError::UnknownStrategy { role: role + 1, name: name.to_string() })
}

/// Runs a generator to completion, certifying every proposed deletion.
pub fn run_valid_sequence(
    nf: &NormalFormGame,
    tree: Option<&GameTree>,
    generator: &Generator,
    schedule: &Schedule,
) -> Result<EliminationTrace, EliminationError> {
    let g = ExactGame::new(nf)?;
    let players = nf.players;
    let mut sets = g.all_sets();
    let mut stages = Vec::new();
    let bi = match generator {
        Generator::Bi => {
            let tree = tree.ok_or_else(|| EliminationError::NotSimple("the bi generator needs the source tree".into()))?;
            let report = crate::simple::is_simple_game(tree);
            if !report.relaxed {
                return Err(EliminationError::NotSimple(format!("{report:?}")));
            }
            if nf.strategies.len() != players || nf.strategies.iter().zip(nf.sizes()).any(|(s, n)| s.len() != n) {
                return Err(EliminationError::NotSimple("normal form was not derived from a tree".into()));
            }
            Some((0..players).map(|r| bi_plan(tree, r)).collect::<Result<Vec<_>, _>>()?)
        }
        _ => None,
    };
    let max_height = bi.iter().flatten().flatten().map(|&(h, _)| h).max().unwrap_or(0) as usize;
    for stage in 0.. {
        let proposal: Vec<Vec<usize>> = match generator {
            Generator::Sw if stage == 0 => (0..players).map(|r| weakly_dominated(&g, r).into_iter().map(|d| d.strategy).collect()).collect(),
            Generator::Sw => (0..players).map(|r| strictly_dominated(&g, r, &sets).into_iter().map(|d| d.strategy).collect()).collect(),
            Generator::Bi => {
                if stage >= max_height {
                    break;
                }
                let plans = bi.as_ref().expect("plans");
                let level = stage as u32 + 1;
                (0..players)
                    .map(|r| {
                        sets[r]
                            .iter()
                            .copied()
                            .filter(|&s| {
                                let choice = &nf.strategies[r][s].choice;
                                let deviates = plans[r].iter().zip(choice).any(|(&(h, a), &c)| h == level && a != c);
                                let agrees_below = plans[r].iter().zip(choice).all(|(&(h, a), &c)| h >= level || a == c);
                                deviates && agrees_below
                            })
                            .collect()
                    })
                    .collect()
            }
            Generator::Custom { stages: custom } => {
                let Some(step) = custom.get(stage) else { break };
                if step.len() != players {
                    return Err(EliminationError::BadArgument(format!("stage {stage} lists {} roles, expected {players}", step.len())));
                }
                step.iter()
                    .enumerate()
                    .map(|(r, ns)| {
                        ns.iter()
                            .map(|n| {
                                let s = resolve(nf, r, n)?;
                                if !sets[r].contains(&s) {
                                    return Err(EliminationError::ValidityBreach {
                                        stage,
                                        role: r + 1,
                                        strategy: n.clone(),
                                        reason: "already deleted".into(),
                                    });
                                }
                                Ok(s)
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<_, _>>()?
            }
        };
        let empty = proposal.iter().all(Vec::is_empty);
        if empty && matches!(generator, Generator::Sw) {
            break;
        }
        let deleted = certify(&g, stage, &sets, &proposal, schedule)?;
        for (r, gone) in proposal.iter().enumerate() {
            sets[r].retain(|s| !gone.contains(s));
            if sets[r].is_empty() {
                return Err(EliminationError::EmptySet { stage, role: r + 1 });
            }
        }
        stages.push(StageRecord { stage, deleted, survivors: names(nf, &sets) });
    }
    Ok(EliminationTrace {
        generator: generator.clone(),
        schedule: schedule.clone(),
        strategies: nf.names.clone(),
        survivors: names(nf, &sets),
        stages,
    })
}

/// Replays a trace against the normal form and re-checks every certificate exactly.
pub fn verify_trace(nf: &NormalFormGame, trace: &EliminationTrace) -> Result<(), EliminationError> {
    let g = ExactGame::new(nf)?;
    let bad = |m: String| EliminationError::BadCertificate(m);
    if trace.strategies != nf.names {
        return Err(bad("strategy lists differ from the game".into()));
    }
    let opponents = |r: usize| g.opponent_profiles(r, &g.all_sets()).len();
    let mut sets = g.all_sets();
    for (k, st) in trace.stages.iter().enumerate() {
        if st.stage != k {
            return Err(bad(format!("stage {} out of order", st.stage)));
        }
        let mut gone = vec![Vec::new(); nf.players];
        for d in &st.deleted {
            let r = d.role.checked_sub(1).filter(|&r| r < nf.players).ok_or_else(|| bad(format!("role {}", d.role)))?;
            let s = resolve(nf, r, &d.strategy)?;
            let who = format!("stage {k}, role {}, {}", d.role, d.strategy);
            if !sets[r].contains(&s) {
                return Err(bad(format!("{who}: not a survivor")));
            }
            match (&d.certificate, k) {
                (Certificate::WeakDominance { mixture, strict_at }, 0) => {
                    let mixture = mixture
                        .iter()
                        .map(|(n, w)| Ok((resolve(nf, r, n)?, parse_q(w)?)))
                        .collect::<Result<Vec<_>, EliminationError>>()?;
                    let strict_at = strict_at
                        .iter()
                        .enumerate()
                        .map(|(j, n)| if j == r { Ok(0) } else { resolve(nf, j, n) })
                        .collect::<Result<Vec<_>, _>>()?;
                    let dom = Dominance { role: r, strategy: s, mixture, strict_at: Some(strict_at), margin: Q::default() };
                    if !check_dominance(&g, &dom, &g.all_sets(), false) {
                        return Err(bad(format!("{who}: dominance certificate fails")));
                    }
                }
                (Certificate::Schedule { checks, .. }, k) if k > 0 => {
                    let r_max = trace.schedule.r_max;
                    let rs: Vec<u32> = checks.iter().map(|c| c.r).collect();
                    if rs != vec![r_max - 1, r_max] {
                        return Err(bad(format!("{who}: checks must cover r = {} and {}", r_max - 1, r_max)));
                    }
                    for c in checks {
                        let (eps, eta) = trace.schedule.point(c.r, opponents(r));
                        if parse_q(&c.eps)? != eps || parse_q(&c.eta)? != eta || c.feasible {
                            return Err(bad(format!("{who}: check at r = {} does not match the schedule", c.r)));
                        }
                        let y = c.farkas.as_ref().ok_or_else(|| bad(format!("{who}: missing infeasibility proof")))?;
                        let y = y.iter().map(|v| parse_q(v)).collect::<Result<Vec<_>, _>>()?;
                        if !conjecture_lp(&g, r, s, &sets, &eps, &eta).0.check_farkas(&y) {
                            return Err(bad(format!("{who}: infeasibility proof at r = {} fails", c.r)));
                        }
                    }
                }
                _ => return Err(bad(format!("{who}: wrong certificate kind for the stage"))),
            }
            gone[r].push(s);
        }
        for (r, g) in gone.iter().enumerate() {
            sets[r].retain(|s| !g.contains(s));
        }
        if names(nf, &sets) != st.survivors || sets.iter().any(Vec::is_empty) {
            return Err(bad(format!("stage {k}: survivor lists do not match")));
        }
    }
    if names(nf, &sets) != trace.survivors {
        return Err(bad("final survivors do not match".into()));
    }
    Ok(())
}
