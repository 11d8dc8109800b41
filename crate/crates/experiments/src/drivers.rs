//! Runs one check of a replication spec and grades it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sslab_beliefs::{check_supportive, make_supportive_priors, verify_equilibrium_form, DirichletPrior, PriorFile};
use sslab_elimination::lp::{q, Q};
use sslab_elimination::{
    bi_profile, eliminable, grid_feasible, is_simple_game, iterated_strict_dominance, run_valid_sequence, verify_trace,
    EliminationError, EliminationTrace, ExactGame, Generator, Schedule,
};
use sslab_game::{
    behavior_to_mixed, derive_normal_form, mixed_to_behavior, p_equivalent_partition, BehaviorProfile, BehaviorStrategy,
    Game, NormalFormGame,
};
use sslab_policy::{policy_invariance_check, Policy, SlotMap, SolveOptions};
use sslab_population::{
    nash_slack, patient_sweep, stationary, steady_state, strategy_shares, update_rule, Learners, Method, PopulationState,
    SteadyOptions, SweepResult,
};
use sslab_transforms::{
    box_measure_check, coalesce, phi, phi_inverse, sample_dirichlet, transform_dirichlet, CoalescePlan, ProductDirichlet,
    SimplexBox, SimplexDensity, TransformedPrior,
};

use crate::spec::*;
use crate::{corpus_game, corpus_names, resolve_game, ExperimentError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub key: String,
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub kind: String,
    pub pass: bool,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
    pub within_budget: bool,
    pub criteria: Vec<Criterion>,
    /// Largest Bellman residual over every policy solved by the check.
    pub max_bellman_residual: Option<f64>,
    pub bellman_tol: Option<f64>,
    pub artifacts: Value,
    /// Per-cell series of a sweep, as CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

impl CheckOutcome {
    pub fn criterion(&self, key: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.key == key)
    }

    fn push(&mut self, key: impl Into<String>, label: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.criteria.push(Criterion { key: key.into(), label: label.into(), pass, detail: detail.into() });
    }

    fn bellman(&mut self, residual: f64, tol: f64) {
        self.max_bellman_residual = Some(self.max_bellman_residual.unwrap_or(0.0).max(residual));
        self.bellman_tol = Some(tol);
    }
}

pub fn run_check(check: &Check) -> Result<CheckOutcome, ExperimentError> {
    let clock = Instant::now();
    let mut out = CheckOutcome {
        name: check.name.clone(),
        kind: check.task.kind().to_string(),
        pass: false,
        seconds: 0.0,
        budget_seconds: check.budget_seconds,
        within_budget: true,
        criteria: Vec::new(),
        max_bellman_residual: None,
        bellman_tol: None,
        artifacts: Value::Null,
        csv: None,
    };
    let ctx = |e: ExperimentError| ExperimentError::context(format!("check `{}`", check.name), e);
    match &check.task {
        Task::Elimination { game, schedule, runs } => elimination(&mut out, game, schedule, runs),
        Task::BackwardInduction { game, expect, schedule } => backward_induction(&mut out, game, expect, schedule),
        Task::CorpusElimination { schedule } => corpus_elimination(&mut out, schedule),
        Task::GridOracle { games, eps, steps, floor_divisor } => grid_oracle(&mut out, games, eps, *steps, *floor_divisor),
        Task::Supportive { game, profile, cap } => supportive(&mut out, game, profile, *cap),
        Task::Steady { .. } => steady(&mut out, &check.task),
        Task::Sweep { .. } => sweep(&mut out, &check.task),
        Task::Invariance { .. } => invariance(&mut out, &check.task),
        Task::Isomorphism { game, priors, cells, tol, solve, steady } => isomorphism(&mut out, game, priors, cells, *tol, solve, steady),
        Task::MonteCarlo { .. } => monte_carlo(&mut out, &check.task),
        Task::Hygiene { kuhn_games, kuhn_samples, kuhn_tol, seed, conservation } => {
            hygiene(&mut out, kuhn_games, *kuhn_samples, *kuhn_tol, *seed, conservation)
        }
    }
    .map_err(ctx)?;
    out.seconds = clock.elapsed().as_secs_f64();
    out.within_budget = out.budget_seconds.is_none_or(|b| out.seconds <= b);
    if let (Some(r), Some(tol)) = (out.max_bellman_residual, out.bellman_tol) {
        out.push("bellman", "Bellman residual below the solver tolerance", r < tol, format!("{r:.3e} < {tol:.1e}"));
    }
    out.pass = !out.criteria.is_empty() && out.criteria.iter().all(|c| c.pass) && out.within_budget;
    Ok(out)
}

fn names(list: &[&str]) -> String {
    format!("{{{}}}", list.join(","))
}

fn as_sets(v: &[Vec<String>]) -> Vec<BTreeSet<&str>> {
    v.iter().map(|r| r.iter().map(String::as_str).collect()).collect()
}

fn survivor_sets(t: &EliminationTrace) -> Vec<BTreeSet<&str>> {
    (0..t.survivors.len()).map(|r| t.survivor_set(r).into_iter().collect()).collect()
}

fn show_sets(sets: &[BTreeSet<&str>]) -> String {
    sets.iter().map(|s| names(&s.iter().copied().collect::<Vec<_>>())).collect::<Vec<_>>().join("×")
}

fn elimination(out: &mut CheckOutcome, game: &str, schedule: &Schedule, runs: &[EliminationRun]) -> Result<(), ExperimentError> {
    let g = resolve_game(game)?;
    let nf = derive_normal_form(&g.tree)?;
    let mut traces = serde_json::Map::new();
    for run in runs {
        let gen = run.generator.name();
        let result = run_valid_sequence(&nf, Some(&g.tree), &run.generator, schedule);
        if run.not_applicable {
            let refused = matches!(&result, Err(EliminationError::NotSimple(_)));
            let detail = match &result {
                Err(e) => e.to_string(),
                Ok(_) => "the generator accepted the game".into(),
            };
            out.push(format!("{gen}:not_applicable"), format!("{gen} generator refuses {game}"), refused, detail);
            continue;
        }
        let trace = match result {
            Ok(t) => t,
            Err(e) => {
                out.push(format!("{gen}:valid"), format!("{gen} sequence is valid"), false, e.to_string());
                continue;
            }
        };
        let verified = verify_trace(&nf, &trace);
        out.push(
            format!("{gen}:certified"),
            format!("every {gen} deletion carries a certificate that re-verifies"),
            verified.is_ok(),
            verified.err().map_or_else(|| format!("{} stages", trace.stages.len()), |e| e.to_string()),
        );
        let got = survivor_sets(&trace);
        if let Some(expect) = &run.survivors {
            out.push(
                format!("{gen}:survivors"),
                format!("{gen} survivors"),
                got == as_sets(expect),
                format!("got {}", show_sets(&got)),
            );
        }
        if let Some(expect) = &run.first_stage_includes {
            let first: Vec<BTreeSet<&str>> = (0..nf.players)
                .map(|r| {
                    trace.stages.first().map_or_else(BTreeSet::new, |st| {
                        st.deleted.iter().filter(|d| d.role == r + 1).map(|d| d.strategy.as_str()).collect()
                    })
                })
                .collect();
            let ok = as_sets(expect).iter().zip(&first).all(|(e, f)| e.is_subset(f));
            out.push(format!("{gen}:first_stage"), format!("{gen} first stage deletions"), ok, format!("deleted {}", show_sets(&first)));
        }
        if let Some(profile) = &run.contains {
            let ok = profile.iter().zip(&got).all(|(s, set)| set.contains(s.as_str()));
            out.push(format!("{gen}:contains"), format!("{} survives {gen}", profile.join(",")), ok, format!("survivors {}", show_sets(&got)));
        }
        traces.insert(gen.to_string(), serde_json::to_value(&trace)?);
    }
    out.artifacts = Value::Object(traces);
    Ok(())
}

fn backward_induction(out: &mut CheckOutcome, game: &str, expect: &[String], schedule: &Schedule) -> Result<(), ExperimentError> {
    let g = resolve_game(game)?;
    let tree = &g.tree;
    let report = is_simple_game(tree);
    let bi: Vec<String> = bi_profile(tree)?.iter().map(|s| s.name(tree)).collect();
    out.push("bi_profile", "backward-induction profile", bi == expect, bi.join(","));
    let nf = derive_normal_form(tree)?;
    let trace = match run_valid_sequence(&nf, Some(tree), &Generator::Bi, schedule) {
        Ok(t) => t,
        Err(e) => {
            out.push("bi:valid", "BI sequence is valid", false, e.to_string());
            return Ok(());
        }
    };
    let got = survivor_sets(&trace);
    let want: Vec<BTreeSet<&str>> = expect.iter().map(|s| BTreeSet::from([s.as_str()])).collect();
    out.push("bi:survivors", "BI sequence leaves only the backward-induction profile", got == want, show_sets(&got));
    let deletions: usize = trace.stages.iter().map(|s| s.deleted.len()).sum();
    let verified = verify_trace(&nf, &trace);
    out.push(
        "bi:certified",
        "every deletion certified by the conjecture LP",
        verified.is_ok(),
        verified.err().map_or_else(|| format!("{deletions} deletions over {} stages", trace.stages.len()), |e| e.to_string()),
    );
    out.artifacts = json!({ "simple_game": report, "trace": trace });
    Ok(())
}

fn corpus_elimination(out: &mut CheckOutcome, schedule: &Schedule) -> Result<(), ExperimentError> {
    let mut failures: Vec<String> = Vec::new();
    let mut bi_games = Vec::new();
    let mut summary = serde_json::Map::new();
    for name in corpus_names() {
        let g = corpus_game(name)?;
        let nf = derive_normal_form(&g.tree)?;
        let exact = ExactGame::new(&nf)?;
        let isd = iterated_strict_dominance(&exact);
        let mut gens = vec![Generator::Sw];
        let simple = is_simple_game(&g.tree).relaxed;
        if simple {
            gens.push(Generator::Bi);
            bi_games.push(name);
        }
        for gen in gens {
            let trace = match run_valid_sequence(&nf, Some(&g.tree), &gen, schedule) {
                Ok(t) => t,
                Err(e) => {
                    failures.push(format!("{name}/{}: {e}", gen.name()));
                    continue;
                }
            };
            if let Err(e) = verify_trace(&nf, &trace) {
                failures.push(format!("{name}/{}: {e}", gen.name()));
            }
            for r in 0..nf.players {
                if trace.survivors[r].is_empty() {
                    failures.push(format!("{name}/{}: role {} has no survivor", gen.name(), r + 1));
                }
                for s in &trace.survivors[r] {
                    if nf.strategy_index(r, s).is_none_or(|k| !isd[r].contains(&k)) {
                        failures.push(format!("{name}/{}: {s} survives but is iteratively strictly dominated", gen.name()));
                    }
                }
            }
            if gen == Generator::Bi {
                let bi: Vec<String> = bi_profile(&g.tree)?.iter().map(|s| s.name(&g.tree)).collect();
                let single = trace.survivors.iter().zip(&bi).all(|(s, b)| s.len() == 1 && &s[0] == b);
                if !single {
                    failures.push(format!("{name}/bi: survivors differ from the backward-induction profile"));
                }
            }
            summary.insert(format!("{name}/{}", gen.name()), json!(trace.survivors));
        }
    }
    out.push(
        "corpus",
        "valid sequences on every corpus game are certified, nonempty and inside iterated strict dominance",
        failures.is_empty(),
        if failures.is_empty() { format!("BI also run on {}", bi_games.join(",")) } else { failures.join("; ") },
    );
    out.artifacts = Value::Object(summary);
    Ok(())
}

fn grid_oracle(out: &mut CheckOutcome, games: &[String], eps: &[String], steps: u32, floor_divisor: u32) -> Result<(), ExperimentError> {
    let eps: Vec<Q> = eps
        .iter()
        .map(|e| Q::from_str(e).map_err(|_| ExperimentError::BadSpec(format!("`{e}` is not a rational"))))
        .collect::<Result<_, _>>()?;
    let list: Vec<String> = if games.is_empty() {
        corpus_names()
            .filter(|n| corpus_game(n).map(|g| g.players() == 2).unwrap_or(false))
            .map(str::to_string)
            .collect()
    } else {
        games.to_vec()
    };
    let (mut compared, mut disagreements) = (0usize, Vec::new());
    for name in &list {
        let g = resolve_game(name)?;
        let nf = derive_normal_form(&g.tree)?;
        let exact = ExactGame::new(&nf)?;
        let trace = run_valid_sequence(&nf, None, &Generator::Sw, &Schedule::default())?;
        let mut stage_sets = vec![exact.all_sets()];
        for st in &trace.stages {
            stage_sets.push(index_sets(&nf, &st.survivors));
        }
        for prev in &stage_sets {
            for role in 0..2 {
                let opp = nf.sizes()[1 - role] as i64;
                for e in &eps {
                    let eta = e / q(floor_divisor as i64 * opp);
                    for &s in &prev[role] {
                        let lp = eliminable(&exact, role, s, prev, e, &eta)?.feasible;
                        let grid = grid_feasible(&exact, role, s, prev, e, &eta, steps)?;
                        compared += 1;
                        if lp != grid {
                            disagreements.push(format!("{name} role {} {} eps {e}", role + 1, nf.names[role][s]));
                        }
                    }
                }
            }
        }
    }
    out.push(
        "grid",
        format!("conjecture LP agrees with the 1/{steps} grid"),
        disagreements.is_empty() && compared > 0,
        if disagreements.is_empty() { format!("{compared} decisions on {}", list.join(",")) } else { disagreements.join("; ") },
    );
    out.artifacts = json!({ "games": list, "decisions": compared, "disagreements": disagreements });
    Ok(())
}

fn index_sets(nf: &NormalFormGame, survivors: &[Vec<String>]) -> Vec<Vec<usize>> {
    survivors.iter().enumerate().map(|(r, ns)| ns.iter().filter_map(|k| nf.strategy_index(r, k)).collect()).collect()
}

fn supportive(out: &mut CheckOutcome, game: &str, profile: &[String], cap: u32) -> Result<(), ExperimentError> {
    let g = resolve_game(game)?;
    let tree = &g.tree;
    let target = pure_profile(&g, profile)?;
    let form = verify_equilibrium_form(tree, &target)?;
    out.push("form", "target profile has the required equilibrium form", form.holds, format!("{form:?}"));
    match make_supportive_priors(tree, &target, cap) {
        Ok((priors, report)) => {
            out.push("made", "supportive priors constructed", report.pass, format!("attempt {:?}", report.attempt));
            let again = check_supportive(tree, &target, &priors, cap)?;
            out.push("recheck", "independent supportiveness check", again.pass, format!("{} conditions", again.checks.len()));
            let files: Vec<PriorFile> = priors.iter().map(|p| p.to_file(tree)).collect();
            out.artifacts = json!({ "priors": files, "report": report });
        }
        Err(e) => out.push("made", "supportive priors constructed", false, e.to_string()),
    }
    Ok(())
}

fn same_cell(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] == b[0] && a[1] == b[1]
}

fn steady(out: &mut CheckOutcome, task: &Task) -> Result<(), ExperimentError> {
    let Task::Steady { game, priors, init, cells, expect, tol, exact_cells, verify_expected, solve, steady } = task else {
        unreachable!()
    };
    let g = resolve_game(game)?;
    let priors = priors.build(&g)?;
    let start = initial_profile(&g, init)?;
    let target = BehaviorProfile::from_pure(&g.tree, &pure_profile(&g, expect)?);
    let mut rows = Vec::new();
    let (mut reached, mut pinned) = (Vec::new(), Vec::new());
    for cell in cells {
        let [delta, gamma] = *cell;
        let l = Learners::solve(&g, &priors, delta, gamma, solve)?;
        out.bellman(l.max_bellman_residual(), solve.tol);
        let rep = steady_state(&l, &start, steady)?;
        let dist = rep.best.profile.sup_distance(&target);
        let exact = exact_cells.iter().any(|c| same_cell(c, cell));
        let ok = rep.best.converged && if exact { dist == 0.0 } else { dist <= *tol };
        reached.push((ok, format!("({delta},{gamma}): distance {dist:.2e}{}", if exact { " (exact)" } else { "" })));
        if *verify_expected {
            let r = l.residual(&target);
            pinned.push((r == 0.0, format!("({delta},{gamma}): residual {r:.1e}")));
        }
        rows.push(json!({ "delta": delta, "gamma": gamma, "distance": dist, "residual": rep.best.residual,
            "converged": rep.best.converged, "profile": rep.best.profile.probs, "alternatives": rep.alternatives.len() }));
    }
    let fold = |v: &[(bool, String)]| (v.iter().all(|x| x.0), v.iter().map(|x| x.1.as_str()).collect::<Vec<_>>().join("; "));
    let (ok, detail) = fold(&reached);
    out.push("reached", format!("steady state is {} at every cell", expect.join(",")), ok, detail);
    if *verify_expected {
        let (ok, detail) = fold(&pinned);
        out.push("pinned", format!("{} is an exact fixed point at every cell", expect.join(",")), ok, detail);
    }
    out.artifacts = json!({ "cells": rows });
    Ok(())
}

fn monotone(series: &[f64], direction: Direction, tol: f64) -> bool {
    series.windows(2).all(|w| match direction {
        Direction::Nondecreasing => w[1] >= w[0] - tol,
        Direction::Nonincreasing => w[1] <= w[0] + tol,
        Direction::StrictlyDecreasing => w[1] < w[0],
    })
}

fn fmt_series(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" → ")
}

fn sweep_csv(res: &SweepResult) -> String {
    let monitors: Vec<String> = res.terminal().monitors.keys().cloned().collect();
    let mut s = format!("delta,gamma,{},residual,converged,max_nash_slack,bellman_residual,seconds\n", monitors.join(","));
    for c in res.cells.iter().flatten() {
        let m: Vec<String> = monitors.iter().map(|k| format!("{}", c.monitors[k])).collect();
        let slack = c.nash_slack.iter().copied().fold(0.0, f64::max);
        let _ = writeln!(s, "{},{},{},{},{},{},{},{:.3}", c.delta, c.gamma, m.join(","), c.residual, c.converged, slack, c.bellman_residual, c.seconds);
    }
    s
}

fn sweep(out: &mut CheckOutcome, task: &Task) -> Result<(), ExperimentError> {
    let Task::Sweep { game, priors, init, config, terminal, trends, ratio_bounds, never_played, candidate, candidate_tol, slack_nonincreasing } =
        task
    else {
        unreachable!()
    };
    let g = resolve_game(game)?;
    let priors = priors.build(&g)?;
    let start = initial_profile(&g, init)?;
    let res = patient_sweep(&g, &priors, &start, config)?;
    let cells: Vec<_> = res.cells.iter().flatten().collect();
    for c in &cells {
        out.bellman(c.bellman_residual, config.solve.tol);
    }
    let unconverged: Vec<String> = cells.iter().filter(|c| !c.converged).map(|c| format!("({},{})", c.delta, c.gamma)).collect();
    out.push("converged", "every cell reached a steady state", unconverged.is_empty(), if unconverged.is_empty() {
        format!("{} cells", cells.len())
    } else {
        unconverged.join(",")
    });
    let last = res.terminal();
    for b in terminal {
        let v = last.monitors.get(&b.monitor).copied().ok_or_else(|| ExperimentError::BadSpec(format!("no monitor `{}`", b.monitor)))?;
        let ok = b.min.is_none_or(|m| v >= m) && b.max.is_none_or(|m| v <= m);
        let range = match (b.min, b.max) {
            (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
            (Some(lo), None) => format!("≥ {lo}"),
            (None, Some(hi)) => format!("≤ {hi}"),
            (None, None) => "reported".into(),
        };
        out.push(format!("terminal:{}", b.monitor), format!("terminal {} {range}", b.monitor), ok, format!("{v:.6}"));
    }
    for t in trends {
        let rows = res.series(&t.monitor);
        let ok = rows.iter().all(|r| monotone(r, t.direction, t.tol));
        let detail = rows.iter().map(|r| fmt_series(r)).collect::<Vec<_>>().join(" | ");
        out.push(format!("trend:{}", t.monitor), format!("{} {:?} along each γ grid (tol {})", t.monitor, t.direction, t.tol), ok, detail);
    }
    for rb in ratio_bounds {
        let rows = res.series(&rb.monitor);
        let ratios: Vec<f64> = rows
            .iter()
            .map(|r| {
                let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
                if lo > 0.0 { hi / lo } else { f64::INFINITY }
            })
            .collect();
        let ok = ratios.iter().all(|&x| x <= rb.max_ratio);
        out.push(format!("ratio:{}", rb.monitor), format!("{} max/min ≤ {} along each γ grid", rb.monitor, rb.max_ratio), ok, format!("{ratios:.4?}"));
    }
    for a in never_played {
        let worst = cells.iter().filter_map(|c| res.prob(c, &a.infoset, &a.action)).fold(0.0, f64::max);
        out.push(format!("never:{}", a.action), format!("{} at {} is never played", a.action, a.infoset), worst == 0.0, format!("max share {worst:e}"));
    }
    if let Some(names) = candidate {
        let target = BehaviorProfile::from_pure(&g.tree, &pure_profile(&g, names)?);
        let d = BehaviorProfile { probs: res.candidate.clone() }.sup_distance(&target);
        let tol = candidate_tol.unwrap_or(0.05);
        out.push("candidate", format!("terminal cell is within {tol} of {}", names.join(",")), d <= tol, format!("distance {d:.3e}"));
    }
    let row = res.cells.last().expect("nonempty sweep");
    let slacks: Vec<Vec<f64>> = row.iter().map(|c| c.nash_slack.clone()).collect();
    if *slack_nonincreasing {
        let roles = slacks[0].len();
        let ok = (0..roles).all(|r| slacks.windows(2).all(|w| w[1][r] <= w[0][r] + 1e-12));
        out.push("slack", "Nash slack along the last γ grid does not increase", ok, slacks.iter().map(|v| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join("/")).collect::<Vec<_>>().join(" → "));
    }
    out.csv = Some(sweep_csv(&res));
    out.artifacts = serde_json::to_value(&res)?;
    Ok(())
}

/// Weights for the coalesced game: beliefs about the two merged sets become one Dirichlet factor.
fn coalesced_prior(orig: &Game, new: &Game, p: &DirichletPrior, h1: &str, h2: &str, pass: usize) -> Result<DirichletPrior, ExperimentError> {
    let mut q = DirichletPrior::uniform(&new.tree, p.role, 1.0);
    let first = orig.tree.find_infoset(h1).expect("plan was validated");
    let second = orig.tree.find_infoset(h2).expect("plan was validated");
    for (h, w) in p.weights.iter().enumerate() {
        if w.is_empty() || h == second {
            continue;
        }
        let id = &orig.tree.infoset(h).id;
        let target = new.tree.find_infoset(id).ok_or_else(|| ExperimentError::BadSpec(format!("`{id}` missing after coalescing")))?;
        q.weights[target] = if h == first { transform_dirichlet(w, &p.weights[second], pass)? } else { w.clone() };
    }
    q.check(&new.tree)?;
    Ok(q)
}

fn random_simplex(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    sample_dirichlet(&vec![1.0; k], rng)
}

fn invariance(out: &mut CheckOutcome, task: &Task) -> Result<(), ExperimentError> {
    let Task::Invariance { original, plan, priors, cells, tol, phi_samples, phi_tol, boxes, box_samples, seed, solve, steady } = task
    else {
        unreachable!()
    };
    let orig = resolve_game(original)?;
    let c = coalesce(&orig, &CoalescePlan { role: plan.role.saturating_sub(1), h1: plan.h1.clone(), h2: plan.h2.clone() })?;
    let (new, id) = (c.game, c.identification);
    let p_orig = PriorSpec::Explicit { roles: priors.clone() }.build(&orig)?;
    let p_new: Vec<DirichletPrior> =
        p_orig.iter().map(|p| coalesced_prior(&orig, &new, p, &plan.h1, &plan.h2, id.pass)).collect::<Result<_, _>>()?;

    let start = BehaviorProfile::uniform(&orig.tree);
    let start_new = id.map_behavior(&orig, &new, &start);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut all_converged = true;
    for &[delta, gamma] in cells {
        let la = Learners::solve(&orig, &p_orig, delta, gamma, solve)?;
        let lb = Learners::solve(&new, &p_new, delta, gamma, solve)?;
        out.bellman(la.max_bellman_residual().max(lb.max_bellman_residual()), solve.tol);
        let ra = steady_state(&la, &start, steady)?;
        let rb = steady_state(&lb, &start_new, steady)?;
        all_converged &= ra.best.converged && rb.best.converged;
        let d = id.map_behavior(&orig, &new, &ra.best.profile).sup_distance(&rb.best.profile);
        worst = worst.max(d);
        details.push(format!("({delta},{gamma}) {d:.1e}"));
    }
    out.push("steady", format!("steady states agree under the identification within {tol}"), all_converged && worst <= *tol, details.join("; "));

    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
    let h1 = orig.tree.find_infoset(&plan.h1).expect("coalesced");
    let h2 = orig.tree.find_infoset(&plan.h2).expect("coalesced");
    let (m1, n2) = (orig.tree.infoset(h1).actions.len(), orig.tree.infoset(h2).actions.len());
    let mut round: f64 = 0.0;
    for _ in 0..*phi_samples {
        let a = random_simplex(&mut rng, m1);
        let b = random_simplex(&mut rng, n2);
        let star = phi(&a, &b, id.pass)?;
        let (a2, b2) = phi_inverse(&star, m1 - 1, id.pass)?;
        for (x, y) in a.iter().zip(&a2).chain(b.iter().zip(&b2)) {
            round = round.max((x - y).abs());
        }
    }
    out.push("phi", format!("φ round trip within {phi_tol:e}"), round <= *phi_tol, format!("worst {round:.2e} over {phi_samples} draws"));

    let holder = p_orig
        .iter()
        .find(|p| !p.weights[h1].is_empty())
        .ok_or_else(|| ExperimentError::BadSpec("no role holds beliefs about the merged sets".into()))?;
    let density = TransformedPrior::new(ProductDirichlet { weights: vec![holder.weights[h1].clone(), holder.weights[h2].clone()] }, 0, 1, id.pass)?;
    let dims = density.inner.dims();
    let checks: Vec<_> = (0..*boxes)
        .map(|_| {
            let bx = SimplexBox::random(&dims, &mut rng);
            box_measure_check(&density, &bx, *box_samples, &mut rng)
        })
        .collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    out.push("boxes", "prior mass of boxes preserved within 3 standard errors", passed == *boxes, format!("{passed}/{boxes} boxes"));
    let files: Vec<PriorFile> = p_new.iter().map(|p| p.to_file(&new.tree)).collect();
    out.artifacts = json!({ "identification": id, "coalesced_priors": files, "boxes": checks, "cells": details });
    Ok(())
}

fn isomorphism(
    out: &mut CheckOutcome,
    game: &str,
    priors: &[PriorFile],
    cells: &[[f64; 2]],
    tol: f64,
    solve: &SolveOptions,
    steady: &SteadyOptions,
) -> Result<(), ExperimentError> {
    let g = resolve_game(game)?;
    let tree = &g.tree;
    for r in 0..g.players() {
        if tree.role_infosets(r).len() != 1 {
            return Err(ExperimentError::BadSpec(format!(
                "role {} has several information sets; its opponents' Dirichlet beliefs do not carry over to strategies",
                r + 1
            )));
        }
    }
    let mut nf = derive_normal_form(tree)?;
    nf.partitions = Some(p_equivalent_partition(&g, &nf));
    let n = Game::from_file(&nf.to_game_file())?;
    let set_name = |r: usize| format!("S{}", r + 1);
    let pg = PriorSpec::Explicit { roles: priors.to_vec() }.build(&g)?;
    let pn: Vec<DirichletPrior> = pg
        .iter()
        .map(|p| {
            let mut q = DirichletPrior::uniform(&n.tree, p.role, 1.0);
            for k in (0..g.players()).filter(|&k| k != p.role) {
                let h = tree.role_infosets(k)[0];
                q.weights[n.tree.find_infoset(&set_name(k)).expect("one set per role")] = p.weights[h].clone();
            }
            q
        })
        .collect();
    let owner = |h: &str| tree.find_infoset(h).map(|h| tree.infoset(h).owner).unwrap_or(0);
    let strategy_names = |p: &Policy, t: &sslab_game::GameTree| -> Vec<String> { p.model.strategies.iter().map(|s| s.name(t)).collect() };

    let (mut states, mut mismatches) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut converged = true;
    for &[delta, gamma] in cells {
        let la = Learners::solve(&g, &pg, delta, gamma, solve)?;
        let lb = Learners::solve(&n, &pn, delta, gamma, solve)?;
        out.bellman(la.max_bellman_residual().max(lb.max_bellman_residual()), solve.tol);
        for (a, b) in la.policies.iter().zip(&lb.policies) {
            let map = SlotMap::by_name(a, b, |h, x| vec![(set_name(owner(h)), x.to_string())])?;
            let (na, nb) = (strategy_names(a, tree), strategy_names(b, &n.tree));
            let rep = policy_invariance_check(a, b, &map, |s| nb.iter().position(|x| *x == na[s]).expect("same strategies"))?;
            states += rep.states_checked;
            mismatches += rep.mismatches + usize::from(!rep.equal);
        }
        let ra = steady_state(&la, &BehaviorProfile::uniform(tree), steady)?;
        let rb = steady_state(&lb, &BehaviorProfile::uniform(&n.tree), steady)?;
        converged &= ra.best.converged && rb.best.converged;
        let mut d: f64 = 0.0;
        for (r, a) in la.policies.iter().enumerate() {
            let shares = strategy_shares(a, &stationary(a, &ra.best.profile, gamma));
            let hn = n.tree.find_infoset(&set_name(r)).expect("one set per role");
            let nb = &n.tree.infoset(hn).actions;
            for (s, name) in strategy_names(a, tree).iter().enumerate() {
                let k = nb.iter().position(|x| x == name).expect("same strategies");
                d = d.max((shares[s] - rb.best.profile.probs[hn][k]).abs());
            }
        }
        worst = worst.max(d);
        details.push(format!("({delta},{gamma}) {d:.1e}"));
    }
    out.push("policies", "belief states and choices correspond one to one", mismatches == 0, format!("{states} states compared, {mismatches} mismatches"));
    out.push("steady", format!("steady-state strategy shares agree within {tol:e}"), converged && worst <= tol, details.join("; "));
    out.artifacts = json!({ "normal_form_strategies": nf.names, "cells": details, "max_share_gap": worst });
    Ok(())
}

fn monte_carlo(out: &mut CheckOutcome, task: &Task) -> Result<(), ExperimentError> {
    let Task::MonteCarlo { game, priors, init, cells, mc, factor, solve, steady } = task else { unreachable!() };
    let g = resolve_game(game)?;
    let priors = priors.build(&g)?;
    let start = initial_profile(&g, init)?;
    let bound = factor / (mc.agents as f64).sqrt();
    let mut rows = Vec::new();
    let mut ok = true;
    for &[delta, gamma] in cells {
        let l = Learners::solve(&g, &priors, delta, gamma, solve)?;
        out.bellman(l.max_bellman_residual(), solve.tol);
        let exact = steady_state(&l, &start, steady)?;
        let sim = steady_state(&l, &start, &SteadyOptions { method: Method::MonteCarlo, mc: mc.clone(), ..steady.clone() })?;
        let d = exact.best.profile.sup_distance(&sim.best.profile);
        ok &= exact.best.converged && d <= bound;
        rows.push(json!({ "delta": delta, "gamma": gamma, "exact": exact.best.profile.probs, "simulated": sim.best.profile.probs, "distance": d }));
    }
    let detail = rows.iter().map(|r| format!("distance {:.2e}", r["distance"].as_f64().unwrap_or(f64::NAN))).collect::<Vec<_>>();
    out.push("agree", format!("exact and simulated steady states within {bound:.2e}"), ok, detail.join("; "));
    out.artifacts = json!({ "agents": mc.agents, "seed": mc.seed, "bound": bound, "cells": rows });
    Ok(())
}

fn hygiene(out: &mut CheckOutcome, games: &[String], samples: usize, tol: f64, seed: u64, cons: &Conservation) -> Result<(), ExperimentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for name in games {
        let g = resolve_game(name)?;
        let tree = &g.tree;
        for role in 0..g.players() {
            for _ in 0..samples {
                let mix: Vec<Vec<f64>> = tree
                    .role_infosets(role)
                    .iter()
                    .map(|&h| {
                        let k = tree.infoset(h).actions.len();
                        let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
                        let t: f64 = v.iter().sum();
                        v.into_iter().map(|x| x / t).collect()
                    })
                    .collect();
                let b = BehaviorStrategy { role, mix };
                let back = mixed_to_behavior(tree, &behavior_to_mixed(tree, &b));
                for (x, y) in b.mix.iter().flatten().zip(back.strategy.mix.iter().flatten()) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    out.push("kuhn", format!("behavior → mixed → behavior within {tol:e}"), worst <= tol, format!("worst {worst:.2e}"));

    let g = resolve_game(&cons.game)?;
    let priors = cons.priors.build(&g)?;
    let solve = SolveOptions::default();
    let l = Learners::solve(&g, &priors, cons.delta, cons.gamma, &solve)?;
    out.bellman(l.max_bellman_residual(), solve.tol);
    let pi = BehaviorProfile::uniform(&g.tree);
    let (mut gap, mut dropped, mut total): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for p in &l.policies {
        let mut mu = PopulationState::newborn(p);
        for _ in 0..cons.steps {
            let (next, rep) = update_rule(p, &mu, &pi, cons.gamma, cons.trunc)?;
            let expect = (1.0 - cons.gamma) + cons.gamma * rep.mass_in;
            gap = gap.max((rep.mass_out + rep.dropped - expect).abs()).max((next.total() - rep.mass_out).abs());
            dropped += rep.dropped;
            mu = next;
        }
        total = total.max((1.0 - mu.total()).abs());
    }
    out.push(
        "mass",
        "update rule conserves mass up to the reported truncation",
        gap <= cons.tol,
        format!("identity gap {gap:.1e}; dropped {dropped:.2e}; final deficit {total:.2e}"),
    );
    let _ = nash_slack;
    out.artifacts = json!({ "kuhn_worst": worst, "mass_gap": gap, "dropped": dropped });
    Ok(())
}
