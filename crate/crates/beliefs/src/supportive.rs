use serde::Serialize;
use sslab_game::{GameTree, InfoSetId, NodeKind, PureStrategy};

use crate::{BeliefError, DirichletPrior};

const TOL: f64 = 1e-12;
const ATTEMPTS: i32 = 6;

/// What follows one first-mover action.
enum Branch {
    End([f64; 2]),
    Reply { h: InfoSetId, payoffs: Vec<[f64; 2]> },
}

/// Two roles; the first moves once at the root, the second at most once afterwards.
struct Family {
    h1: InfoSetId,
    branches: Vec<Branch>,
    /// Second mover's sets with the root actions leading into each.
    replies: Vec<(InfoSetId, Vec<usize>)>,
}

fn pair(p: &[f64]) -> [f64; 2] {
    [p[0], p[1]]
}

impl Family {
    fn of(tree: &GameTree) -> Result<Self, BeliefError> {
        let outside = |why: &str| Err(BeliefError::OutsideFamily(why.to_string()));
        if tree.players() != 2 {
            return outside(&format!("{} players", tree.players()));
        }
        if tree.role_infosets(0).len() != 1 {
            return outside("the first role must have exactly one information set");
        }
        let NodeKind::Decision { owner: 0, infoset: h1, children } = &tree.node(tree.root()).kind else {
            return outside("the first role must move at the root");
        };
        let mut branches = Vec::new();
        let mut replies: Vec<(InfoSetId, Vec<usize>)> = Vec::new();
        for (a, &c) in children.iter().enumerate() {
            match &tree.node(c).kind {
                NodeKind::Terminal { payoffs } => branches.push(Branch::End(pair(payoffs))),
                NodeKind::Decision { owner: 1, infoset, children } => {
                    let mut payoffs = Vec::new();
                    for &z in children {
                        match &tree.node(z).kind {
                            NodeKind::Terminal { payoffs: p } => payoffs.push(pair(p)),
                            _ => return outside("the second role's moves must end the game"),
                        }
                    }
                    match replies.iter_mut().find(|(h, _)| h == infoset) {
                        Some((_, rho)) => rho.push(a),
                        None => replies.push((*infoset, vec![a])),
                    }
                    branches.push(Branch::Reply { h: *infoset, payoffs });
                }
                _ => return outside("the first role moves again"),
            }
        }
        Ok(Family { h1: *h1, branches, replies })
    }

    /// Payoff of `role` after root action `a` when the reply set `h` plays `b`.
    fn u(&self, role: usize, a: usize, b: usize) -> f64 {
        match &self.branches[a] {
            Branch::End(p) => p[role],
            Branch::Reply { payoffs, .. } => payoffs[b][role],
        }
    }

    fn u_against(&self, tree: &GameTree, role: usize, a: usize, second: &PureStrategy) -> f64 {
        match &self.branches[a] {
            Branch::End(p) => p[role],
            Branch::Reply { h, payoffs } => payoffs[second.choice[tree.infoset_pos(*h)]][role],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub h2: String,
    /// Root actions leading into `h2`.
    pub rho: Vec<String>,
    /// First-mover action in `rho` supporting the reply, if any.
    pub a1: Option<String>,
    pub a2: String,
    pub on_path: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumForm {
    pub holds: bool,
    pub condition1: bool,
    pub condition2: bool,
    pub condition3: bool,
    pub a1_star: String,
    pub witnesses: Vec<Witness>,
}

fn parse_profile(tree: &GameTree, profile: &[PureStrategy]) -> Result<(), BeliefError> {
    if profile.len() != 2 || profile[0].role != 0 || profile[1].role != 1 {
        return Err(BeliefError::FormViolated("expected one pure strategy per role, in role order".into()));
    }
    for s in profile {
        s.check(tree)?;
    }
    Ok(())
}

fn argmax_set(values: &[f64]) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&k| values[k] >= best - TOL).collect()
}

fn form(tree: &GameTree, fam: &Family, profile: &[PureStrategy]) -> (EquilibriumForm, Vec<Option<usize>>) {
    let root = tree.infoset(fam.h1);
    let a_star = profile[0].choice[0];
    let second = &profile[1];

    let u1: Vec<f64> = (0..root.actions.len()).map(|a| fam.u_against(tree, 0, a, second)).collect();
    let condition1 = (0..u1.len()).all(|a| a == a_star || u1[a] < u1[a_star] - TOL);

    let mut witnesses = Vec::new();
    let mut picks = Vec::new();
    let mut condition2 = true;
    let mut condition3 = true;
    for (h, rho) in &fam.replies {
        let info = tree.infoset(*h);
        let b_star = second.choice[tree.infoset_pos(*h)];
        let qualifies = |a: usize| {
            let replies: Vec<f64> = (0..info.actions.len()).map(|b| fam.u(1, a, b)).collect();
            let within: Vec<f64> = rho.iter().map(|&x| fam.u(0, x, b_star)).collect();
            argmax_set(&replies).contains(&b_star) && within[rho.iter().position(|&x| x == a).unwrap()] >= within.iter().copied().fold(f64::NEG_INFINITY, f64::max) - TOL
        };
        let pick = if rho.contains(&a_star) && qualifies(a_star) {
            Some(a_star)
        } else {
            rho.iter().copied().find(|&a| qualifies(a))
        };
        condition2 &= pick.is_some();
        let on_path = rho.contains(&a_star);
        if on_path {
            let replies: Vec<f64> = (0..info.actions.len()).map(|b| fam.u(1, a_star, b)).collect();
            condition3 &= (0..replies.len()).all(|b| b == b_star || replies[b] < replies[b_star] - TOL);
        }
        picks.push(pick);
        witnesses.push(Witness {
            h2: info.id.clone(),
            rho: rho.iter().map(|&a| root.actions[a].clone()).collect(),
            a1: pick.map(|a| root.actions[a].clone()),
            a2: info.actions[b_star].clone(),
            on_path,
        });
    }
    let holds = condition1 && condition2 && condition3;
    let out = EquilibriumForm { holds, condition1, condition2, condition3, a1_star: root.actions[a_star].clone(), witnesses };
    (out, picks)
}

/// Checks the three form conditions by exhaustive payoff comparison.
pub fn verify_equilibrium_form(tree: &GameTree, profile: &[PureStrategy]) -> Result<EquilibriumForm, BeliefError> {
    let fam = Family::of(tree)?;
    parse_profile(tree, profile)?;
    Ok(form(tree, &fam, profile).0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub h2: String,
    pub condition: u8,
    pub pass: bool,
    pub states: usize,
    /// Smallest preference margin of the target action over all enumerated states.
    pub worst_margin: f64,
    /// Count of the supporting observation at the worst state.
    pub worst_count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportivenessReport {
    pub form: EquilibriumForm,
    pub cap: u32,
    pub attempt: Option<i32>,
    pub checks: Vec<ConditionCheck>,
    pub pass: bool,
}

impl SupportivenessReport {
    fn violated(&self) -> String {
        let bad: Vec<String> =
            self.checks.iter().filter(|c| !c.pass).map(|c| format!("condition ({}) at {}", c.condition, c.h2)).collect();
        bad.join(", ")
    }
}

fn worst(margins: impl Iterator<Item = (u32, f64)>) -> (usize, f64, u32) {
    margins.fold((0, f64::INFINITY, 0), |(n, m, at), (c, x)| if x < m { (n + 1, x, c) } else { (n + 1, m, at) })
}

fn run_checks(
    tree: &GameTree,
    fam: &Family,
    profile: &[PureStrategy],
    picks: &[Option<usize>],
    priors: &[DirichletPrior],
    cap: u32,
) -> Vec<ConditionCheck> {
    let a_star = profile[0].choice[0];
    let mut checks = Vec::new();
    for ((h, rho), pick) in fam.replies.iter().zip(picks) {
        if rho.contains(&a_star) {
            continue;
        }
        let Some(w) = *pick else { continue };
        let info = tree.infoset(*h);
        let b_star = profile[1].choice[tree.infoset_pos(*h)];

        // First mover: only the target reply was ever seen at h, n times.
        let alpha = &priors[0].weights[*h];
        let total: f64 = alpha.iter().sum();
        let (states, margin, at) = worst((0..=cap).map(|n| {
            let mean = |b: usize| (alpha[b] + if b == b_star { f64::from(n) } else { 0.0 }) / (total + f64::from(n));
            let value = |a: usize| (0..info.actions.len()).map(|b| mean(b) * fam.u(0, a, b)).sum::<f64>();
            let best = rho.iter().map(|&a| value(a)).fold(f64::NEG_INFINITY, f64::max);
            (n, value(w) - best)
        }));
        checks.push(ConditionCheck {
            h2: info.id.clone(),
            condition: 1,
            pass: margin >= -TOL,
            states,
            worst_margin: margin,
            worst_count: at,
        });

        // Second mover: no other action of rho was ever seen. Counts outside rho cancel in the
        // conditional, so only the count on the witness matters.
        let beta = &priors[1].weights[fam.h1];
        let (states, margin, at) = worst((0..=cap).map(|c| {
            let weight = |a: usize| beta[a] + if a == w { f64::from(c) } else { 0.0 };
            let mass: f64 = rho.iter().map(|&a| weight(a)).sum();
            let value =
                |b: usize| rho.iter().map(|&a| weight(a) / mass * fam.u(1, a, b)).sum::<f64>();
            let best = (0..info.actions.len()).map(value).fold(f64::NEG_INFINITY, f64::max);
            (c, value(b_star) - best)
        }));
        checks.push(ConditionCheck {
            h2: info.id.clone(),
            condition: 2,
            pass: margin >= -TOL,
            states,
            worst_margin: margin,
            worst_count: at,
        });
    }
    checks
}

/// Verifies supportiveness of `priors` (one per role) for `profile` at every count up to `cap`.
///
/// Only reply sets off the target path are constrained.
pub fn check_supportive(
    tree: &GameTree,
    profile: &[PureStrategy],
    priors: &[DirichletPrior],
    cap: u32,
) -> Result<SupportivenessReport, BeliefError> {
    let fam = Family::of(tree)?;
    parse_profile(tree, profile)?;
    if priors.len() != 2 {
        return Err(BeliefError::BadPrior("need one prior per role".into()));
    }
    for (r, p) in priors.iter().enumerate() {
        if p.role != r {
            return Err(BeliefError::BadPrior("priors must be in role order".into()));
        }
        p.check(tree)?;
    }
    let (form, picks) = form(tree, &fam, profile);
    let checks = run_checks(tree, &fam, profile, &picks, priors, cap);
    let pass = checks.iter().all(|c| c.pass);
    Ok(SupportivenessReport { form, cap, attempt: None, checks, pass })
}

fn template(tree: &GameTree, fam: &Family, profile: &[PureStrategy], picks: &[Option<usize>], j: i32) -> Vec<DirichletPrior> {
    let strong = 10f64.powi(j + 1);
    let weak = 10f64.powi(-(j + 1));
    let mut first = DirichletPrior::uniform(tree, 0, weak);
    for (h, _) in &fam.replies {
        first.weights[*h][profile[1].choice[tree.infoset_pos(*h)]] = strong;
    }
    let mut second = DirichletPrior::uniform(tree, 1, weak / 2.0);
    for a in picks.iter().flatten() {
        second.weights[fam.h1][*a] = 1.0;
    }
    second.weights[fam.h1][profile[0].choice[0]] = strong;
    vec![first, second]
}

/// Searches a family of increasingly confident priors for a supportive pair.
///
/// The profile must satisfy the first two form conditions; the third is only reported.
pub fn make_supportive_priors(
    tree: &GameTree,
    profile: &[PureStrategy],
    cap: u32,
) -> Result<(Vec<DirichletPrior>, SupportivenessReport), BeliefError> {
    let fam = Family::of(tree)?;
    parse_profile(tree, profile)?;
    let (form, picks) = form(tree, &fam, profile);
    if !form.condition1 {
        return Err(BeliefError::FormViolated("the first mover's action is not a unique best reply".into()));
    }
    if !form.condition2 {
        return Err(BeliefError::FormViolated("some reply is not supported by any first-mover action".into()));
    }
    let mut last = None;
    for j in 0..ATTEMPTS {
        let priors = template(tree, &fam, profile, &picks, j);
        let checks = run_checks(tree, &fam, profile, &picks, &priors, cap);
        let pass = checks.iter().all(|c| c.pass);
        let report = SupportivenessReport { form: form.clone(), cap, attempt: Some(j), checks, pass };
        if pass {
            return Ok((priors, report));
        }
        last = Some(report);
    }
    Err(BeliefError::NoSupportivePrior(last.map(|r| r.violated()).unwrap_or_default()))
}
