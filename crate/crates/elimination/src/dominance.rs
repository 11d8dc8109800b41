use num_traits::{Signed, Zero};

use crate::exact::ExactGame;
use crate::lp::{q, Cmp, Lp, LpResult, Row, Q};

/// A mixture over own strategies that dominates `strategy`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dominance {
    pub role: usize,
    pub strategy: usize,
    pub mixture: Vec<(usize, Q)>,
    /// Opponent profile where the mixture does strictly better (weak dominance).
    pub strict_at: Option<Vec<usize>>,
    /// Smallest gain over all opponent profiles (strict dominance).
    pub margin: Q,
}

/// Best dominating mixture for `s`, against opponents drawn from `sets`, mixing over
/// `sets[role] ∖ {s}`. Weak: maximize the summed gain subject to no losses; strict: maximize
/// the smallest gain.
pub fn dominating_mixture(g: &ExactGame, role: usize, s: usize, sets: &[Vec<usize>], strict: bool) -> Option<Dominance> {
    let others: Vec<usize> = sets[role].iter().copied().filter(|&k| k != s).collect();
    if others.is_empty() {
        return None;
    }
    let opp = g.opponent_profiles(role, sets);
    let k = others.len();
    // Weak: σ then one gain variable per opponent profile. Strict: σ then a single margin.
    let gains = if strict { 1 } else { opp.len() };
    let vars = k + gains;
    let mut rows = Vec::with_capacity(opp.len() + 1);
    let mut simplex = vec![Q::zero(); vars];
    simplex[..k].iter_mut().for_each(|v| *v = q(1));
    rows.push(Row { coeffs: simplex, cmp: Cmp::Eq, rhs: q(1) });
    for (n, p) in opp.iter().enumerate() {
        let mut coeffs = vec![Q::zero(); vars];
        for (c, &t) in others.iter().enumerate() {
            coeffs[c] = g.u_at(role, t, p).clone();
        }
        coeffs[k + if strict { 0 } else { n }] = q(-1);
        rows.push(Row { coeffs, cmp: if strict { Cmp::Ge } else { Cmp::Eq }, rhs: g.u_at(role, s, p).clone() });
    }
    let mut objective = vec![Q::zero(); vars];
    objective[k..].iter_mut().for_each(|v| *v = q(1));
    let LpResult::Optimal { x, value } = (Lp { vars, objective, rows }).solve() else { return None };
    if !value.is_positive() {
        return None;
    }
    let mixture: Vec<(usize, Q)> = others.iter().zip(&x).filter(|(_, w)| !w.is_zero()).map(|(&t, w)| (t, w.clone())).collect();
    let gain = |p: &[usize]| -> Q { mixture.iter().map(|(t, w)| w * g.u_at(role, *t, p)).sum::<Q>() - g.u_at(role, s, p) };
    let strict_at = (!strict).then(|| opp.iter().find(|p| gain(p).is_positive()).cloned()).flatten();
    let margin = opp.iter().map(|p| gain(p)).min().unwrap_or_else(Q::zero);
    Some(Dominance { role, strategy: s, mixture, strict_at, margin })
}

/// Re-checks a dominance claim in exact arithmetic.
pub fn check_dominance(g: &ExactGame, d: &Dominance, sets: &[Vec<usize>], strict: bool) -> bool {
    let total: Q = d.mixture.iter().map(|(_, w)| w.clone()).sum();
    if total != q(1) || d.mixture.iter().any(|(t, w)| w.is_negative() || *t == d.strategy || !sets[d.role].contains(t)) {
        return false;
    }
    let opp = g.opponent_profiles(d.role, sets);
    let gain = |p: &[usize]| -> Q {
        d.mixture.iter().map(|(t, w)| w * g.u_at(d.role, *t, p)).sum::<Q>() - g.u_at(d.role, d.strategy, p)
    };
    if strict {
        opp.iter().all(|p| gain(p).is_positive())
    } else {
        opp.iter().all(|p| !gain(p).is_negative())
            && d.strict_at.as_ref().is_some_and(|p| opp.contains(p) && gain(p).is_positive())
    }
}

/// Weakly dominated strategies of `role` in the full game.
pub fn weakly_dominated(g: &ExactGame, role: usize) -> Vec<Dominance> {
    let sets = g.all_sets();
    sets[role].iter().filter_map(|&s| dominating_mixture(g, role, s, &sets, false)).collect()
}

/// Strategies of `role` strictly dominated within the product `sets`.
pub fn strictly_dominated(g: &ExactGame, role: usize, sets: &[Vec<usize>]) -> Vec<Dominance> {
    sets[role].iter().filter_map(|&s| dominating_mixture(g, role, s, sets, true)).collect()
}

/// Survivors of iterated strict dominance by mixtures, removing every dominated strategy
/// of every role each round.
pub fn iterated_strict_dominance(g: &ExactGame) -> Vec<Vec<usize>> {
    let mut sets = g.all_sets();
    loop {
        let doomed: Vec<Vec<usize>> =
            (0..g.players()).map(|r| strictly_dominated(g, r, &sets).into_iter().map(|d| d.strategy).collect()).collect();
        if doomed.iter().all(Vec::is_empty) {
            return sets;
        }
        for (set, gone) in sets.iter_mut().zip(&doomed) {
            set.retain(|s| !gone.contains(s));
        }
    }
}
