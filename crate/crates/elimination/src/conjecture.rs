use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::ExactGame;
use crate::lp::{q, Cmp, Lp, LpResult, Row, Q};
use crate::EliminationError;

/// Conjectures of `role` over full opponent profiles with every profile at least `eta` and,
/// for each opponent `j` and each profile of the rest, conditional mass at least `1 − eps` on
/// `prev[j]`, under which `s` is a best reply among all of the role's strategies.
///
/// Variables are `τ = σ − η ≥ 0`, one per entry of the returned profile list.
pub fn conjecture_lp(g: &ExactGame, role: usize, s: usize, prev: &[Vec<usize>], eps: &Q, eta: &Q) -> (Lp, Vec<Vec<usize>>) {
    let all = g.all_sets();
    let profiles = g.opponent_profiles(role, &all);
    let n = profiles.len();
    let mut rows = Vec::new();
    let eta_n = eta * q(n as i64);
    rows.push(Row { coeffs: vec![q(1); n], cmp: Cmp::Eq, rhs: q(1) - eta_n });
    let keep = q(1) - eps;
    for j in (0..g.players()).filter(|&j| j != role) {
        let mut blocks: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (k, p) in profiles.iter().enumerate() {
            let mut key = p.clone();
            key[j] = usize::MAX;
            blocks.entry(key).or_default().push(k);
        }
        for members in blocks.values() {
            let mut coeffs = vec![Q::zero(); n];
            let mut floor = Q::zero();
            for &k in members {
                let inside = if prev[j].contains(&profiles[k][j]) { q(1) } else { Q::zero() };
                let c = inside - &keep;
                floor += &c * eta;
                coeffs[k] = c;
            }
            rows.push(Row { coeffs, cmp: Cmp::Ge, rhs: -floor });
        }
    }
    for t in (0..all[role].len()).filter(|&t| t != s) {
        let coeffs: Vec<Q> = profiles.iter().map(|p| g.u_at(role, s, p) - g.u_at(role, t, p)).collect();
        let total: Q = coeffs.iter().sum();
        rows.push(Row { coeffs, cmp: Cmp::Ge, rhs: -(total * eta) });
    }
    (Lp::feasibility(n, rows), profiles)
}

/// Outcome of one feasibility check at fixed `(ε, η)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub eps: Q,
    pub eta: Q,
    /// Some admissible conjecture makes the strategy a best reply.
    pub feasible: bool,
    /// Such a conjecture, as probabilities over `profiles`.
    pub witness: Option<Vec<Q>>,
    /// Infeasibility multipliers for the rows of [`conjecture_lp`].
    pub farkas: Option<Vec<Q>>,
    pub profiles: Vec<Vec<usize>>,
}

fn check_args(g: &ExactGame, role: usize, eps: &Q, eta: &Q) -> Result<(), EliminationError> {
    let n = g.opponent_profiles(role, &g.all_sets()).len();
    if !(eps.is_positive() && *eps < q(1)) || eta.is_negative() || eta * q(n as i64) >= *eps {
        return Err(EliminationError::BadArgument(format!("need 0 < eps < 1 and 0 <= eta < eps/{n}, got {eps} and {eta}")));
    }
    Ok(())
}

/// Decides whether `s` survives at one `(ε, η)`: the strategy is eliminable there when no
/// admissible conjecture makes it a best reply.
pub fn eliminable(g: &ExactGame, role: usize, s: usize, prev: &[Vec<usize>], eps: &Q, eta: &Q) -> Result<Check, EliminationError> {
    check_args(g, role, eps, eta)?;
    let (lp, profiles) = conjecture_lp(g, role, s, prev, eps, eta);
    let (feasible, witness, farkas) = match lp.solve() {
        LpResult::Optimal { x, .. } => (true, Some(x.iter().map(|t| t + eta).collect()), None),
        LpResult::Infeasible => {
            let y = lp.farkas().ok_or_else(|| EliminationError::Solver("no infeasibility certificate".into()))?;
            (false, None, Some(y))
        }
        LpResult::Unbounded => return Err(EliminationError::Solver("feasibility problem reported unbounded".into())),
    };
    Ok(Check { eps: eps.clone(), eta: eta.clone(), feasible, witness, farkas, profiles })
}

/// Re-verifies a check's witness or infeasibility certificate.
pub fn verify_check(g: &ExactGame, role: usize, s: usize, prev: &[Vec<usize>], c: &Check) -> bool {
    let (lp, profiles) = conjecture_lp(g, role, s, prev, &c.eps, &c.eta);
    if profiles != c.profiles {
        return false;
    }
    match (c.feasible, &c.witness, &c.farkas) {
        (true, Some(w), None) => {
            let tau: Vec<Q> = w.iter().map(|x| x - &c.eta).collect();
            lp.satisfied_by(&tau)
        }
        (false, None, Some(y)) => lp.check_farkas(y),
        _ => false,
    }
}

/// The decreasing `(ε_r, η_r)` schedule used to decide "for some ε > 0".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    /// `ε_r = 2^-r` for `r = 1..=r_max`.
    pub r_max: u32,
    /// `η_r = ε_r / (4 |S_-i|)`; when false, `η_r = 0` and conjectures need not have full support.
    pub full_support: bool,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { r_max: 20, full_support: true }
    }
}

impl Schedule {
    pub fn point(&self, r: u32, opponents: usize) -> (Q, Q) {
        let eps = Q::new(BigInt::one(), BigInt::one() << r as usize);
        let eta = if self.full_support { &eps / q(4 * opponents as i64) } else { Q::zero() };
        (eps, eta)
    }
}

/// Schedule run for one strategy: eliminable iff infeasible at the last two points.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub eliminable: bool,
    /// Feasibility at each `r`, in order.
    pub feasible: Vec<bool>,
    /// Full checks at `r_max − 1` and `r_max`.
    pub last: Vec<(u32, Check)>,
}

pub fn decide(g: &ExactGame, role: usize, s: usize, prev: &[Vec<usize>], schedule: &Schedule) -> Result<Decision, EliminationError> {
    if schedule.r_max < 2 || schedule.r_max > 60 {
        return Err(EliminationError::BadArgument(format!("r_max must lie in 2..=60, got {}", schedule.r_max)));
    }
    let n = g.opponent_profiles(role, &g.all_sets()).len();
    let mut feasible = Vec::new();
    let mut last = Vec::new();
    for r in 1..=schedule.r_max {
        let (eps, eta) = schedule.point(r, n);
        if r + 1 >= schedule.r_max {
            let c = eliminable(g, role, s, prev, &eps, &eta)?;
            feasible.push(c.feasible);
            last.push((r, c));
        } else {
            check_args(g, role, &eps, &eta)?;
            feasible.push(matches!(conjecture_lp(g, role, s, prev, &eps, &eta).0.solve(), LpResult::Optimal { .. }));
        }
    }
    let eliminable = last.iter().all(|(_, c)| !c.feasible);
    Ok(Decision { eliminable, feasible, last })
}

/// Grid search over the conjecture polytope of a two-role game: the simplex on the opponent's
/// strategies in steps of `1/steps`, mapped affinely onto the floored simplex.
pub fn grid_feasible(g: &ExactGame, role: usize, s: usize, prev: &[Vec<usize>], eps: &Q, eta: &Q, steps: u32) -> Result<bool, EliminationError> {
    if g.players() != 2 {
        return Err(EliminationError::BadArgument("grid search needs a two-role game".into()));
    }
    check_args(g, role, eps, eta)?;
    let j = 1 - role;
    let n = g.nf.sizes()[j];
    let scale = q(1) - eta * q(n as i64);
    let step = Q::new(BigInt::one(), BigInt::from(steps));
    let own = g.nf.sizes()[role];
    let mut profile = vec![0; 2];
    let mut point = vec![0u32; n];
    loop {
        let used: u32 = point[..n - 1].iter().sum();
        if used <= steps {
            point[n - 1] = steps - used;
            let sigma: Vec<Q> = point.iter().map(|&k| eta + &scale * &step * q(k as i64)).collect();
            let inside: Q = prev[j].iter().map(|&k| sigma[k].clone()).sum();
            if inside >= q(1) - eps {
                let value = |t: usize, profile: &mut Vec<usize>| -> Q {
                    (0..n)
                        .map(|k| {
                            profile[j] = k;
                            profile[role] = t;
                            &sigma[k] * g.u(role, profile)
                        })
                        .sum()
                };
                let mine = value(s, &mut profile);
                if (0..own).all(|t| value(t, &mut profile) <= mine) {
                    return Ok(true);
                }
            }
        }
        // Next composition prefix in odometer order.
        let mut k = 0;
        loop {
            if k + 1 >= n {
                return Ok(false);
            }
            point[k] += 1;
            if point[..n - 1].iter().sum::<u32>() <= steps {
                break;
            }
            point[k] = 0;
            k += 1;
        }
    }
}
