use sslab_game::NormalFormGame;

use crate::lp::{from_f64, Q};
use crate::EliminationError;

/// A normal form with payoffs converted to exact rationals.
#[derive(Clone, Debug)]
pub struct ExactGame<'a> {
    pub nf: &'a NormalFormGame,
    payoffs: Vec<Vec<Q>>,
}

impl<'a> ExactGame<'a> {
    pub fn new(nf: &'a NormalFormGame) -> Result<Self, EliminationError> {
        let payoffs = nf
            .payoffs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&u| from_f64(u).ok_or_else(|| EliminationError::BadArgument(format!("payoff {u} is not finite"))))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(ExactGame { nf, payoffs })
    }

    pub fn players(&self) -> usize {
        self.nf.players
    }

    pub fn u(&self, role: usize, profile: &[usize]) -> &Q {
        &self.payoffs[self.nf.index(profile)][role]
    }

    /// Every profile of the roles other than `role`, drawn from `sets`, with slot `role`
    /// left at zero. Ordered like the normal form's mixed radix.
    pub fn opponent_profiles(&self, role: usize, sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let mut out = vec![vec![0; self.players()]];
        for (r, set) in sets.iter().enumerate() {
            if r == role {
                continue;
            }
            out = out
                .into_iter()
                .flat_map(|p| {
                    set.iter().map(move |&k| {
                        let mut q = p.clone();
                        q[r] = k;
                        q
                    })
                })
                .collect();
        }
        out
    }

    pub fn all_sets(&self) -> Vec<Vec<usize>> {
        self.nf.sizes().into_iter().map(|n| (0..n).collect()).collect()
    }

    /// `u_role(s, p)` with `p`'s own slot replaced by `s`.
    pub fn u_at(&self, role: usize, s: usize, p: &[usize]) -> &Q {
        let mut full = p.to_vec();
        full[role] = s;
        &self.payoffs[self.nf.index(&full)][role]
    }
}
