use rand::RngCore;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationPoint {
    pub n: usize,
    /// Posterior mass within `eta` (sup norm) of the empirical distribution.
    pub mass: f64,
    pub standard_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationRecord {
    pub eta: f64,
    pub points: Vec<ConcentrationPoint>,
    /// Smallest tested `n > 0` whose mass reaches `1 - eta`.
    pub first_n: Option<usize>,
}

fn dirichlet(weights: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let draws: Vec<f64> =
            weights.iter().map(|&w| Gamma::new(w, 1.0).expect("positive weight").sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return draws.into_iter().map(|d| d / total).collect();
        }
    }
}

/// Posterior concentration around the empirical distribution of one data stream.
///
/// `sample` draws one observed action; the stream is shared across the tested sizes `ns`
/// (ascending), so each size extends the previous data. At `n = 0` the prior mean stands in
/// for the empirical distribution.
pub fn concentration_profile(
    weights: &[f64],
    ns: &[usize],
    eta: f64,
    draws: usize,
    sample: &mut dyn FnMut(&mut dyn RngCore) -> usize,
    rng: &mut dyn RngCore,
) -> ConcentrationRecord {
    let k = weights.len();
    let mut counts = vec![0u64; k];
    let mut seen = 0usize;
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        while seen < n {
            counts[sample(rng)] += 1;
            seen += 1;
        }
        let centre: Vec<f64> = if n == 0 {
            let total: f64 = weights.iter().sum();
            weights.iter().map(|w| w / total).collect()
        } else {
            counts.iter().map(|&c| c as f64 / n as f64).collect()
        };
        let post: Vec<f64> = weights.iter().zip(&counts).map(|(&w, &c)| w + c as f64).collect();
        let hits = (0..draws)
            .filter(|_| {
                let x = dirichlet(&post, rng);
                x.iter().zip(&centre).all(|(a, b)| (a - b).abs() <= eta)
            })
            .count();
        let mass = hits as f64 / draws as f64;
        let standard_error = (mass * (1.0 - mass) / draws as f64).sqrt();
        points.push(ConcentrationPoint { n, mass, standard_error });
    }
    let first_n = points.iter().find(|p| p.n > 0 && p.mass >= 1.0 - eta).map(|p| p.n);
    ConcentrationRecord { eta, points, first_n }
}
