use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::{phi_inverse, phi_unchecked, TransformError};

/// A probability density on a product of open simplices.
///
/// Densities are taken with respect to Lebesgue measure on all but the last coordinate
/// of each simplex.
pub trait SimplexDensity {
    fn dims(&self) -> Vec<usize>;
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<Vec<f64>>;
    fn log_density(&self, x: &[Vec<f64>]) -> f64;
}

pub fn dirichlet_log_density(weights: &[f64], x: &[f64]) -> f64 {
    if x.iter().any(|&v| !(v > 0.0)) {
        return f64::NEG_INFINITY;
    }
    let total: f64 = weights.iter().sum();
    ln_gamma(total) + weights.iter().zip(x).map(|(&w, &v)| (w - 1.0) * v.ln() - ln_gamma(w)).sum::<f64>()
}

/// Normalized independent Gamma draws; redraws in the rare event of underflow to zero.
pub fn sample_dirichlet(weights: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
    let gammas: Vec<Gamma<f64>> = weights.iter().map(|&w| Gamma::new(w, 1.0).expect("positive weight")).collect();
    loop {
        let draws: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if draws.iter().all(|&d| d > 0.0) && total.is_finite() {
            return draws.iter().map(|d| d / total).collect();
        }
    }
}

/// Independent Dirichlet factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductDirichlet {
    pub weights: Vec<Vec<f64>>,
}

impl SimplexDensity for ProductDirichlet {
    fn dims(&self) -> Vec<usize> {
        self.weights.iter().map(Vec::len).collect()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        self.weights.iter().map(|w| sample_dirichlet(w, rng)).collect()
    }

    fn log_density(&self, x: &[Vec<f64>]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| dirichlet_log_density(w, v)).sum()
    }
}

/// Density on the coalesced game's strategies induced by a density on the original game's.
///
/// Factors `first` and `second` of the inner density are replaced by one merged factor at
/// the position of `first`.
#[derive(Clone, Debug)]
pub struct TransformedPrior<D> {
    pub inner: D,
    pub first: usize,
    pub second: usize,
    pub pass: usize,
}

impl<D: SimplexDensity> TransformedPrior<D> {
    pub fn new(inner: D, first: usize, second: usize, pass: usize) -> Result<Self, TransformError> {
        let dims = inner.dims();
        if first == second || first >= dims.len() || second >= dims.len() || pass >= dims[first] {
            return Err(TransformError::Dimension("bad factor or pass index".into()));
        }
        Ok(TransformedPrior { inner, first, second, pass })
    }

    fn merged_pos(&self) -> usize {
        self.first - usize::from(self.second < self.first)
    }

    fn m(&self) -> usize {
        self.inner.dims()[self.first] - 1
    }

    fn n(&self) -> usize {
        self.inner.dims()[self.second]
    }

    /// Jacobian of the bijection at a given earlier-set mix: `first[pass]^(n-1)`.
    pub fn jacobian(&self, first_mix: &[f64]) -> f64 {
        first_mix[self.pass].powi(self.n() as i32 - 1)
    }

    pub fn forward(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let merged = phi_unchecked(&x[self.first], &x[self.second], self.pass);
        x.iter()
            .enumerate()
            .filter(|&(k, _)| k != self.second)
            .map(|(k, v)| if k == self.first { merged.clone() } else { v.clone() })
            .collect()
    }

    pub fn backward(&self, y: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, TransformError> {
        let pos = self.merged_pos();
        let (a, b) = phi_inverse(&y[pos], self.m(), self.pass)?;
        let mut out: Vec<Vec<f64>> = y.to_vec();
        out[pos] = a;
        out.insert(self.second, b);
        Ok(out)
    }
}

impl<D: SimplexDensity> SimplexDensity for TransformedPrior<D> {
    fn dims(&self) -> Vec<usize> {
        let mut d = self.inner.dims();
        d[self.first] = self.m() + self.n();
        d.remove(self.second);
        d
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        self.forward(&self.inner.sample(rng))
    }

    fn log_density(&self, y: &[Vec<f64>]) -> f64 {
        match self.backward(y) {
            Ok(x) => self.inner.log_density(&x) - self.jacobian(&x[self.first]).ln(),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

/// Closed form when both factors are Dirichlet and the pass weight equals the later set's
/// total weight: the image is again Dirichlet.
pub fn transform_dirichlet(first: &[f64], second: &[f64], pass: usize) -> Result<Vec<f64>, TransformError> {
    let tail: f64 = second.iter().sum();
    if (first[pass] - tail).abs() > 1e-9 * tail.max(1.0) {
        return Err(TransformError::NotDirichlet { pass: first[pass], tail });
    }
    Ok(first
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != pass)
        .map(|(_, &w)| w)
        .chain(second.iter().copied())
        .collect())
}

/// Product of coordinate intervals, one per coordinate of each simplex factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexBox {
    pub lo: Vec<Vec<f64>>,
    pub hi: Vec<Vec<f64>>,
}

impl SimplexBox {
    pub fn contains(&self, x: &[Vec<f64>]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (lo, hi))| v.iter().zip(lo.iter().zip(hi)).all(|(&c, (&l, &h))| l <= c && c <= h))
    }

    /// Random box with each side drawn inside [0, 1].
    pub fn random(dims: &[usize], rng: &mut dyn RngCore) -> Self {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for &d in dims {
            let (l, h): (Vec<f64>, Vec<f64>) = (0..d)
                .map(|_| {
                    let a: f64 = rng.random_range(0.0..0.5);
                    let b: f64 = a + rng.random_range(0.25..1.0);
                    (a, b.min(1.0))
                })
                .unzip();
            lo.push(l);
            hi.push(h);
        }
        SimplexBox { lo, hi }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCheck {
    pub original: f64,
    pub transformed: f64,
    pub standard_error: f64,
    pub pass: bool,
}

/// Compares the mass of `bx` under the original density with the mass of its image under the
/// transformed density.
///
/// The first is a plain sampling estimate. The second is an importance-sampling estimate that
/// only uses the transformed log-density, with a Dirichlet proposal whose tail weights sum to one
/// so the weights stay bounded near the face where the pass probability vanishes.
pub fn box_measure_check<D: SimplexDensity>(
    prior: &TransformedPrior<D>,
    bx: &SimplexBox,
    samples: usize,
    rng: &mut dyn RngCore,
) -> BoxCheck {
    let n = samples as f64;
    let hits = (0..samples).filter(|_| bx.contains(&prior.inner.sample(rng))).count() as f64;
    let original = hits / n;
    let se_original = (original * (1.0 - original) / n).sqrt();

    let dims = prior.dims();
    let pos = prior.merged_pos();
    let (m, nn) = (prior.m(), prior.n());
    let proposal: Vec<Vec<f64>> = dims
        .iter()
        .enumerate()
        .map(|(k, &d)| if k == pos { (0..d).map(|j| if j < m { 1.0 } else { 1.0 / nn as f64 }).collect() } else { vec![1.0; d] })
        .collect();
    let q = ProductDirichlet { weights: proposal };
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let y = q.sample(rng);
        let inside = prior.backward(&y).map(|x| bx.contains(&x)).unwrap_or(false);
        if inside {
            let w = (prior.log_density(&y) - q.log_density(&y)).exp();
            sum += w;
            sum_sq += w * w;
        }
    }
    let transformed = sum / n;
    let var = (sum_sq / n - transformed * transformed).max(0.0);
    let se_transformed = (var / n).sqrt();
    let standard_error = (se_original.powi(2) + se_transformed.powi(2)).sqrt();
    let pass = (original - transformed).abs() <= 3.0 * standard_error.max(f64::EPSILON);
    BoxCheck { original, transformed, standard_error, pass }
}
