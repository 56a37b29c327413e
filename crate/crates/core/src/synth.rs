//! Networks simulated from the latent position cluster model.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::network::Network;
use crate::positions::{euclidean, Positions};
use crate::scalar::Real;
use crate::special::logistic;

/// Parameters of a simulated network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub d: usize,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
    pub beta: f64,
    pub directed: bool,
    pub seed: u64,
}

impl GenSpec {
    /// `g` equally weighted components whose means sit on a circle with
    /// neighbouring means `distance` apart (for `g = 3`, an equilateral
    /// triangle with side `distance`).
    pub fn separated_clusters(n: usize, g: usize, distance: f64, variance: f64, beta: f64, seed: u64) -> Self {
        let radius = if g > 1 { distance / (2.0 * (std::f64::consts::PI / g as f64).sin()) } else { 0.0 };
        let means = (0..g)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * k as f64 / g as f64;
                vec![radius * angle.cos(), radius * angle.sin()]
            })
            .collect();
        Self {
            n,
            d: 2,
            weights: vec![1.0 / g as f64; g],
            means,
            variances: vec![variance; g],
            beta,
            directed: false,
            seed,
        }
    }

    pub fn g(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.g();
        if g == 0 {
            return Err(invalid("at least one component is required"));
        }
        if self.means.len() != g || self.variances.len() != g {
            return Err(invalid("weights, means and variances must have one entry per component"));
        }
        if self.means.iter().any(|m| m.len() != self.d) || self.d == 0 {
            return Err(invalid("every mean must have d >= 1 coordinates"));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) || (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("weights must be non-negative and sum to 1"));
        }
        if self.variances.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(invalid("variances must be positive"));
        }
        if !self.beta.is_finite() {
            return Err(invalid("beta must be finite"));
        }
        Ok(())
    }
}

/// A simulated network with the latent truth that generated it.
#[derive(Clone, Debug, PartialEq)]
pub struct Synthetic {
    pub network: Network,
    pub z: Positions<f64>,
    /// 0-based component of each actor.
    pub alloc: Vec<usize>,
}

/// Draws `K`, `Z` and `Y` from the generative model.
///
/// With `ChaCha8Rng::seed_from_u64(spec.seed)`: for each actor in turn one
/// uniform picks its component (inverse CDF) and `d` standard normals give
/// its position; then one uniform per dyad (`i < j` row by row, or every
/// ordered pair `i != j` row by row when directed) decides the tie.
pub fn sample_network(spec: &GenSpec) -> Result<Synthetic> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, d, g) = (spec.n, spec.d, spec.g());
    let mut alloc = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let u: f64 = f64::sample_open01(&mut rng);
        let mut acc = 0.0;
        let k = spec
            .weights
            .iter()
            .position(|&w| {
                acc += w;
                u < acc
            })
            .unwrap_or(g - 1);
        alloc.push(k);
        let sd = spec.variances[k].sqrt();
        for c in 0..d {
            data.push(spec.means[k][c] + sd * f64::sample_std_normal(&mut rng));
        }
    }
    let z = Positions::from_vec(n, d, data)?;
    let mut adjacency = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j || (!spec.directed && j < i) {
                continue;
            }
            let p = logistic(spec.beta - euclidean(z.row(i), z.row(j)));
            let tie = f64::sample_open01(&mut rng) < p;
            adjacency[i * n + j] = tie;
            if !spec.directed {
                adjacency[j * n + i] = tie;
            }
        }
    }
    Ok(Synthetic { network: Network::from_adjacency(n, spec.directed, adjacency)?, z, alloc })
}
