use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hyper::Hyperparams;
use crate::model::{compute_stats, ClusterStats};
use crate::network::Network;
use crate::positions::Positions;
use crate::scalar::Real;

/// Current values of `(Z, beta, K, G)` together with the per-cluster
/// sufficient statistics.
///
/// Allocations are 0-based (`alloc[i] < g`); files and reports shift them to
/// `1..=G`. Components may be empty: emptiness alone never changes `G`, only
/// ejection and absorption do.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ChainState<T: Real> {
    pub z: Positions<T>,
    pub beta: T,
    pub alloc: Vec<usize>,
    pub g: usize,
    pub stats: Vec<ClusterStats<T>>,
}

impl<T: Real> ChainState<T> {
    /// Builds a state and its statistics, validating the allocation.
    pub fn new(z: Positions<T>, beta: T, alloc: Vec<usize>, g: usize) -> Result<Self> {
        if alloc.len() != z.n() {
            return Err(invalid(format!("allocation has {} entries for {} actors", alloc.len(), z.n())));
        }
        if g == 0 {
            return Err(invalid("number of components must be at least 1"));
        }
        if let Some(&k) = alloc.iter().find(|&&k| k >= g) {
            return Err(invalid(format!("label {k} out of range for {g} components")));
        }
        if !beta.is_finite() || z.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(invalid("non-finite position or intercept"));
        }
        let stats = compute_stats(&z, &alloc, g);
        Ok(Self { z, beta, alloc, g, stats })
    }

    /// The default starting point: `Z` spherical normal with variance 4,
    /// `beta` from its prior, one component holding every actor.
    ///
    /// Draws `n * d` standard normals for `Z` (row by row) and then one for `beta`.
    pub fn initial<R: Rng + ?Sized>(net: &Network, hp: &Hyperparams<T>, rng: &mut R) -> Self {
        let n = net.n();
        let data = (0..n * hp.d).map(|_| T::of(2.0) * T::sample_std_normal(rng)).collect();
        let z = Positions::from_vec(n, hp.d, data).expect("size matches by construction");
        let beta = hp.xi + hp.psi.sqrt() * T::sample_std_normal(rng);
        Self::new(z, beta, vec![0; n], 1).expect("initial state is valid by construction")
    }

    pub fn n(&self) -> usize {
        self.alloc.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.stats.iter().map(|s| s.count).collect()
    }

    /// Members of component `g` in ascending actor order.
    pub fn members(&self, g: usize) -> Vec<usize> {
        self.alloc.iter().enumerate().filter(|&(_, &k)| k == g).map(|(i, _)| i).collect()
    }

    /// Recomputes the statistics from scratch, discarding accumulated rounding.
    pub fn refresh_stats(&mut self) {
        self.stats = compute_stats(&self.z, &self.alloc, self.g);
    }

    /// Checks that the incremental statistics agree with a recomputation to
    /// relative tolerance `rtol`, and that the labels are in range.
    pub fn check_consistency(&self, rtol: f64) -> Result<()> {
        if self.stats.len() != self.g || self.alloc.iter().any(|&k| k >= self.g) {
            return Err(Error::Logic(format!("labels inconsistent with G = {}", self.g)));
        }
        let fresh = compute_stats(&self.z, &self.alloc, self.g);
        for (g, (a, b)) in self.stats.iter().zip(&fresh).enumerate() {
            if !a.approx_eq(b, rtol) {
                return Err(Error::Logic(format!("statistics of component {g} drifted: {a:?} vs {b:?}")));
            }
        }
        Ok(())
    }

    /// Applies the label map `perm` (old label -> new label), a bijection on `0..g`.
    pub fn permute_labels(&mut self, perm: &[usize]) -> Result<()> {
        if !is_permutation(perm, self.g) {
            return Err(invalid("label map is not a permutation of the components"));
        }
        for k in &mut self.alloc {
            *k = perm[*k];
        }
        let mut stats = vec![ClusterStats::empty(self.z.d()); self.g];
        for (old, st) in self.stats.drain(..).enumerate() {
            stats[perm[old]] = st;
        }
        self.stats = stats;
        Ok(())
    }
}

pub(crate) fn is_permutation(perm: &[usize], g: usize) -> bool {
    let mut seen = vec![false; g];
    perm.len() == g && perm.iter().all(|&p| p < g && !std::mem::replace(&mut seen[p], true))
}
