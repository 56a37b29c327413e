//! Log-density terms of the collapsed latent position cluster model.
//!
//! With the mixture weights, cluster means and cluster precisions integrated
//! out, the posterior over `(Z, beta, K, G)` factors into
//!
//! ```text
//! log L(Y | Z, beta)                                  log_likelihood
//! + sum_g log_cluster_term(n_g, s_g, q_g)             per-cluster Normal-Gamma marginal
//! + log_allocation_terms(n_1..n_G)                    Dirichlet-multinomial, G-dependent constants, Poisson(1) prior
//! + log_beta_prior(beta)
//! - (d n / 2) ln(pi)
//! ```
//!
//! where `n_g` is the size of cluster `g`, `s_g` the sum of its positions and
//! `q_g` the sum of their squared norms.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hyper::Hyperparams;
use crate::network::Network;
use crate::positions::{euclidean, sq_norm, Positions};
use crate::scalar::Real;
use crate::special::{ln_gamma, log1p_exp};
use crate::state::ChainState;

/// Slack allowed on the non-negativity of `q_g - |s_g|^2 / (n_g + 1/omega2)`
/// before the statistics are declared corrupt.
pub const SCALE_SLACK: f64 = 1e-12;

/// Sufficient statistics of one mixture component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClusterStats<T: Real> {
    /// Number of members `n_g`.
    pub count: usize,
    /// Sum of member positions `s_g`.
    pub sum: Vec<T>,
    /// Sum of squared member norms `q_g`.
    pub sq: T,
}

impl<T: Real> ClusterStats<T> {
    pub fn empty(d: usize) -> Self {
        Self { count: 0, sum: vec![T::zero(); d], sq: T::zero() }
    }

    pub fn add(&mut self, z: &[T]) {
        debug_assert_eq!(z.len(), self.sum.len());
        self.count += 1;
        for (s, &x) in self.sum.iter_mut().zip(z) {
            *s += x;
        }
        self.sq += sq_norm(z);
    }

    pub fn remove(&mut self, z: &[T]) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Logic("remove from an empty cluster".into()));
        }
        self.count -= 1;
        if self.count == 0 {
            // Reset exactly so empty clusters never carry rounding residue.
            self.sum.iter_mut().for_each(|s| *s = T::zero());
            self.sq = T::zero();
            return Ok(());
        }
        for (s, &x) in self.sum.iter_mut().zip(z) {
            *s -= x;
        }
        self.sq -= sq_norm(z);
        Ok(())
    }

    /// `|s_g|^2`.
    #[inline]
    pub fn sum_norm2(&self) -> T {
        sq_norm(&self.sum)
    }

    /// Statistics of the members of `label` under `alloc`.
    pub fn of_members(z: &Positions<T>, alloc: &[usize], label: usize) -> Self {
        let mut st = Self::empty(z.d());
        for (i, &k) in alloc.iter().enumerate() {
            if k == label {
                st.add(z.row(i));
            }
        }
        st
    }

    /// True when the two statistics agree to relative tolerance `rtol`.
    pub fn approx_eq(&self, other: &Self, rtol: f64) -> bool {
        let close = |a: T, b: T| {
            let (a, b) = (a.as_f64(), b.as_f64());
            (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1.0)
        };
        self.count == other.count
            && self.sum.len() == other.sum.len()
            && self.sum.iter().zip(&other.sum).all(|(&a, &b)| close(a, b))
            && close(self.sq, other.sq)
    }
}

/// Statistics for every component `0..g` computed from scratch.
pub fn compute_stats<T: Real>(z: &Positions<T>, alloc: &[usize], g: usize) -> Vec<ClusterStats<T>> {
    let mut stats = vec![ClusterStats::empty(z.d()); g];
    for (i, &k) in alloc.iter().enumerate() {
        stats[k].add(z.row(i));
    }
    stats
}

/// Log-likelihood of the logistic latent-distance model.
///
/// Sums `y_ij * eta_ij - ln(1 + exp(eta_ij))`, `eta_ij = beta - |z_i - z_j|`,
/// over ordered pairs for directed networks and over `i < j` otherwise.
pub fn log_likelihood<T: Real>(net: &Network, z: &Positions<T>, beta: T) -> Result<T> {
    if z.n() != net.n() {
        return Err(invalid(format!("{} position rows for {} actors", z.n(), net.n())));
    }
    let n = net.n();
    let mut total = T::zero();
    for i in 0..n {
        let row = net.row(i);
        for j in (i + 1)..n {
            let eta = beta - z.dist(i, j);
            let lp = log1p_exp(eta);
            if net.directed() {
                let ties = T::of((row[j] as u8 + net.tie(j, i) as u8) as f64);
                total += ties * eta - lp - lp;
            } else if row[j] {
                total += eta - lp;
            } else {
                total -= lp;
            }
        }
    }
    Ok(total)
}

/// The part of the log-likelihood that involves actor `i`, evaluated with
/// `z_i` replaced by `zi`. Differences of this quantity give the likelihood
/// change of moving a single actor.
pub fn actor_log_likelihood<T: Real>(net: &Network, z: &Positions<T>, i: usize, zi: &[T], beta: T) -> T {
    let n = net.n();
    let row = net.row(i);
    let mut total = T::zero();
    for j in 0..n {
        if j == i {
            continue;
        }
        let eta = beta - euclidean(zi, z.row(j));
        let lp = log1p_exp(eta);
        if net.directed() {
            let ties = T::of((row[j] as u8 + net.tie(j, i) as u8) as f64);
            total += ties * eta - lp - lp;
        } else if row[j] {
            total += eta - lp;
        } else {
            total -= lp;
        }
    }
    total
}

/// [`actor_log_likelihood`] at the current `z_i` and at `zi_new`, in one pass.
pub(crate) fn actor_log_likelihood_pair<T: Real>(
    net: &Network,
    z: &Positions<T>,
    i: usize,
    zi_new: &[T],
    beta: T,
) -> (T, T) {
    let row = net.row(i);
    let zi = z.row(i);
    let (mut l0, mut l1) = (T::zero(), T::zero());
    for j in 0..net.n() {
        if j == i {
            continue;
        }
        let zj = z.row(j);
        let (e0, e1) = (beta - euclidean(zi, zj), beta - euclidean(zi_new, zj));
        let (p0, p1) = (log1p_exp(e0), log1p_exp(e1));
        if net.directed() {
            let ties = T::of((row[j] as u8 + net.tie(j, i) as u8) as f64);
            l0 += ties * e0 - p0 - p0;
            l1 += ties * e1 - p1 - p1;
        } else if row[j] {
            l0 += e0 - p0;
            l1 += e1 - p1;
        } else {
            l0 -= p0;
            l1 -= p1;
        }
    }
    (l0, l1)
}

/// Log-likelihood at two intercepts in a single pass over the dyads.
pub(crate) fn log_likelihood_pair<T: Real>(net: &Network, z: &Positions<T>, beta0: T, beta1: T) -> (T, T) {
    let n = net.n();
    let (mut l0, mut l1) = (T::zero(), T::zero());
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = z.dist(i, j);
            let (e0, e1) = (beta0 - dist, beta1 - dist);
            let (p0, p1) = (log1p_exp(e0), log1p_exp(e1));
            if net.directed() {
                let ties = T::of((net.tie(i, j) as u8 + net.tie(j, i) as u8) as f64);
                l0 += ties * e0 - p0 - p0;
                l1 += ties * e1 - p1 - p1;
            } else if net.tie(i, j) {
                l0 += e0 - p0;
                l1 += e1 - p1;
            } else {
                l0 -= p0;
                l1 -= p1;
            }
        }
    }
    (l0, l1)
}

/// Collapsed per-cluster term from raw statistics:
///
/// `lnG((n d + alpha)/2) - (d/2) ln(n + 1/omega2)
///  - ((n d + alpha)/2) ln(delta + q - |s|^2 / (n + 1/omega2))`.
pub fn log_cluster_term_parts<T: Real>(count: usize, sum_norm2: T, sq: T, hp: &Hyperparams<T>) -> Result<T> {
    let d = T::of(hp.d as f64);
    let half = T::of(0.5);
    let shape = (T::of(count as f64) * d + hp.alpha) * half;
    let c = T::of(count as f64) + hp.inv_omega2();
    let mut scale = sq - sum_norm2 / c;
    if scale < T::zero() {
        let tol = T::of(SCALE_SLACK) * sq.max(T::one());
        if -scale > tol {
            return Err(Error::NumericDomain(format!(
                "cluster scatter {scale} is negative beyond slack (n = {count}, q = {sq}, |s|^2 = {sum_norm2})"
            )));
        }
        scale = T::zero();
    }
    let arg = hp.delta + scale;
    if !(arg > T::zero()) || !arg.is_finite() {
        return Err(Error::NumericDomain(format!("cluster scale argument {arg} is not positive")));
    }
    Ok(ln_gamma(shape) - d * half * c.ln() - shape * arg.ln())
}

/// Collapsed per-cluster term of a component.
pub fn log_cluster_term<T: Real>(stats: &ClusterStats<T>, hp: &Hyperparams<T>) -> Result<T> {
    log_cluster_term_parts(stats.count, stats.sum_norm2(), stats.sq, hp)
}

/// Terms depending only on the cluster sizes and `G`:
///
/// `lnG(G nu) - G lnG(nu) + (G alpha / 2) ln delta - G lnG(alpha/2)
///  - (G d / 2) ln omega2 + sum_g lnG(n_g + nu) - lnG(n + G nu) - 1 - lnG(G + 1)`.
///
/// `counts` has one entry per component (zero for empty components). The
/// normalising constant of the truncated Poisson prior is omitted.
pub fn log_allocation_terms<T: Real>(counts: &[usize], hp: &Hyperparams<T>) -> T {
    let g = T::of(counts.len() as f64);
    let n: usize = counts.iter().sum();
    let d = T::of(hp.d as f64);
    let half = T::of(0.5);
    let sizes = sum_sorted(counts.iter().map(|&c| ln_gamma(T::of(c as f64) + hp.nu)).collect());
    ln_gamma(g * hp.nu) - g * ln_gamma(hp.nu) + g * hp.alpha * half * hp.delta.ln()
        - g * ln_gamma(hp.alpha * half)
        - g * d * half * hp.omega2.ln()
        + sizes
        - ln_gamma(T::of(n as f64) + g * hp.nu)
        - T::one()
        - ln_gamma(g + T::one())
}

/// Sum in ascending order, so that the result does not depend on how the
/// components are labelled.
fn sum_sorted<T: Real>(mut terms: Vec<T>) -> T {
    terms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    terms.into_iter().fold(T::zero(), |acc, t| acc + t)
}

/// Cluster sizes of an allocation over `g` components.
pub fn cluster_counts(alloc: &[usize], g: usize) -> Vec<usize> {
    let mut counts = vec![0; g];
    for &k in alloc {
        counts[k] += 1;
    }
    counts
}

/// Normal prior density of the intercept, in logs.
pub fn log_beta_prior<T: Real>(beta: T, hp: &Hyperparams<T>) -> T {
    let two_pi = T::of(2.0 * std::f64::consts::PI);
    let dev = beta - hp.xi;
    -T::of(0.5) * (two_pi * hp.psi).ln() - dev * dev / (T::of(2.0) * hp.psi)
}

/// Constant `-(d n / 2) ln(pi)` of the collapsed posterior.
pub fn log_position_constant<T: Real>(n: usize, hp: &Hyperparams<T>) -> T {
    -T::of((hp.d * n) as f64 * 0.5 * std::f64::consts::PI.ln())
}

/// The clustering part of the collapsed posterior: every term except the
/// likelihood and the intercept prior.
pub fn log_clustering_terms<T: Real>(stats: &[ClusterStats<T>], hp: &Hyperparams<T>) -> Result<T> {
    let terms = stats.iter().map(|st| log_cluster_term(st, hp)).collect::<Result<Vec<T>>>()?;
    let total = sum_sorted(terms);
    let counts: Vec<usize> = stats.iter().map(|s| s.count).collect();
    let n = counts.iter().sum();
    Ok(total + log_allocation_terms(&counts, hp) + log_position_constant(n, hp))
}

/// Unnormalised log of the collapsed posterior `pi(Z, beta, K, G | Y)`.
pub fn log_collapsed_posterior<T: Real>(state: &ChainState<T>, net: &Network, hp: &Hyperparams<T>) -> Result<T> {
    Ok(log_likelihood(net, &state.z, state.beta)? + log_clustering_terms(&state.stats, hp)? + log_beta_prior(state.beta, hp))
}

/// [`log_collapsed_posterior`] for raw inputs; statistics are computed from scratch.
pub fn log_collapsed_posterior_parts<T: Real>(
    net: &Network,
    z: &Positions<T>,
    beta: T,
    alloc: &[usize],
    g: usize,
    hp: &Hyperparams<T>,
) -> Result<T> {
    if alloc.len() != z.n() || alloc.iter().any(|&k| k >= g) {
        return Err(invalid("allocation is not valid for the given number of components"));
    }
    let stats = compute_stats(z, alloc, g);
    Ok(log_likelihood(net, z, beta)? + log_clustering_terms(&stats, hp)? + log_beta_prior(beta, hp))
}
