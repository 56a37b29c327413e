//! Two-stage BIC approximation: a logistic regression of the ties on the
//! latent distances of a fixed position estimate, plus a spherical Gaussian
//! mixture fitted to those positions.
//!
//! Both parts are larger-is-better; the reported `bic` is their negated sum,
//! so the selected model has the smallest `bic`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::log_likelihood;
use crate::network::Network;
use crate::positions::Positions;
use crate::postprocess::{procrustes_align, reference_index};
use crate::sampler::DrawRecord;
use crate::scalar::Real;
use crate::special::{log1p_exp, log_sum_exp, logistic};

/// Newton stopping rule on the intercept score.
pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 100;
/// EM stopping rule on the mixture log-likelihood.
pub const EM_TOL: f64 = 1e-8;
pub const EM_MAX_ITER: usize = 500;
pub const EM_RESTARTS: usize = 10;
/// Variances below this count as a collapsed component.
pub const MIN_VARIANCE: f64 = 1e-8;

/// Alternative position estimate: the highest-likelihood draw (which is its own Procrustes
/// reference), optionally restricted to draws with `G = g`.
pub fn point_estimate_positions<T: Real>(draws: &[DrawRecord<T>], g: Option<usize>) -> Result<Positions<f64>> {
    let pool: Vec<&DrawRecord<T>> = draws.iter().filter(|d| g.is_none_or(|g| d.g == g)).collect();
    let owned: Vec<DrawRecord<T>> = pool.into_iter().cloned().collect();
    let best = reference_index(&owned).ok_or_else(|| invalid("no draws to estimate positions from"))?;
    Ok(owned[best].z.map(|x| x.as_f64()))
}

/// Stopping rule for the minimum-KL ascent: relative objective change.
pub const MIN_KL_TOL: f64 = 1e-12;
pub const MIN_KL_MAX_ITER: usize = 20_000;

/// Minimum Kullback-Leibler position estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct MinKlFit {
    pub z: Positions<f64>,
    pub beta: f64,
    /// Expected log-likelihood under the posterior mean tie probabilities.
    pub objective: f64,
    pub iterations: usize,
}

/// Positions (and intercept) whose tie probabilities are closest in
/// Kullback-Leibler divergence to the posterior mean tie probabilities.
///
/// Equivalently maximises `sum_ij pbar_ij eta_ij - ln(1 + exp(eta_ij))` with
/// `eta_ij = beta - |z_i - z_j|`. The ascent starts from the mean of the
/// draws after Procrustes alignment to the highest-likelihood draw and uses
/// gradient steps with an adaptive step length.
pub fn min_kl_positions<T: Real>(net: &Network, draws: &[DrawRecord<T>], g: Option<usize>) -> Result<MinKlFit> {
    let pool: Vec<DrawRecord<T>> = draws.iter().filter(|d| g.is_none_or(|g| d.g == g)).cloned().collect();
    let best = reference_index(&pool).ok_or_else(|| invalid("no draws to estimate positions from"))?;
    let (n, d) = (net.n(), pool[best].z.d());
    if pool[best].z.n() != n {
        return Err(invalid("draws do not match the network"));
    }
    let weight = 1.0 / pool.len() as f64;
    let mut pbar = vec![0.0; n * n];
    let mut z = Positions::zeros(n, d);
    let mut beta = 0.0;
    for draw in &pool {
        let aligned = if n >= 2 { procrustes_align(&draw.z, &pool[best].z)? } else { draw.z.map(|x| x.as_f64()) };
        for (acc, &x) in z.as_mut_slice().iter_mut().zip(aligned.as_slice()) {
            *acc += weight * x;
        }
        let b = draw.beta.as_f64();
        beta += weight * b;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pbar[i * n + j] += weight * logistic(b - draw.z.dist(i, j).as_f64());
                }
            }
        }
    }
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && (net.directed() || i < j)).collect();
    let objective = |z: &Positions<f64>, b: f64| -> f64 {
        pairs
            .iter()
            .map(|&(i, j)| {
                let eta = b - z.dist(i, j);
                pbar[i * n + j] * eta - log1p_exp(eta)
            })
            .sum()
    };
    let mut current = objective(&z, beta);
    let mut step = 0.1;
    let mut grad_z = vec![0.0; n * d];
    for it in 1..=MIN_KL_MAX_ITER {
        grad_z.fill(0.0);
        let mut grad_b = 0.0;
        for &(i, j) in &pairs {
            let dist = z.dist(i, j);
            let r = pbar[i * n + j] - logistic(beta - dist);
            grad_b += r;
            if dist > 0.0 {
                for k in 0..d {
                    let u = r * (z.row(i)[k] - z.row(j)[k]) / dist;
                    grad_z[i * d + k] -= u;
                    grad_z[j * d + k] += u;
                }
            }
        }
        // Backtrack until the objective does not decrease.
        let (next_z, next_b, next) = loop {
            let mut cand = z.clone();
            for (x, g) in cand.as_mut_slice().iter_mut().zip(&grad_z) {
                *x += step * g;
            }
            let b = beta + step * grad_b;
            let v = objective(&cand, b);
            if v >= current {
                break (cand, b, v);
            }
            step *= 0.5;
            if step < 1e-15 {
                return Ok(MinKlFit { z, beta, objective: current, iterations: it });
            }
        };
        let change = next - current;
        (z, beta, current) = (next_z, next_b, next);
        step *= 1.5;
        if change <= MIN_KL_TOL * current.abs().max(1.0) {
            return Ok(MinKlFit { z, beta, objective: current, iterations: it });
        }
    }
    Ok(MinKlFit { z, beta, objective: current, iterations: MIN_KL_MAX_ITER })
}

/// Logistic-regression part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrFit {
    pub beta_hat: f64,
    pub loglik: f64,
    /// Number of ties, each undirected dyad counted once.
    pub n_lr: usize,
    pub iterations: usize,
    /// `2 logL(beta_hat) - ln(n_lr)`.
    pub value: f64,
}

/// Maximises the likelihood over the intercept by damped Newton iterations.
pub fn bic_lr(net: &Network, z_hat: &Positions<f64>) -> Result<LrFit> {
    if z_hat.n() != net.n() {
        return Err(invalid("position estimate does not match the network"));
    }
    let ties = net.tie_count();
    let dyads = net.dyad_count();
    if ties == 0 || ties == dyads {
        return Err(Error::BoundaryMle(format!("{ties} ties among {dyads} dyads: the intercept estimate is infinite")));
    }
    // One (distance, y) entry per dyad of the likelihood.
    let n = net.n();
    let mut dyad: Vec<(f64, f64)> = Vec::with_capacity(dyads);
    for i in 0..n {
        for j in 0..n {
            if i != j && (net.directed() || i < j) {
                dyad.push((z_hat.dist(i, j), net.tie(i, j) as u8 as f64));
            }
        }
    }
    let score = |b: f64| {
        dyad.iter().fold((0.0, 0.0), |(g, h), &(dist, y)| {
            let p = logistic(b - dist);
            (g + y - p, h + p * (1.0 - p))
        })
    };
    let loglik = |b: f64| log_likelihood(net, z_hat, b);
    let mean_dist = dyad.iter().map(|d| d.0).sum::<f64>() / dyads as f64;
    let rate = ties as f64 / dyads as f64;
    let mut beta = (rate / (1.0 - rate)).ln() + mean_dist;
    let mut current = loglik(beta)?;
    for it in 1..=NEWTON_MAX_ITER {
        let (grad, info) = score(beta);
        if grad.abs() < NEWTON_TOL {
            return Ok(LrFit { beta_hat: beta, loglik: current, n_lr: ties, iterations: it - 1, value: 2.0 * current - (ties as f64).ln() });
        }
        let mut step = grad / info;
        // Near the optimum the change in log-likelihood drops below rounding
        // error; only halve steps that lose more than that.
        let slack = 1e-12 * current.abs().max(1.0);
        loop {
            let candidate = loglik(beta + step)?;
            if candidate >= current - slack || step.abs() < 1e-300 {
                beta += step;
                current = candidate;
                break;
            }
            step *= 0.5;
        }
    }
    let (grad, _) = score(beta);
    if grad.abs() < NEWTON_TOL {
        return Ok(LrFit { beta_hat: beta, loglik: current, n_lr: ties, iterations: NEWTON_MAX_ITER, value: 2.0 * current - (ties as f64).ln() });
    }
    Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER, gradient: grad })
}

/// Spherical Gaussian mixture fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
}

/// Number of free mixture parameters: `G - 1` weights, `G d` means, `G` variances.
pub fn mixture_dof(g: usize, d: usize) -> usize {
    g * (d + 2) - 1
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn component_log_density(z: &[f64], mean: &[f64], var: f64) -> f64 {
    let d = z.len() as f64;
    -0.5 * d * (2.0 * std::f64::consts::PI * var).ln() - sq_dist(z, mean) / (2.0 * var)
}

/// Log-likelihood of a spherical mixture at the rows of `z`.
pub fn mixture_loglik(z: &Positions<f64>, weights: &[f64], means: &[Vec<f64>], variances: &[f64]) -> f64 {
    let mut buf = vec![0.0; weights.len()];
    z.rows()
        .map(|row| {
            for (g, b) in buf.iter_mut().enumerate() {
                *b = weights[g].ln() + component_log_density(row, &means[g], variances[g]);
            }
            log_sum_exp(&buf)
        })
        .sum()
}

/// k-means++ seeding followed by Lloyd iterations; returns hard labels.
fn kmeans_labels(z: &Positions<f64>, g: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = z.n();
    let mut centers: Vec<Vec<f64>> = vec![z.row(rng.random_range(0..n)).to_vec()];
    while centers.len() < g {
        let d2: Vec<f64> =
            z.rows().map(|r| centers.iter().map(|c| sq_dist(r, c)).fold(f64::INFINITY, f64::min)).collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter().position(|&x| {
                acc += x;
                u < acc
            })
            .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        centers.push(z.row(next).to_vec());
    }
    let mut labels = vec![0; n];
    for _ in 0..100 {
        let new: Vec<usize> = z
            .rows()
            .map(|r| {
                (0..g).min_by(|&a, &b| sq_dist(r, &centers[a]).total_cmp(&sq_dist(r, &centers[b]))).unwrap_or(0)
            })
            .collect();
        let changed = new != labels;
        labels = new;
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&[f64]> = z.rows().zip(&labels).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
            if !members.is_empty() {
                for (k, x) in center.iter_mut().enumerate() {
                    *x = members.iter().map(|m| m[k]).sum::<f64>() / members.len() as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    labels
}

/// M-step from responsibilities; `None` when a component collapses.
fn m_step(z: &Positions<f64>, resp: &[Vec<f64>], g: usize) -> Option<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> {
    let (n, d) = (z.n(), z.d());
    let mut weights = vec![0.0; g];
    let mut means = vec![vec![0.0; d]; g];
    let mut variances = vec![0.0; g];
    for c in 0..g {
        let mass: f64 = resp.iter().map(|r| r[c]).sum();
        if mass < 1e-12 {
            return None;
        }
        weights[c] = mass / n as f64;
        for (row, r) in z.rows().zip(resp) {
            for (m, &x) in means[c].iter_mut().zip(row) {
                *m += r[c] * x / mass;
            }
        }
        variances[c] = z.rows().zip(resp).map(|(row, r)| r[c] * sq_dist(row, &means[c])).sum::<f64>() / (d as f64 * mass);
        if !(variances[c] >= MIN_VARIANCE) {
            return None;
        }
    }
    Some((weights, means, variances))
}

fn em_from(z: &Positions<f64>, g: usize, labels: &[usize]) -> Result<Option<MixtureFit>> {
    let mut resp: Vec<Vec<f64>> = labels.iter().map(|&l| (0..g).map(|c| (c == l) as u8 as f64).collect()).collect();
    let Some((mut weights, mut means, mut variances)) = m_step(z, &resp, g) else {
        return Ok(None);
    };
    let mut ll = mixture_loglik(z, &weights, &means, &variances);
    let mut buf = vec![0.0; g];
    for it in 1..=EM_MAX_ITER {
        for (row, r) in z.rows().zip(resp.iter_mut()) {
            for (c, b) in buf.iter_mut().enumerate() {
                *b = weights[c].ln() + component_log_density(row, &means[c], variances[c]);
            }
            let norm = log_sum_exp(&buf);
            for (rc, &b) in r.iter_mut().zip(&buf) {
                *rc = (b - norm).exp();
            }
        }
        let Some((w, m, v)) = m_step(z, &resp, g) else {
            return Ok(None);
        };
        let next = mixture_loglik(z, &w, &m, &v);
        if next < ll - 1e-9 * ll.abs().max(1.0) {
            return Err(Error::Logic(format!("EM log-likelihood decreased from {ll} to {next}")));
        }
        (weights, means, variances) = (w, m, v);
        let delta = next - ll;
        ll = next;
        if delta.abs() < EM_TOL {
            return Ok(Some(MixtureFit { weights, means, variances, loglik: ll, iterations: it }));
        }
    }
    Ok(Some(MixtureFit { weights, means, variances, loglik: ll, iterations: EM_MAX_ITER }))
}

/// Maximum-likelihood spherical mixture with `g` components: best of
/// [`EM_RESTARTS`] k-means-seeded EM runs (restart `r` seeds its k-means
/// with `r`).
pub fn fit_mixture(z: &Positions<f64>, g: usize) -> Result<MixtureFit> {
    if g == 0 || g > z.n() {
        return Err(invalid(format!("cannot fit {g} components to {} points", z.n())));
    }
    let mut best: Option<MixtureFit> = None;
    for r in 0..EM_RESTARTS {
        let labels = if g == 1 { vec![0; z.n()] } else { kmeans_labels(z, g, &mut ChaCha8Rng::seed_from_u64(r as u64)) };
        if let Some(fit) = em_from(z, g, &labels)? {
            if best.as_ref().is_none_or(|b| fit.loglik > b.loglik) {
                best = Some(fit);
            }
        }
        if g == 1 {
            break;
        }
    }
    best.ok_or_else(|| Error::DegenerateFit(format!("every restart collapsed a component with G = {g}")))
}

/// Mixture part: `2 logL(theta_hat) - d_lp ln(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpFit {
    pub mixture: MixtureFit,
    pub d_lp: usize,
    pub value: f64,
}

pub fn bic_lp(z_hat: &Positions<f64>, g: usize) -> Result<LpFit> {
    let mixture = fit_mixture(z_hat, g)?;
    let d_lp = mixture_dof(g, z_hat.d());
    let value = 2.0 * mixture.loglik - d_lp as f64 * (z_hat.n() as f64).ln();
    Ok(LpFit { mixture, d_lp, value })
}

/// One row of the baseline report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicEntry {
    pub g: usize,
    pub bic_lr: f64,
    pub bic_lp: f64,
    /// `bic_lr + bic_lp` (larger is better).
    pub total: f64,
    /// `-total` (smaller is better).
    pub bic: f64,
    pub beta_hat: f64,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<f64>,
}

/// A `G` left out of the comparison because no mixture fit survived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedFit {
    pub g: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicReport {
    pub entries: Vec<BicEntry>,
    /// Values of `G` whose every EM restart collapsed a component.
    #[serde(default)]
    pub skipped: Vec<SkippedFit>,
    pub selected_g: usize,
    pub n_lr: usize,
    pub n_lr_rule: String,
    pub position_estimate: String,
    pub z_hat: Vec<Vec<f64>>,
}

/// Index of the smallest `bic`; ties go to the earlier (smaller `G`) entry.
pub fn select_model(entries: &[BicEntry]) -> Option<usize> {
    entries
        .iter()
        .enumerate()
        .fold(None::<usize>, |best, (k, e)| match best {
            Some(b) if entries[b].bic <= e.bic => Some(b),
            _ => Some(k),
        })
        .map(|k| entries[k].g)
}

/// Baseline over `G = 1..=g_cap` conditional on one position estimate.
pub fn bic_baseline(net: &Network, z_hat: &Positions<f64>, g_cap: usize) -> Result<BicReport> {
    if g_cap == 0 {
        return Err(invalid("g_cap must be at least 1"));
    }
    let lr = bic_lr(net, z_hat)?;
    let mut entries = Vec::with_capacity(g_cap);
    let mut skipped = Vec::new();
    for g in 1..=g_cap.min(z_hat.n()) {
        let lp = match bic_lp(z_hat, g) {
            Ok(lp) => lp,
            Err(Error::DegenerateFit(reason)) => {
                skipped.push(SkippedFit { g, reason });
                continue;
            }
            Err(e) => return Err(e),
        };
        let total = lr.value + lp.value;
        entries.push(BicEntry {
            g,
            bic_lr: lr.value,
            bic_lp: lp.value,
            total,
            bic: -total,
            beta_hat: lr.beta_hat,
            weights: lp.mixture.weights,
            means: lp.mixture.means,
            variances: lp.mixture.variances,
        });
    }
    let Some(selected_g) = select_model(&entries) else {
        return Err(Error::DegenerateFit("no value of G admits a mixture fit".into()));
    };
    Ok(BicReport {
        selected_g,
        entries,
        skipped,
        n_lr: lr.n_lr,
        n_lr_rule: "tie count".into(),
        position_estimate: "supplied by the caller".into(),
        z_hat: z_hat.rows().map(<[f64]>::to_vec).collect(),
    })
}
