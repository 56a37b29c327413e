//! Brute-force and round-trip checks of the post-processing steps.

use lpcm::model::{log_collapsed_posterior_parts, log_likelihood};
use lpcm::postprocess::{align_draws, procrustes_align, solve_assignment};
use lpcm::sampler::run_chain;
use lpcm::{Hyperparams, Network, Positions, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::toy::permutations;

/// Cost matrices on which the solver disagrees with exhaustive search.
pub fn assignment_mismatches(seed: u64, cases: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for size in [4usize, 5] {
        let perms = permutations(&(0..size).collect::<Vec<_>>());
        for _ in 0..cases {
            let cost: Vec<Vec<i64>> = (0..size).map(|_| (0..size).map(|_| rng.random_range(-20..40)).collect()).collect();
            let brute = perms.iter().map(|p| (0..size).map(|i| cost[i][p[i]]).sum::<i64>()).min().unwrap();
            let (perm, total) = solve_assignment(&cost).unwrap();
            let recomputed: i64 = (0..size).map(|i| cost[i][perm[i]]).sum();
            if total != brute || recomputed != brute {
                bad += 1;
            }
        }
    }
    bad
}

/// Largest Frobenius error of recovering configurations after random rigid
/// motions (rotation, optional reflection, translation) in two dimensions.
pub fn procrustes_max_error(seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 2.0).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = rng.random_range(3..15);
        let reference: Vec<Vec<f64>> = (0..n).map(|_| vec![normal.sample(&mut rng), normal.sample(&mut rng)]).collect();
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (s, c) = angle.sin_cos();
        let flip = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let (tx, ty) = (normal.sample(&mut rng) * 5.0, normal.sample(&mut rng) * 5.0);
        let moved: Vec<Vec<f64>> =
            reference.iter().map(|r| vec![c * r[0] - s * flip * r[1] + tx, s * r[0] + c * flip * r[1] + ty]).collect();
        let reference = Positions::from_rows(&reference).unwrap();
        let aligned = procrustes_align(&Positions::from_rows(&moved).unwrap(), &reference).unwrap();
        let err: f64 = aligned
            .rows()
            .zip(reference.rows())
            .map(|(a, r)| (0..2).map(|k| (a[k] - r[k]).powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err);
    }
    worst
}

/// Outcome of post-processing a short chain.
pub struct RoundTrip {
    /// Largest absolute log-likelihood change caused by alignment.
    pub loglik_change: f64,
    /// Whether every relabelled draw has bit-identical log posterior.
    pub logpost_exact: bool,
}

pub fn postprocess_round_trip(seed: u64) -> RoundTrip {
    let edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3), (6, 7), (7, 8), (8, 6), (5, 6)];
    let net = Network::from_edges(9, false, &edges).unwrap();
    let hp = Hyperparams::defaults_for(9).with_g_max(4);
    let out = run_chain(&net, &hp, &RunConfig::new(3000, 500, 5, seed)).unwrap();
    let aligned = align_draws(&out.draws).unwrap();
    let mut loglik_change: f64 = 0.0;
    let mut logpost_exact = true;
    for (k, d) in out.draws.iter().enumerate() {
        let before = log_likelihood(&net, &d.z, d.beta).unwrap();
        let after = log_likelihood(&net, &aligned.z_aligned[k], d.beta).unwrap();
        loglik_change = loglik_change.max((before - after).abs());
        let a = log_collapsed_posterior_parts(&net, &d.z, d.beta, &d.alloc, d.g, &hp).unwrap();
        let b = log_collapsed_posterior_parts(&net, &d.z, d.beta, &aligned.k_relabel[k], d.g, &hp).unwrap();
        logpost_exact &= a.to_bits() == b.to_bits();
    }
    RoundTrip { loglik_change, logpost_exact }
}
