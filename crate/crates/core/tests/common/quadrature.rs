//! Numerical integration of the full (uncollapsed) posterior for d = 1.
//!
//! Cluster means and precisions are integrated by nested trapezoid rules
//! (precision on a log scale, mean on a window scaled to the precision); the
//! mixture weights use the exact Dirichlet-multinomial identity. Nothing here
//! calls into the model module.

use lpcm::{Hyperparams, Network};
use statrs::function::gamma::ln_gamma;

const LOG_TAU_RANGE: (f64, f64) = (-20.0, 10.0);
const TAU_NODES: usize = 1200;
const MU_NODES: usize = 201;
const MU_HALF_WIDTH_SD: f64 = 14.0;

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln` of the trapezoid rule with node spacing `h` applied to `exp(logs)`.
fn log_trapezoid(logs: &mut [f64], h: f64) -> f64 {
    let last = logs.len() - 1;
    logs[0] += 0.5f64.ln();
    logs[last] += 0.5f64.ln();
    log_sum_exp(logs) + h.ln()
}

fn log_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - (x - mean) * (x - mean) / (2.0 * var)
}

/// `ln` of the integral over `(mu, tau)` of prior times likelihood of the
/// positions `z` of one cluster.
pub fn log_cluster_integral(z: &[f64], hp: &Hyperparams<f64>) -> f64 {
    let (lo, hi) = LOG_TAU_RANGE;
    let hu = (hi - lo) / (TAU_NODES - 1) as f64;
    let shape = hp.alpha / 2.0;
    let rate = hp.delta / 2.0;
    let sum: f64 = z.iter().sum();
    let prec = z.len() as f64 + 1.0 / hp.omega2;
    let mut outer = Vec::with_capacity(TAU_NODES);
    for a in 0..TAU_NODES {
        let u = lo + a as f64 * hu;
        let tau = u.exp();
        // Gamma(shape, rate) density in tau, times the Jacobian tau.
        let log_gamma = shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * u - rate * tau + u;
        let centre = sum / prec;
        let half = MU_HALF_WIDTH_SD / (tau * prec).sqrt();
        let hm = 2.0 * half / (MU_NODES - 1) as f64;
        let mut inner: Vec<f64> = (0..MU_NODES)
            .map(|b| {
                let mu = centre - half + b as f64 * hm;
                log_normal(mu, 0.0, hp.omega2 / tau) + z.iter().map(|&x| log_normal(x, mu, 1.0 / tau)).sum::<f64>()
            })
            .collect();
        outer.push(log_gamma + log_trapezoid(&mut inner, hm));
    }
    log_trapezoid(&mut outer, hu)
}

pub fn log_likelihood(net: &Network, z: &[f64], beta: f64) -> f64 {
    let n = net.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j || (!net.directed() && j < i) {
                continue;
            }
            let eta = beta - (z[i] - z[j]).abs();
            total += if net.tie(i, j) { eta } else { 0.0 } - (1.0 + eta.exp()).ln();
        }
    }
    total
}

/// `ln` of the full posterior (up to a constant shared by all states of the
/// same network and hyperparameters) with weights, means and precisions
/// integrated out.
pub fn log_integrated_posterior(net: &Network, z: &[f64], beta: f64, alloc: &[usize], g: usize, hp: &Hyperparams<f64>) -> f64 {
    let n = z.len();
    let nu = hp.nu;
    let mut counts = vec![0usize; g];
    for &k in alloc {
        counts[k] += 1;
    }
    let dirichlet_multinomial = ln_gamma(g as f64 * nu) - g as f64 * ln_gamma(nu)
        + counts.iter().map(|&c| ln_gamma(c as f64 + nu)).sum::<f64>()
        - ln_gamma(n as f64 + g as f64 * nu);
    let poisson = -1.0 - ln_gamma(g as f64 + 1.0);
    let clusters: f64 = (0..g)
        .map(|k| {
            let zk: Vec<f64> = (0..n).filter(|&i| alloc[i] == k).map(|i| z[i]).collect();
            log_cluster_integral(&zk, hp)
        })
        .sum();
    log_likelihood(net, z, beta) + log_normal(beta, hp.xi, hp.psi) + poisson + dirichlet_multinomial + clusters
}

/// Largest relative error of posterior ratios between random states: for each
/// `n`, 20 random `(Z, beta, K)` states with `G` in `{1, 2}` are compared
/// against the first state of that `n`.
pub fn collapsing_max_rel_error(seed: u64) -> f64 {
    use lpcm::model::log_collapsed_posterior;
    use lpcm::{ChainState, Positions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.5).unwrap();
    let mut worst: f64 = 0.0;
    for (n, directed, edges) in [(3, false, vec![(0, 1), (1, 2)]), (4, true, vec![(0, 1), (1, 0), (2, 3), (3, 1)])] {
        let net = Network::from_edges(n, directed, &edges).unwrap();
        let hp = Hyperparams::defaults_for(n).with_dim(1).with_g_max(2);
        let mut diffs = Vec::new();
        for _ in 0..20 {
            let z: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            let beta = normal.sample(&mut rng);
            let g = rng.random_range(1..=2);
            let alloc: Vec<usize> = (0..n).map(|_| rng.random_range(0..g)).collect();
            let state = ChainState::new(Positions::from_vec(n, 1, z.clone()).unwrap(), beta, alloc.clone(), g).unwrap();
            let collapsed = log_collapsed_posterior(&state, &net, &hp).unwrap();
            diffs.push(collapsed - log_integrated_posterior(&net, &z, beta, &alloc, g, &hp));
        }
        for d in &diffs[1..] {
            worst = worst.max(((d - diffs[0]).exp() - 1.0).abs());
        }
    }
    worst
}
