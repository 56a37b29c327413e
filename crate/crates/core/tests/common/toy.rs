//! Exact transition matrices of every allocation move on a tiny state space
//! (n = 3 actors, d = 1, positions and intercept frozen, G <= 3).
//!
//! Proposal probabilities are enumerated here from first principles; only
//! the proposal log-ratios come from the library.

use std::collections::HashMap;

use lpcm::model::{compute_stats, log_cluster_term, log_clustering_terms, ClusterStats};
use lpcm::sampler::{absorb_log_q_ratio, eject_log_q_ratio, move1_log_q_ratio, move2_log_q_ratio};
use lpcm::{Hyperparams, Positions};
use statrs::function::gamma::ln_gamma;

pub type Kernel = Vec<Vec<f64>>;

pub struct Toy {
    pub z: Positions<f64>,
    pub hp: Hyperparams<f64>,
    pub states: Vec<(usize, Vec<usize>)>,
    pub index: HashMap<(usize, Vec<usize>), usize>,
    pub log_target: Vec<f64>,
}

fn all_allocs(n: usize, g: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|a: Vec<usize>| (0..g).map(move |k| [a.clone(), vec![k]].concat())).collect();
    }
    out
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let rest: Vec<usize> = items.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &x)| x).collect();
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

fn accept(log_alpha: f64) -> f64 {
    log_alpha.exp().min(1.0)
}

/// Which ejection proposal ratio to use when building the trans-model kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EjectRatio {
    Library,
    /// The library ratio multiplied by 2 (a doubled Beta normaliser).
    Doubled,
}

impl Toy {
    pub fn new(z: &[f64], hp: Hyperparams<f64>) -> Self {
        let n = z.len();
        let z = Positions::from_vec(n, 1, z.to_vec()).unwrap();
        let mut states = Vec::new();
        for g in 1..=hp.g_max {
            for a in all_allocs(n, g) {
                states.push((g, a));
            }
        }
        let index = states.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();
        let log_target = states.iter().map(|(g, a)| log_clustering_terms(&compute_stats(&z, a, *g), &hp).unwrap()).collect();
        Self { z, hp, states, index, log_target }
    }

    pub fn default_space() -> Self {
        Self::new(&[-1.0, 0.0, 1.5], Hyperparams::defaults_for(3).with_dim(1).with_g_max(3))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn idx(&self, g: usize, alloc: &[usize]) -> usize {
        self.index[&(g, alloc.to_vec())]
    }

    pub fn pi(&self) -> Vec<f64> {
        let m = self.log_target.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.log_target.iter().map(|l| (l - m).exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    fn zero(&self) -> Kernel {
        vec![vec![0.0; self.len()]; self.len()]
    }

    fn members(alloc: &[usize], labels: &[usize]) -> Vec<usize> {
        (0..alloc.len()).filter(|&i| labels.contains(&alloc[i])).collect()
    }

    /// One Gibbs pass in ascending actor order; full conditionals are taken
    /// straight from the enumerated target.
    pub fn gibbs_kernel(&self) -> Kernel {
        let n = self.z.n();
        let mut total = identity(self.len());
        for i in 0..n {
            let mut p = self.zero();
            for (s, (g, a)) in self.states.iter().enumerate() {
                let targets: Vec<usize> = (0..*g)
                    .map(|k| {
                        let mut b = a.clone();
                        b[i] = k;
                        self.idx(*g, &b)
                    })
                    .collect();
                let m = targets.iter().map(|&t| self.log_target[t]).fold(f64::NEG_INFINITY, f64::max);
                let norm: f64 = targets.iter().map(|&t| (self.log_target[t] - m).exp()).sum();
                for &t in &targets {
                    p[s][t] += (self.log_target[t] - m).exp() / norm;
                }
            }
            total = matmul(&total, &p);
        }
        total
    }

    fn for_pairs(&self, g: usize, mut f: impl FnMut(usize, usize, f64)) {
        for j1 in 0..g {
            for j2 in 0..g {
                if j1 != j2 {
                    f(j1, j2, 1.0 / (g * (g - 1)) as f64);
                }
            }
        }
    }

    pub fn move1_kernel(&self, with_split_correction: bool) -> Kernel {
        let mut p = self.zero();
        for (s, (g, a)) in self.states.iter().enumerate() {
            if *g < 2 {
                p[s][s] = 1.0;
                continue;
            }
            let mut row = vec![0.0; self.len()];
            self.for_pairs(*g, |j1, j2, pq| {
                let m = Self::members(a, &[j1, j2]);
                let n1 = m.iter().filter(|&&i| a[i] == j1).count();
                for mask in 0..(1usize << m.len()) {
                    let mut b = a.clone();
                    for (t, &i) in m.iter().enumerate() {
                        b[i] = if mask >> t & 1 == 1 { j1 } else { j2 };
                    }
                    let k1 = mask.count_ones() as usize;
                    let k2 = m.len() - k1;
                    let q = factorial(k1) * factorial(k2) / factorial(m.len() + 1);
                    let lq = if with_split_correction { move1_log_q_ratio::<f64>(n1, m.len() - n1, k1, k2) } else { 0.0 };
                    self.mh_row(&mut row, s, self.idx(*g, &b), pq * q, lq);
                }
            });
            p[s] = row;
        }
        p
    }

    /// Adds a Metropolis-Hastings transition of proposal probability `q`.
    fn mh_row(&self, row: &mut [f64], from: usize, to: usize, q: f64, log_q_ratio: f64) {
        let a = accept(self.log_target[to] - self.log_target[from] + log_q_ratio);
        row[to] += q * a;
        row[from] += q * (1.0 - a);
    }

    pub fn move2_kernel(&self) -> Kernel {
        let mut p = self.zero();
        for (s, (g, a)) in self.states.iter().enumerate() {
            if *g < 2 {
                p[s][s] = 1.0;
                continue;
            }
            let mut row = vec![0.0; self.len()];
            self.for_pairs(*g, |j1, j2, pq| {
                let from = Self::members(a, &[j1]);
                let n1 = from.len();
                let n2 = Self::members(a, &[j2]).len();
                if n1 == 0 {
                    row[s] += pq;
                    return;
                }
                for mask in 1..(1usize << n1) {
                    let m = mask.count_ones() as usize;
                    let mut b = a.clone();
                    for (t, &i) in from.iter().enumerate() {
                        if mask >> t & 1 == 1 {
                            b[i] = j2;
                        }
                    }
                    let q = 1.0 / n1 as f64 * factorial(m) * factorial(n1 - m) / factorial(n1);
                    self.mh_row(&mut row, s, self.idx(*g, &b), pq * q, move2_log_q_ratio::<f64>(n1, n2, m));
                }
            });
            p[s] = row;
        }
        p
    }

    /// Sequential reallocation probabilities, computed from the model's
    /// collapsed cluster term.
    fn path_prob(&self, order: &[usize], to_first: &[bool]) -> f64 {
        let (mut a, mut b) = (ClusterStats::empty(1), ClusterStats::empty(1));
        let mut prob = 1.0;
        for (&i, &first) in order.iter().zip(to_first) {
            let zi = self.z.row(i);
            let w = |st: &ClusterStats<f64>| {
                let mut with = st.clone();
                with.add(zi);
                (log_cluster_term(&with, &self.hp).unwrap() - log_cluster_term(st, &self.hp).unwrap()
                    + (st.count as f64 + self.hp.nu).ln())
                .exp()
            };
            let (wa, wb) = (w(&a), w(&b));
            if first {
                prob *= wa / (wa + wb);
                a.add(zi);
            } else {
                prob *= wb / (wa + wb);
                b.add(zi);
            }
        }
        prob
    }

    pub fn move3_kernel(&self) -> Kernel {
        let mut p = self.zero();
        for (s, (g, a)) in self.states.iter().enumerate() {
            if *g < 2 {
                p[s][s] = 1.0;
                continue;
            }
            let mut row = vec![0.0; self.len()];
            self.for_pairs(*g, |j1, j2, pq| {
                let m = Self::members(a, &[j1, j2]);
                let orders = permutations(&m);
                for order in &orders {
                    let orig: Vec<bool> = order.iter().map(|&i| a[i] == j1).collect();
                    let rev = self.path_prob(order, &orig);
                    for mask in 0..(1usize << m.len()) {
                        let to_first: Vec<bool> = (0..m.len()).map(|t| mask >> t & 1 == 1).collect();
                        let fwd = self.path_prob(order, &to_first);
                        let mut b = a.clone();
                        for (&i, &f) in order.iter().zip(&to_first) {
                            b[i] = if f { j1 } else { j2 };
                        }
                        let q = pq / orders.len() as f64 * fwd;
                        self.mh_row(&mut row, s, self.idx(*g, &b), q, rev.ln() - fwd.ln());
                    }
                }
            });
            p[s] = row;
        }
        p
    }

    fn log_beta_split(&self, k1: usize, k2: usize) -> f64 {
        let a = self.hp.a_eject;
        ln_gamma(a + k1 as f64) + ln_gamma(a + k2 as f64) - ln_gamma(2.0 * a + (k1 + k2) as f64) + ln_gamma(2.0 * a)
            - 2.0 * ln_gamma(a)
    }

    pub fn trans_kernel(&self, ratio: EjectRatio) -> Kernel {
        let hp = &self.hp;
        let extra = match ratio {
            EjectRatio::Library => 0.0,
            EjectRatio::Doubled => 2f64.ln(),
        };
        let mut p = self.zero();
        for (s, (g, a)) in self.states.iter().enumerate() {
            let g = *g;
            let pe = hp.eject_probability(g);
            let mut row = vec![0.0; self.len()];
            if pe > 0.0 {
                for j1 in 0..g {
                    let m = Self::members(a, &[j1]);
                    for slot in 0..=g {
                        for mask in 0..(1usize << m.len()) {
                            let mut b = a.clone();
                            for (t, &i) in m.iter().enumerate() {
                                if mask >> t & 1 == 0 {
                                    b[i] = g;
                                }
                            }
                            // The new component takes `slot`; its old holder becomes last.
                            for k in &mut b {
                                if *k == slot {
                                    *k = g;
                                } else if *k == g {
                                    *k = slot;
                                }
                            }
                            let k1 = mask.count_ones() as usize;
                            let k2 = m.len() - k1;
                            let q = pe / (g * (g + 1)) as f64 * self.log_beta_split(k1, k2).exp();
                            let lq = eject_log_q_ratio(g, k1, k2, hp) + extra;
                            self.mh_row(&mut row, s, self.idx(g + 1, &b), q, lq);
                        }
                    }
                }
            }
            if pe < 1.0 {
                self.for_pairs(g, |j1, j2, pq| {
                    let n1 = Self::members(a, &[j1]).len();
                    let n2 = Self::members(a, &[j2]).len();
                    let last = g - 1;
                    let b: Vec<usize> = a
                        .iter()
                        .map(|&k| {
                            let k = if k == j2 { j1 } else { k };
                            if k == last && j2 != last { j2 } else { k }
                        })
                        .collect();
                    let lq = absorb_log_q_ratio(g, n1, n2, hp) - extra;
                    self.mh_row(&mut row, s, self.idx(g - 1, &b), (1.0 - pe) * pq, lq);
                });
            }
            p[s] = row;
        }
        p
    }
}

pub fn identity(n: usize) -> Kernel {
    (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect()
}

pub fn matmul(a: &Kernel, b: &Kernel) -> Kernel {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] != 0.0 {
                for j in 0..n {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

/// Largest deviation of a row sum from one.
pub fn row_sum_error(p: &Kernel) -> f64 {
    p.iter().map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
}

/// Total variation distance between `pi P` and `pi`.
pub fn invariance_tv(pi: &[f64], p: &Kernel) -> f64 {
    let n = pi.len();
    (0..n).map(|j| ((0..n).map(|i| pi[i] * p[i][j]).sum::<f64>() - pi[j]).abs()).sum::<f64>() * 0.5
}
