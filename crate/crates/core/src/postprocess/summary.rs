use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::procrustes::procrustes_align;
use super::relabel::relabel;
use crate::error::{invalid, Result};
use crate::positions::Positions;
use crate::sampler::{DrawRecord, MoveCounters};
use crate::scalar::Real;

/// Version of the `summary.json` layout.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Values of `G` with less posterior mass than this get no per-`G` summary.
pub const MIN_GROUP_MASS: f64 = 0.01;

/// Empirical frequency of each `G` among the draws.
pub fn model_probabilities<T: Real>(draws: &[DrawRecord<T>]) -> BTreeMap<usize, f64> {
    let mut counts = BTreeMap::new();
    for d in draws {
        *counts.entry(d.g).or_insert(0usize) += 1;
    }
    let total = draws.len() as f64;
    counts.into_iter().map(|(g, c)| (g, c as f64 / total)).collect()
}

/// Index of the draw with the highest log-likelihood; ties go to the earliest.
pub fn reference_index<T: Real>(draws: &[DrawRecord<T>]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, d) in draws.iter().enumerate() {
        if best.is_none_or(|b| d.loglik > draws[b].loglik) {
            best = Some(k);
        }
    }
    best
}

/// Draws after Procrustes alignment and per-`G` relabelling.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedDraws {
    /// Index of the reference (highest log-likelihood) draw.
    pub reference: usize,
    pub z_aligned: Vec<Positions<f64>>,
    /// Relabelled 0-based allocations.
    pub k_relabel: Vec<Vec<usize>>,
    /// Per `G`: number of relabelling rounds used.
    pub rounds: BTreeMap<usize, usize>,
}

/// Aligns every draw to the highest-likelihood draw and relabels the draws
/// of each `G` against that group's highest-likelihood draw.
pub fn align_draws<T: Real>(draws: &[DrawRecord<T>]) -> Result<AlignedDraws> {
    let reference = reference_index(draws).ok_or_else(|| invalid("no draws to align"))?;
    let ref_z = &draws[reference].z;
    let z_aligned = if ref_z.n() >= 2 {
        draws.iter().map(|d| procrustes_align(&d.z, ref_z)).collect::<Result<Vec<_>>>()?
    } else {
        draws.iter().map(|d| d.z.map(|x| x.as_f64())).collect()
    };
    let mut k_relabel: Vec<Vec<usize>> = draws.iter().map(|d| d.alloc.clone()).collect();
    let mut rounds = BTreeMap::new();
    for g in model_probabilities(draws).into_keys() {
        let idx: Vec<usize> = (0..draws.len()).filter(|&k| draws[k].g == g).collect();
        let group: Vec<DrawRecord<T>> = idx.iter().map(|&k| draws[k].clone()).collect();
        let group_ref = idx[reference_index(&group).expect("group is non-empty")];
        let allocs: Vec<Vec<usize>> = idx.iter().map(|&k| draws[k].alloc.clone()).collect();
        let r = relabel(&allocs, g, &draws[group_ref].alloc)?;
        for (&k, a) in idx.iter().zip(r.allocs) {
            k_relabel[k] = a;
        }
        rounds.insert(g, r.rounds);
    }
    Ok(AlignedDraws { reference, z_aligned, k_relabel, rounds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceEntry {
    pub attempted: u64,
    pub accepted: u64,
    pub rate: Option<f64>,
    /// Accepted proposals that changed the clustering, not just the labels.
    pub changed: u64,
    pub change_rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub sd: f64,
}

impl MomentSummary {
    fn of(xs: impl Iterator<Item = f64> + Clone) -> Self {
        let n = xs.clone().count() as f64;
        let mean = xs.clone().sum::<f64>() / n;
        let sd = if n > 1.0 { (xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        Self { mean, sd }
    }
}

/// Posterior summary conditional on one value of `G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub g: usize,
    pub probability: f64,
    pub draws: usize,
    /// Sweep index and chain of this group's relabelling reference.
    pub reference_iter: usize,
    pub reference_chain: usize,
    pub relabel_rounds: usize,
    /// Posterior mean of each actor's aligned position.
    pub mean_positions: Vec<Vec<f64>>,
    /// `membership[i][g]`: fraction of draws placing actor `i` in cluster `g + 1`.
    pub membership: Vec<Vec<f64>>,
    /// Most probable cluster of each actor, 1-based.
    pub modal_allocation: Vec<usize>,
    pub beta: MomentSummary,
}

/// Everything reported about a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub draws: usize,
    pub model_probabilities: BTreeMap<usize, f64>,
    pub modal_g: usize,
    pub acceptance: BTreeMap<String, AcceptanceEntry>,
    pub beta: MomentSummary,
    pub reference_iter: usize,
    pub reference_chain: usize,
    pub groups: Vec<GroupSummary>,
}

/// Aligns, relabels and summarises the draws of a run.
pub fn summarize<T: Real>(draws: &[DrawRecord<T>], counters: &MoveCounters) -> Result<RunSummary> {
    let aligned = align_draws(draws)?;
    let probs = model_probabilities(draws);
    let modal_g = probs
        .iter()
        .fold(None::<(usize, f64)>, |best, (&g, &p)| match best {
            Some((_, bp)) if bp >= p => best,
            _ => Some((g, p)),
        })
        .map(|(g, _)| g)
        .expect("draws are non-empty");
    let (n, d) = (draws[0].z.n(), draws[0].z.d());
    let mut groups = Vec::new();
    for (&g, &p) in &probs {
        if p < MIN_GROUP_MASS {
            continue;
        }
        let idx: Vec<usize> = (0..draws.len()).filter(|&k| draws[k].g == g).collect();
        let m = idx.len() as f64;
        let mut mean_positions = vec![vec![0.0; d]; n];
        let mut membership = vec![vec![0.0; g]; n];
        for &k in &idx {
            for i in 0..n {
                for (acc, &x) in mean_positions[i].iter_mut().zip(aligned.z_aligned[k].row(i)) {
                    *acc += x / m;
                }
                membership[i][aligned.k_relabel[k][i]] += 1.0 / m;
            }
        }
        let modal_allocation = membership
            .iter()
            .map(|row| {
                let mut best = 0;
                for (h, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = h;
                    }
                }
                best + 1
            })
            .collect();
        let group_draws: Vec<&DrawRecord<T>> = idx.iter().map(|&k| &draws[k]).collect();
        let best = idx
            .iter()
            .copied()
            .reduce(|a, b| if draws[b].loglik > draws[a].loglik { b } else { a })
            .expect("group is non-empty");
        groups.push(GroupSummary {
            g,
            probability: p,
            draws: idx.len(),
            reference_iter: draws[best].iter,
            reference_chain: draws[best].chain,
            relabel_rounds: aligned.rounds[&g],
            mean_positions,
            membership,
            modal_allocation,
            beta: MomentSummary::of(group_draws.iter().map(|d| d.beta.as_f64())),
        });
    }
    let acceptance = counters
        .entries()
        .into_iter()
        .map(|(name, t)| {
            (name.to_string(), AcceptanceEntry {
                    attempted: t.attempted,
                    accepted: t.accepted,
                    rate: t.rate(),
                    changed: t.changed,
                    change_rate: t.change_rate(),
                })
        })
        .collect();
    let r = &draws[aligned.reference];
    Ok(RunSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        n,
        d,
        draws: draws.len(),
        model_probabilities: probs,
        modal_g,
        acceptance,
        beta: MomentSummary::of(draws.iter().map(|d| d.beta.as_f64())),
        reference_iter: r.iter,
        reference_chain: r.chain,
        groups,
    })
}
