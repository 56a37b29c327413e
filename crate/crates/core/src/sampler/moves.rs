use rand::seq::SliceRandom;
use rand::Rng;

use super::ratios::{
    absorb_log_q_ratio, eject_log_q_ratio, gibbs_log_weights, move1_log_q_ratio, move2_log_q_ratio, pair_log_target,
    two_way_log_probs,
};
use super::MoveCounters;
use crate::error::{Error, Result};
use crate::hyper::Hyperparams;
use crate::model::{
    actor_log_likelihood_pair, log_allocation_terms, log_beta_prior, log_cluster_term, log_cluster_term_parts,
    log_likelihood_pair, ClusterStats,
};
use crate::network::Network;
use crate::positions::sq_norm;
use crate::scalar::Real;
use crate::state::ChainState;

/// Draws one uniform and accepts when `ln u < log_alpha`.
fn accept<T: Real, R: Rng + ?Sized>(rng: &mut R, log_alpha: T) -> Result<bool> {
    if log_alpha.is_nan() {
        return Err(Error::NumericDomain("acceptance ratio is NaN".into()));
    }
    Ok(T::sample_open01(rng).ln() < log_alpha)
}

/// Two distinct labels chosen uniformly as an ordered pair.
fn distinct_pair<R: Rng + ?Sized>(rng: &mut R, g: usize) -> (usize, usize) {
    let j1 = rng.random_range(0..g);
    let mut j2 = rng.random_range(0..g - 1);
    if j2 >= j1 {
        j2 += 1;
    }
    (j1, j2)
}

/// Whether reassigning the members of two components changes the partition:
/// it does not when every member keeps its side or every member swaps.
fn split_changed(old_first: impl Iterator<Item = bool>, new_first: impl Iterator<Item = bool>) -> bool {
    let (mut same, mut swapped) = (true, true);
    for (a, b) in old_first.zip(new_first) {
        same &= a == b;
        swapped &= a != b;
    }
    !(same || swapped)
}

fn stats_of<T: Real>(state: &ChainState<T>, members: impl IntoIterator<Item = usize>) -> ClusterStats<T> {
    let mut st = ClusterStats::empty(state.z.d());
    for i in members {
        st.add(state.z.row(i));
    }
    st
}

/// Random-walk Metropolis update of every position in ascending actor order.
///
/// Consumes `d` normals and one uniform per actor.
pub fn update_positions<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    net: &Network,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    let d = state.z.d();
    let sd = hp.sigma_z2.sqrt();
    let mut proposal = vec![T::zero(); d];
    for i in 0..state.n() {
        let zi = state.z.row(i);
        for (p, &x) in proposal.iter_mut().zip(zi) {
            *p = x + sd * T::sample_std_normal(rng);
        }
        let (l_old, l_new) = actor_log_likelihood_pair(net, &state.z, i, &proposal, state.beta);
        let st = &state.stats[state.alloc[i]];
        let mut sum_norm2 = T::zero();
        for ((&s, &x), &y) in st.sum.iter().zip(zi).zip(&proposal) {
            let t = s - x + y;
            sum_norm2 += t * t;
        }
        let sq_new = st.sq - sq_norm(zi) + sq_norm(&proposal);
        let term_old = log_cluster_term(st, hp)?;
        let term_new = log_cluster_term_parts(st.count, sum_norm2, sq_new, hp)?;
        let ok = accept(rng, l_new - l_old + term_new - term_old)?;
        counters.z.record(ok);
        if ok {
            let k = state.alloc[i];
            let st = &mut state.stats[k];
            for ((s, &x), &y) in st.sum.iter_mut().zip(state.z.row(i)).zip(&proposal) {
                *s += y - x;
            }
            st.sq = sq_new;
            state.z.row_mut(i).copy_from_slice(&proposal);
        }
    }
    Ok(())
}

/// Random-walk Metropolis update of the intercept. Consumes one normal and one uniform.
pub fn update_intercept<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    net: &Network,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    let proposal = state.beta + hp.sigma_beta2.sqrt() * T::sample_std_normal(rng);
    let (l_old, l_new) = log_likelihood_pair(net, &state.z, state.beta, proposal);
    let log_alpha = l_new - l_old + log_beta_prior(proposal, hp) - log_beta_prior(state.beta, hp);
    let ok = accept(rng, log_alpha)?;
    counters.beta.record(ok);
    if ok {
        state.beta = proposal;
    }
    Ok(())
}

/// Gibbs pass over the allocations in ascending actor order.
///
/// Consumes one uniform per actor when `G > 1` and none otherwise.
pub fn gibbs_allocations<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    if state.g == 1 {
        counters.gibbs.attempted += state.n() as u64;
        return Ok(());
    }
    let mut probs = vec![T::zero(); state.g];
    for i in 0..state.n() {
        let current = state.alloc[i];
        let mut removed = state.stats[current].clone();
        removed.remove(state.z.row(i))?;
        let saved = std::mem::replace(&mut state.stats[current], removed);
        let logw = gibbs_log_weights(&state.stats, state.z.row(i), hp)?;
        let top = logw.iter().copied().fold(T::neg_infinity(), T::max);
        let mut total = T::zero();
        for (p, &w) in probs.iter_mut().zip(&logw) {
            *p = (w - top).exp();
            total += *p;
        }
        let u = T::sample_open01(rng) * total;
        let mut chosen = state.g - 1;
        let mut acc = T::zero();
        for (g, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = g;
                break;
            }
        }
        // A lone actor moving to an empty component only relabels.
        let relabel_only = saved.count == 1 && state.stats[chosen].count == 0;
        if chosen == current {
            state.stats[current] = saved;
        } else {
            state.stats[chosen].add(state.z.row(i));
            state.alloc[i] = chosen;
        }
        counters.gibbs.record_change(chosen != current, !relabel_only);
    }
    Ok(())
}

/// Move 1: pool two components and reassign every member to the first with a
/// common probability `p ~ Beta(1, 1)`.
///
/// Skipped (and not counted) when `G < 2`. Consumes two label draws, one beta
/// variate, one uniform per member in ascending actor order and one uniform
/// for the decision.
pub fn move1<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    if state.g < 2 {
        return Ok(());
    }
    let (j1, j2) = distinct_pair(rng, state.g);
    let p = T::sample_beta(rng, T::one(), T::one());
    let members: Vec<usize> = (0..state.n()).filter(|&i| state.alloc[i] == j1 || state.alloc[i] == j2).collect();
    let to_first: Vec<bool> = members.iter().map(|_| T::sample_open01(rng) < p).collect();
    let old1 = stats_of(state, members.iter().copied().filter(|&i| state.alloc[i] == j1));
    let old2 = stats_of(state, members.iter().copied().filter(|&i| state.alloc[i] == j2));
    let new1 = stats_of(state, members.iter().zip(&to_first).filter(|(_, &f)| f).map(|(&i, _)| i));
    let new2 = stats_of(state, members.iter().zip(&to_first).filter(|(_, &f)| !f).map(|(&i, _)| i));
    let log_alpha = pair_log_target(&new1, &new2, hp)? - pair_log_target(&old1, &old2, hp)?
        + move1_log_q_ratio::<T>(old1.count, old2.count, new1.count, new2.count);
    let ok = accept(rng, log_alpha)?;
    let changed = split_changed(members.iter().map(|&i| state.alloc[i] == j1), to_first.iter().copied());
    counters.move1.record_change(ok, changed);
    if ok {
        for (&i, &f) in members.iter().zip(&to_first) {
            state.alloc[i] = if f { j1 } else { j2 };
        }
        state.stats[j1] = new1;
        state.stats[j2] = new2;
    }
    Ok(())
}

/// Move 2: move `m ~ U{1..n_j1}` uniformly chosen members of `j1` to `j2`.
///
/// Skipped (and not counted) when `G < 2`; counted and rejected when `j1` is
/// empty. Consumes two label draws, `m`, `m` index draws of a partial
/// Fisher-Yates shuffle of `j1`'s members, and one uniform.
pub fn move2<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    if state.g < 2 {
        return Ok(());
    }
    let (j1, j2) = distinct_pair(rng, state.g);
    let mut from = state.members(j1);
    let n1 = from.len();
    if n1 == 0 {
        counters.move2.record(false);
        return Ok(());
    }
    let m = rng.random_range(1..=n1);
    for t in 0..m {
        let r = rng.random_range(t..n1);
        from.swap(t, r);
    }
    let moved = &from[..m];
    let to = state.members(j2);
    let n2 = to.len();
    let old1 = stats_of(state, from.iter().copied());
    let old2 = stats_of(state, to.iter().copied());
    let new1 = stats_of(state, from[m..].iter().copied());
    let new2 = stats_of(state, to.iter().chain(moved).copied());
    let log_alpha = pair_log_target(&new1, &new2, hp)? - pair_log_target(&old1, &old2, hp)?
        + move2_log_q_ratio::<T>(n1, n2, m);
    let ok = accept(rng, log_alpha)?;
    // Moving all of j1 into an empty j2 only relabels.
    counters.move2.record_change(ok, !(m == n1 && n2 == 0));
    if ok {
        for &i in moved {
            state.alloc[i] = j2;
        }
        state.stats[j1] = new1;
        state.stats[j2] = new2;
    }
    Ok(())
}

/// Move 3: reallocate the members of two components one at a time in random
/// order, each with probability proportional to its conditional weight given
/// the members already placed.
///
/// Skipped (and not counted) when `G < 2`. Consumes two label draws, a
/// shuffle of the members (ascending order beforehand), one uniform per
/// member and one uniform for the decision.
pub fn move3<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    if state.g < 2 {
        return Ok(());
    }
    let (j1, j2) = distinct_pair(rng, state.g);
    let mut order: Vec<usize> = (0..state.n()).filter(|&i| state.alloc[i] == j1 || state.alloc[i] == j2).collect();
    order.shuffle(rng);
    let d = state.z.d();
    let (mut new1, mut new2) = (ClusterStats::empty(d), ClusterStats::empty(d));
    let (mut old1, mut old2) = (ClusterStats::empty(d), ClusterStats::empty(d));
    let (mut log_fwd, mut log_rev) = (T::zero(), T::zero());
    let mut to_first = Vec::with_capacity(order.len());
    for &i in &order {
        let zi = state.z.row(i);
        let (la, lb) = two_way_log_probs(&new1, &new2, zi, hp)?;
        let first = T::sample_open01(rng) < la.exp();
        if first {
            log_fwd += la;
            new1.add(zi);
        } else {
            log_fwd += lb;
            new2.add(zi);
        }
        to_first.push(first);
        let (ra, rb) = two_way_log_probs(&old1, &old2, zi, hp)?;
        if state.alloc[i] == j1 {
            log_rev += ra;
            old1.add(zi);
        } else {
            log_rev += rb;
            old2.add(zi);
        }
    }
    let log_alpha = pair_log_target(&new1, &new2, hp)? - pair_log_target(&old1, &old2, hp)? + log_rev - log_fwd;
    let ok = accept(rng, log_alpha)?;
    let changed = split_changed(order.iter().map(|&i| state.alloc[i] == j1), to_first.iter().copied());
    counters.move3.record_change(ok, changed);
    if ok {
        for (&i, &f) in order.iter().zip(&to_first) {
            state.alloc[i] = if f { j1 } else { j2 };
        }
        state.stats[j1] = new1;
        state.stats[j2] = new2;
    }
    Ok(())
}

/// Ejection: split a uniformly chosen component, sending each member to a
/// new component with probability `1 - p`, `p ~ Beta(a, a)`.
///
/// The new component takes a uniformly chosen label `s` in `0..=G`; whatever
/// held `s` before moves to the new last label `G`. This makes ejection the
/// exact reverse of absorption, which fills the vacated label with the last.
///
/// Consumes one draw for the component, one for the slot, one beta variate,
/// one uniform per member of the chosen component (ascending) and one uniform
/// for the decision.
pub fn eject<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    if state.g >= hp.g_max {
        return Err(Error::Logic(format!("ejection attempted at G = g_max = {}", hp.g_max)));
    }
    let g = state.g;
    let j1 = rng.random_range(0..g);
    let slot = rng.random_range(0..=g);
    let p = T::sample_beta(rng, hp.a_eject, hp.a_eject);
    let members = state.members(j1);
    let stay: Vec<bool> = members.iter().map(|_| T::sample_open01(rng) < p).collect();
    let new1 = stats_of(state, members.iter().zip(&stay).filter(|(_, &s)| s).map(|(&i, _)| i));
    let new2 = stats_of(state, members.iter().zip(&stay).filter(|(_, &s)| !s).map(|(&i, _)| i));
    let old = stats_of(state, members.iter().copied());
    let before = state.counts();
    let mut after = before.clone();
    after[j1] = new1.count;
    after.push(new2.count);
    let log_alpha = log_cluster_term(&new1, hp)? + log_cluster_term(&new2, hp)? - log_cluster_term(&old, hp)?
        + log_allocation_terms(&after, hp)
        - log_allocation_terms(&before, hp)
        + eject_log_q_ratio(g, new1.count, new2.count, hp);
    let ok = accept(rng, log_alpha)?;
    counters.eject.record(ok);
    if ok {
        for (&i, &s) in members.iter().zip(&stay) {
            if !s {
                state.alloc[i] = g;
            }
        }
        state.stats[j1] = new1;
        state.stats.push(new2);
        state.g += 1;
        if slot != g {
            for k in &mut state.alloc {
                if *k == slot {
                    *k = g;
                } else if *k == g {
                    *k = slot;
                }
            }
            state.stats.swap(slot, g);
        }
    }
    Ok(())
}

/// Absorption: merge `j2` into `j1` for a uniformly chosen ordered pair and
/// move the last label into the vacated slot.
///
/// Consumes two label draws and one uniform.
pub fn absorb<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    if state.g < 2 {
        return Err(Error::Logic("absorption attempted with a single component".into()));
    }
    let g = state.g;
    let (j1, j2) = distinct_pair(rng, g);
    let s1 = stats_of(state, state.members(j1));
    let s2 = stats_of(state, state.members(j2));
    let merged = stats_of(state, (0..state.n()).filter(|&i| state.alloc[i] == j1 || state.alloc[i] == j2));
    let before = state.counts();
    let mut after = before.clone();
    after[j1] += after[j2];
    after.remove(j2);
    let log_alpha = log_cluster_term(&merged, hp)? - log_cluster_term(&s1, hp)? - log_cluster_term(&s2, hp)?
        + log_allocation_terms(&after, hp)
        - log_allocation_terms(&before, hp)
        + absorb_log_q_ratio(g, s1.count, s2.count, hp);
    let ok = accept(rng, log_alpha)?;
    counters.absorb.record(ok);
    if ok {
        apply_absorb(state, j1, j2, merged);
    }
    Ok(())
}

fn apply_absorb<T: Real>(state: &mut ChainState<T>, j1: usize, j2: usize, merged: ClusterStats<T>) {
    let last = state.g - 1;
    for k in &mut state.alloc {
        if *k == j2 {
            *k = j1;
        }
    }
    state.stats[j1] = merged;
    if j2 != last {
        for k in &mut state.alloc {
            if *k == last {
                *k = j2;
            }
        }
        state.stats.swap(j2, last);
    }
    state.stats.pop();
    state.g -= 1;
}

/// One trans-model step: eject with probability `p^e_G`, otherwise absorb.
///
/// Does nothing when `g_max = 1`. Otherwise consumes one uniform for the
/// choice followed by the chosen move's draws.
pub fn eject_or_absorb<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    if hp.g_max == 1 {
        return Ok(());
    }
    if T::sample_open01(rng) < hp.eject_probability(state.g) {
        eject(state, hp, rng, counters)
    } else {
        absorb(state, hp, rng, counters)
    }
}

/// One full sweep: positions, intercept, Gibbs allocations, moves 1-3 and one
/// ejection or absorption.
pub fn sweep<T: Real, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    net: &Network,
    hp: &Hyperparams<T>,
    rng: &mut R,
    counters: &mut MoveCounters,
) -> Result<()> {
    update_positions(state, net, hp, rng, counters)?;
    update_intercept(state, net, hp, rng, counters)?;
    gibbs_allocations(state, hp, rng, counters)?;
    move1(state, hp, rng, counters)?;
    move2(state, hp, rng, counters)?;
    move3(state, hp, rng, counters)?;
    eject_or_absorb(state, hp, rng, counters)
}
