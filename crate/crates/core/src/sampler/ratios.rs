//! Proposal log-ratios and target pieces shared by the allocation moves.
//!
//! Each `*_log_q_ratio` returns `ln q(reverse) - ln q(forward)`, so a move's
//! log acceptance ratio is the change in the collapsed target plus that value.

use crate::error::Result;
use crate::hyper::Hyperparams;
use crate::model::{log_cluster_term, log_cluster_term_parts, ClusterStats};
use crate::positions::Positions;
use crate::scalar::Real;
use crate::special::ln_gamma;

/// Collapsed term of `st` with `z` added (`add = true`) or removed.
pub(crate) fn shifted_term<T: Real>(st: &ClusterStats<T>, z: &[T], add: bool, hp: &Hyperparams<T>) -> Result<T> {
    let count = if add { st.count + 1 } else { st.count - 1 };
    if count == 0 {
        return log_cluster_term_parts(0, T::zero(), T::zero(), hp);
    }
    let sign = if add { T::one() } else { -T::one() };
    let mut sum_norm2 = T::zero();
    let mut z2 = T::zero();
    for (&s, &x) in st.sum.iter().zip(z) {
        let t = s + sign * x;
        sum_norm2 += t * t;
        z2 += x * x;
    }
    log_cluster_term_parts(count, sum_norm2, st.sq + sign * z2, hp)
}

/// Unnormalised log weights of the full conditional of one allocation.
///
/// `without_i` holds the statistics of every component with actor `i`
/// removed; entry `g` is `term(g + z_i) - term(g) + ln(n_g + nu)`.
pub fn gibbs_log_weights<T: Real>(without_i: &[ClusterStats<T>], zi: &[T], hp: &Hyperparams<T>) -> Result<Vec<T>> {
    without_i
        .iter()
        .map(|st| {
            Ok(shifted_term(st, zi, true, hp)? - log_cluster_term(st, hp)? + (T::of(st.count as f64) + hp.nu).ln())
        })
        .collect()
}

/// The parts of the collapsed target that depend on two components only:
/// their collapsed terms and `lnG(n_g + nu)`.
pub fn pair_log_target<T: Real>(a: &ClusterStats<T>, b: &ClusterStats<T>, hp: &Hyperparams<T>) -> Result<T> {
    Ok(log_cluster_term(a, hp)? + log_cluster_term(b, hp)? + ln_gamma(T::of(a.count as f64) + hp.nu)
        + ln_gamma(T::of(b.count as f64) + hp.nu))
}

/// Move 1 reassigns the union of two components with a common `p ~ Beta(1, 1)`.
/// Integrating `p` out, a particular split with sizes `(m1, m2)` has
/// probability `m1! m2! / (m1 + m2 + 1)!`, so the ratio is
/// `n1! n2! / (n1'! n2'!)`.
pub fn move1_log_q_ratio<T: Real>(n1: usize, n2: usize, n1_new: usize, n2_new: usize) -> T {
    let lf = |k: usize| ln_gamma(T::of(k as f64 + 1.0));
    lf(n1) + lf(n2) - lf(n1_new) - lf(n2_new)
}

/// Move 2 moves `m` uniformly chosen members of `j1` (size `n_j1`) to `j2`
/// (size `n_j2`): `n_j1/(n_j2+m) * n_j1! n_j2! / ((n_j1-m)! (n_j2+m)!)`.
pub fn move2_log_q_ratio<T: Real>(n_j1: usize, n_j2: usize, m: usize) -> T {
    let lf = |k: usize| ln_gamma(T::of(k as f64 + 1.0));
    T::of(n_j1 as f64).ln() - T::of((n_j2 + m) as f64).ln() + lf(n_j1) + lf(n_j2) - lf(n_j1 - m) - lf(n_j2 + m)
}

/// Log probabilities of sending `zi` to shell `a` or shell `b` in the
/// sequential reallocation of move 3.
pub(crate) fn two_way_log_probs<T: Real>(
    a: &ClusterStats<T>,
    b: &ClusterStats<T>,
    zi: &[T],
    hp: &Hyperparams<T>,
) -> Result<(T, T)> {
    let wa = shifted_term(a, zi, true, hp)? - log_cluster_term(a, hp)? + (T::of(a.count as f64) + hp.nu).ln();
    let wb = shifted_term(b, zi, true, hp)? - log_cluster_term(b, hp)? + (T::of(b.count as f64) + hp.nu).ln();
    let m = wa.max(wb);
    let norm = m + ((wa - m).exp() + (wb - m).exp()).ln();
    Ok((wa - norm, wb - norm))
}

/// Log probability that move 3, visiting `order`, produces the split where
/// `order[t]` goes to the first component iff `to_first[t]`.
///
/// The reverse probability of a move 3 proposal is this quantity for the
/// original allocation along the same visiting order.
pub fn move3_log_path_prob<T: Real>(
    z: &Positions<T>,
    order: &[usize],
    to_first: &[bool],
    hp: &Hyperparams<T>,
) -> Result<T> {
    let mut a = ClusterStats::empty(z.d());
    let mut b = ClusterStats::empty(z.d());
    let mut total = T::zero();
    for (&i, &first) in order.iter().zip(to_first) {
        let (la, lb) = two_way_log_probs(&a, &b, z.row(i), hp)?;
        if first {
            total += la;
            a.add(z.row(i));
        } else {
            total += lb;
            b.add(z.row(i));
        }
    }
    Ok(total)
}

/// `ln` of the Beta-binomial probability of one particular split of a
/// component into sizes `(n1, n2)` under `p ~ Beta(a, a)`.
pub fn log_split_prob<T: Real>(n1: usize, n2: usize, a: T) -> T {
    let (f1, f2) = (T::of(n1 as f64), T::of(n2 as f64));
    let two_a = a + a;
    ln_gamma(a + f1) + ln_gamma(a + f2) + ln_gamma(two_a) - ln_gamma(two_a + f1 + f2) - ln_gamma(a) - ln_gamma(a)
}

/// Ejection from a model with `g` components that leaves `n1` members in the
/// chosen component and sends `n2` to the new one:
/// `ln(1 - p^e_{g+1}) - ln p^e_g - ln P(split)`.
///
/// Ejection picks the component (`1/g`) and the new label (`1/(g+1)`); the
/// matching absorption picks the ordered pair (`1/((g+1) g)`), merges `j2`
/// into `j1` and moves the last label into the vacated slot. Every ejection
/// path has exactly one reverse absorption path, so those factors cancel.
pub fn eject_log_q_ratio<T: Real>(g: usize, n1: usize, n2: usize, hp: &Hyperparams<T>) -> T {
    (T::one() - hp.eject_probability(g + 1)).ln() - hp.eject_probability(g).ln() - log_split_prob(n1, n2, hp.a_eject)
}

/// Absorption of a component of size `n_j2` into one of size `n_j1` in a
/// model with `g` components; the negated reverse ejection ratio.
pub fn absorb_log_q_ratio<T: Real>(g: usize, n_j1: usize, n_j2: usize, hp: &Hyperparams<T>) -> T {
    -eject_log_q_ratio(g - 1, n_j1, n_j2, hp)
}
