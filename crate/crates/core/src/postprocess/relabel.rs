use super::assign::{agreement_cost, solve_assignment};
use crate::error::{invalid, Result};

/// Most frequent label of each actor across `allocs` (ties to the smaller label).
pub fn modal_allocation(allocs: &[Vec<usize>], g: usize) -> Vec<usize> {
    let n = allocs.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let mut counts = vec![0usize; g];
            for a in allocs {
                counts[a[i]] += 1;
            }
            // max_by_key keeps the last maximum; scan in reverse to keep the first.
            (0..g).rev().max_by_key(|&h| counts[h]).unwrap_or(0)
        })
        .collect()
}

/// Optimal label map of `alloc` onto `reference`, preferring the identity
/// whenever it is among the optimal maps.
fn best_perm(alloc: &[usize], reference: &[usize], g: usize) -> Result<Vec<usize>> {
    let cost = agreement_cost(alloc, g, reference, g);
    let (perm, total) = solve_assignment(&cost)?;
    let identity: i64 = (0..g).map(|h| cost[h][h]).sum();
    Ok(if identity == total { (0..g).collect() } else { perm })
}

/// Result of relabelling the draws that share one value of `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct Relabeling {
    /// Per draw, the map old label -> new label.
    pub perms: Vec<Vec<usize>>,
    pub allocs: Vec<Vec<usize>>,
    /// Final reference: the modal relabelled allocation.
    pub reference: Vec<usize>,
    pub rounds: usize,
}

/// Maximum number of reference updates.
pub const MAX_RELABEL_ROUNDS: usize = 10;

/// Matches every allocation (labels `< g`) to `reference` by optimal
/// assignment on agreement counts, then repeatedly replaces the reference by
/// the modal relabelled allocation until no permutation changes or
/// [`MAX_RELABEL_ROUNDS`] rounds have run.
pub fn relabel(allocs: &[Vec<usize>], g: usize, reference: &[usize]) -> Result<Relabeling> {
    if reference.iter().any(|&k| k >= g) {
        return Err(invalid("reference label out of range"));
    }
    for a in allocs {
        if a.len() != reference.len() || a.iter().any(|&k| k >= g) {
            return Err(invalid("allocation does not match the reference or has labels out of range"));
        }
    }
    let mut reference = reference.to_vec();
    let mut previous: Option<Vec<Vec<usize>>> = None;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let perms = allocs.iter().map(|a| best_perm(a, &reference, g)).collect::<Result<Vec<_>>>()?;
        let relabelled: Vec<Vec<usize>> =
            allocs.iter().zip(&perms).map(|(a, p)| a.iter().map(|&k| p[k]).collect()).collect();
        let converged = previous.as_ref() == Some(&perms);
        if converged || rounds >= MAX_RELABEL_ROUNDS {
            return Ok(Relabeling { perms, allocs: relabelled, reference, rounds });
        }
        reference = modal_allocation(&relabelled, g);
        previous = Some(perms);
    }
}
