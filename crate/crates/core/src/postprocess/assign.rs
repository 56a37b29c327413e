use pathfinding::matrix::Matrix;
use pathfinding::prelude::kuhn_munkres_min;

use crate::error::{invalid, Result};

/// Optimal assignment for a square integer cost matrix: returns the column
/// assigned to each row and the total cost.
pub fn solve_assignment(cost: &[Vec<i64>]) -> Result<(Vec<usize>, i64)> {
    let side = cost.len();
    if side == 0 {
        return Ok((Vec::new(), 0));
    }
    if cost.iter().any(|r| r.len() != side) {
        return Err(invalid("assignment cost matrix must be square"));
    }
    let m = Matrix::from_rows(cost.iter().map(|r| r.iter().copied())).map_err(|e| invalid(e.to_string()))?;
    let (total, cols) = kuhn_munkres_min(&m);
    Ok((cols, total))
}

/// Agreement cost `C[g][h] = -|{i : alloc_i = g, reference_i = h}|` on a
/// square matrix of side `max(g, g_ref)`, zero-padded.
pub fn agreement_cost(alloc: &[usize], g: usize, reference: &[usize], g_ref: usize) -> Vec<Vec<i64>> {
    let side = g.max(g_ref);
    let mut cost = vec![vec![0i64; side]; side];
    for (&a, &r) in alloc.iter().zip(reference) {
        cost[a][r] -= 1;
    }
    cost
}

/// Label map (old label -> new label) that best matches `alloc` to
/// `reference`. The map is a permutation of `0..max(g, g_ref)`.
pub fn match_labels(alloc: &[usize], g: usize, reference: &[usize], g_ref: usize) -> Result<Vec<usize>> {
    if alloc.len() != reference.len() {
        return Err(invalid("allocation and reference differ in length"));
    }
    if alloc.iter().any(|&k| k >= g) || reference.iter().any(|&k| k >= g_ref) {
        return Err(invalid("label out of range"));
    }
    Ok(solve_assignment(&agreement_cost(alloc, g, reference, g_ref))?.0)
}
