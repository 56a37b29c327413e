//! Identifiability post-processing and posterior summaries.
//!
//! Positions are only identified up to rigid motions and labels up to
//! permutation. Every draw is Procrustes-aligned to the highest-likelihood
//! draw, and within each value of `G` allocations are relabelled against a
//! reference by optimal assignment. All summaries are computed in `f64`.

mod assign;
mod procrustes;
mod relabel;
mod summary;

pub use assign::{agreement_cost, match_labels, solve_assignment};
pub use procrustes::{frobenius_distance, procrustes_align};
pub use relabel::{modal_allocation, relabel, Relabeling, MAX_RELABEL_ROUNDS};
pub use summary::{
    align_draws, model_probabilities, reference_index, summarize, AcceptanceEntry, AlignedDraws, GroupSummary,
    MomentSummary, RunSummary, MIN_GROUP_MASS, SUMMARY_SCHEMA_VERSION,
};
