//! Metropolis-within-Gibbs sampler for the collapsed model, with allocation
//! moves and ejection/absorption to change the number of components.
//!
//! One sweep runs, in order: the position update, the intercept update, a
//! Gibbs pass over the allocations, moves 1, 2 and 3, and one ejection or
//! absorption. See [`sweep`].

mod chain;
mod moves;
mod ratios;

use serde::{Deserialize, Serialize};

pub use chain::{run_chain, run_chains, ChainOutput, DrawRecord, Init, RunConfig};
pub use moves::{
    absorb, eject, eject_or_absorb, gibbs_allocations, move1, move2, move3, sweep, update_intercept,
    update_positions,
};
pub use ratios::{
    absorb_log_q_ratio, eject_log_q_ratio, gibbs_log_weights, log_split_prob, move1_log_q_ratio, move2_log_q_ratio,
    move3_log_path_prob, pair_log_target,
};

/// Attempt and acceptance counts of one move type.
///
/// `changed` counts accepted proposals that altered the clustering of the
/// actors, not merely the component labels; for the allocation moves an
/// accepted proposal is often the current partition under another labelling.
/// For every other move it equals `accepted`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub attempted: u64,
    pub accepted: u64,
    #[serde(default)]
    pub changed: u64,
}

impl Tally {
    #[inline]
    pub(crate) fn record(&mut self, accepted: bool) {
        self.record_change(accepted, accepted);
    }

    #[inline]
    pub(crate) fn record_change(&mut self, accepted: bool, changed: bool) {
        self.attempted += 1;
        self.accepted += accepted as u64;
        self.changed += (accepted && changed) as u64;
    }

    /// Acceptance rate, `None` before the first attempt.
    pub fn rate(&self) -> Option<f64> {
        (self.attempted > 0).then(|| self.accepted as f64 / self.attempted as f64)
    }

    /// Rate of accepted proposals that changed the clustering.
    pub fn change_rate(&self) -> Option<f64> {
        (self.attempted > 0).then(|| self.changed as f64 / self.attempted as f64)
    }

    fn merge(&mut self, other: &Tally) {
        self.attempted += other.attempted;
        self.accepted += other.accepted;
        self.changed += other.changed;
    }
}

/// Per-move attempt/acceptance counts.
///
/// For the Gibbs pass every actor visit is an attempt and "accepted" counts
/// visits that changed the actor's component label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveCounters {
    pub beta: Tally,
    pub z: Tally,
    pub gibbs: Tally,
    pub move1: Tally,
    pub move2: Tally,
    pub move3: Tally,
    pub eject: Tally,
    pub absorb: Tally,
}

impl MoveCounters {
    /// `(name, tally)` pairs in sweep order.
    pub fn entries(&self) -> [(&'static str, Tally); 8] {
        [
            ("z", self.z),
            ("beta", self.beta),
            ("gibbs", self.gibbs),
            ("move1", self.move1),
            ("move2", self.move2),
            ("move3", self.move3),
            ("eject", self.eject),
            ("absorb", self.absorb),
        ]
    }

    pub fn merge(&mut self, other: &MoveCounters) {
        self.beta.merge(&other.beta);
        self.z.merge(&other.z);
        self.gibbs.merge(&other.gibbs);
        self.move1.merge(&other.move1);
        self.move2.merge(&other.move2);
        self.move3.merge(&other.move3);
        self.eject.merge(&other.eject);
        self.absorb.merge(&other.absorb);
    }
}
