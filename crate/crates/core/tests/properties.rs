//! Invariants of the model and sampler, quantified over random states.

use lpcm::model::{compute_stats, log_collapsed_posterior_parts, log_likelihood, ClusterStats};
use lpcm::sampler::{eject_or_absorb, gibbs_allocations, move1, move2, move3, update_intercept, update_positions, MoveCounters};
use lpcm::{ChainState, Hyperparams, Network, Positions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
struct Case {
    net: Network,
    z: Positions<f64>,
    beta: f64,
    g: usize,
    alloc: Vec<usize>,
}

fn case(d: usize) -> impl Strategy<Value = Case> {
    (3usize..9, 1usize..5, any::<bool>()).prop_flat_map(move |(n, g, directed)| {
        (
            prop::collection::vec(-3.0f64..3.0, n * d),
            -2.0f64..2.0,
            prop::collection::vec(0..g, n),
            prop::collection::vec(any::<bool>(), n * n),
        )
            .prop_map(move |(z, beta, alloc, ties)| {
                let edges: Vec<(usize, usize)> =
                    (0..n * n).filter(|&k| ties[k] && k / n != k % n).map(|k| (k / n, k % n)).collect();
                Case {
                    net: Network::from_edges(n, directed, &edges).unwrap(),
                    z: Positions::from_vec(n, d, z).unwrap(),
                    beta,
                    g,
                    alloc,
                }
            })
    })
}

fn hp(c: &Case) -> Hyperparams<f64> {
    Hyperparams::defaults_for(c.z.n()).with_dim(c.z.d()).with_g_max(c.g + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn posterior_is_label_invariant(c in case(2), perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..c.g).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let relabelled: Vec<usize> = c.alloc.iter().map(|&k| perm[k]).collect();
        let hp = hp(&c);
        let a = log_collapsed_posterior_parts(&c.net, &c.z, c.beta, &c.alloc, c.g, &hp).unwrap();
        let b = log_collapsed_posterior_parts(&c.net, &c.z, c.beta, &relabelled, c.g, &hp).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn likelihood_is_invariant_under_rigid_motions(
        c in case(2),
        angle in 0.0f64..std::f64::consts::TAU,
        shift in (-5.0f64..5.0, -5.0f64..5.0),
        reflect in any::<bool>(),
    ) {
        let (s, co) = angle.sin_cos();
        let moved: Vec<Vec<f64>> = c
            .z
            .rows()
            .map(|r| {
                let y = if reflect { -r[1] } else { r[1] };
                vec![co * r[0] - s * y + shift.0, s * r[0] + co * y + shift.1]
            })
            .collect();
        let moved = Positions::from_rows(&moved).unwrap();
        let a = log_likelihood(&c.net, &c.z, c.beta).unwrap();
        let b = log_likelihood(&c.net, &moved, c.beta).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn incremental_stats_match_recomputation(c in case(3), moves in prop::collection::vec((0usize..64, 0usize..8), 1..40)) {
        let mut alloc = c.alloc.clone();
        let mut stats = compute_stats(&c.z, &alloc, c.g);
        for (i, k) in moves {
            let (i, k) = (i % alloc.len(), k % c.g);
            stats[alloc[i]].remove(c.z.row(i)).unwrap();
            stats[k].add(c.z.row(i));
            alloc[i] = k;
        }
        let fresh = compute_stats(&c.z, &alloc, c.g);
        for (a, b) in stats.iter().zip(&fresh) {
            prop_assert!(a.approx_eq(b, 1e-9), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn removing_every_member_leaves_an_exact_zero(c in case(2)) {
        let mut st = ClusterStats::of_members(&c.z, &vec![0; c.z.n()], 0);
        for i in (0..c.z.n()).rev() {
            st.remove(c.z.row(i)).unwrap();
        }
        prop_assert_eq!(st, ClusterStats::empty(2));
    }

    #[test]
    fn rejected_proposals_restore_the_state(c in case(2), seed in any::<u64>()) {
        let hp = hp(&c);
        let mut state = ChainState::new(c.z.clone(), c.beta, c.alloc.clone(), c.g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counters = MoveCounters::default();
        for _ in 0..5 {
            for step in 0..7 {
                let before = state.clone();
                let accepted_before: u64 = counters.entries().iter().map(|(_, t)| t.accepted).sum();
                match step {
                    0 => update_positions(&mut state, &c.net, &hp, &mut rng, &mut counters).unwrap(),
                    1 => update_intercept(&mut state, &c.net, &hp, &mut rng, &mut counters).unwrap(),
                    2 => gibbs_allocations(&mut state, &hp, &mut rng, &mut counters).unwrap(),
                    3 => move1(&mut state, &hp, &mut rng, &mut counters).unwrap(),
                    4 => move2(&mut state, &hp, &mut rng, &mut counters).unwrap(),
                    5 => move3(&mut state, &hp, &mut rng, &mut counters).unwrap(),
                    _ => eject_or_absorb(&mut state, &hp, &mut rng, &mut counters).unwrap(),
                }
                let accepted_after: u64 = counters.entries().iter().map(|(_, t)| t.accepted).sum();
                // Gibbs has no rejection; positions are accepted per actor.
                if accepted_after == accepted_before && step != 2 {
                    prop_assert_eq!(&state, &before);
                }
                state.check_consistency(1e-9).unwrap();
            }
        }
    }
}
