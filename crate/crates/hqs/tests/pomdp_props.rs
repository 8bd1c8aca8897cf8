//! Probabilistic invariants of the searcher's decision model.

use hqs::hierarchy::NodeId;
use hqs::pomdp::{belief_update, q_go_hat, q_stay, reward, transition_probs, Belief};
use proptest::prelude::*;

/// Normalize arbitrary positive weights into a guidance distribution.
fn normalized(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

proptest! {
    /// Reward falls strictly as clusters grow and stays inside [0, 1].
    #[test]
    fn reward_decreases_strictly(n in 1usize..500) {
        let mut last = f64::INFINITY;
        for size in 1..=n {
            let r = reward(size, n).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!(r < last);
            last = r;
        }
        prop_assert_eq!(reward(n, n).unwrap(), 0.0);
    }

    /// Summed across a guidance distribution over children, the
    /// transition mass out of each source state is exactly one: an
    /// on-path searcher stays on or leaves, an off-path searcher stays
    /// off, and nobody vanishes.
    #[test]
    fn transition_rows_sum_to_one(
        weights in prop::collection::vec(1e-6f64..1.0, 1..16),
    ) {
        let etas = normalized(&weights);
        let mut from_on_path = 0.0;
        let mut from_off_path = 0.0;
        for &eta in &etas {
            let t = transition_probs(eta).unwrap();
            prop_assert_eq!(t.rejoins_path, 0.0);
            from_on_path += t.stays_on_path + t.leaves_path;
            from_off_path += t.stays_off_path;
        }
        prop_assert!((from_on_path - 1.0).abs() < 1e-12);
        prop_assert!((from_off_path - 1.0).abs() < 1e-12);
    }

    /// Iterating the per-step belief update along a path reproduces the
    /// closed-form product of guidance probabilities.
    #[test]
    fn belief_iteration_equals_the_product(
        etas in prop::collection::vec(0.0f64..=1.0, 1..30),
    ) {
        let mut belief = Belief::initial(NodeId::from_index(0));
        let mut product = 1.0;
        for (step, &eta) in etas.iter().enumerate() {
            belief = belief_update(&belief, eta, NodeId::from_index(step + 1));
            product *= eta;
            prop_assert!((belief.on_path - product).abs() < 1e-12);
        }
        prop_assert_eq!(belief.node, NodeId::from_index(etas.len()));
    }

    /// Both action values live in [-1, 1] for any belief and sizes.
    #[test]
    fn action_values_are_bounded(
        belief in 0.0f64..=1.0,
        size in 1usize..100,
        n_extra in 0usize..100,
        weights in prop::collection::vec(1e-6f64..1.0, 1..8),
    ) {
        let n = size + n_extra;
        let stay = q_stay(belief, size, n).unwrap();
        prop_assert!((-1.0..=1.0).contains(&stay));
        let etas = normalized(&weights);
        let children: Vec<(NodeId, f64, usize)> = etas
            .iter()
            .enumerate()
            .map(|(i, &eta)| (NodeId::from_index(i), eta, 1 + i % n))
            .collect();
        let go = q_go_hat(belief, &children, n).unwrap();
        prop_assert!((-1.0..=1.0).contains(&go));
    }

    /// The one-step descend estimate can never beat the best child's
    /// stop value: it is an eta-weighted average of values that are each
    /// at most that maximum (belief shrinkage only drags them lower).
    #[test]
    fn descend_estimate_is_bounded_by_the_best_child(
        belief in 0.0f64..=1.0,
        weights in prop::collection::vec(1e-6f64..1.0, 2..8),
        sizes in prop::collection::vec(1usize..40, 2..8),
    ) {
        let k = weights.len().min(sizes.len());
        let etas = normalized(&weights[..k]);
        let n = 40;
        let children: Vec<(NodeId, f64, usize)> = etas
            .iter()
            .enumerate()
            .map(|(i, &eta)| (NodeId::from_index(i), eta, sizes[i]))
            .collect();
        let go = q_go_hat(belief, &children, n).unwrap();
        let best = children
            .iter()
            .map(|&(_, _, size)| q_stay(belief, size, n).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(go <= best + 1e-12);
    }

    /// With all guidance mass on one child, the estimate degenerates to
    /// exactly that child's stop value.
    #[test]
    fn point_mass_guidance_reaches_the_bound(
        belief in 0.0f64..=1.0,
        size in 1usize..40,
        off_size in 1usize..40,
    ) {
        let n = 80;
        let children = [
            (NodeId::from_index(0), 1.0, size),
            (NodeId::from_index(1), 0.0, off_size),
        ];
        let go = q_go_hat(belief, &children, n).unwrap();
        let stay_at_child = q_stay(belief, size, n).unwrap();
        // eta = 1 passes the belief through untouched; the eta = 0 child
        // contributes a -0 term (0 * (0 * b * (r+1) - 1)).
        prop_assert!((go - stay_at_child).abs() < 1e-15);
    }
}
