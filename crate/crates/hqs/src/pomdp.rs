//! The searcher's decision model.
//!
//! The searcher walking a hierarchy is modelled as a POMDP whose state is
//! the pair (current node, whether the target is actually under it). The
//! searcher never observes the second component; it tracks a belief
//! instead. Because the walk only ever moves to a child and an off-path
//! state can never become on-path again, the belief collapses to a single
//! scalar: the probability that the target is still under the current
//! node. This module provides the pieces the planner composes: the reward
//! for searching a cluster, the descend transition probabilities, the
//! belief update, and the action values.
//!
//! Two actions exist at every node: stop and search the current cluster
//! exhaustively, or descend one level. Searching a cluster `c` in a
//! universe of `N` items pays
//!
//! ```text
//! r(c) = 1 - (e^(|c|/N) - 1) / (e - 1)
//! ```
//!
//! which is 1-ish for tiny clusters, exactly 0 for the whole universe, and
//! decreasing in between: finding the target after scanning a small pile
//! is worth more than scanning everything. Failing to find it (the target
//! was not under the node) pays -1. With belief `b` this nets
//! `q_stay = b * (r(c) + 1) - 1`.

use crate::error::EvalError;
use crate::hierarchy::NodeId;

/// Future rewards are not discounted: the searcher cares only about where
/// it ends up, not how many levels it walked to get there.
pub const DISCOUNT: f64 = 1.0;

/// Everything the evaluation needs to know about the searcher: how items
/// are scored against clusters, and how sharply scores turn into descent
/// choices at each depth.
#[derive(Debug, Clone, Default)]
pub struct PomdpConfig {
    pub schedule: crate::guidance::TemperatureSchedule,
    pub similarity: crate::guidance::SimilarityKind,
}

/// Reward for stopping and searching a cluster of `cluster_size` items out
/// of `n_items`. Zero exactly when the cluster is the whole universe.
pub fn reward(cluster_size: usize, n_items: usize) -> Result<f64, EvalError> {
    if n_items == 0 || cluster_size == 0 || cluster_size > n_items {
        return Err(EvalError::InvalidClusterSize {
            size: cluster_size,
            n_items,
        });
    }
    // exp_m1 on both sides: at cluster_size == n_items the ratio is
    // bit-for-bit 1, so the reward is exactly 0.
    let num = (cluster_size as f64 / n_items as f64).exp_m1();
    let den = 1.0f64.exp_m1();
    Ok(1.0 - num / den)
}

/// Transition probabilities for descending from a node to one child, split
/// by whether the target really was under the current node. `eta` is the
/// guidance probability of that child.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbs {
    /// Target under the node, and still under the chosen child: `eta^2`.
    pub stays_on_path: f64,
    /// Target under the node, but not under the chosen child:
    /// `eta * (1 - eta)`.
    pub leaves_path: f64,
    /// Target not under the node, yet under the child: impossible, 0.
    pub rejoins_path: f64,
    /// Target not under the node, still not under the child: `eta`.
    pub stays_off_path: f64,
}

/// Probabilities of the four (was on path, is on path) outcomes when the
/// searcher descends along a child with guidance probability `eta`.
pub fn transition_probs(eta: f64) -> Result<TransitionProbs, EvalError> {
    if !(eta >= 0.0 && eta <= 1.0) {
        return Err(EvalError::InvalidEta { eta });
    }
    Ok(TransitionProbs {
        stays_on_path: eta * eta,
        leaves_path: eta * (1.0 - eta),
        rejoins_path: 0.0,
        stays_off_path: eta,
    })
}

/// The searcher's belief at a node: the probability that the target item
/// is under it. At the root this is 1; every descend multiplies by the
/// guidance probability of the child taken, so after `t` steps it is the
/// product of the first `t` guidance probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Belief {
    pub node: NodeId,
    pub on_path: f64,
}

impl Belief {
    /// Certainty at the root: the target is somewhere in the hierarchy.
    pub fn initial(root: NodeId) -> Belief {
        Belief {
            node: root,
            on_path: 1.0,
        }
    }
}

/// Belief after descending to `child` whose guidance probability is `eta`.
pub fn belief_update(belief: &Belief, eta: f64, child: NodeId) -> Belief {
    Belief {
        node: child,
        on_path: belief.on_path * eta,
    }
}

/// Value of stopping to search a cluster of `cluster_size` items while
/// holding belief `belief` that the target is inside: the searcher finds
/// it with probability `belief` (reward `r`) and comes up empty otherwise
/// (reward -1).
pub fn q_stay(belief: f64, cluster_size: usize, n_items: usize) -> Result<f64, EvalError> {
    let r = reward(cluster_size, n_items)?;
    Ok(belief * (r + 1.0) - 1.0)
}

/// One-step estimate of the value of descending: for each child, the
/// probability of following it times the value of stopping there with the
/// updated belief. Children are `(node, eta, cluster_size)` triples; etas
/// are expected to sum to 1.
pub fn q_go_hat(
    belief: f64,
    children: &[(NodeId, f64, usize)],
    n_items: usize,
) -> Result<f64, EvalError> {
    if children.is_empty() {
        return Err(EvalError::NoChildren);
    }
    let mut total = 0.0;
    for &(_, eta, size) in children {
        if !(eta >= 0.0 && eta <= 1.0) {
            return Err(EvalError::InvalidEta { eta });
        }
        total += eta * q_stay(eta * belief, size, n_items)?;
    }
    Ok(total)
}

/// What the searcher can do at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Descend,
    Search,
}
