//! The bounded-lookahead search that scores one item against a hierarchy.
//!
//! The simulation walks the target item's true root-to-leaf path. At each
//! node it weighs stopping (`q_stay`) against a one-step estimate of
//! descending (`q_go_hat`, guidance-weighted stop values of the children)
//! and descends while descending looks at least as good; ties descend,
//! because a tie means the extra level is free. Descending multiplies the
//! belief by the guidance probability of the correct child, which is where
//! a bad hierarchy gets punished: when similarity points the wrong way,
//! the belief the searcher would arrive with collapses, and so does the
//! value of everything below. At a leaf the only option is to search.
//!
//! The resulting oracle value for item `x`,
//!
//! ```text
//! V_x = (r(c_T) + 1) * (eta_1 * ... * eta_T) - 1
//! ```
//!
//! is the stop value at the node where the walk ended. [`expand`] exposes
//! the same decision rule as an explicit depth-`d` lookahead over the
//! guidance-weighted child tree; at `d = 2` it reproduces the
//! `q_stay`-versus-`q_go_hat` comparison decision for decision, bit for
//! bit.

use crate::corpus::{Catalogue, ItemVector};
use crate::error::EvalError;
use crate::guidance::{guidance, similarity, SimilarityKind};
use crate::hierarchy::{Hierarchy, ItemId, NodeId};
use crate::pomdp::{q_go_hat, q_stay, Action, PomdpConfig};

/// A hierarchy, a catalogue and a searcher configuration bound together,
/// with per-node aggregates that make similarity scoring cheap.
///
/// Construction validates that the hierarchy and the catalogue cover
/// exactly the same items, and precomputes (depending on the similarity
/// kind) per-item unit vectors and per-node vector sums or centroids.
/// Memory for the aggregates is O(node count * dimension). The context is
/// immutable and shares nothing mutable, so it can be queried from many
/// threads at once.
pub struct EvalContext<'a> {
    hierarchy: &'a Hierarchy,
    catalogue: &'a Catalogue,
    config: &'a PomdpConfig,
    data: ContextData,
}

enum ContextData {
    /// Average-cosine: unit vectors per item, their self-dot (1, or 0 for
    /// zero-norm vectors), and the per-node sum of member unit vectors.
    Cosine {
        unit: Vec<ItemVector>,
        self_dot: Vec<f64>,
        node_sum: Vec<Vec<f64>>,
    },
    /// Inverse-squared-Euclidean: per-node centroids with their squared
    /// norms, and per-item squared norms.
    Centroid {
        node_centroid: Vec<Vec<f64>>,
        node_cnorm2: Vec<f64>,
        item_norm2: Vec<f64>,
    },
    /// Caller-supplied scorer: no aggregates, clusters are materialized
    /// per query.
    Custom,
}

impl<'a> EvalContext<'a> {
    pub fn new(
        hierarchy: &'a Hierarchy,
        catalogue: &'a Catalogue,
        config: &'a PomdpConfig,
    ) -> Result<Self, EvalError> {
        check_same_items(hierarchy, catalogue)?;
        let data = match &config.similarity {
            SimilarityKind::AverageCosineExcludingSelf => {
                let mut unit = Vec::with_capacity(catalogue.len());
                let mut self_dot = Vec::with_capacity(catalogue.len());
                for rank in 0..catalogue.len() {
                    let (_, v) = catalogue.by_rank(rank);
                    let norm = v.norm();
                    let mut u = v.clone();
                    if norm > 0.0 {
                        u.scale(1.0 / norm);
                        self_dot.push(u.dot(&u));
                    } else {
                        u.scale(0.0);
                        self_dot.push(0.0);
                    }
                    unit.push(u);
                }
                let node_sum = node_vector_sums(hierarchy, catalogue, |rank, acc| {
                    unit[rank].accumulate_into(acc, 1.0)
                });
                ContextData::Cosine {
                    unit,
                    self_dot,
                    node_sum,
                }
            }
            SimilarityKind::InverseSquaredEuclideanToCentroid => {
                let mut node_centroid = node_vector_sums(hierarchy, catalogue, |rank, acc| {
                    catalogue.by_rank(rank).1.accumulate_into(acc, 1.0)
                });
                for (node, sum) in node_centroid.iter_mut().enumerate() {
                    let size = hierarchy.nodes()[node].cluster_size as f64;
                    for x in sum.iter_mut() {
                        *x /= size;
                    }
                }
                let node_cnorm2 = node_centroid
                    .iter()
                    .map(|c| c.iter().map(|x| x * x).sum())
                    .collect();
                let item_norm2 = (0..catalogue.len())
                    .map(|r| catalogue.by_rank(r).1.norm_squared())
                    .collect();
                ContextData::Centroid {
                    node_centroid,
                    node_cnorm2,
                    item_norm2,
                }
            }
            SimilarityKind::Custom(_) => ContextData::Custom,
        };
        Ok(EvalContext {
            hierarchy,
            catalogue,
            config,
            data,
        })
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        self.hierarchy
    }

    pub fn catalogue(&self) -> &Catalogue {
        self.catalogue
    }

    pub fn config(&self) -> &PomdpConfig {
        self.config
    }

    /// Similarity of `x` to the cluster of `node`, computed from the
    /// precomputed aggregates. Agrees with [`crate::guidance::similarity`]
    /// on the materialized cluster up to floating-point reassociation.
    pub fn similarity(&self, x: &ItemId, node: NodeId) -> Result<f64, EvalError> {
        let rank = self
            .catalogue
            .rank_of(x)
            .ok_or_else(|| EvalError::UnknownItem(x.clone()))?;
        if self.hierarchy.get(node).is_none() {
            return Err(EvalError::UnknownNode(node));
        }
        let contains = self.hierarchy.cluster_contains(node, x);
        self.score(rank, node, contains)
    }

    /// Aggregate-based similarity score. `x_in_cluster` must say whether
    /// the item is a member of the node's cluster.
    fn score(&self, rank: usize, node: NodeId, x_in_cluster: bool) -> Result<f64, EvalError> {
        let size = self.hierarchy.node(node).cluster_size;
        match &self.data {
            ContextData::Cosine {
                unit,
                self_dot,
                node_sum,
            } => {
                if x_in_cluster && size == 1 {
                    return Ok(1.0);
                }
                let dot = unit[rank].dot_dense(&node_sum[node.index()]);
                if x_in_cluster {
                    Ok((dot - self_dot[rank]) / (size - 1) as f64)
                } else {
                    Ok(dot / size as f64)
                }
            }
            ContextData::Centroid {
                node_centroid,
                node_cnorm2,
                item_norm2,
            } => {
                let (_, v) = self.catalogue.by_rank(rank);
                let cross = v.dot_dense(&node_centroid[node.index()]);
                let d2 = (item_norm2[rank] - 2.0 * cross + node_cnorm2[node.index()]).max(0.0);
                Ok(1.0 / (d2 + crate::guidance::INV_SQ_EUCLID_EPSILON))
            }
            ContextData::Custom => {
                let (id, _) = self.catalogue.by_rank(rank);
                let cluster = self.hierarchy.cluster_items(node)?;
                similarity(&self.config.similarity, self.catalogue, id, &cluster)
            }
        }
    }

    /// Run the searcher for one item. See [`run_simplified_rtbss`].
    pub fn search_trace(&self, x: &ItemId) -> Result<SearchTrace, EvalError> {
        let rank = self
            .catalogue
            .rank_of(x)
            .ok_or_else(|| EvalError::UnknownItem(x.clone()))?;
        self.search_trace_by_rank(rank)
    }

    /// Like [`EvalContext::search_trace`], addressing the item by rank.
    pub fn search_trace_by_rank(&self, rank: usize) -> Result<SearchTrace, EvalError> {
        let (x, _) = self.catalogue.by_rank(rank);
        let n_items = self.hierarchy.n_items();
        let full_path = self.hierarchy.path_to_item(x)?;

        let mut belief = 1.0f64;
        let mut per_step = Vec::new();
        let mut stop_depth = full_path.len() - 1;

        for (t, &node_id) in full_path.iter().enumerate() {
            let node = self.hierarchy.node(node_id);
            let stay = q_stay(belief, node.cluster_size, n_items)?;
            if node.is_leaf() {
                per_step.push(StepRecord {
                    depth: t,
                    belief,
                    q_stay: stay,
                    q_go_hat: None,
                    action: Action::Search,
                });
                stop_depth = t;
                break;
            }
            let dist = self.child_guidance(rank, node_id, Some(full_path[t + 1]))?;
            let children: Vec<(NodeId, f64, usize)> = dist
                .iter()
                .map(|(c, eta)| (c, eta, self.hierarchy.node(c).cluster_size))
                .collect();
            let go = q_go_hat(belief, &children, n_items)?;
            if go >= stay {
                per_step.push(StepRecord {
                    depth: t,
                    belief,
                    q_stay: stay,
                    q_go_hat: Some(go),
                    action: Action::Descend,
                });
                belief *= dist.prob_of(full_path[t + 1]);
            } else {
                per_step.push(StepRecord {
                    depth: t,
                    belief,
                    q_stay: stay,
                    q_go_hat: Some(go),
                    action: Action::Search,
                });
                stop_depth = t;
                break;
            }
        }

        let stop_node = full_path[stop_depth];
        let r = crate::pomdp::reward(self.hierarchy.node(stop_node).cluster_size, n_items)?;
        let oracle_value = (r + 1.0) * belief - 1.0;
        if !oracle_value.is_finite() {
            return Err(EvalError::NonFinite {
                context: format!("scoring item {x}"),
            });
        }
        Ok(SearchTrace {
            item: x.clone(),
            path: full_path[..=stop_depth].to_vec(),
            per_step,
            stop_depth,
            belief_at_stop: belief,
            oracle_value,
        })
    }

    /// Guidance over the children of `node` for the item at `rank`.
    /// `on_path_child` identifies the child containing the item, if any;
    /// it is the one child scored with self-inclusion.
    fn child_guidance(
        &self,
        rank: usize,
        node: NodeId,
        on_path_child: Option<NodeId>,
    ) -> Result<crate::guidance::GuidanceDistribution, EvalError> {
        let node_ref = self.hierarchy.node(node);
        let mut scores = Vec::with_capacity(node_ref.children.len());
        for &child in &node_ref.children {
            let contains = Some(child) == on_path_child;
            let s = self.score(rank, child, contains)?;
            if !s.is_finite() {
                return Err(EvalError::NonFiniteScore {
                    node: child,
                    score: s,
                });
            }
            scores.push((child, s));
        }
        guidance(&self.config.schedule, node_ref.depth, &scores)
    }

    /// Depth-bounded lookahead value of standing at `node` with belief
    /// `belief` while searching for `x`. See [`expand`].
    pub fn expand(
        &self,
        x: &ItemId,
        node: NodeId,
        belief: f64,
        depth_budget: usize,
    ) -> Result<(f64, Action), EvalError> {
        let rank = self
            .catalogue
            .rank_of(x)
            .ok_or_else(|| EvalError::UnknownItem(x.clone()))?;
        if self.hierarchy.get(node).is_none() {
            return Err(EvalError::UnknownNode(node));
        }
        let path = self.hierarchy.path_to_item(x)?;
        self.expand_inner(rank, &path, node, belief, depth_budget)
    }

    fn expand_inner(
        &self,
        rank: usize,
        path: &[NodeId],
        node: NodeId,
        belief: f64,
        depth_budget: usize,
    ) -> Result<(f64, Action), EvalError> {
        let node_ref = self.hierarchy.node(node);
        let stay = q_stay(belief, node_ref.cluster_size, self.hierarchy.n_items())?;
        // With no budget left to look below, stopping is the only value
        // the searcher can claim; at a leaf it is the only action at all.
        if node_ref.is_leaf() || depth_budget <= 1 {
            return Ok((stay, Action::Search));
        }
        let on_path_child =
            (node_ref.depth + 1 < path.len() && path[node_ref.depth] == node)
                .then(|| path[node_ref.depth + 1]);
        let dist = self.child_guidance(rank, node, on_path_child)?;
        let mut go = 0.0;
        for (child, eta) in dist.iter() {
            let (value, _) =
                self.expand_inner(rank, path, child, eta * belief, depth_budget - 1)?;
            go += eta * value;
        }
        if go >= stay {
            Ok((go, Action::Descend))
        } else {
            Ok((stay, Action::Search))
        }
    }
}

/// Per-node sums of per-item vectors, computed bottom-up in one reverse
/// pre-order pass.
fn node_vector_sums(
    hierarchy: &Hierarchy,
    catalogue: &Catalogue,
    add_item: impl Fn(usize, &mut [f64]),
) -> Vec<Vec<f64>> {
    let dim = catalogue.dim();
    let n_nodes = hierarchy.node_count();
    let mut sums: Vec<Vec<f64>> = vec![Vec::new(); n_nodes];
    for idx in (0..n_nodes).rev() {
        let node = &hierarchy.nodes()[idx];
        let mut acc = vec![0.0; dim];
        if node.is_leaf() {
            for item in &node.items {
                let rank = catalogue
                    .rank_of(item)
                    .expect("context construction checked item coverage");
                add_item(rank, &mut acc);
            }
        } else {
            for child in &node.children {
                let child_sum = &sums[child.index()];
                for (a, x) in acc.iter_mut().zip(child_sum.iter()) {
                    *a += x;
                }
            }
        }
        sums[idx] = acc;
    }
    sums
}

fn check_same_items(hierarchy: &Hierarchy, catalogue: &Catalogue) -> Result<(), EvalError> {
    let mut missing_in_catalogue = 0usize;
    let mut first_missing_in_catalogue = None;
    let mut in_hierarchy = 0usize;
    for item in hierarchy.items() {
        in_hierarchy += 1;
        if catalogue.rank_of(item).is_none() {
            if first_missing_in_catalogue.is_none() {
                first_missing_in_catalogue = Some(item.clone());
            }
            missing_in_catalogue += 1;
        }
    }
    let mut missing_in_hierarchy = 0usize;
    let mut first_missing_in_hierarchy = None;
    if in_hierarchy - missing_in_catalogue < catalogue.len() {
        for id in catalogue.ids() {
            if !hierarchy.contains_item(id) {
                if first_missing_in_hierarchy.is_none() {
                    first_missing_in_hierarchy = Some(id.clone());
                }
                missing_in_hierarchy += 1;
            }
        }
    }
    if missing_in_catalogue > 0 || missing_in_hierarchy > 0 {
        return Err(EvalError::ItemSetMismatch {
            missing_in_catalogue,
            first_missing_in_catalogue,
            missing_in_hierarchy,
            first_missing_in_hierarchy,
        });
    }
    Ok(())
}

/// One decision point in a search trace.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub depth: usize,
    /// Belief on arrival at this node, before the decision.
    pub belief: f64,
    pub q_stay: f64,
    /// Absent at a leaf, where descending is not available.
    pub q_go_hat: Option<f64>,
    pub action: Action,
}

/// The full record of one simulated search: the visited prefix of the
/// item's root path, the decision made at every node, and the stop-time
/// quantities the oracle value is built from.
#[derive(Debug, Clone)]
pub struct SearchTrace {
    pub item: ItemId,
    /// Nodes visited, from the root to the stop node inclusive.
    pub path: Vec<NodeId>,
    pub per_step: Vec<StepRecord>,
    /// Depth of the stop node (number of descends taken).
    pub stop_depth: usize,
    /// Product of the guidance probabilities along the taken path.
    pub belief_at_stop: f64,
    /// `(reward(stop cluster) + 1) * belief_at_stop - 1`.
    pub oracle_value: f64,
}

impl SearchTrace {
    pub fn stop_node(&self) -> NodeId {
        *self.path.last().expect("path is never empty")
    }
}

/// Simulate the searcher for `x`: walk its true path from the root,
/// descending while the one-step estimate of descending is at least the
/// value of stopping, and return the full trace.
///
/// Convenience form that builds a fresh [`EvalContext`]; to evaluate many
/// items, build the context once and call
/// [`EvalContext::search_trace`].
pub fn run_simplified_rtbss(
    hierarchy: &Hierarchy,
    catalogue: &Catalogue,
    config: &PomdpConfig,
    x: &ItemId,
) -> Result<SearchTrace, EvalError> {
    EvalContext::new(hierarchy, catalogue, config)?.search_trace(x)
}

/// Depth-bounded lookahead at `node`: the value of the best action when
/// the searcher may look `depth_budget` levels down (the current node
/// included) before having to stop. A budget of 1 (or a leaf) means
/// stopping; a budget of 2 compares stopping with the guidance-weighted
/// stop values of the children, which is exactly the
/// `q_stay`-versus-`q_go_hat` rule the trace simulation applies, so the
/// returned action agrees with [`run_simplified_rtbss`] at every node of
/// the item's path. Ties prefer descending.
pub fn expand(
    hierarchy: &Hierarchy,
    catalogue: &Catalogue,
    config: &PomdpConfig,
    x: &ItemId,
    node: NodeId,
    belief: f64,
    depth_budget: usize,
) -> Result<(f64, Action), EvalError> {
    EvalContext::new(hierarchy, catalogue, config)?.expand(x, node, belief, depth_budget)
}
