//! From similarity scores to a descent distribution.
//!
//! When the searcher stands at a node, each child cluster gets a score
//! saying how much the target item looks like it belongs there. A softmax
//! with a depth-dependent temperature turns those scores into the guidance
//! distribution: the probability that the searcher would follow each child.
//! Guidance is zero for any node that is not a child of the current one;
//! the searcher can only move along edges.
//!
//! Temperatures are small by default (0.01), so modest score gaps already
//! produce near-deterministic guidance. The schedule can grow the
//! temperature geometrically with depth to model a searcher that gets less
//! discriminating the deeper it goes.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::corpus::{centroid, cosine, Catalogue, CorpusError};
use crate::error::EvalError;
use crate::hierarchy::{ItemId, NodeId};

/// Additive constant in the inverse-squared-Euclidean score; keeps the
/// score finite when an item coincides with its cluster centroid.
pub const INV_SQ_EUCLID_EPSILON: f64 = 0.0001;

/// Caller-supplied score of (item, cluster). The item slice is the
/// cluster's members in ascending id order; the item itself may or may not
/// be among them.
pub type ScoreFn = Arc<dyn Fn(&Catalogue, &ItemId, &[ItemId]) -> f64 + Send + Sync>;

/// How an item is scored against a candidate cluster.
#[derive(Clone)]
pub enum SimilarityKind {
    /// Mean cosine between the item and every *other* member of the
    /// cluster. A cluster consisting of exactly the item itself scores 1.
    /// Cosine against a zero-norm vector is 0.
    AverageCosineExcludingSelf,
    /// `1 / (squared distance to the cluster centroid + 0.0001)`.
    InverseSquaredEuclideanToCentroid,
    /// Anything else the caller wants to plug in.
    Custom(ScoreFn),
}

impl Default for SimilarityKind {
    fn default() -> Self {
        SimilarityKind::AverageCosineExcludingSelf
    }
}

impl fmt::Debug for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimilarityKind::AverageCosineExcludingSelf => {
                f.write_str("AverageCosineExcludingSelf")
            }
            SimilarityKind::InverseSquaredEuclideanToCentroid => {
                f.write_str("InverseSquaredEuclideanToCentroid")
            }
            SimilarityKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Score `x` against a cluster given as an explicit item set.
///
/// This is the direct, unoptimized definition; the planner's evaluation
/// context computes the same quantity from per-node aggregates. The pair is
/// kept in agreement by tests.
pub fn similarity(
    kind: &SimilarityKind,
    catalogue: &Catalogue,
    x: &ItemId,
    cluster: &BTreeSet<ItemId>,
) -> Result<f64, EvalError> {
    if cluster.is_empty() {
        return Err(EvalError::EmptyCluster);
    }
    let vx = catalogue
        .get(x)
        .ok_or_else(|| EvalError::UnknownItem(x.clone()))?;
    match kind {
        SimilarityKind::AverageCosineExcludingSelf => {
            if cluster.len() == 1 && cluster.contains(x) {
                return Ok(1.0);
            }
            let mut sum = 0.0;
            let mut count = 0usize;
            for other in cluster {
                if other == x {
                    continue;
                }
                let vo = catalogue
                    .get(other)
                    .ok_or_else(|| EvalError::UnknownItem(other.clone()))?;
                sum += cosine(vx, vo);
                count += 1;
            }
            Ok(sum / count as f64)
        }
        SimilarityKind::InverseSquaredEuclideanToCentroid => {
            let c = centroid(catalogue, cluster.iter()).map_err(|e| match e {
                CorpusError::UnknownItem(id) => EvalError::UnknownItem(id),
                other => EvalError::Corpus(other),
            })?;
            let dense = vx.to_dense();
            let d2: f64 = dense
                .iter()
                .zip(c.iter())
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum();
            Ok(1.0 / (d2 + INV_SQ_EUCLID_EPSILON))
        }
        SimilarityKind::Custom(f) => {
            for member in cluster {
                if catalogue.get(member).is_none() {
                    return Err(EvalError::UnknownItem(member.clone()));
                }
            }
            let members: Vec<ItemId> = cluster.iter().cloned().collect();
            Ok(f(catalogue, x, &members))
        }
    }
}

/// Softmax temperature as a function of depth: `delta * nu^depth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureSchedule {
    delta: f64,
    nu: f64,
}

impl TemperatureSchedule {
    /// `delta` must be positive; `nu` at least 1 (temperature never cools
    /// with depth).
    pub fn new(delta: f64, nu: f64) -> Result<Self, EvalError> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(EvalError::InvalidTemperature(delta));
        }
        if !(nu.is_finite() && nu >= 1.0) {
            return Err(EvalError::InvalidGrowth(nu));
        }
        Ok(TemperatureSchedule { delta, nu })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn at_depth(&self, depth: usize) -> f64 {
        self.delta * self.nu.powf(depth as f64)
    }
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        TemperatureSchedule {
            delta: 0.01,
            nu: 1.0,
        }
    }
}

/// Guidance probabilities over the children of one node, in child order.
#[derive(Debug, Clone)]
pub struct GuidanceDistribution {
    children: Vec<NodeId>,
    probs: Vec<f64>,
}

impl GuidanceDistribution {
    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.children.iter().copied().zip(self.probs.iter().copied())
    }

    /// Probability of moving to `node`; zero for anything that is not one
    /// of the children this distribution was built over.
    pub fn prob_of(&self, node: NodeId) -> f64 {
        self.children
            .iter()
            .position(|c| *c == node)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }
}

/// Boltzmann guidance over scored children at the given depth.
///
/// Probabilities are `exp(s_i / T) / sum_j exp(s_j / T)` with
/// `T = schedule.at_depth(depth)`, computed with the usual max-subtraction
/// so that arbitrarily large scores cannot overflow.
pub fn guidance(
    schedule: &TemperatureSchedule,
    depth: usize,
    scores: &[(NodeId, f64)],
) -> Result<GuidanceDistribution, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoChildren);
    }
    for (node, s) in scores {
        if !s.is_finite() {
            return Err(EvalError::NonFiniteScore {
                node: *node,
                score: *s,
            });
        }
    }
    let temp = schedule.at_depth(depth);
    let max = scores
        .iter()
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scores
        .iter()
        .map(|(_, s)| ((s - max) / temp).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    Ok(GuidanceDistribution {
        children: scores.iter().map(|(n, _)| *n).collect(),
        probs,
    })
}
