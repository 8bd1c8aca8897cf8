//! Search-based quality scoring for hierarchical clusterings.
//!
//! The central question this crate answers: if a user had to find a specific
//! item by descending a cluster hierarchy from the root, guided only by how
//! similar the item looks to each subtree, how well would they do? The HQS
//! measure simulates exactly that searcher, models its uncertainty as a
//! belief state, and scores the hierarchy by the value the searcher can
//! extract from it. A hierarchy is good when descending it narrows the
//! search quickly without leading the searcher astray.
//!
//! The crate is organised as a pipeline:
//!
//! * [`hierarchy`] — the tree itself: parsing, validation, serialization,
//!   cluster and path queries.
//! * [`corpus`] — item vectors: a JSONL reader, a pinned TF-IDF variant for
//!   text corpora, centroids, and an average-link agglomerative builder that
//!   produces reference hierarchies.
//! * [`guidance`] — turns per-child similarity scores into a descent
//!   distribution via a temperature-controlled softmax.
//! * [`pomdp`] — the searcher's decision model: cluster reward, transition
//!   probabilities, belief updates, and the two action values.
//! * [`planner`] — the bounded-lookahead search that walks an item's path
//!   and decides at each node whether to descend or stop and search.
//! * [`metrics`] — HQS over a whole corpus (exhaustive or sampled), plus the
//!   HAI agreement baseline and report serialization.
//! * [`analysis`] — closed-form analysis of the reward model on idealised
//!   balanced hierarchies.
//! * [`synthetic`] — deterministic generators for synthetic corpora and
//!   hierarchies, used by the test suite and useful for benchmarking.
//!
//! Determinism is a contract throughout: all randomness flows from a caller
//! seed through a fixed portable generator (ChaCha8), reductions happen in a
//! fixed order, and repeated runs byte-match regardless of worker count.

pub mod analysis;
pub mod corpus;
mod error;
pub mod guidance;
pub mod hierarchy;
pub mod metrics;
pub mod planner;
pub mod pomdp;
mod sampling;
pub mod synthetic;

pub use error::EvalError;
