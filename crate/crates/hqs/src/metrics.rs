//! Hierarchy-level scores: the searcher-based quality measure and an
//! agreement baseline, plus report serialization.
//!
//! The headline number averages the per-item oracle value of the
//! simulated search over the catalogue (or over a seeded sample of it),
//! giving a score in `[-1, 1]`: positive when the hierarchy routes a
//! searcher toward small, correct clusters, negative when it misleads.
//!
//! Evaluation is embarrassingly parallel and deterministic: items are
//! scored independently and combined in a fixed order (ascending item
//! id), so the same inputs and options produce byte-identical reports
//! regardless of worker count.

use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Catalogue;
use crate::error::EvalError;
use crate::hierarchy::{Hierarchy, ItemId};
use crate::planner::{EvalContext, SearchTrace};
use crate::pomdp::PomdpConfig;
use crate::sampling::bounded;

/// Flattened, serializable record of one item's simulated search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub id: ItemId,
    /// Oracle value of the search, in `[-1, 1]`.
    pub value: f64,
    pub stop_depth: usize,
    /// Document label of the node where the search stopped.
    pub stop_node: String,
    pub belief_at_stop: f64,
    /// Labels of the visited nodes, root first.
    pub path: Vec<String>,
}

impl TraceSummary {
    fn from_trace(trace: &SearchTrace, hierarchy: &Hierarchy) -> Self {
        TraceSummary {
            id: trace.item.clone(),
            value: trace.oracle_value,
            stop_depth: trace.stop_depth,
            stop_node: hierarchy.node(trace.stop_node()).label.clone(),
            belief_at_stop: trace.belief_at_stop,
            path: trace
                .path
                .iter()
                .map(|&n| hierarchy.node(n).label.clone())
                .collect(),
        }
    }
}

/// Result of one evaluation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HqsReport {
    /// Mean oracle value over the evaluated items.
    pub hqs: f64,
    pub n_items_total: usize,
    pub n_items_evaluated: usize,
    pub sample_fraction: f64,
    /// Seed used for sampling; absent for a full evaluation.
    pub seed: Option<u64>,
    /// Per-item traces, in ascending item id order.
    pub per_item: Vec<TraceSummary>,
    /// Time spent scoring items. Diagnostic only: deliberately excluded
    /// from serialization so identical runs serialize identically.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Knobs for [`evaluate`].
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Fraction of the catalogue to score, in `(0, 1]`. `1.0` scores
    /// every item.
    pub fraction: f64,
    /// Sampling seed. Ignored when `fraction` is `1.0`; a fractional run
    /// without an explicit seed uses 0.
    pub seed: Option<u64>,
    /// Worker threads: 0 uses the global thread pool, 1 runs on the
    /// calling thread, anything else gets a dedicated pool of that size.
    pub workers: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            fraction: 1.0,
            seed: None,
            workers: 0,
        }
    }
}

/// Score a hierarchy against a catalogue: simulate the searcher for each
/// selected item and average the oracle values.
pub fn evaluate(
    hierarchy: &Hierarchy,
    catalogue: &Catalogue,
    config: &PomdpConfig,
    options: &EvalOptions,
) -> Result<HqsReport, EvalError> {
    if !options.fraction.is_finite() || options.fraction <= 0.0 || options.fraction > 1.0 {
        return Err(EvalError::InvalidFraction(options.fraction));
    }
    let ctx = EvalContext::new(hierarchy, catalogue, config)?;
    let n = catalogue.len();

    let full = options.fraction == 1.0;
    let ranks: Vec<usize> = if full {
        (0..n).collect()
    } else {
        let k = ((options.fraction * n as f64).round() as usize).clamp(1, n);
        sample_ranks(options.seed.unwrap_or(0), n, k)
    };
    let k = ranks.len();

    let start = Instant::now();
    let summarize = |&rank: &usize| -> Result<TraceSummary, EvalError> {
        let trace = ctx.search_trace_by_rank(rank)?;
        Ok(TraceSummary::from_trace(&trace, hierarchy))
    };
    let per_item: Vec<TraceSummary> = match options.workers {
        1 => ranks.iter().map(summarize).collect::<Result<_, _>>()?,
        0 => ranks
            .par_iter()
            .map(summarize)
            .collect::<Result<_, _>>()?,
        w => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| EvalError::WorkerPool(e.to_string()))?;
            pool.install(|| ranks.par_iter().map(summarize).collect::<Result<_, _>>())?
        }
    };
    let wall_time = start.elapsed();

    // Ordered reduction: per_item is in ascending rank order already.
    let sum: f64 = per_item.iter().map(|t| t.value).sum();
    let hqs = sum / k as f64;
    if !hqs.is_finite() {
        return Err(EvalError::NonFinite {
            context: "averaging per-item values".into(),
        });
    }
    Ok(HqsReport {
        hqs,
        n_items_total: n,
        n_items_evaluated: k,
        sample_fraction: options.fraction,
        seed: if full { None } else { Some(options.seed.unwrap_or(0)) },
        per_item,
        wall_time,
    })
}

/// Full evaluation with default options.
pub fn hqs(
    hierarchy: &Hierarchy,
    catalogue: &Catalogue,
    config: &PomdpConfig,
) -> Result<HqsReport, EvalError> {
    evaluate(hierarchy, catalogue, config, &EvalOptions::default())
}

/// Seeded evaluation of a fraction of the catalogue.
pub fn sampled_hqs(
    hierarchy: &Hierarchy,
    catalogue: &Catalogue,
    config: &PomdpConfig,
    fraction: f64,
    seed: u64,
) -> Result<HqsReport, EvalError> {
    evaluate(
        hierarchy,
        catalogue,
        config,
        &EvalOptions {
            fraction,
            seed: Some(seed),
            workers: 0,
        },
    )
}

/// `k` distinct ranks from `0..n`, chosen by a seeded partial shuffle
/// and returned sorted ascending.
fn sample_ranks(seed: u64, n: usize, k: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + bounded(&mut rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    pool
}

/// Agreement between two hierarchies over the same items, in `[-1, 1]`
/// (1 means identical pairwise structure).
///
/// For each item pair the tree distance is the size of the smallest
/// cluster containing both, as a fraction of the item count, except that
/// pairs meeting in a leaf count as distance 0. The score is one minus
/// the mean absolute difference of the two distance matrices.
pub fn hai(a: &Hierarchy, b: &Hierarchy) -> Result<f64, EvalError> {
    let mut only_a = 0usize;
    let mut example_a = None;
    for item in a.items() {
        if !b.contains_item(item) {
            if example_a.is_none() {
                example_a = Some(item.clone());
            }
            only_a += 1;
        }
    }
    let mut only_b = 0usize;
    let mut example_b = None;
    for item in b.items() {
        if !a.contains_item(item) {
            if example_b.is_none() {
                example_b = Some(item.clone());
            }
            only_b += 1;
        }
    }
    if only_a > 0 || only_b > 0 {
        let describe = |count: usize, example: &Option<ItemId>| match example {
            Some(id) => format!("{count} (e.g. \"{id}\")"),
            None => "0".to_string(),
        };
        return Err(EvalError::ItemCoverage(format!(
            "hierarchies cover different items: {} only in the first, {} only in the second",
            describe(only_a, &example_a),
            describe(only_b, &example_b),
        )));
    }

    let mut ids: Vec<&ItemId> = a.items().collect();
    ids.sort_unstable();
    let n = ids.len();
    let paths_a: Vec<Vec<crate::hierarchy::NodeId>> = ids
        .iter()
        .map(|id| a.path_to_item(id))
        .collect::<Result<_, _>>()?;
    let paths_b: Vec<Vec<crate::hierarchy::NodeId>> = ids
        .iter()
        .map(|id| b.path_to_item(id))
        .collect::<Result<_, _>>()?;

    let pair_distance = |h: &Hierarchy, paths: &[Vec<crate::hierarchy::NodeId>], i: usize, j: usize| {
        let (p, q) = (&paths[i], &paths[j]);
        let shared = p.iter().zip(q.iter()).take_while(|(x, y)| x == y).count();
        let meet = h.node(p[shared - 1]);
        if meet.is_leaf() {
            0.0
        } else {
            meet.cluster_size as f64 / n as f64
        }
    };

    // Same-item pairs contribute zero (both distances are 0 at a leaf),
    // and the matrix is symmetric, so sum the upper triangle twice.
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let da = pair_distance(a, &paths_a, i, j);
            let db = pair_distance(b, &paths_b, i, j);
            total += 2.0 * (da - db).abs();
        }
    }
    Ok(1.0 - total / (n * n) as f64)
}

/// Pretty-printed JSON rendering of a report, newline-terminated.
pub fn report_to_json(report: &HqsReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// CSV rendering of the per-item table.
pub fn report_to_csv(report: &HqsReport) -> String {
    let mut out = String::from("id,value,stop_depth,stop_node,belief_at_stop\n");
    for t in &report.per_item {
        out.push_str(&csv_field(t.id.as_str()));
        out.push(',');
        out.push_str(&t.value.to_string());
        out.push(',');
        out.push_str(&t.stop_depth.to_string());
        out.push(',');
        out.push_str(&csv_field(&t.stop_node));
        out.push(',');
        out.push_str(&t.belief_at_stop.to_string());
        out.push('\n');
    }
    out
}

fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}
