//! Seeded generators for synthetic catalogues and hierarchies.
//!
//! These exist for testing and calibration: catalogues with known
//! cluster structure, hierarchies that match that structure exactly,
//! and hierarchies that scramble or invert it. All generators are
//! deterministic functions of their seed, built on the pinned ChaCha8
//! sampling contract, so fixtures reproduce bit for bit everywhere.
//!
//! Item ids are `item-00000`, `item-00001`, ... in generation order.
//! Zero-padding makes lexicographic id order equal generation order, so
//! generation index `i` is also catalogue rank `i` and label slices
//! index cleanly by rank.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::corpus::{Catalogue, ItemVector};
use crate::hierarchy::{Hierarchy, ItemId, NodeSpec};
use crate::sampling::{bounded, std_normal};

/// One Gaussian cluster: `count` points around `center` with isotropic
/// spread `sigma`.
#[derive(Debug, Clone)]
pub struct Blob {
    pub center: Vec<f64>,
    pub count: usize,
    pub sigma: f64,
}

impl Blob {
    pub fn new(center: Vec<f64>, count: usize, sigma: f64) -> Self {
        Blob {
            center,
            count,
            sigma,
        }
    }
}

fn item_id(i: usize) -> ItemId {
    ItemId::from(format!("item-{i:05}"))
}

/// Sample a catalogue of Gaussian blobs. Returns the catalogue and the
/// blob index of each item, indexed by rank.
///
/// Panics if a blob's center dimension disagrees with `dim` or no blob
/// has any points; generator misuse is a bug in the caller, not input.
pub fn gaussian_blobs(seed: u64, dim: usize, blobs: &[Blob]) -> (Catalogue, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut labels = Vec::new();
    for (b, blob) in blobs.iter().enumerate() {
        assert_eq!(blob.center.len(), dim, "blob {b} center has wrong dimension");
        for _ in 0..blob.count {
            let v: Vec<f64> = blob
                .center
                .iter()
                .map(|&c| c + blob.sigma * std_normal(&mut rng))
                .collect();
            entries.push((item_id(labels.len()), ItemVector::Dense(v)));
            labels.push(b);
        }
    }
    assert!(!entries.is_empty(), "blobs contain no points");
    let catalogue = Catalogue::from_vectors(entries).expect("generated vectors are valid");
    (catalogue, labels)
}

/// Two-level hierarchy matching a labeling: one leaf per distinct label
/// under a single root. `labels[i]` is the group of `ids[i]`.
pub fn grouped_hierarchy(labels: &[usize], ids: &[ItemId]) -> Hierarchy {
    assert_eq!(labels.len(), ids.len(), "one label per item");
    let n_groups = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut groups: Vec<Vec<ItemId>> = vec![Vec::new(); n_groups];
    for (label, id) in labels.iter().zip(ids) {
        groups[*label].push(id.clone());
    }
    let children: Vec<NodeSpec> = groups
        .into_iter()
        .enumerate()
        .filter(|(_, items)| !items.is_empty())
        .map(|(g, items)| NodeSpec::leaf(format!("g{g}"), items))
        .collect();
    Hierarchy::from_spec(NodeSpec::internal("root", children))
        .expect("grouped construction is structurally valid")
}

/// Seeded uniform shuffle of a label assignment. The multiset of labels
/// is preserved; their association with items is destroyed.
pub fn permuted_labels(labels: &[usize], seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = labels.to_vec();
    for i in (1..out.len()).rev() {
        let j = bounded(&mut rng, (i + 1) as u64) as usize;
        out.swap(i, j);
    }
    out
}

/// Deliberately bad grouping: repeatedly pair the lowest-ranked free
/// item with the free item farthest from it, and deal the pairs out to
/// `n_groups` groups round-robin. Every group ends up a mix of mutually
/// distant points, the opposite of a coherent cluster.
pub fn antagonistic_pairs_hierarchy(catalogue: &Catalogue, n_groups: usize) -> Hierarchy {
    assert!(n_groups > 0, "need at least one group");
    let n = catalogue.len();
    let dense: Vec<Vec<f64>> = (0..n).map(|r| catalogue.by_rank(r).1.to_dense()).collect();
    let sq_dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    };

    let mut free = vec![true; n];
    let mut group_of = vec![0usize; n];
    let mut g = 0usize;
    for a in 0..n {
        if !free[a] {
            continue;
        }
        free[a] = false;
        group_of[a] = g;
        let mut partner: Option<(usize, f64)> = None;
        for b in (a + 1)..n {
            if !free[b] {
                continue;
            }
            let d = sq_dist(&dense[a], &dense[b]);
            // Strict greater keeps the smallest rank on ties.
            if partner.map_or(true, |(_, best)| d > best) {
                partner = Some((b, d));
            }
        }
        if let Some((b, _)) = partner {
            free[b] = false;
            group_of[b] = g;
        }
        g = (g + 1) % n_groups;
    }
    grouped_hierarchy(&group_of, catalogue.ids())
}

/// Catalogue drawn from a hierarchical Gaussian process together with
/// the hierarchy that generated it.
///
/// Items are split in half recursively down to leaves of at most four;
/// each split drifts the two child centers apart by independent
/// `N(0, step_sigma)` offsets, and leaf items scatter around their leaf
/// center with spread `leaf_sigma`. The resulting tree is near-balanced
/// binary with depth about `log2(n_items / 4)`.
pub fn hierarchical_gaussian(
    seed: u64,
    n_items: usize,
    dim: usize,
    step_sigma: f64,
    leaf_sigma: f64,
) -> (Catalogue, Hierarchy) {
    assert!(n_items > 0, "need at least one item");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_items);
    let mut next_label = 0usize;
    // Balanced splits keep the recursion depth logarithmic in n_items.
    let spec = grow_gaussian_node(
        &mut rng,
        &mut entries,
        &mut next_label,
        n_items,
        &vec![0.0; dim],
        step_sigma,
        leaf_sigma,
    );
    let catalogue = Catalogue::from_vectors(entries).expect("generated vectors are valid");
    let hierarchy = Hierarchy::from_spec(spec).expect("generated tree is structurally valid");
    (catalogue, hierarchy)
}

fn grow_gaussian_node(
    rng: &mut ChaCha8Rng,
    entries: &mut Vec<(ItemId, ItemVector)>,
    next_label: &mut usize,
    count: usize,
    center: &[f64],
    step_sigma: f64,
    leaf_sigma: f64,
) -> NodeSpec {
    let label = format!("n{}", *next_label);
    *next_label += 1;
    if count <= 4 {
        let mut items = Vec::with_capacity(count);
        for _ in 0..count {
            let v: Vec<f64> = center
                .iter()
                .map(|&c| c + leaf_sigma * std_normal(rng))
                .collect();
            items.push(item_id(entries.len()));
            entries.push((items.last().unwrap().clone(), ItemVector::Dense(v)));
        }
        return NodeSpec::leaf(label, items);
    }
    let left_count = count / 2;
    let mut children = Vec::with_capacity(2);
    for child_count in [left_count, count - left_count] {
        let child_center: Vec<f64> = center
            .iter()
            .map(|&c| c + step_sigma * std_normal(rng))
            .collect();
        children.push(grow_gaussian_node(
            rng,
            entries,
            next_label,
            child_count,
            &child_center,
            step_sigma,
            leaf_sigma,
        ));
    }
    NodeSpec::internal(label, children)
}

/// Random hierarchy over the given items: recursive seeded partition
/// with node arity up to `max_children`. Structure varies widely with
/// the seed (leaf sizes, arities, depth); item order within leaves
/// follows the input order.
pub fn random_partition_hierarchy(seed: u64, ids: &[ItemId], max_children: usize) -> Hierarchy {
    assert!(!ids.is_empty(), "need at least one item");
    assert!(max_children >= 2, "splits need at least two parts");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next_label = 0usize;
    let spec = grow_partition_node(&mut rng, &mut next_label, ids, max_children);
    Hierarchy::from_spec(spec).expect("generated tree is structurally valid")
}

fn grow_partition_node(
    rng: &mut ChaCha8Rng,
    next_label: &mut usize,
    ids: &[ItemId],
    max_children: usize,
) -> NodeSpec {
    let label = format!("n{}", *next_label);
    *next_label += 1;
    let n = ids.len();
    // Singletons are always leaves; small slices become leaves one time
    // in four, to mix multi-item leaves into the population.
    if n == 1 || (n <= 6 && bounded(rng, 4) == 0) {
        return NodeSpec::leaf(label, ids.to_vec());
    }
    let arity = 2 + bounded(rng, (max_children.min(n) - 1) as u64) as usize;
    // arity - 1 distinct cut points out of the n - 1 interior gaps.
    let mut gaps: Vec<usize> = (1..n).collect();
    for i in 0..(arity - 1) {
        let j = i + bounded(rng, (gaps.len() - i) as u64) as usize;
        gaps.swap(i, j);
    }
    let mut cuts: Vec<usize> = gaps[..arity - 1].to_vec();
    cuts.sort_unstable();
    cuts.push(n);
    let mut children = Vec::with_capacity(arity);
    let mut start = 0;
    for cut in cuts {
        children.push(grow_partition_node(rng, next_label, &ids[start..cut], max_children));
        start = cut;
    }
    NodeSpec::internal(label, children)
}

/// Catalogue of `n` standard normal vectors in `dim` dimensions.
pub fn random_vectors(seed: u64, n: usize, dim: usize) -> Catalogue {
    assert!(n > 0, "need at least one item");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n).map(|i| {
        let v: Vec<f64> = (0..dim).map(|_| std_normal(&mut rng)).collect();
        (item_id(i), ItemVector::Dense(v))
    });
    Catalogue::from_vectors(entries.collect::<Vec<_>>()).expect("generated vectors are valid")
}
