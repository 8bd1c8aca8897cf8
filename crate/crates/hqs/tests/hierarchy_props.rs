//! Structural properties of the hierarchy type over randomized trees.

use std::collections::BTreeSet;

use hqs::hierarchy::{Hierarchy, ItemId};
use hqs::synthetic::random_partition_hierarchy;
use proptest::prelude::*;

fn ids(n: usize) -> Vec<ItemId> {
    (0..n).map(|i| ItemId::from(format!("item-{i:05}"))).collect()
}

proptest! {
    /// Serialize-then-parse reproduces the tree node for node: same
    /// pre-order layout, labels, edges, items, depths and sizes.
    #[test]
    fn round_trip_reproduces_the_tree(seed in 0u64..500, n in 1usize..40, arity in 2usize..6) {
        let h = random_partition_hierarchy(seed, &ids(n), arity);
        let (back, warnings) = Hierarchy::parse_with_warnings(&h.to_json()).unwrap();
        prop_assert!(warnings.is_empty());
        prop_assert_eq!(h.node_count(), back.node_count());
        for (a, b) in h.nodes().iter().zip(back.nodes().iter()) {
            prop_assert_eq!(a.id, b.id);
            prop_assert_eq!(&a.label, &b.label);
            prop_assert_eq!(a.parent, b.parent);
            prop_assert_eq!(&a.children, &b.children);
            prop_assert_eq!(&a.items, &b.items);
            prop_assert_eq!(a.depth, b.depth);
            prop_assert_eq!(a.cluster_size, b.cluster_size);
        }
    }

    /// Every internal cluster is exactly the disjoint union of its
    /// children's clusters.
    #[test]
    fn internal_clusters_partition_into_children(seed in 0u64..500, n in 1usize..40) {
        let h = random_partition_hierarchy(seed, &ids(n), 5);
        for node in h.nodes() {
            if node.children.is_empty() {
                continue;
            }
            let own = h.cluster_items(node.id).unwrap();
            let mut merged = BTreeSet::new();
            let mut child_total = 0;
            for &child in &node.children {
                let c = h.cluster_items(child).unwrap();
                child_total += c.len();
                merged.extend(c);
            }
            // Equal sets with matching cardinality means disjoint parts.
            prop_assert_eq!(merged.len(), child_total);
            prop_assert_eq!(own, merged);
            prop_assert_eq!(node.cluster_size, child_total);
        }
    }

    /// The path to an item starts at the root, ends at the item's leaf,
    /// and walks parent-child edges the whole way.
    #[test]
    fn paths_walk_root_to_leaf(seed in 0u64..300, n in 1usize..40) {
        let items = ids(n);
        let h = random_partition_hierarchy(seed, &items, 4);
        for item in &items {
            let path = h.path_to_item(item).unwrap();
            prop_assert!(!path.is_empty());
            prop_assert_eq!(path[0], h.root());
            prop_assert_eq!(*path.last().unwrap(), h.leaf_of(item).unwrap());
            for pair in path.windows(2) {
                prop_assert_eq!(h.node(pair[1]).parent, Some(pair[0]));
                prop_assert!(h.node(pair[0]).children.contains(&pair[1]));
            }
            // Depth along the path is just the index.
            for (t, &node) in path.iter().enumerate() {
                prop_assert_eq!(h.node(node).depth, t);
            }
            // Every node on the path contains the item; siblings off the
            // path do not.
            for &node in &path {
                prop_assert!(h.cluster_contains(node, item));
            }
        }
    }

    /// Pre-order ids: children always carry larger indices than their
    /// parent, and an entire subtree occupies a contiguous id range.
    #[test]
    fn node_ids_are_preorder(seed in 0u64..300, n in 1usize..40) {
        let h = random_partition_hierarchy(seed, &ids(n), 4);
        for node in h.nodes() {
            for &child in &node.children {
                prop_assert!(child.index() > node.id.index());
            }
        }
    }
}
