//! Properties of the vector catalogue, TF-IDF pipeline and the
//! average-link hierarchy builder.

use std::collections::BTreeSet;

use hqs::corpus::{
    build_average_link_hierarchy, build_tfidf, centroid, cosine, Catalogue, ItemVector,
};
use hqs::hierarchy::ItemId;
use hqs::synthetic::random_vectors;
use proptest::prelude::*;

proptest! {
    /// The centroid does not care in which order the members are listed.
    #[test]
    fn centroid_is_permutation_invariant(seed in 0u64..200, n in 2usize..20) {
        let cat = random_vectors(seed, n, 3);
        let mut members: Vec<ItemId> = cat.ids().to_vec();
        let forward = centroid(&cat, &members).unwrap();
        members.reverse();
        let backward = centroid(&cat, &members).unwrap();
        for (a, b) in forward.iter().zip(backward.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    /// Scaling every vector scales the centroid by the same factor.
    #[test]
    fn centroid_scales_linearly(seed in 0u64..200, n in 2usize..15, scale in -4.0f64..4.0) {
        let cat = random_vectors(seed, n, 3);
        let scaled = Catalogue::from_vectors(cat.iter().map(|(id, v)| {
            let mut w = v.clone();
            w.scale(scale);
            (id.clone(), w)
        })).unwrap();
        let base = centroid(&cat, cat.ids()).unwrap();
        let big = centroid(&scaled, scaled.ids()).unwrap();
        for (a, b) in base.iter().zip(big.iter()) {
            prop_assert!((a * scale - b).abs() < 1e-9);
        }
    }

    /// The agglomerative builder always yields a structurally valid
    /// binary dendrogram: 2N-1 nodes, two children per internal node,
    /// every cluster the disjoint union of its children.
    #[test]
    fn average_link_output_is_a_valid_dendrogram(seed in 0u64..150, n in 1usize..30) {
        let cat = random_vectors(seed, n, 4);
        let h = build_average_link_hierarchy(&cat).unwrap();
        prop_assert_eq!(h.node_count(), 2 * n - 1);
        prop_assert_eq!(h.n_items(), n);
        prop_assert_eq!(h.node(h.root()).cluster_size, n);
        for node in h.nodes() {
            if node.is_leaf() {
                prop_assert_eq!(node.items.len(), 1);
            } else {
                prop_assert_eq!(node.children.len(), 2);
                let mut merged = BTreeSet::new();
                let mut total = 0;
                for &child in &node.children {
                    let c = h.cluster_items(child).unwrap();
                    total += c.len();
                    merged.extend(c);
                }
                prop_assert_eq!(merged.len(), total);
                prop_assert_eq!(h.cluster_items(node.id).unwrap(), merged);
            }
            // Labels are the pre-order index.
            prop_assert_eq!(&node.label, &format!("n{}", node.id.index()));
        }
        // Every catalogue item ends up in exactly one leaf.
        for id in cat.ids() {
            prop_assert!(h.contains_item(id));
        }
    }

    /// Tighter pairs merge deeper: in a catalogue with one close pair
    /// and one far point, the close pair shares a deeper ancestor.
    #[test]
    fn average_link_merges_the_closest_pair_first(gap in 2.0f64..50.0) {
        let entries = [
            ("p0", vec![0.0]),
            ("p1", vec![1.0]),
            ("p2", vec![1.0 + gap]),
        ];
        let cat = Catalogue::from_vectors(
            entries
                .iter()
                .map(|(id, v)| (ItemId::from(*id), ItemVector::Dense(v.clone()))),
        )
        .unwrap();
        let h = build_average_link_hierarchy(&cat).unwrap();
        let pair: BTreeSet<ItemId> = [ItemId::from("p0"), ItemId::from("p1")].into();
        let found = h
            .nodes()
            .iter()
            .any(|n| !n.is_leaf() && h.cluster_items(n.id).unwrap() == pair);
        prop_assert!(found, "p0 and p1 should merge before p2 joins");
    }
}

#[test]
fn tfidf_disjoint_vocabularies_are_orthogonal() {
    let docs = vec![
        (ItemId::from("a"), "alpha beta gamma alpha".to_string()),
        (ItemId::from("b"), "delta epsilon zeta".to_string()),
        (ItemId::from("c"), "alpha delta".to_string()),
    ];
    let cat = build_tfidf(&docs).unwrap();
    let a = cat.get(&ItemId::from("a")).unwrap();
    let b = cat.get(&ItemId::from("b")).unwrap();
    let c = cat.get(&ItemId::from("c")).unwrap();
    // a and b share no tokens; c overlaps both.
    assert_eq!(cosine(a, b), 0.0);
    assert!(cosine(a, c) > 0.0);
    assert!(cosine(b, c) > 0.0);
}

#[test]
fn tfidf_dimension_is_the_sorted_vocabulary() {
    let docs = vec![
        (ItemId::from("a"), "zebra apple".to_string()),
        (ItemId::from("b"), "apple mango".to_string()),
    ];
    let cat = build_tfidf(&docs).unwrap();
    // Three distinct tokens across the corpus.
    assert_eq!(cat.dim(), 3);
}
