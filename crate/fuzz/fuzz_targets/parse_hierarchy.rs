//! Fuzz the hierarchy document parser. Any input must either be
//! rejected with an error or produce a tree that survives a round trip
//! through its own serializer unchanged.

#![no_main]

use hqs::hierarchy::Hierarchy;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Depth is bounded by the parser itself; bound bulk here.
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((tree, _warnings)) = Hierarchy::parse_with_warnings(text) else {
        return;
    };
    let (again, warnings) = Hierarchy::parse_with_warnings(&tree.to_json())
        .expect("serialized tree must parse");
    assert!(warnings.is_empty(), "serializer emitted unknown keys");
    assert_eq!(tree.node_count(), again.node_count());
    assert_eq!(tree.n_items(), again.n_items());
    for (a, b) in tree.nodes().iter().zip(again.nodes().iter()) {
        assert_eq!(a.id, b.id);
        assert_eq!(a.label, b.label);
        assert_eq!(a.parent, b.parent);
        assert_eq!(a.children, b.children);
        assert_eq!(a.items, b.items);
        assert_eq!(a.depth, b.depth);
        assert_eq!(a.cluster_size, b.cluster_size);
    }
});
