//! The cluster hierarchy: a rooted tree whose leaves carry items.
//!
//! Every item lives in exactly one leaf, so each tree level induces a
//! partition of the item universe (coarser near the root, finer below).
//! Internal nodes carry no items of their own; a node's cluster is the set
//! of items under it. Leaves must be non-empty and internal nodes must have
//! at least one child; unary chains are accepted and simply repeat the same
//! cluster at successive depths.
//!
//! The on-disk format is a nested JSON document. Each node is an object with
//! an `"id"` string and exactly one of `"children"` (an array of nodes) or
//! `"items"` (an array of item id strings):
//!
//! ```json
//! {
//!   "id": "root",
//!   "children": [
//!     {"id": "left",  "items": ["a", "b"]},
//!     {"id": "right", "items": ["c"]}
//!   ]
//! }
//! ```
//!
//! Unknown keys are ignored with a warning. Parsing assigns every node a
//! dense index in document pre-order with the root at 0; the index is the
//! authoritative identity everywhere in this crate, while the
//! document-supplied `"id"` string is what reports show to people.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::de::Deserialize;
use serde::{Deserializer, Serialize, Serializer};

/// Identifier of an item, as it appears in item files and leaf item lists.
/// Ordering is lexicographic on bytes; that order defines the item "rank"
/// used for deterministic reductions and sampling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemId(String);

impl ItemId {
    pub fn new(id: impl Into<String>) -> Self {
        ItemId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ItemId {
    fn from(s: &str) -> Self {
        ItemId(s.to_owned())
    }
}

impl From<String> for ItemId {
    fn from(s: String) -> Self {
        ItemId(s)
    }
}

impl Serialize for ItemId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ItemId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer).map(ItemId)
    }
}

/// Dense node index assigned in document pre-order; the root is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    /// Wrap a raw index. Useful for driving score-level functions
    /// standalone; ids used against a hierarchy must come from it.
    pub fn from_index(index: usize) -> Self {
        NodeId(index)
    }

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HierarchyError {
    #[error("malformed hierarchy document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed hierarchy document: {0}")]
    Malformed(String),

    #[error("document nesting depth {depth} exceeds the supported maximum {max}")]
    TooDeep { depth: usize, max: usize },

    #[error("node {label:?} has neither \"children\" nor \"items\"")]
    MissingPayload { label: String },

    #[error("node {label:?} has both \"children\" and \"items\"")]
    BothChildrenAndItems { label: String },

    #[error("internal node {label:?} has an empty child list")]
    EmptyChildren { label: String },

    #[error("leaf {label:?} has an empty item list")]
    EmptyLeaf { label: String },

    #[error("leaf {label:?} contains an empty item id")]
    EmptyItemId { label: String },

    #[error("item {item} appears in more than one leaf (second time under {label:?})")]
    DuplicateItem { item: ItemId, label: String },

    #[error("item {0} is not in the hierarchy")]
    ItemNotFound(ItemId),

    #[error("node index {0} is out of range")]
    UnknownNode(NodeId),
}

/// One node of a parsed hierarchy.
#[derive(Debug, Clone)]
pub struct Node {
    pub id: NodeId,
    /// Document-supplied `"id"` string; shown in reports, not required to be
    /// unique across the document.
    pub label: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Items stored directly on this node; non-empty exactly for leaves.
    pub items: Vec<ItemId>,
    /// Distance from the root (root = 0).
    pub depth: usize,
    /// Number of items in the subtree rooted here. Never zero.
    pub cluster_size: usize,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Build input for constructing a hierarchy in code (the parser, the
/// average-link builder and the synthetic generators all go through this).
#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub label: String,
    pub payload: NodeSpecPayload,
}

#[derive(Debug, Clone)]
pub enum NodeSpecPayload {
    Children(Vec<NodeSpec>),
    Items(Vec<ItemId>),
}

impl NodeSpec {
    pub fn internal(label: impl Into<String>, children: Vec<NodeSpec>) -> Self {
        NodeSpec {
            label: label.into(),
            payload: NodeSpecPayload::Children(children),
        }
    }

    pub fn leaf(label: impl Into<String>, items: Vec<ItemId>) -> Self {
        NodeSpec {
            label: label.into(),
            payload: NodeSpecPayload::Items(items),
        }
    }
}

/// A validated, immutable cluster hierarchy.
///
/// `nodes[i].id.index() == i` always holds; nodes are stored in document
/// pre-order, so a parent's index is smaller than all indices in its
/// subtree.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    nodes: Vec<Node>,
    n_items: usize,
    item_leaf: HashMap<ItemId, NodeId>,
}

/// Nesting ceiling for parsed documents. Two JSON levels per tree level
/// leaves room for hierarchies a couple of thousand nodes deep, while
/// keeping the recursive deserializer's stack usage bounded on hostile
/// inputs.
pub const MAX_PARSE_NESTING: usize = 4096;

/// Parse a hierarchy document, discarding warnings about unknown keys.
pub fn parse_hierarchy(text: &str) -> Result<Hierarchy, HierarchyError> {
    Hierarchy::parse(text)
}

impl Hierarchy {
    /// Parse a hierarchy document, discarding warnings about unknown keys.
    pub fn parse(text: &str) -> Result<Hierarchy, HierarchyError> {
        Self::parse_with_warnings(text).map(|(h, _)| h)
    }

    /// Parse a hierarchy document. Unknown keys on nodes do not fail the
    /// parse; they are reported back as one warning string each.
    pub fn parse_with_warnings(text: &str) -> Result<(Hierarchy, Vec<String>), HierarchyError> {
        let depth = max_json_nesting(text);
        if depth > MAX_PARSE_NESTING {
            return Err(HierarchyError::TooDeep {
                depth,
                max: MAX_PARSE_NESTING,
            });
        }
        // The nesting pre-check above makes it safe to lift serde_json's
        // recursion limit, which legitimate deep hierarchies exceed.
        let mut de = serde_json::Deserializer::from_str(text);
        de.disable_recursion_limit();
        let value = serde_json::Value::deserialize(&mut de)?;
        de.end()?;

        let mut warnings = Vec::new();
        let spec = spec_from_value(value, &mut warnings)?;
        let hierarchy = Hierarchy::from_spec(spec)?;
        Ok((hierarchy, warnings))
    }

    /// Construct and validate a hierarchy from an in-memory tree.
    pub fn from_spec(spec: NodeSpec) -> Result<Hierarchy, HierarchyError> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut item_leaf: HashMap<ItemId, NodeId> = HashMap::new();

        // Iterative pre-order walk; children are pushed in reverse so they
        // are visited (and numbered) in document order.
        let mut stack: Vec<(NodeSpec, Option<NodeId>, usize)> = vec![(spec, None, 0)];
        while let Some((node_spec, parent, depth)) = stack.pop() {
            let NodeSpec { label, payload } = node_spec;
            let id = NodeId(nodes.len());
            if let Some(p) = parent {
                nodes[p.index()].children.push(id);
            }
            let mut items = Vec::new();
            let mut child_specs = Vec::new();
            match payload {
                NodeSpecPayload::Children(children) => {
                    if children.is_empty() {
                        return Err(HierarchyError::EmptyChildren { label });
                    }
                    child_specs = children;
                }
                NodeSpecPayload::Items(leaf_items) => {
                    if leaf_items.is_empty() {
                        return Err(HierarchyError::EmptyLeaf { label });
                    }
                    for item in leaf_items {
                        if item.as_str().is_empty() {
                            return Err(HierarchyError::EmptyItemId { label });
                        }
                        match item_leaf.entry(item.clone()) {
                            Entry::Occupied(_) => {
                                return Err(HierarchyError::DuplicateItem { item, label });
                            }
                            Entry::Vacant(v) => {
                                v.insert(id);
                            }
                        }
                        items.push(item);
                    }
                }
            }
            nodes.push(Node {
                id,
                label,
                parent,
                children: Vec::new(),
                items,
                depth,
                cluster_size: 0,
            });
            for child in child_specs.into_iter().rev() {
                stack.push((child, Some(id), depth + 1));
            }
        }

        // Subtree sizes, bottom-up. Children always have larger indices
        // than their parent, so one reverse pass suffices.
        for i in (0..nodes.len()).rev() {
            let size = if nodes[i].children.is_empty() {
                nodes[i].items.len()
            } else {
                nodes[i]
                    .children
                    .clone()
                    .iter()
                    .map(|c| nodes[c.index()].cluster_size)
                    .sum()
            };
            nodes[i].cluster_size = size;
        }

        let n_items = item_leaf.len();
        Ok(Hierarchy {
            nodes,
            n_items,
            item_leaf,
        })
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    /// Range-checked node lookup, for indices that did not come from this
    /// hierarchy.
    pub fn get(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of distinct items across all leaves.
    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id.index()].is_leaf()
    }

    pub fn contains_item(&self, item: &ItemId) -> bool {
        self.item_leaf.contains_key(item)
    }

    /// The leaf holding `item`.
    pub fn leaf_of(&self, item: &ItemId) -> Option<NodeId> {
        self.item_leaf.get(item).copied()
    }

    /// All items in the hierarchy, in leaf pre-order then document order
    /// within each leaf.
    pub fn items(&self) -> impl Iterator<Item = &ItemId> {
        self.nodes.iter().flat_map(|n| n.items.iter())
    }

    /// The set of items in the subtree rooted at `node` (the node's
    /// cluster). The tree is immutable, so callers that need this
    /// repeatedly can cache it.
    pub fn cluster_items(&self, node: NodeId) -> Result<BTreeSet<ItemId>, HierarchyError> {
        if node.index() >= self.nodes.len() {
            return Err(HierarchyError::UnknownNode(node));
        }
        let mut out = BTreeSet::new();
        let mut stack = vec![node];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id.index()];
            for item in &n.items {
                out.insert(item.clone());
            }
            stack.extend(n.children.iter().copied());
        }
        Ok(out)
    }

    /// The node path from the root down to the leaf containing `item`,
    /// inclusive at both ends.
    pub fn path_to_item(&self, item: &ItemId) -> Result<Vec<NodeId>, HierarchyError> {
        let leaf = self
            .item_leaf
            .get(item)
            .copied()
            .ok_or_else(|| HierarchyError::ItemNotFound(item.clone()))?;
        let mut path = Vec::with_capacity(self.nodes[leaf.index()].depth + 1);
        let mut cur = Some(leaf);
        while let Some(id) = cur {
            path.push(id);
            cur = self.nodes[id.index()].parent;
        }
        path.reverse();
        Ok(path)
    }

    /// Whether `item` is contained in the cluster of `node`, i.e. whether
    /// `node` lies on the item's root path.
    pub fn cluster_contains(&self, node: NodeId, item: &ItemId) -> bool {
        let Some(leaf) = self.leaf_of(item) else {
            return false;
        };
        let target_depth = self.nodes[node.index()].depth;
        let mut cur = leaf;
        loop {
            let n = &self.nodes[cur.index()];
            if n.depth == target_depth {
                return cur == node;
            }
            match n.parent {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Serialize back to the document format. Output parses to an identical
    /// hierarchy (same labels, same structure, same item placement, same
    /// pre-order indices).
    pub fn to_json(&self) -> String {
        enum Frame {
            Node { id: NodeId, indent: usize },
            Literal(&'static str),
            CloseNode { indent: usize },
        }

        let mut out = String::new();
        let mut stack = vec![Frame::Node {
            id: self.root(),
            indent: 0,
        }];
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Literal(s) => out.push_str(s),
                Frame::CloseNode { indent } => {
                    out.push('\n');
                    push_indent(&mut out, indent + 2);
                    out.push(']');
                    out.push('\n');
                    push_indent(&mut out, indent);
                    out.push('}');
                }
                Frame::Node { id, indent } => {
                    let node = &self.nodes[id.index()];
                    push_indent(&mut out, indent);
                    if node.is_leaf() {
                        out.push_str("{\"id\": ");
                        out.push_str(&json_string(&node.label));
                        out.push_str(", \"items\": [");
                        for (i, item) in node.items.iter().enumerate() {
                            if i > 0 {
                                out.push_str(", ");
                            }
                            out.push_str(&json_string(item.as_str()));
                        }
                        out.push_str("]}");
                    } else {
                        out.push_str("{\n");
                        push_indent(&mut out, indent + 2);
                        out.push_str("\"id\": ");
                        out.push_str(&json_string(&node.label));
                        out.push_str(",\n");
                        push_indent(&mut out, indent + 2);
                        out.push_str("\"children\": [\n");
                        stack.push(Frame::CloseNode { indent });
                        for (pos, child) in node.children.iter().enumerate().rev() {
                            stack.push(Frame::Node {
                                id: *child,
                                indent: indent + 4,
                            });
                            if pos > 0 {
                                stack.push(Frame::Literal(",\n"));
                            }
                        }
                    }
                }
            }
        }
        out.push('\n');
        out
    }
}

fn push_indent(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push(' ');
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}

/// Maximum `{`/`[` nesting depth of `text`, ignoring brackets inside string
/// literals. Counts unmatched opens too, so truncated documents still get a
/// defensible depth.
fn max_json_nesting(text: &str) -> usize {
    let mut depth = 0usize;
    let mut max = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for b in text.bytes() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' | b'[' => {
                depth += 1;
                max = max.max(depth);
            }
            b'}' | b']' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    max
}

/// Convert a parsed JSON value into a `NodeSpec` tree, collecting warnings
/// for unknown keys. Iterative: document depth must not touch the call
/// stack.
fn spec_from_value(
    value: serde_json::Value,
    warnings: &mut Vec<String>,
) -> Result<NodeSpec, HierarchyError> {
    use serde_json::Value;

    // Arena of partially-built nodes; children recorded by arena index and
    // stitched into specs afterwards.
    struct Pending {
        label: String,
        items: Option<Vec<ItemId>>,
        children_idx: Vec<usize>,
    }

    let mut arena: Vec<Pending> = Vec::new();
    let mut order: Vec<usize> = Vec::new(); // completion order, parents first
    let mut stack: Vec<(Value, Option<usize>)> = vec![(value, None)];

    while let Some((value, parent)) = stack.pop() {
        let Value::Object(mut map) = value else {
            return Err(HierarchyError::Malformed(
                "every node must be a JSON object".into(),
            ));
        };
        let label = match map.remove("id") {
            Some(Value::String(s)) => s,
            Some(_) => {
                return Err(HierarchyError::Malformed(
                    "node \"id\" must be a string".into(),
                ));
            }
            None => {
                return Err(HierarchyError::Malformed(
                    "node object is missing \"id\"".into(),
                ));
            }
        };
        let children = map.remove("children");
        let items = map.remove("items");
        for key in map.keys() {
            warnings.push(format!(
                "ignoring unknown key {key:?} on node {label:?}"
            ));
        }

        let idx = arena.len();
        if let Some(p) = parent {
            arena[p].children_idx.push(idx);
        }
        order.push(idx);

        match (children, items) {
            (Some(_), Some(_)) => {
                return Err(HierarchyError::BothChildrenAndItems { label });
            }
            (None, None) => {
                return Err(HierarchyError::MissingPayload { label });
            }
            (Some(children), None) => {
                let Value::Array(children) = children else {
                    return Err(HierarchyError::Malformed(format!(
                        "\"children\" of node {label:?} must be an array"
                    )));
                };
                arena.push(Pending {
                    label,
                    items: None,
                    children_idx: Vec::new(),
                });
                for child in children.into_iter().rev() {
                    stack.push((child, Some(idx)));
                }
            }
            (None, Some(items)) => {
                let Value::Array(items) = items else {
                    return Err(HierarchyError::Malformed(format!(
                        "\"items\" of node {label:?} must be an array"
                    )));
                };
                let mut parsed = Vec::with_capacity(items.len());
                for item in items {
                    let Value::String(s) = item else {
                        return Err(HierarchyError::Malformed(format!(
                            "\"items\" of node {label:?} must contain only strings"
                        )));
                    };
                    parsed.push(ItemId::new(s));
                }
                arena.push(Pending {
                    label,
                    items: Some(parsed),
                    children_idx: Vec::new(),
                });
            }
        }
    }

    // Stitch bottom-up: children complete before their parent is assembled.
    let mut built: Vec<Option<NodeSpec>> = (0..arena.len()).map(|_| None).collect();
    for &idx in order.iter().rev() {
        let Pending {
            label,
            items,
            children_idx,
        } = std::mem::replace(
            &mut arena[idx],
            Pending {
                label: String::new(),
                items: None,
                children_idx: Vec::new(),
            },
        );
        let payload = match items {
            Some(items) => NodeSpecPayload::Items(items),
            None => {
                let children = children_idx
                    .into_iter()
                    .map(|c| built[c].take().expect("child built before parent"))
                    .collect();
                NodeSpecPayload::Children(children)
            }
        };
        built[idx] = Some(NodeSpec { label, payload });
    }
    Ok(built[0].take().expect("root is always built"))
}
