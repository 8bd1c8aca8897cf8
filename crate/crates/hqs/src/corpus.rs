//! Item vectors: ingestion, TF-IDF, centroids, and a reference
//! average-link hierarchy builder.
//!
//! Items arrive either as raw text or as numeric vectors. Text is embedded
//! with a fixed TF-IDF variant (see [`build_tfidf`]); vectors are taken as
//! given, dense or sparse. Either way they end up in a [`Catalogue`], which
//! owns the id-to-vector mapping and fixes the item order (ascending id)
//! that the rest of the crate relies on for determinism.
//!
//! The items file is JSON Lines, one record per item:
//!
//! ```json
//! {"id": "doc-1", "text": "the quick brown fox"}
//! {"id": "doc-2", "vector": [0.5, 1.25, 0.0]}
//! {"id": "doc-3", "sparse": {"dim": 3, "indices": [0, 2], "values": [1.0, 2.0]}}
//! ```
//!
//! Text records and vector records cannot be mixed in one file; dense and
//! sparse vector records can, as long as every dimension agrees.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::hierarchy::{Hierarchy, HierarchyError, ItemId, NodeSpec};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("items file line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },

    #[error("items file line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },

    #[error("items file line {line}: mixing text and vector records in one file")]
    MixedRecords { line: usize },

    #[error("duplicate item id {0}")]
    DuplicateItem(ItemId),

    #[error("empty item id")]
    EmptyItemId,

    #[error("no items")]
    EmptyCorpus,

    #[error("item {item}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        item: ItemId,
        expected: usize,
        found: usize,
    },

    #[error("item {item}: {reason}")]
    InvalidVector { item: ItemId, reason: String },

    #[error("empty item set")]
    EmptyItemSet,

    #[error("item {0} is not in the catalogue")]
    UnknownItem(ItemId),

    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

/// An item's vector representation. Sparse and dense are interchangeable in
/// all arithmetic; sparse indices are strictly increasing and below `dim`.
#[derive(Debug, Clone, PartialEq)]
pub enum ItemVector {
    Dense(Vec<f64>),
    Sparse {
        dim: usize,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

impl ItemVector {
    pub fn dim(&self) -> usize {
        match self {
            ItemVector::Dense(v) => v.len(),
            ItemVector::Sparse { dim, .. } => *dim,
        }
    }

    /// Structural validity plus finiteness of every stored value.
    fn validate(&self, item: &ItemId) -> Result<(), CorpusError> {
        match self {
            ItemVector::Dense(v) => {
                if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                    return Err(CorpusError::InvalidVector {
                        item: item.clone(),
                        reason: format!("non-finite component {bad}"),
                    });
                }
            }
            ItemVector::Sparse {
                dim,
                indices,
                values,
            } => {
                if indices.len() != values.len() {
                    return Err(CorpusError::InvalidVector {
                        item: item.clone(),
                        reason: format!(
                            "{} indices but {} values",
                            indices.len(),
                            values.len()
                        ),
                    });
                }
                for w in indices.windows(2) {
                    if w[0] >= w[1] {
                        return Err(CorpusError::InvalidVector {
                            item: item.clone(),
                            reason: "sparse indices must be strictly increasing".into(),
                        });
                    }
                }
                if let Some(&last) = indices.last() {
                    if last >= *dim {
                        return Err(CorpusError::InvalidVector {
                            item: item.clone(),
                            reason: format!("index {last} out of range for dim {dim}"),
                        });
                    }
                }
                if let Some(bad) = values.iter().find(|x| !x.is_finite()) {
                    return Err(CorpusError::InvalidVector {
                        item: item.clone(),
                        reason: format!("non-finite component {bad}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn dot(&self, other: &ItemVector) -> f64 {
        match (self, other) {
            (ItemVector::Dense(a), ItemVector::Dense(b)) => {
                a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
            }
            (
                ItemVector::Sparse {
                    indices, values, ..
                },
                ItemVector::Dense(b),
            ) => indices
                .iter()
                .zip(values.iter())
                .map(|(&i, &v)| v * b[i])
                .sum(),
            (ItemVector::Dense(_), ItemVector::Sparse { .. }) => other.dot(self),
            (
                ItemVector::Sparse {
                    indices: ia,
                    values: va,
                    ..
                },
                ItemVector::Sparse {
                    indices: ib,
                    values: vb,
                    ..
                },
            ) => {
                let (mut p, mut q, mut acc) = (0usize, 0usize, 0.0);
                while p < ia.len() && q < ib.len() {
                    match ia[p].cmp(&ib[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            acc += va[p] * vb[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                acc
            }
        }
    }

    pub fn norm_squared(&self) -> f64 {
        match self {
            ItemVector::Dense(v) => v.iter().map(|x| x * x).sum(),
            ItemVector::Sparse { values, .. } => values.iter().map(|x| x * x).sum(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Add `scale * self` into a dense accumulator of matching dimension.
    pub fn accumulate_into(&self, acc: &mut [f64], scale: f64) {
        match self {
            ItemVector::Dense(v) => {
                for (a, x) in acc.iter_mut().zip(v.iter()) {
                    *a += scale * x;
                }
            }
            ItemVector::Sparse {
                indices, values, ..
            } => {
                for (&i, &v) in indices.iter().zip(values.iter()) {
                    acc[i] += scale * v;
                }
            }
        }
    }

    /// Dot product against a dense slice of matching dimension.
    pub fn dot_dense(&self, other: &[f64]) -> f64 {
        match self {
            ItemVector::Dense(v) => v.iter().zip(other.iter()).map(|(x, y)| x * y).sum(),
            ItemVector::Sparse {
                indices, values, ..
            } => indices
                .iter()
                .zip(values.iter())
                .map(|(&i, &v)| v * other[i])
                .sum(),
        }
    }

    /// Multiply every component by `scale`, in place.
    pub fn scale(&mut self, scale: f64) {
        match self {
            ItemVector::Dense(v) => {
                for x in v.iter_mut() {
                    *x *= scale;
                }
            }
            ItemVector::Sparse { values, .. } => {
                for x in values.iter_mut() {
                    *x *= scale;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            ItemVector::Dense(v) => v.clone(),
            ItemVector::Sparse { dim, .. } => {
                let mut out = vec![0.0; *dim];
                self.accumulate_into(&mut out, 1.0);
                out
            }
        }
    }
}

/// Cosine similarity, defined as 0 when either vector has zero norm.
pub fn cosine(a: &ItemVector, b: &ItemVector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dot(b) / (na * nb)
}

/// The item universe: every item's id and vector, ordered by ascending id.
/// That order (an item's "rank") is the deterministic iteration order for
/// every reduction in this crate.
#[derive(Debug, Clone)]
pub struct Catalogue {
    ids: Vec<ItemId>,
    vectors: Vec<ItemVector>,
    rank: HashMap<ItemId, usize>,
    dim: usize,
}

impl Catalogue {
    /// Build a catalogue from (id, vector) pairs in any order. All vectors
    /// must share one dimension; ids must be unique and non-empty.
    pub fn from_vectors(
        entries: impl IntoIterator<Item = (ItemId, ItemVector)>,
    ) -> Result<Catalogue, CorpusError> {
        let mut pairs: Vec<(ItemId, ItemVector)> = entries.into_iter().collect();
        if pairs.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let dim = pairs[0].1.dim();
        let mut ids = Vec::with_capacity(pairs.len());
        let mut vectors = Vec::with_capacity(pairs.len());
        let mut rank = HashMap::with_capacity(pairs.len());
        for (id, vector) in pairs {
            if id.as_str().is_empty() {
                return Err(CorpusError::EmptyItemId);
            }
            if vector.dim() != dim {
                return Err(CorpusError::DimensionMismatch {
                    item: id,
                    expected: dim,
                    found: vector.dim(),
                });
            }
            vector.validate(&id)?;
            match rank.entry(id.clone()) {
                Entry::Occupied(_) => return Err(CorpusError::DuplicateItem(id)),
                Entry::Vacant(v) => {
                    v.insert(ids.len());
                }
            }
            ids.push(id);
            vectors.push(vector);
        }
        Ok(Catalogue {
            ids,
            vectors,
            rank,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Ids in ascending order; the position of an id here is its rank.
    pub fn ids(&self) -> &[ItemId] {
        &self.ids
    }

    pub fn rank_of(&self, id: &ItemId) -> Option<usize> {
        self.rank.get(id).copied()
    }

    pub fn get(&self, id: &ItemId) -> Option<&ItemVector> {
        self.rank_of(id).map(|r| &self.vectors[r])
    }

    pub fn by_rank(&self, rank: usize) -> (&ItemId, &ItemVector) {
        (&self.ids[rank], &self.vectors[rank])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ItemId, &ItemVector)> {
        self.ids.iter().zip(self.vectors.iter())
    }
}

/// Contents of a parsed items file: all text or all vectors, never mixed.
#[derive(Debug, Clone)]
pub enum ItemsFile {
    Texts(Vec<(ItemId, String)>),
    Vectors(Vec<(ItemId, ItemVector)>),
}

impl ItemsFile {
    /// Number of records.
    pub fn len(&self) -> usize {
        match self {
            ItemsFile::Texts(v) => v.len(),
            ItemsFile::Vectors(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Embed text through [`build_tfidf`]; pass vectors through unchanged.
    pub fn into_catalogue(self) -> Result<Catalogue, CorpusError> {
        match self {
            ItemsFile::Texts(docs) => build_tfidf(&docs),
            ItemsFile::Vectors(entries) => Catalogue::from_vectors(entries),
        }
    }
}

#[derive(serde::Deserialize)]
struct RawSparse {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(serde::Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    vector: Option<Vec<f64>>,
    #[serde(default)]
    sparse: Option<RawSparse>,
}

/// Parse a JSON Lines items file. Blank lines are skipped; the first
/// record fixes whether the file carries text or vectors.
pub fn parse_items(input: &str) -> Result<ItemsFile, CorpusError> {
    let mut texts: Vec<(ItemId, String)> = Vec::new();
    let mut vectors: Vec<(ItemId, ItemVector)> = Vec::new();
    let mut kind: Option<bool> = None; // true = text file, false = vector file

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord =
            serde_json::from_str(line).map_err(|source| CorpusError::Json {
                line: line_no,
                source,
            })?;
        let id = ItemId::new(record.id);
        if id.as_str().is_empty() {
            return Err(CorpusError::InvalidRecord {
                line: line_no,
                reason: "empty item id".into(),
            });
        }
        let payloads =
            usize::from(record.text.is_some()) + usize::from(record.vector.is_some())
                + usize::from(record.sparse.is_some());
        if payloads != 1 {
            return Err(CorpusError::InvalidRecord {
                line: line_no,
                reason: format!(
                    "expected exactly one of \"text\", \"vector\" or \"sparse\", found {payloads}"
                ),
            });
        }
        let is_text = record.text.is_some();
        match kind {
            None => kind = Some(is_text),
            Some(k) if k != is_text => {
                return Err(CorpusError::MixedRecords { line: line_no });
            }
            Some(_) => {}
        }
        if let Some(text) = record.text {
            texts.push((id, text));
        } else if let Some(dense) = record.vector {
            vectors.push((id, ItemVector::Dense(dense)));
        } else if let Some(RawSparse {
            dim,
            indices,
            values,
        }) = record.sparse
        {
            vectors.push((
                id,
                ItemVector::Sparse {
                    dim,
                    indices,
                    values,
                },
            ));
        }
    }

    match kind {
        None => Err(CorpusError::EmptyCorpus),
        Some(true) => Ok(ItemsFile::Texts(texts)),
        Some(false) => Ok(ItemsFile::Vectors(vectors)),
    }
}

/// Parse an items file and embed it into a catalogue in one step.
pub fn load_catalogue(input: &str) -> Result<Catalogue, CorpusError> {
    parse_items(input)?.into_catalogue()
}

/// Lowercased alphanumeric runs; everything else separates tokens.
fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_owned())
        .collect()
}

/// Embed text documents as TF-IDF vectors.
///
/// The variant is pinned, because downstream scores depend on it:
/// tokens are lowercased alphanumeric runs; term frequency is the raw
/// in-document count; `idf(t) = ln((1 + D) / (1 + df(t))) + 1` with `D` the
/// document count; vectors are not length-normalized. The vocabulary is
/// every term in the corpus, sorted, and fixes the vector dimension.
pub fn build_tfidf(docs: &[(ItemId, String)]) -> Result<Catalogue, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let tokenized: Vec<Vec<String>> = docs.iter().map(|(_, text)| tokenize(text)).collect();

    let mut vocab: BTreeMap<&str, usize> = BTreeMap::new();
    for tokens in &tokenized {
        for t in tokens {
            let next = vocab.len();
            vocab.entry(t.as_str()).or_insert(next);
        }
    }
    // BTreeMap iteration is sorted; re-index so that term index order is
    // lexicographic, independent of document order.
    for (i, (_, slot)) in vocab.iter_mut().enumerate() {
        *slot = i;
    }
    let dim = vocab.len();

    let n_docs = docs.len() as f64;
    let mut df = vec![0usize; dim];
    for tokens in &tokenized {
        let distinct: BTreeSet<&str> = tokens.iter().map(|t| t.as_str()).collect();
        for t in distinct {
            df[vocab[t]] += 1;
        }
    }
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| ((1.0 + n_docs) / (1.0 + d as f64)).ln() + 1.0)
        .collect();

    let mut entries = Vec::with_capacity(docs.len());
    for ((id, _), tokens) in docs.iter().zip(tokenized.iter()) {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens {
            *counts.entry(vocab[t.as_str()]).or_insert(0.0) += 1.0;
        }
        let indices: Vec<usize> = counts.keys().copied().collect();
        let values: Vec<f64> = counts.iter().map(|(&i, &tf)| tf * idf[i]).collect();
        entries.push((
            id.clone(),
            ItemVector::Sparse {
                dim,
                indices,
                values,
            },
        ));
    }
    Catalogue::from_vectors(entries)
}

/// Mean vector of the given items, as a dense vector.
pub fn centroid<'a>(
    catalogue: &Catalogue,
    items: impl IntoIterator<Item = &'a ItemId>,
) -> Result<Vec<f64>, CorpusError> {
    let mut acc = vec![0.0; catalogue.dim()];
    let mut count = 0usize;
    for id in items {
        let v = catalogue
            .get(id)
            .ok_or_else(|| CorpusError::UnknownItem(id.clone()))?;
        v.accumulate_into(&mut acc, 1.0);
        count += 1;
    }
    if count == 0 {
        return Err(CorpusError::EmptyItemSet);
    }
    let inv = 1.0 / count as f64;
    for a in &mut acc {
        *a *= inv;
    }
    Ok(acc)
}

/// Agglomerative average-link clustering over squared Euclidean distance.
///
/// Every item starts as a singleton leaf; each step merges the pair of
/// clusters with the smallest average pairwise squared distance, until one
/// root remains. The result always has exactly `2N - 1` nodes and is a
/// binary merge tree. Fully deterministic: items are ranked by ascending
/// id, clusters are numbered in creation order (originals first, merges
/// after), distance ties are broken by the smallest (then second-smallest)
/// creation index, and a merged node lists its lower-creation child first.
/// Node labels are `n<k>` where `k` is the node's final pre-order index.
///
/// Time is cubic and memory quadratic in the number of items; this builder
/// is meant for reference hierarchies over small and medium corpora.
pub fn build_average_link_hierarchy(catalogue: &Catalogue) -> Result<Hierarchy, CorpusError> {
    let n = catalogue.len();

    // Merge arena: leaves are ranks 0..n, merges append. Children are
    // arena indices, which double as creation indices.
    struct Slot {
        creation: usize,
        size: usize,
    }
    let mut children: Vec<Option<(usize, usize)>> = vec![None; n];

    let dense: Vec<Vec<f64>> = (0..n).map(|r| catalogue.by_rank(r).1.to_dense()).collect();
    let sq = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| {
                let d = x - y;
                d * d
            })
            .sum()
    };

    let mut slots: Vec<Slot> = (0..n).map(|r| Slot { creation: r, size: 1 }).collect();
    // Symmetric distance matrix over live slots, compacted by swap-remove
    // on every merge.
    let mut dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| sq(&dense[i], &dense[j])).collect())
        .collect();

    while slots.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..slots.len() {
            for j in (i + 1)..slots.len() {
                let d = dist[i][j];
                let (ca, cb) = {
                    let (x, y) = (slots[i].creation, slots[j].creation);
                    if x < y { (x, y) } else { (y, x) }
                };
                let better = match &best {
                    None => true,
                    Some((bd, bca, bcb, _, _)) => (d, ca, cb) < (*bd, *bca, *bcb),
                };
                if better {
                    best = Some((d, ca, cb, i, j));
                }
            }
        }
        let (_, ca, cb, i, j) = best.expect("at least two slots");

        let creation = children.len();
        children.push(Some((ca, cb)));
        let merged_size = slots[i].size + slots[j].size;

        // Average-link update: the mean pairwise distance from the merged
        // cluster to any other is the size-weighted mean of its parts'.
        let (wi, wj) = (slots[i].size as f64, slots[j].size as f64);
        for k in 0..slots.len() {
            if k == i || k == j {
                continue;
            }
            let d = (wi * dist[i][k] + wj * dist[j][k]) / (wi + wj);
            dist[i][k] = d;
            dist[k][i] = d;
        }
        slots[i] = Slot {
            creation,
            size: merged_size,
        };

        // Drop slot j by swapping in the last slot.
        let last = slots.len() - 1;
        slots.swap_remove(j);
        if j != last {
            for k in 0..dist.len() {
                dist[k][j] = dist[k][last];
            }
            dist.swap(j, last);
        }
        dist.pop();
        for row in &mut dist {
            row.pop();
        }
    }

    let root = if n == 1 { 0 } else { children.len() - 1 };

    // Pre-order numbering over the merge arena, lower-creation child first.
    let total = children.len();
    let mut preorder = vec![0usize; total];
    let mut next = 0usize;
    let mut stack = vec![root];
    while let Some(idx) = stack.pop() {
        preorder[idx] = next;
        next += 1;
        if let Some((a, b)) = children[idx] {
            stack.push(b);
            stack.push(a);
        }
    }

    // Assemble specs bottom-up; children always have lower arena indices
    // than the merge that created them.
    let mut built: Vec<Option<NodeSpec>> = (0..total).map(|_| None).collect();
    for idx in 0..total {
        let label = format!("n{}", preorder[idx]);
        let spec = match children[idx] {
            None => NodeSpec::leaf(label, vec![catalogue.by_rank(idx).0.clone()]),
            Some((a, b)) => NodeSpec::internal(
                label,
                vec![
                    built[a].take().expect("child before parent"),
                    built[b].take().expect("child before parent"),
                ],
            ),
        };
        built[idx] = Some(spec);
    }
    let spec = built[root].take().expect("root built last");
    Ok(Hierarchy::from_spec(spec)?)
}
