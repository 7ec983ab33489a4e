//! The summarization-agnostic tree index: a root with sparse full-fanout
//! children keyed by low-cardinality word prefixes, inner binary splits by
//! cardinality promotion, and buffered leaves.
//!
//! Build is chunk-parallel: words are computed in parallel, grouped by
//! root key, and each root subtree is built independently from its
//! id-sorted entries. The resulting tree content is therefore identical
//! for every worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::summarizer::Summarizer;
use crate::wire::{self, Reader};
use crate::word::Word;

pub const DEFAULT_LEAF_CAPACITY: usize = 20_000;

const TREE_MAGIC: &[u8; 4] = b"SXT1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexConfig {
    pub leaf_capacity: usize,
    /// Bits per position at the root level.
    pub initial_cardinality: u8,
    pub worker_count: usize,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            leaf_capacity: DEFAULT_LEAF_CAPACITY,
            initial_cardinality: 1,
            worker_count: 1,
        }
    }
}

/// One position of a node signature: the symbol prefix currently pinned
/// and the number of bits it uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigPos {
    pub prefix: u8,
    pub card: u8,
}

pub type Signature = Box<[SigPos]>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafEntry {
    pub id: u64,
    pub word: Word,
}

#[derive(Debug)]
pub struct LeafNode {
    pub signature: Signature,
    pub entries: Vec<LeafEntry>,
    /// Set when every position is at full cardinality; capacity is waived.
    pub overflow: bool,
}

#[derive(Debug)]
pub struct InnerNode {
    pub signature: Signature,
    /// Position whose cardinality the children promote.
    pub split_position: usize,
    pub children: Box<[Node; 2]>,
}

#[derive(Debug)]
pub enum Node {
    Inner(InnerNode),
    Leaf(LeafNode),
}

impl Node {
    pub fn signature(&self) -> &Signature {
        match self {
            Node::Inner(n) => &n.signature,
            Node::Leaf(n) => &n.signature,
        }
    }
}

pub enum SplitOutcome {
    Split(InnerNode),
    /// No position has spare cardinality; the leaf keeps growing.
    Overflow(LeafNode),
}

/// Split a full leaf by promoting one bit at the position that balances
/// the two children best (ties to the lowest position index).
pub fn split_leaf(leaf: LeafNode, full_bits: u8) -> SplitOutcome {
    let len = leaf.entries.len() as i64;
    let mut best: Option<(i64, usize)> = None;
    for (p, sig) in leaf.signature.iter().enumerate() {
        if sig.card >= full_bits {
            continue;
        }
        let child_card = sig.card + 1;
        let ones = leaf
            .entries
            .iter()
            .filter(|e| e.word.prefix(p, child_card, full_bits) & 1 == 1)
            .count() as i64;
        let imbalance = (len - 2 * ones).abs();
        if best.map_or(true, |(b, _)| imbalance < b) {
            best = Some((imbalance, p));
        }
    }
    let Some((_, pos)) = best else {
        return SplitOutcome::Overflow(LeafNode {
            overflow: true,
            ..leaf
        });
    };
    let child_card = leaf.signature[pos].card + 1;
    let mut sig0 = leaf.signature.clone();
    sig0[pos] = SigPos {
        prefix: leaf.signature[pos].prefix << 1,
        card: child_card,
    };
    let mut sig1 = sig0.clone();
    sig1[pos].prefix |= 1;
    let (zeros, ones): (Vec<_>, Vec<_>) = leaf
        .entries
        .into_iter()
        .partition(|e| e.word.prefix(pos, child_card, full_bits) & 1 == 0);
    SplitOutcome::Split(InnerNode {
        signature: leaf.signature,
        split_position: pos,
        children: Box::new([
            Node::Leaf(LeafNode {
                signature: sig0,
                entries: zeros,
                overflow: false,
            }),
            Node::Leaf(LeafNode {
                signature: sig1,
                entries: ones,
                overflow: false,
            }),
        ]),
    })
}

fn route(inner: &InnerNode, word: &Word, full_bits: u8) -> usize {
    let child_card = inner.signature[inner.split_position].card + 1;
    (word.prefix(inner.split_position, child_card, full_bits) & 1) as usize
}

fn insert_into(node: &mut Node, entry: LeafEntry, capacity: usize, full_bits: u8) {
    match node {
        Node::Inner(inner) => {
            let c = route(inner, &entry.word, full_bits);
            insert_into(&mut inner.children[c], entry, capacity, full_bits);
        }
        Node::Leaf(leaf) => {
            leaf.entries.push(entry);
            if leaf.entries.len() > capacity && !leaf.overflow {
                split_node(node, capacity, full_bits);
            }
        }
    }
}

/// Replace an over-capacity leaf with a split, recursively re-splitting
/// children that remain over capacity (skewed payloads).
fn split_node(node: &mut Node, capacity: usize, full_bits: u8) {
    let Node::Leaf(leaf) = std::mem::replace(
        node,
        Node::Leaf(LeafNode {
            signature: Box::new([]),
            entries: Vec::new(),
            overflow: false,
        }),
    ) else {
        unreachable!("split_node on inner node");
    };
    match split_leaf(leaf, full_bits) {
        SplitOutcome::Overflow(l) => *node = Node::Leaf(l),
        SplitOutcome::Split(mut inner) => {
            for child in inner.children.iter_mut() {
                let over = matches!(child, Node::Leaf(l) if l.entries.len() > capacity);
                if over {
                    split_node(child, capacity, full_bits);
                }
            }
            *node = Node::Inner(inner);
        }
    }
}

pub struct IndexTree {
    pub config: IndexConfig,
    pub word_length: usize,
    pub full_bits: u8,
    pub root: BTreeMap<Box<[u8]>, Node>,
    total: usize,
}

impl IndexTree {
    pub fn new(config: IndexConfig, word_length: usize, full_bits: u8) -> Self {
        assert!(config.initial_cardinality >= 1 && config.initial_cardinality <= full_bits);
        assert!(config.leaf_capacity >= 1);
        IndexTree {
            config,
            word_length,
            full_bits,
            root: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn root_key(&self, word: &Word) -> Box<[u8]> {
        let card = self.config.initial_cardinality;
        (0..self.word_length)
            .map(|p| word.prefix(p, card, self.full_bits))
            .collect()
    }

    fn root_signature(&self, key: &[u8]) -> Signature {
        key.iter()
            .map(|&prefix| SigPos {
                prefix,
                card: self.config.initial_cardinality,
            })
            .collect()
    }

    pub fn insert(&mut self, id: u64, word: Word) {
        debug_assert_eq!(word.len(), self.word_length);
        let key = self.root_key(&word);
        let entry = LeafEntry { id, word };
        let capacity = self.config.leaf_capacity;
        let full_bits = self.full_bits;
        match self.root.get_mut(&key) {
            Some(node) => insert_into(node, entry, capacity, full_bits),
            None => {
                let signature = self.root_signature(&key);
                self.root.insert(
                    key,
                    Node::Leaf(LeafNode {
                        signature,
                        entries: vec![entry],
                        overflow: false,
                    }),
                );
            }
        }
        self.total += 1;
    }

    pub fn leaves(&self) -> Vec<&LeafNode> {
        let mut out = Vec::new();
        for node in self.root.values() {
            collect_leaves(node, &mut out);
        }
        out
    }

    /// Full structural audit: prefix containment at every node, exactly-two
    /// children on inner nodes differing by one promoted bit, capacity on
    /// non-overflow leaves, and payload completeness against `expected_ids`.
    pub fn audit(&self, expected_ids: Option<&[u64]>) -> Result<()> {
        let mut seen = Vec::with_capacity(self.total);
        for (key, node) in &self.root {
            let sig = node.signature();
            if sig.len() != self.word_length {
                return Err(audit_err("root signature length mismatch"));
            }
            for (p, s) in sig.iter().enumerate() {
                if s.card != self.config.initial_cardinality || s.prefix != key[p] {
                    return Err(audit_err("root child signature does not match its key"));
                }
            }
            audit_node(node, self.config.leaf_capacity, self.full_bits, &mut seen)?;
        }
        if seen.len() != self.total {
            return Err(audit_err("leaf payload count does not match insert count"));
        }
        if let Some(expected) = expected_ids {
            let mut seen_sorted = seen;
            seen_sorted.sort_unstable();
            let mut expected_sorted = expected.to_vec();
            expected_sorted.sort_unstable();
            if seen_sorted != expected_sorted {
                return Err(audit_err("indexed id multiset differs from ingested ids"));
            }
        }
        Ok(())
    }

    /// Tree serialization; round-trips bit-exactly.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        buf.extend_from_slice(TREE_MAGIC);
        wire::put_u64(&mut buf, self.config.leaf_capacity as u64);
        wire::put_u8(&mut buf, self.config.initial_cardinality);
        wire::put_u64(&mut buf, self.config.worker_count as u64);
        wire::put_u64(&mut buf, self.word_length as u64);
        wire::put_u8(&mut buf, self.full_bits);
        wire::put_u64(&mut buf, self.total as u64);
        wire::put_u64(&mut buf, self.root.len() as u64);
        for (key, node) in &self.root {
            buf.extend_from_slice(key);
            write_node(&mut buf, node);
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "index tree");
        r.expect_magic(TREE_MAGIC)?;
        let leaf_capacity = r.u64()? as usize;
        let initial_cardinality = r.u8()?;
        let worker_count = r.u64()? as usize;
        let word_length = r.u64()? as usize;
        let full_bits = r.u8()?;
        let total = r.u64()? as usize;
        let keys = r.u64()? as usize;
        let mut root = BTreeMap::new();
        for _ in 0..keys {
            let key: Box<[u8]> = r.bytes(word_length)?.into();
            let node = read_node(&mut r, word_length)?;
            root.insert(key, node);
        }
        r.done()?;
        Ok(IndexTree {
            config: IndexConfig {
                leaf_capacity,
                initial_cardinality,
                worker_count,
            },
            word_length,
            full_bits,
            root,
            total,
        })
    }
}

fn audit_err(msg: &str) -> Error {
    Error::AuditFailed(msg.to_string())
}

fn collect_leaves<'a>(node: &'a Node, out: &mut Vec<&'a LeafNode>) {
    match node {
        Node::Leaf(l) => out.push(l),
        Node::Inner(i) => {
            collect_leaves(&i.children[0], out);
            collect_leaves(&i.children[1], out);
        }
    }
}

fn audit_node(node: &Node, capacity: usize, full_bits: u8, seen: &mut Vec<u64>) -> Result<()> {
    match node {
        Node::Leaf(leaf) => {
            if !leaf.overflow && leaf.entries.len() > capacity {
                return Err(audit_err("non-overflow leaf above capacity"));
            }
            for e in &leaf.entries {
                for (p, s) in leaf.signature.iter().enumerate() {
                    if e.word.prefix(p, s.card, full_bits) != s.prefix {
                        return Err(audit_err("entry word violates leaf signature prefix"));
                    }
                }
                seen.push(e.id);
            }
            Ok(())
        }
        Node::Inner(inner) => {
            let p = inner.split_position;
            let parent = inner.signature[p];
            for (bit, child) in inner.children.iter().enumerate() {
                let sig = child.signature();
                for (q, s) in sig.iter().enumerate() {
                    let want = if q == p {
                        SigPos {
                            prefix: (parent.prefix << 1) | bit as u8,
                            card: parent.card + 1,
                        }
                    } else {
                        inner.signature[q]
                    };
                    if *s != want {
                        return Err(audit_err("child signature differs from one-bit promotion"));
                    }
                }
                audit_node(child, capacity, full_bits, seen)?;
            }
            Ok(())
        }
    }
}

fn write_node(buf: &mut Vec<u8>, node: &Node) {
    // signatures are re-derived on read; only structure and payload travel
    match node {
        Node::Inner(inner) => {
            wire::put_u8(buf, 0);
            wire::put_u32(buf, inner.split_position as u32);
            write_node(buf, &inner.children[0]);
            write_node(buf, &inner.children[1]);
        }
        Node::Leaf(leaf) => {
            wire::put_u8(buf, 1);
            wire::put_u8(buf, leaf.overflow as u8);
            wire::put_u64(buf, leaf.entries.len() as u64);
            for e in &leaf.entries {
                wire::put_u64(buf, e.id);
                buf.extend_from_slice(&e.word.symbols);
            }
        }
    }
}

fn read_node(r: &mut Reader<'_>, word_length: usize) -> Result<Node> {
    match r.u8()? {
        0 => {
            let split_position = r.u32()? as usize;
            let c0 = read_node(r, word_length)?;
            let c1 = read_node(r, word_length)?;
            Ok(Node::Inner(InnerNode {
                signature: Box::new([]),
                split_position,
                children: Box::new([c0, c1]),
            }))
        }
        1 => {
            let overflow = r.u8()? != 0;
            let count = r.u64()? as usize;
            let mut entries = Vec::with_capacity(count);
            for _ in 0..count {
                let id = r.u64()?;
                let word = Word::new(r.bytes(word_length)?.to_vec());
                entries.push(LeafEntry {
                    id,
                    word,
                    });
            }
            Ok(Node::Leaf(LeafNode {
                signature: Box::new([]),
                entries,
                overflow,
            }))
        }
        t => Err(r.corrupt(format!("bad node tag {t}"))),
    }
}

/// Re-derive every node signature from the root keys down (used after
/// deserialization, where signatures are not stored).
fn rebuild_signatures(tree: &mut IndexTree) {
    let init = tree.config.initial_cardinality;
    let keys: Vec<Box<[u8]>> = tree.root.keys().cloned().collect();
    for key in keys {
        let sig: Signature = key
            .iter()
            .map(|&prefix| SigPos { prefix, card: init })
            .collect();
        let node = tree.root.get_mut(&key).unwrap();
        assign_signatures(node, sig);
    }
}

fn assign_signatures(node: &mut Node, sig: Signature) {
    match node {
        Node::Leaf(leaf) => leaf.signature = sig,
        Node::Inner(inner) => {
            let p = inner.split_position;
            let parent = sig[p];
            for (bit, child) in inner.children.iter_mut().enumerate() {
                let mut child_sig = sig.clone();
                child_sig[p] = SigPos {
                    prefix: (parent.prefix << 1) | bit as u8,
                    card: parent.card + 1,
                };
                assign_signatures(child, child_sig);
            }
            inner.signature = sig;
        }
    }
}

/// Deserialize a tree and restore node signatures.
pub fn tree_from_bytes(bytes: &[u8]) -> Result<IndexTree> {
    let mut tree = IndexTree::from_bytes(bytes)?;
    rebuild_signatures(&mut tree);
    Ok(tree)
}

/// Lower bound of the squared distance between the query and anything
/// stored under `node`, at the node's signature cardinalities.
pub fn node_lower_bound<S: Summarizer>(
    summarizer: &S,
    query_proj: &[f64],
    node: &Node,
    bsf: f64,
) -> f64 {
    let sig = node.signature();
    summarizer.signature_lower_bound(query_proj, |p| (sig[p].prefix, sig[p].card), bsf)
}

/// Wall time of the two build phases.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildPhases {
    /// Computing every series' word.
    pub transform: std::time::Duration,
    /// Grouping and growing the tree.
    pub tree: std::time::Duration,
}

/// Build the index: transform every series, group by root key, then build
/// each root subtree from its id-sorted entries.
///
/// `config.worker_count` bounds the parallelism; the resulting tree does
/// not depend on it.
pub fn build_index<S: Summarizer>(
    dataset: &crate::series::Dataset,
    summarizer: &S,
    config: IndexConfig,
) -> Result<IndexTree> {
    build_index_timed(dataset, summarizer, config).map(|(tree, _)| tree)
}

/// [`build_index`] with per-phase timing for build reports.
pub fn build_index_timed<S: Summarizer>(
    dataset: &crate::series::Dataset,
    summarizer: &S,
    config: IndexConfig,
) -> Result<(IndexTree, BuildPhases)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count.max(1))
        .build()
        .expect("thread pool");
    let mut tree = IndexTree::new(config, summarizer.word_length(), summarizer.full_bits());

    let t0 = std::time::Instant::now();
    let words: Vec<Word> = pool.install(|| {
        (0..dataset.len())
            .into_par_iter()
            .map(|i| summarizer.transform(dataset.series(i)))
            .collect()
    });
    let transform_time = t0.elapsed();
    let t1 = std::time::Instant::now();

    let mut groups: BTreeMap<Box<[u8]>, Vec<LeafEntry>> = BTreeMap::new();
    for (i, word) in words.into_iter().enumerate() {
        let key = tree.root_key(&word);
        groups.entry(key).or_default().push(LeafEntry {
            id: i as u64,
            word,
        });
    }

    let capacity = config.leaf_capacity;
    let full_bits = tree.full_bits;
    let built: Vec<(Box<[u8]>, Node, usize)> = pool.install(|| {
        groups
            .into_par_iter()
            .map(|(key, mut entries)| {
                entries.sort_by_key(|e| e.id);
                let count = entries.len();
                let signature: Signature = key
                    .iter()
                    .map(|&prefix| SigPos {
                        prefix,
                        card: config.initial_cardinality,
                    })
                    .collect();
                let mut node = Node::Leaf(LeafNode {
                    signature,
                    entries: Vec::new(),
                    overflow: false,
                });
                for e in entries {
                    insert_into(&mut node, e, capacity, full_bits);
                }
                (key, node, count)
            })
            .collect()
    });
    for (key, node, count) in built {
        tree.root.insert(key, node);
        tree.total += count;
    }
    Ok((
        tree,
        BuildPhases {
            transform: transform_time,
            tree: t1.elapsed(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Dataset;
    use crate::sfa::{learn_mcb, McbParams};
    use rand::prelude::*;

    fn small_config(leaf: usize, workers: usize) -> IndexConfig {
        IndexConfig {
            leaf_capacity: leaf,
            initial_cardinality: 1,
            worker_count: workers,
        }
    }

    fn random_dataset(seed: u64, count: usize, n: usize) -> Dataset {
        let mut rng = StdRng::seed_from_u64(seed);
        let raw: Vec<f32> = (0..count * n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        Dataset::from_raw(raw, n).unwrap()
    }

    fn word_of(bits: &[u8]) -> Word {
        Word::new(bits.to_vec())
    }

    #[test]
    fn identical_series_form_single_leaf() {
        let mut tree = IndexTree::new(small_config(10, 1), 4, 8);
        for i in 0..10 {
            tree.insert(i, word_of(&[7, 7, 7, 7]));
        }
        assert_eq!(tree.root.len(), 1);
        assert_eq!(tree.leaves().len(), 1);
        tree.audit(Some(&(0..10).collect::<Vec<_>>())).unwrap();
    }

    #[test]
    fn duplicate_words_overflow_without_recursion() {
        let mut tree = IndexTree::new(small_config(4, 1), 2, 8);
        for i in 0..50 {
            tree.insert(i, word_of(&[5, 9]));
        }
        tree.audit(None).unwrap();
        let leaves = tree.leaves();
        let big: Vec<_> = leaves.iter().filter(|l| !l.entries.is_empty()).collect();
        assert_eq!(big.len(), 1);
        assert!(big[0].overflow);
        assert_eq!(big[0].entries.len(), 50);
    }

    #[test]
    fn capacity_overflow_triggers_one_split() {
        let mut tree = IndexTree::new(small_config(4, 1), 2, 8);
        // same root key (same top bits), separable on the next bit
        for i in 0..5u64 {
            let sym = if i % 2 == 0 { 128u8 } else { 192 };
            tree.insert(i, word_of(&[sym, 3]));
        }
        tree.audit(Some(&(0..5).collect::<Vec<_>>())).unwrap();
        assert_eq!(tree.root.len(), 1);
        let leaves = tree.leaves();
        assert_eq!(leaves.len(), 2);
        let mut sizes: Vec<usize> = leaves.iter().map(|l| l.entries.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 3]);
    }

    #[test]
    fn balanced_split_picks_the_balancing_position() {
        // position 1's next bit separates the payload exactly in half,
        // position 0 is uniform
        let mut entries = Vec::new();
        for i in 0..8u64 {
            let sym1 = if i % 2 == 0 { 0u8 } else { 64 };
            entries.push(LeafEntry {
                id: i,
                word: word_of(&[0, sym1]),
            });
        }
        let leaf = LeafNode {
            signature: vec![SigPos { prefix: 0, card: 1 }; 2].into_boxed_slice(),
            entries,
            overflow: false,
        };
        match split_leaf(leaf, 8) {
            SplitOutcome::Split(inner) => {
                assert_eq!(inner.split_position, 1);
                for c in inner.children.iter() {
                    match c {
                        Node::Leaf(l) => assert_eq!(l.entries.len(), 4),
                        _ => panic!("expected leaves"),
                    }
                }
            }
            SplitOutcome::Overflow(_) => panic!("expected a split"),
        }
    }

    #[test]
    fn split_balance_is_optimal_among_positions() {
        let mut rng = StdRng::seed_from_u64(30);
        for _ in 0..50 {
            let l = 4;
            let entries: Vec<LeafEntry> = (0..32)
                .map(|i| LeafEntry {
                    id: i,
                    word: word_of(&(0..l).map(|_| rng.gen::<u8>()).collect::<Vec<_>>()),
                })
                .collect();
            let card = rng.gen_range(1..7u8);
            let sig: Signature = (0..l)
                .map(|p| SigPos {
                    prefix: entries[0].word.prefix(p, card, 8),
                    card,
                })
                .collect();
            // keep only entries matching the signature so the leaf is valid
            let entries: Vec<LeafEntry> = entries
                .into_iter()
                .filter(|e| (0..l).all(|p| e.word.prefix(p, card, 8) == sig[p].prefix))
                .collect();
            if entries.len() < 2 {
                continue;
            }
            // exhaustive oracle over candidate positions
            let len = entries.len() as i64;
            let best_imbalance = (0..l)
                .map(|p| {
                    let ones = entries
                        .iter()
                        .filter(|e| e.word.prefix(p, card + 1, 8) & 1 == 1)
                        .count() as i64;
                    (len - 2 * ones).abs()
                })
                .min()
                .unwrap();
            let leaf = LeafNode {
                signature: sig,
                entries,
                overflow: false,
            };
            match split_leaf(leaf, 8) {
                SplitOutcome::Split(inner) => {
                    let sizes: Vec<i64> = inner
                        .children
                        .iter()
                        .map(|c| match c {
                            Node::Leaf(l) => l.entries.len() as i64,
                            _ => unreachable!(),
                        })
                        .collect();
                    assert_eq!((sizes[0] - sizes[1]).abs(), best_imbalance);
                }
                SplitOutcome::Overflow(_) => panic!("cardinality not exhausted"),
            }
        }
    }

    #[test]
    fn random_inserts_pass_audit() {
        let mut rng = StdRng::seed_from_u64(31);
        let mut tree = IndexTree::new(small_config(8, 1), 4, 8);
        let mut ids = Vec::new();
        for i in 0..30_000u64 {
            let w: Vec<u8> = (0..4).map(|_| rng.gen()).collect();
            tree.insert(i, word_of(&w));
            ids.push(i);
            if i % 10_000 == 9_999 {
                tree.audit(Some(&ids)).unwrap();
            }
        }
        tree.audit(Some(&ids)).unwrap();
    }

    #[test]
    fn build_is_worker_invariant_and_complete() {
        let ds = random_dataset(32, 5_000, 64);
        let model = learn_mcb(
            &ds,
            &McbParams {
                sampling_ratio: 0.1,
                word_length: 8,
                alphabet_size: 64,
                ..Default::default()
            },
        )
        .unwrap();
        let t1 = build_index(&ds, &model, small_config(50, 1)).unwrap();
        let t4 = build_index(&ds, &model, small_config(50, 4)).unwrap();
        let ids: Vec<u64> = (0..ds.len() as u64).collect();
        t1.audit(Some(&ids)).unwrap();
        t4.audit(Some(&ids)).unwrap();
        // identical beyond the serialized worker_count field (bytes 13..21)
        assert_eq!(t1.to_bytes()[21..], t4.to_bytes()[21..]);
    }

    #[test]
    fn node_lbd_respects_containment_and_hierarchy() {
        let ds = random_dataset(33, 2_000, 64);
        let model = learn_mcb(
            &ds,
            &McbParams {
                sampling_ratio: 0.2,
                ..Default::default()
            },
        )
        .unwrap();
        let tree = build_index(&ds, &model, small_config(40, 1)).unwrap();
        let mut rng = StdRng::seed_from_u64(34);
        let mut checked = 0;
        for _ in 0..200 {
            let q = rng.gen_range(0..ds.len());
            let proj = model.project(ds.series(q));
            for node in tree.root.values() {
                let mut chain = vec![node];
                let mut cur = node;
                while let Node::Inner(inner) = cur {
                    cur = &inner.children[if rng.gen() { 1 } else { 0 }];
                    chain.push(cur);
                }
                let mut prev = -1.0;
                for n in &chain {
                    let lbd = node_lower_bound(&model, &proj, n, f64::INFINITY);
                    assert!(lbd + 1e-12 >= prev, "descendant LBD dropped");
                    prev = lbd;
                }
                if let Node::Leaf(leaf) = chain[chain.len() - 1] {
                    for e in leaf.entries.iter().take(20) {
                        let wl = model.word_lower_bound(&proj, &e.word, f64::INFINITY);
                        assert!(prev <= wl + 1e-12, "leaf LBD exceeds member word LBD");
                        checked += 1;
                    }
                }
            }
            if checked > 1_000 {
                break;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn tree_serialization_round_trip_preserves_audit() {
        let ds = random_dataset(35, 3_000, 64);
        let model = learn_mcb(
            &ds,
            &McbParams {
                sampling_ratio: 0.2,
                ..Default::default()
            },
        )
        .unwrap();
        let tree = build_index(&ds, &model, small_config(64, 2)).unwrap();
        let bytes = tree.to_bytes();
        let back = tree_from_bytes(&bytes).unwrap();
        assert_eq!(bytes, back.to_bytes());
        let ids: Vec<u64> = (0..ds.len() as u64).collect();
        back.audit(Some(&ids)).unwrap();
    }
}
