//! Evaluation harness: tightness of lower bound (TLB), pruning power,
//! and index-shape statistics, with stable CSV output.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{IndexTree, LeafNode, Node};
use crate::query::Engine;
use crate::series::{euclidean_distance, Dataset};
use crate::summarizer::Summarizer;
use crate::word::Word;

/// Mean LBD/ED ratio (both unsquared) of one (method, alphabet) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TlbReport {
    pub method: String,
    pub alphabet_size: usize,
    pub word_length: usize,
    pub mean_tlb: f64,
    /// Pairs actually used (zero-distance pairs are skipped).
    pub pairs: usize,
}

pub const TLB_CSV_HEADER: &str = "method,alphabet,l,mean_tlb,pairs";

impl TlbReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{}",
            self.method, self.alphabet_size, self.word_length, self.mean_tlb, self.pairs
        )
    }
}

/// Mean tightness of the lower bound over `queries x sampled series`.
///
/// Up to `pair_budget` dataset series are sampled uniformly with `seed`;
/// every query is paired with each of them. Pairs at distance zero are
/// skipped. The report is deterministic for a fixed seed and budget.
pub fn tlb<S: Summarizer>(
    summarizer: &S,
    method: &str,
    dataset: &Dataset,
    queries: &Dataset,
    pair_budget: usize,
    seed: u64,
) -> Result<TlbReport> {
    if pair_budget == 0 || queries.is_empty() {
        return Err(Error::Empty("tlb pair set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let take = pair_budget.min(dataset.len());
    let mut ids = rand::seq::index::sample(&mut rng, dataset.len(), take).into_vec();
    ids.sort_unstable();
    let words: Vec<Word> = ids
        .iter()
        .map(|&i| summarizer.transform(dataset.series(i)))
        .collect();

    let per_query: Vec<(f64, usize)> = (0..queries.len())
        .into_par_iter()
        .map(|qi| {
            let q = queries.series(qi);
            let proj = summarizer.project(q);
            let mut sum = 0.0;
            let mut used = 0;
            for (&i, word) in ids.iter().zip(&words) {
                let ed = euclidean_distance(q, dataset.series(i)).expect("equal lengths");
                if ed == 0.0 {
                    continue;
                }
                let lbd = summarizer.word_lower_bound(&proj, word, f64::INFINITY).sqrt();
                sum += lbd / ed;
                used += 1;
            }
            (sum, used)
        })
        .collect();

    let pairs: usize = per_query.iter().map(|&(_, u)| u).sum();
    if pairs == 0 {
        return Err(Error::Empty("tlb pair set"));
    }
    let mean_tlb = per_query.iter().map(|&(s, _)| s).sum::<f64>() / pairs as f64;
    Ok(TlbReport {
        method: method.to_string(),
        alphabet_size: summarizer.alphabet_size(),
        word_length: summarizer.word_length(),
        mean_tlb,
        pairs,
    })
}

/// Mean fraction of dataset series whose exact distance was never
/// computed while answering the queries.
pub fn pruning_power<S: Summarizer>(
    engine: &Engine<S>,
    queries: &Dataset,
    k: usize,
    workers: usize,
) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::Empty("queries"));
    }
    let n = engine.dataset().len() as f64;
    let mut total = 0.0;
    for qi in 0..queries.len() {
        let (_, stats) = engine.exact_knn(queries.series(qi), k, workers)?;
        total += 1.0 - stats.exact_distance_computations as f64 / n;
    }
    Ok(total / queries.len() as f64)
}

/// Shape of a built tree. Depth 1 is a leaf hanging directly off the root.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexStats {
    pub root_fanout: usize,
    pub leaf_count: usize,
    pub overflow_leaf_count: usize,
    pub total_entries: usize,
    pub max_depth: usize,
    /// leaf depth -> number of leaves at that depth
    pub depth_histogram: BTreeMap<usize, usize>,
    /// mean entries/capacity over non-overflow leaves
    pub mean_leaf_fill: f64,
}

pub fn index_stats(tree: &IndexTree) -> IndexStats {
    let mut stats = IndexStats {
        root_fanout: tree.root.len(),
        leaf_count: 0,
        overflow_leaf_count: 0,
        total_entries: 0,
        max_depth: 0,
        depth_histogram: BTreeMap::new(),
        mean_leaf_fill: 0.0,
    };
    let mut fill_sum = 0.0;
    let mut fill_count = 0usize;
    let mut visit = |leaf: &LeafNode, depth: usize| {
        stats.leaf_count += 1;
        stats.total_entries += leaf.entries.len();
        stats.max_depth = stats.max_depth.max(depth);
        *stats.depth_histogram.entry(depth).or_insert(0) += 1;
        if leaf.overflow {
            stats.overflow_leaf_count += 1;
        } else {
            fill_sum += leaf.entries.len() as f64 / tree.config.leaf_capacity as f64;
            fill_count += 1;
        }
    };
    for node in tree.root.values() {
        walk(node, 1, &mut visit);
    }
    if fill_count > 0 {
        stats.mean_leaf_fill = fill_sum / fill_count as f64;
    }
    stats
}

fn walk<'a>(node: &'a Node, depth: usize, visit: &mut impl FnMut(&'a LeafNode, usize)) {
    match node {
        Node::Leaf(leaf) => visit(leaf, depth),
        Node::Inner(inner) => {
            walk(&inner.children[0], depth + 1, visit);
            walk(&inner.children[1], depth + 1, visit);
        }
    }
}

/// Median of a sample (mean of the middle two for even sizes).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
