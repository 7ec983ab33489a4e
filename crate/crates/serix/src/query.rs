//! Exact k-NN answering over the tree index: approximate descent to seed
//! the best-so-far bound, parallel leaf pruning over priority queues,
//! per-series lower-bound filtering, early-abandoning exact distances,
//! and the parallel linear-scan baseline.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::index::{build_index, node_lower_bound, IndexConfig, IndexTree, LeafNode, Node};
use crate::series::Dataset;
use crate::summarizer::Summarizer;

pub use crate::series::squared_distance_early_abandon as euclidean_early_abandon;

/// One answer row: unsquared distance and the series id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: u64,
    pub distance: f64,
}

/// Instrumentation collected while answering one query.
#[derive(Debug, Clone, Default)]
pub struct QueryStats {
    /// Series whose exact (possibly abandoned) distance was touched.
    pub exact_distance_computations: u64,
    /// Per-series word lower bounds evaluated.
    pub word_lbd_computations: u64,
    /// Lower bound of every leaf or subtree pruned without a scan.
    pub pruned_lbds: Vec<f64>,
    /// Squared best-so-far values in update order (strictly decreasing).
    pub bsf_trace: Vec<f64>,
    pub wall: Duration,
}

#[derive(Debug, Clone, Copy)]
struct HeapItem {
    d2: f64,
    id: u64,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.d2 == other.d2 && self.id == other.id
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

/// Shared per-query state: the capped result heap and the monotonically
/// non-increasing squared best-so-far bound.
///
/// The bound is read lock-free; stale reads only reduce pruning. Updates
/// happen under the heap lock, so the bound always equals the k-th
/// smallest exact squared distance found so far (or infinity).
struct QueryJob {
    k: usize,
    heap: Mutex<BinaryHeap<HeapItem>>,
    bsf_bits: AtomicU64,
    trace: Mutex<Vec<f64>>,
}

impl QueryJob {
    fn new(k: usize) -> Self {
        QueryJob {
            k,
            heap: Mutex::new(BinaryHeap::with_capacity(k + 1)),
            bsf_bits: AtomicU64::new(f64::INFINITY.to_bits()),
            trace: Mutex::new(Vec::new()),
        }
    }

    fn bsf(&self) -> f64 {
        f64::from_bits(self.bsf_bits.load(Ordering::Acquire))
    }

    fn offer(&self, d2: f64, id: u64) {
        let mut heap = self.heap.lock().unwrap();
        if heap.len() == self.k {
            match heap.peek() {
                Some(top) if d2 < top.d2 => {
                    heap.pop();
                }
                _ => return,
            }
        }
        heap.push(HeapItem { d2, id });
        if heap.len() == self.k {
            let new_bsf = heap.peek().unwrap().d2;
            let old = f64::from_bits(self.bsf_bits.load(Ordering::Acquire));
            if new_bsf < old {
                self.bsf_bits.store(new_bsf.to_bits(), Ordering::Release);
                self.trace.lock().unwrap().push(new_bsf);
            }
        }
    }

    fn into_results(self) -> (Vec<Neighbor>, Vec<f64>) {
        let mut items = self.heap.into_inner().unwrap().into_vec();
        items.sort();
        let out = items
            .into_iter()
            .map(|it| Neighbor {
                id: it.id,
                distance: it.d2.sqrt(),
            })
            .collect();
        (out, self.trace.into_inner().unwrap())
    }
}

#[derive(Default)]
struct Counters {
    exact: AtomicU64,
    word_lbd: AtomicU64,
    pruned: Mutex<Vec<f64>>,
}

/// An immutable dataset plus its tree index under one summarizer.
///
/// Query answering is internally parallel; use one engine instance per
/// in-flight query.
pub struct Engine<S: Summarizer> {
    dataset: Dataset,
    summarizer: S,
    tree: IndexTree,
}

impl<S: Summarizer> Engine<S> {
    pub fn build(dataset: Dataset, summarizer: S, config: IndexConfig) -> Result<Self> {
        if dataset.series_length() != summarizer.series_length() {
            return Err(Error::LengthMismatch {
                left: dataset.series_length(),
                right: summarizer.series_length(),
            });
        }
        let tree = build_index(&dataset, &summarizer, config)?;
        Ok(Engine {
            dataset,
            summarizer,
            tree,
        })
    }

    pub fn from_parts(dataset: Dataset, summarizer: S, tree: IndexTree) -> Result<Self> {
        if dataset.series_length() != summarizer.series_length()
            || tree.word_length != summarizer.word_length()
            || tree.len() != dataset.len()
        {
            return Err(Error::Corrupt {
                what: "engine parts",
                detail: "dataset, summarizer, and tree disagree".into(),
            });
        }
        Ok(Engine {
            dataset,
            summarizer,
            tree,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn summarizer(&self) -> &S {
        &self.summarizer
    }

    pub fn tree(&self) -> &IndexTree {
        &self.tree
    }

    /// Descend to the leaf matching the query's own word (or the
    /// minimum-LBD root child when absent) and scan it, seeding the
    /// best-so-far. Returns the initial squared bound and candidate id.
    pub fn approximate_search(&self, query: &[f32]) -> Result<(f64, Option<u64>)> {
        let proj = self.summarizer.project(query);
        let word = self.summarizer.transform(query);
        let job = QueryJob::new(1);
        let counters = Counters::default();
        self.seed_descent(query, &proj, &self.tree.root_key(&word), &job, &counters);
        let (res, _) = job.into_results();
        match res.first() {
            Some(n) => Ok((n.distance * n.distance, Some(n.id))),
            None => Ok((f64::INFINITY, None)),
        }
    }

    /// Returns the leaf that was scanned so the main phase can skip it.
    fn seed_descent(
        &self,
        query: &[f32],
        proj: &[f64],
        key: &[u8],
        job: &QueryJob,
        counters: &Counters,
    ) -> Option<*const LeafNode> {
        let node = match self.tree.root.get(key) {
            Some(n) => Some(n),
            None => {
                // no exact root child: descend the smallest-LBD one
                self.tree
                    .root
                    .values()
                    .map(|n| {
                        let lbd = node_lower_bound(&self.summarizer, proj, n, f64::INFINITY);
                        (lbd, n)
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, n)| n)
            }
        };
        let mut node = node?;
        loop {
            match node {
                Node::Leaf(leaf) => {
                    self.scan_leaf(query, proj, leaf, job, counters);
                    return Some(leaf as *const LeafNode);
                }
                Node::Inner(inner) => {
                    // follow the child closer to the query
                    let l0 = node_lower_bound(&self.summarizer, proj, &inner.children[0], f64::INFINITY);
                    let l1 = node_lower_bound(&self.summarizer, proj, &inner.children[1], f64::INFINITY);
                    node = &inner.children[if l1 < l0 { 1 } else { 0 }];
                }
            }
        }
    }

    fn scan_leaf(
        &self,
        query: &[f32],
        proj: &[f64],
        leaf: &LeafNode,
        job: &QueryJob,
        counters: &Counters,
    ) {
        let mut exact = 0u64;
        for entry in &leaf.entries {
            let bsf = job.bsf();
            let wlbd = self.summarizer.word_lower_bound(proj, &entry.word, bsf);
            if wlbd >= bsf {
                continue;
            }
            exact += 1;
            let d2 =
                euclidean_early_abandon(query, self.dataset.series(entry.id as usize), bsf);
            if d2 < bsf {
                job.offer(d2, entry.id);
            }
        }
        counters
            .word_lbd
            .fetch_add(leaf.entries.len() as u64, Ordering::Relaxed);
        counters.exact.fetch_add(exact, Ordering::Relaxed);
    }

    /// Exact k nearest neighbors, sorted by ascending distance.
    pub fn exact_knn(
        &self,
        query: &[f32],
        k: usize,
        workers: usize,
    ) -> Result<(Vec<Neighbor>, QueryStats)> {
        if k == 0 {
            return Err(Error::Empty("k"));
        }
        if k > self.dataset.len() {
            return Err(Error::KTooLarge {
                k,
                n: self.dataset.len(),
            });
        }
        if query.len() != self.dataset.series_length() {
            return Err(Error::LengthMismatch {
                left: query.len(),
                right: self.dataset.series_length(),
            });
        }
        let workers = workers.max(1);
        let start = Instant::now();
        let proj = self.summarizer.project(query);
        let word = self.summarizer.transform(query);
        let job = QueryJob::new(k);
        let counters = Counters::default();

        let seeded = self.seed_descent(query, &proj, &self.tree.root_key(&word), &job, &counters);

        // gather unpruned leaves with their lower bounds
        let mut candidates: Vec<(f64, &LeafNode)> = Vec::new();
        {
            let bsf = job.bsf();
            let mut stack: Vec<&Node> = self.tree.root.values().collect();
            while let Some(node) = stack.pop() {
                let lbd = node_lower_bound(&self.summarizer, &proj, node, bsf);
                if lbd >= bsf {
                    counters.pruned.lock().unwrap().push(lbd);
                    continue;
                }
                match node {
                    // the seed leaf was already scanned in full
                    Node::Leaf(leaf) if Some(leaf as *const LeafNode) == seeded => {}
                    Node::Leaf(leaf) => candidates.push((lbd, leaf)),
                    Node::Inner(inner) => {
                        stack.push(&inner.children[0]);
                        stack.push(&inner.children[1]);
                    }
                }
            }
        }

        // one priority queue per worker, leaves assigned round-robin
        let queues: Vec<Mutex<BinaryHeap<Reverse<QueueEntry>>>> =
            (0..workers).map(|_| Mutex::new(BinaryHeap::new())).collect();
        for (i, (lbd, leaf)) in candidates.into_iter().enumerate() {
            queues[i % workers]
                .lock()
                .unwrap()
                .push(Reverse(QueueEntry { lbd, leaf }));
        }

        std::thread::scope(|scope| {
            for w in 0..workers {
                let queues = &queues;
                let job = &job;
                let counters = &counters;
                let proj = &proj;
                scope.spawn(move || {
                    for offset in 0..queues.len() {
                        let qi = (w + offset) % queues.len();
                        loop {
                            let entry = {
                                let mut q = queues[qi].lock().unwrap();
                                match q.peek() {
                                    None => break,
                                    Some(Reverse(head)) if head.lbd >= job.bsf() => {
                                        // everything left in this queue is prunable
                                        let mut pruned = counters.pruned.lock().unwrap();
                                        while let Some(Reverse(e)) = q.pop() {
                                            pruned.push(e.lbd);
                                        }
                                        break;
                                    }
                                    _ => q.pop().unwrap().0,
                                }
                            };
                            self.scan_leaf(query, proj, entry.leaf, job, counters);
                        }
                    }
                });
            }
        });

        let (results, trace) = job.into_results();
        let stats = QueryStats {
            exact_distance_computations: counters.exact.load(Ordering::Relaxed),
            word_lbd_computations: counters.word_lbd.load(Ordering::Relaxed),
            pruned_lbds: counters.pruned.into_inner().unwrap(),
            bsf_trace: trace,
            wall: start.elapsed(),
        };
        Ok((results, stats))
    }
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry<'a> {
    lbd: f64,
    leaf: &'a LeafNode,
}

impl PartialEq for QueueEntry<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.lbd == other.lbd
    }
}
impl Eq for QueueEntry<'_> {}
impl PartialOrd for QueueEntry<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry<'_> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.lbd.total_cmp(&other.lbd)
    }
}

/// Exact k-NN by partitioned linear scan with per-worker heaps merged at
/// the end; the baseline and the oracle for the index path.
pub fn parallel_scan_knn(
    dataset: &Dataset,
    query: &[f32],
    k: usize,
    workers: usize,
) -> Result<(Vec<Neighbor>, QueryStats)> {
    if k == 0 {
        return Err(Error::Empty("k"));
    }
    if k > dataset.len() {
        return Err(Error::KTooLarge {
            k,
            n: dataset.len(),
        });
    }
    if query.len() != dataset.series_length() {
        return Err(Error::LengthMismatch {
            left: query.len(),
            right: dataset.series_length(),
        });
    }
    let workers = workers.max(1).min(dataset.len());
    let start = Instant::now();
    let n = dataset.len();
    let per = n.div_ceil(workers);

    let partials: Vec<BinaryHeap<HeapItem>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    let mut heap: BinaryHeap<HeapItem> = BinaryHeap::with_capacity(k + 1);
                    let lo = w * per;
                    let hi = ((w + 1) * per).min(n);
                    for i in lo..hi {
                        let bsf = if heap.len() == k {
                            heap.peek().unwrap().d2
                        } else {
                            f64::INFINITY
                        };
                        let d2 = euclidean_early_abandon(query, dataset.series(i), bsf);
                        if d2 < bsf {
                            if heap.len() == k {
                                heap.pop();
                            }
                            heap.push(HeapItem { d2, id: i as u64 });
                        }
                    }
                    heap
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut merged: BinaryHeap<HeapItem> = BinaryHeap::with_capacity(k + 1);
    for heap in partials {
        for item in heap {
            if merged.len() == k {
                if item.d2 < merged.peek().unwrap().d2 {
                    merged.pop();
                } else {
                    continue;
                }
            }
            merged.push(item);
        }
    }
    let mut items = merged.into_vec();
    items.sort();
    let results = items
        .into_iter()
        .map(|it| Neighbor {
            id: it.id,
            distance: it.d2.sqrt(),
        })
        .collect();
    let stats = QueryStats {
        exact_distance_computations: n as u64,
        wall: start.elapsed(),
        ..Default::default()
    };
    Ok((results, stats))
}
