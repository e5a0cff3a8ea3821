//! Joint graph sorting.
//!
//! All `N` nodes of the collection are ranked together by normalized
//! empirical degree. Node of rank `r` (1-based) receives the latent estimate
//! `Û = (r − ½) / N`, and the ranks are cut into `k` consecutive blocks,
//! block `s` holding ranks `⌊N(s−1)/k⌋ + 1 ..= ⌊Ns/k⌋`. The block histogram
//! divides, for every block pair `(s, t)`, the number of
//! within-graph ordered adjacent pairs by the number of within-graph ordered
//! dyads (self-pairs included), guarded by `max(1, ·)`:
//!
//! ```text
//! H[s][t] = Σ_m Σ_{i ∈ J_s(m)} Σ_{j ∈ J_t(m)} A(m)[i][j] / max(1, Σ_m |J_s(m)| |J_t(m)|)
//! ```
//!
//! Inter-graph pairs are never observed and contribute to neither sum.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{EstimateMeta, StepEstimate};
use crate::graph::GraphCollection;
use crate::matrix::SquareMatrix;
use crate::rng::RngSeed;
use crate::tv::{self, TvParams};

/// Denominator used for normalized degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeDivisor {
    /// `deg / (n − 1)`; the diagonal is structurally zero.
    #[default]
    NMinusOne,
    /// `deg / n`.
    N,
}

impl DegreeDivisor {
    pub fn name(self) -> &'static str {
        match self {
            DegreeDivisor::NMinusOne => "n-1",
            DegreeDivisor::N => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedDegrees {
    pub per_graph: Vec<Vec<f64>>,
    /// Graphs with a single node, whose degree is fixed to 0.
    pub singletons: Vec<usize>,
}

pub fn normalized_degrees(collection: &GraphCollection, divisor: DegreeDivisor) -> NormalizedDegrees {
    let mut singletons = Vec::new();
    let per_graph = collection
        .graphs()
        .iter()
        .enumerate()
        .map(|(m, g)| {
            let n = g.node_count();
            let denom = match divisor {
                DegreeDivisor::NMinusOne => n.saturating_sub(1),
                DegreeDivisor::N => n,
            };
            if n == 1 {
                singletons.push(m);
            }
            if denom == 0 {
                return vec![0.0; n];
            }
            g.degrees()
                .into_iter()
                .map(|d| d as f64 / denom as f64)
                .collect()
        })
        .collect();
    NormalizedDegrees {
        per_graph,
        singletons,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Ties resolved by `(graph, node)` index.
    #[default]
    Index,
    /// Ties resolved by a seeded random key, then by index.
    Random(RngSeed),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedNode {
    pub graph: u32,
    pub node: u32,
    pub degree: f64,
}

/// Global degree ordering of every node in a collection.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOrdering {
    /// Nodes in rank order; `by_rank[r - 1]` has rank `r`.
    by_rank: Vec<RankedNode>,
    /// 1-based rank of each node, per graph.
    ranks: Vec<Vec<u32>>,
}

pub fn joint_sort(degrees: &[Vec<f64>], tie_break: TieBreak) -> Result<JointOrdering> {
    let total: usize = degrees.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(Error::InvalidArgument(
            "joint sort needs at least one node".into(),
        ));
    }
    if total > u32::MAX as usize {
        return Err(Error::InvalidArgument(format!("{total} nodes exceeds u32 ranks")));
    }
    let mut nodes: Vec<RankedNode> = Vec::with_capacity(total);
    for (m, ds) in degrees.iter().enumerate() {
        for (i, &d) in ds.iter().enumerate() {
            nodes.push(RankedNode {
                graph: m as u32,
                node: i as u32,
                degree: d,
            });
        }
    }
    match tie_break {
        TieBreak::Index => {
            // Nodes are pushed in (graph, node) order, so a stable sort on the
            // degree alone realizes the (degree, graph, node) key.
            nodes.sort_by(|a, b| a.degree.total_cmp(&b.degree));
        }
        TieBreak::Random(seed) => {
            let mut rng = seed.stream(&[0x7469_6573]);
            let mut keyed: Vec<(u64, RankedNode)> =
                nodes.into_iter().map(|n| (rng.random::<u64>(), n)).collect();
            keyed.sort_by(|a, b| a.1.degree.total_cmp(&b.1.degree).then(a.0.cmp(&b.0)));
            nodes = keyed.into_iter().map(|(_, n)| n).collect();
        }
    }
    let mut ranks: Vec<Vec<u32>> = degrees.iter().map(|d| vec![0; d.len()]).collect();
    for (pos, n) in nodes.iter().enumerate() {
        ranks[n.graph as usize][n.node as usize] = pos as u32 + 1;
    }
    Ok(JointOrdering {
        by_rank: nodes,
        ranks,
    })
}

impl JointOrdering {
    pub fn total_nodes(&self) -> usize {
        self.by_rank.len()
    }

    pub fn graph_sizes(&self) -> Vec<usize> {
        self.ranks.iter().map(Vec::len).collect()
    }

    pub fn by_rank(&self) -> &[RankedNode] {
        &self.by_rank
    }

    pub fn ranks(&self) -> &[Vec<u32>] {
        &self.ranks
    }

    #[inline]
    pub fn rank(&self, graph: usize, node: usize) -> u32 {
        self.ranks[graph][node]
    }

    /// `Û = r / N − 1 / (2N)`.
    #[inline]
    pub fn latent(&self, graph: usize, node: usize) -> f64 {
        let n = self.total_nodes() as f64;
        (2.0 * self.rank(graph, node) as f64 - 1.0) / (2.0 * n)
    }

    pub fn latent_positions(&self) -> Vec<Vec<f64>> {
        (0..self.ranks.len())
            .map(|m| (0..self.ranks[m].len()).map(|i| self.latent(m, i)).collect())
            .collect()
    }

    /// 0-based block of the rank-`r` node among `k` blocks. Block `s`
    /// (1-based) holds ranks `⌊N(s−1)/k⌋ + 1 ..= ⌊Ns/k⌋`, i.e. `s = ⌈rk/N⌉`.
    /// This agrees with `Û ∈ [(s−1)/k, s/k)` except for the odd node whose
    /// `Û` falls within `1/(2N)` of a block edge.
    #[inline]
    pub fn block_of_rank(&self, rank: u32, k: usize) -> usize {
        let n = self.total_nodes() as u128;
        let s = (rank as u128 * k as u128 - 1) / n;
        (s as usize).min(k - 1)
    }

    #[inline]
    pub fn block(&self, graph: usize, node: usize, k: usize) -> usize {
        self.block_of_rank(self.rank(graph, node), k)
    }
}

/// `k = max(1, min(⌊S^{1/4}⌋, ⌊N / (c (M + ln N))⌋))`.
///
/// The first term balances histogram bias and variance; the second keeps
/// every block populated with high probability.
pub fn select_k(total_nodes: usize, graph_count: usize, observed_dyads: u64, c: f64) -> Result<usize> {
    if total_nodes == 0 || graph_count == 0 || observed_dyads == 0 {
        return Err(Error::InvalidArgument(format!(
            "select_k needs N, M, S >= 1 (got N = {total_nodes}, M = {graph_count}, S = {observed_dyads})"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let n = total_nodes as f64;
    let by_rate = integer_fourth_root(observed_dyads) as f64;
    let by_occupancy = (n / (c * (graph_count as f64 + n.ln()))).floor();
    Ok(by_rate.min(by_occupancy).max(1.0) as usize)
}

/// `⌊x^{1/4}⌋` without floating-point edge errors at perfect powers.
fn integer_fourth_root(x: u64) -> u64 {
    let mut r = (x as f64).powf(0.25) as u64;
    while (r as u128 + 1).pow(4) <= x as u128 {
        r += 1;
    }
    while r > 0 && (r as u128).pow(4) > x as u128 {
        r -= 1;
    }
    r
}

/// Integer block counts from which the histogram is formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCounts {
    pub k: usize,
    /// Ordered adjacent pairs per block, row-major `k × k`.
    pub edges: Vec<u64>,
    /// Ordered observed dyads (self-pairs included) per block.
    pub dyads: Vec<u64>,
}

impl BlockCounts {
    pub fn empty_blocks(&self) -> usize {
        self.dyads.iter().filter(|&&d| d == 0).count()
    }

    pub fn to_matrix(&self) -> SquareMatrix {
        let k = self.k;
        SquareMatrix::from_fn(k, |s, t| {
            self.edges[s * k + t] as f64 / self.dyads[s * k + t].max(1) as f64
        })
    }
}

/// Work counters for one histogram pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PassStats {
    pub edges_visited: u64,
    pub nodes_visited: u64,
    pub dyad_block_updates: u64,
}

/// Streams over each graph's edges once and nodes once.
pub fn block_counts(
    collection: &GraphCollection,
    ordering: &JointOrdering,
    k: usize,
) -> Result<(BlockCounts, PassStats)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if ordering.graph_sizes() != collection.sizes() {
        return Err(Error::SizeMismatch(
            "ordering does not cover the collection's nodes".into(),
        ));
    }
    let mut edges = vec![0u64; k * k];
    let mut dyads = vec![0u64; k * k];
    let mut stats = PassStats::default();
    let mut block_size = vec![0u64; k];
    let mut occupied: Vec<usize> = Vec::new();
    let mut node_block: Vec<usize> = Vec::new();

    for (m, g) in collection.graphs().iter().enumerate() {
        node_block.clear();
        for i in 0..g.node_count() {
            let s = ordering.block(m, i, k);
            node_block.push(s);
            if block_size[s] == 0 {
                occupied.push(s);
            }
            block_size[s] += 1;
            stats.nodes_visited += 1;
        }
        for &(i, j) in g.edges() {
            let (s, t) = (node_block[i as usize], node_block[j as usize]);
            edges[s * k + t] += 1;
            edges[t * k + s] += 1;
            stats.edges_visited += 1;
        }
        for &s in &occupied {
            for &t in &occupied {
                dyads[s * k + t] += block_size[s] * block_size[t];
                stats.dyad_block_updates += 1;
            }
        }
        for &s in &occupied {
            block_size[s] = 0;
        }
        occupied.clear();
    }
    Ok((BlockCounts { k, edges, dyads }, stats))
}

fn base_meta(collection: &GraphCollection, k: usize, method: &str) -> EstimateMeta {
    EstimateMeta {
        k,
        total_nodes: collection.total_nodes(),
        graph_count: collection.graph_count(),
        observed_dyads: collection.observed_dyads(),
        method: method.to_owned(),
        params: Default::default(),
        seed: None,
        elapsed_seconds: 0.0,
        empty_blocks: 0,
    }
}

/// Block histogram computed per graph without materializing the merged matrix.
pub fn jgs_histogram(
    collection: &GraphCollection,
    ordering: &JointOrdering,
    k: usize,
) -> Result<StepEstimate> {
    let (counts, _) = block_counts(collection, ordering, k)?;
    let mut meta = base_meta(collection, k, "jgs");
    meta.empty_blocks = counts.empty_blocks();
    Ok(StepEstimate {
        values: counts.to_matrix(),
        meta,
    })
}

/// Default node cap for [`jgs_histogram_naive`].
pub const NAIVE_NODE_CAP: usize = 2000;

/// Reference implementation on the merged `N × N` matrix with block bounds
/// `a_s = ⌊N(s−1)/k⌋ + 1`, `b_s = ⌊Ns/k⌋`. Quadratic memory; test use only.
pub fn jgs_histogram_naive(
    collection: &GraphCollection,
    ordering: &JointOrdering,
    k: usize,
    cap: usize,
) -> Result<StepEstimate> {
    let n = collection.total_nodes();
    if n > cap {
        return Err(Error::OracleTooLarge { n, cap });
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if ordering.graph_sizes() != collection.sizes() {
        return Err(Error::SizeMismatch(
            "ordering does not cover the collection's nodes".into(),
        ));
    }
    // None marks a missing (inter-graph) dyad.
    let mut merged: Vec<Option<u8>> = vec![None; n * n];
    for (m, g) in collection.graphs().iter().enumerate() {
        let size = g.node_count();
        let adj = g.adjacency();
        for i in 0..size {
            let ri = ordering.rank(m, i) as usize - 1;
            for j in 0..size {
                let rj = ordering.rank(m, j) as usize - 1;
                merged[ri * n + rj] = Some(adj[i * size + j] as u8);
            }
        }
    }
    let bounds: Vec<(usize, usize)> = (1..=k).map(|s| ((n * (s - 1)) / k + 1, (n * s) / k)).collect();
    let mut values = SquareMatrix::zeros(k);
    let mut empty = 0;
    for (s, &(a_s, b_s)) in bounds.iter().enumerate() {
        for (t, &(a_t, b_t)) in bounds.iter().enumerate() {
            let mut num = 0u64;
            let mut den = 0u64;
            for i in a_s..=b_s {
                for j in a_t..=b_t {
                    if let Some(x) = merged[(i - 1) * n + (j - 1)] {
                        num += x as u64;
                        den += 1;
                    }
                }
            }
            if den == 0 {
                empty += 1;
            }
            values.set(s, t, num as f64 / den.max(1) as f64);
        }
    }
    let mut meta = base_meta(collection, k, "jgs-naive");
    meta.empty_blocks = empty;
    Ok(StepEstimate { values, meta })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KChoice {
    Fixed(usize),
    /// [`select_k`] with the given constant `c`.
    Auto { c: f64 },
}

impl KChoice {
    pub const AUTO: KChoice = KChoice::Auto { c: 2.0 };
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Smoothing {
    #[default]
    Off,
    Tv(TvParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JgsOptions {
    pub k: KChoice,
    pub smoothing: Smoothing,
    pub divisor: DegreeDivisor,
    pub tie_break: TieBreak,
}

impl Default for JgsOptions {
    fn default() -> Self {
        Self {
            k: KChoice::AUTO,
            smoothing: Smoothing::Off,
            divisor: DegreeDivisor::default(),
            tie_break: TieBreak::default(),
        }
    }
}

impl JgsOptions {
    pub fn with_k(mut self, k: KChoice) -> Self {
        self.k = k;
        self
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }
}

/// Result of [`estimate_jgs`]: the block estimate plus the ordering that
/// produced it (needed for latent-position diagnostics).
#[derive(Debug, Clone)]
pub struct JgsFit {
    pub estimate: StepEstimate,
    pub ordering: JointOrdering,
    pub singleton_graphs: Vec<usize>,
}

/// Degrees, joint sort, block count, histogram, then optional TV smoothing.
pub fn estimate_jgs(collection: &GraphCollection, options: &JgsOptions) -> Result<JgsFit> {
    if collection.is_empty() {
        return Err(Error::InvalidArgument("empty graph collection".into()));
    }
    let start = Instant::now();
    let degrees = normalized_degrees(collection, options.divisor);
    let ordering = joint_sort(&degrees.per_graph, options.tie_break)?;
    let k = match options.k {
        KChoice::Fixed(k) => k,
        KChoice::Auto { c } => select_k(
            collection.total_nodes(),
            collection.graph_count(),
            collection.observed_dyads(),
            c,
        )?,
    };
    let (counts, _) = block_counts(collection, &ordering, k)?;
    let mut values = counts.to_matrix();
    let mut meta = base_meta(collection, k, "jgs")
        .param("k_rule", match options.k {
            KChoice::Fixed(_) => "fixed".to_owned(),
            KChoice::Auto { c } => format!("auto(c={c})"),
        })
        .param("degree_divisor", options.divisor.name())
        .param("tie_break", match options.tie_break {
            TieBreak::Index => "index",
            TieBreak::Random(_) => "random",
        });
    if let TieBreak::Random(seed) = options.tie_break {
        meta.seed = Some(seed.0);
    }
    meta.empty_blocks = counts.empty_blocks();
    if let Smoothing::Tv(params) = options.smoothing {
        values = tv::tv_smooth(&values, &params)?;
        meta.method = "jgs-smooth".into();
        meta = meta
            .param("lambda", params.lambda)
            .param("tau", params.tau)
            .param("max_iters", params.max_iters as u64)
            .param("tol", params.tol);
    }
    meta.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(JgsFit {
        estimate: StepEstimate { values, meta },
        ordering,
        singleton_graphs: degrees.singletons,
    })
}
