//! Word co-occurrence graph, adjacency operators and link-prediction splits.
//!
//! Nodes are vocabulary ids `1..=V`. Two words are linked when they appear
//! next to each other inside a sentence; repeated co-occurrence does not add
//! weight and a word is never linked to itself. Matrix row `i` of every
//! operator corresponds to node id `i + 1`.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::numcore::Matrix;
use crate::rng::Rng;
use crate::textprep::{Sentence, TokenId, Vocabulary};
use crate::{Error, Result};

/// Unordered edge stored as `(low, high)`.
pub type Edge = (TokenId, TokenId);

fn canonical(a: TokenId, b: TokenId) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Undirected, unweighted graph over vocabulary ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceGraph {
    n_nodes: usize,
    edges: BTreeSet<Edge>,
    adj: Vec<Vec<TokenId>>,
}

impl CooccurrenceGraph {
    /// Build from an explicit edge list. Self-loops and out-of-range
    /// endpoints are rejected; duplicates (in either orientation) collapse.
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for id in [a, b] {
                if id.is_pad() || id.index() > n_nodes {
                    return Err(Error::NodeOutOfRange { id: id.0, max: n_nodes as u32 });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a.0));
            }
            set.insert(canonical(a, b));
        }
        let mut adj = vec![Vec::new(); n_nodes];
        for &(a, b) in &set {
            adj[a.index() - 1].push(b);
            adj[b.index() - 1].push(a);
        }
        for list in &mut adj {
            list.sort();
        }
        Ok(Self { n_nodes, edges: set, adj })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges in canonical `(low, high)` lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: TokenId, b: TokenId) -> bool {
        self.edges.contains(&canonical(a, b))
    }

    pub fn degree(&self, node: TokenId) -> usize {
        self.adj[node.index() - 1].len()
    }

    /// Sorted direct neighbours of `node`.
    pub fn adjacent(&self, node: TokenId) -> &[TokenId] {
        &self.adj[node.index() - 1]
    }

    /// Number of unordered node pairs that are not edges.
    pub fn n_non_edges(&self) -> usize {
        self.n_nodes * self.n_nodes.saturating_sub(1) / 2 - self.edges.len()
    }

    fn check_node(&self, node: TokenId) -> Result<()> {
        if node.is_pad() || node.index() > self.n_nodes {
            Err(Error::NodeOutOfRange { id: node.0, max: self.n_nodes as u32 })
        } else {
            Ok(())
        }
    }

    /// The same node set restricted to `edges`.
    pub fn subgraph(&self, edges: &[Edge]) -> Result<Self> {
        Self::from_edges(self.n_nodes, edges.iter().copied())
    }
}

/// Link adjacent tokens of every sentence. Edges never cross sentences.
pub fn build_graph(corpus: &[Sentence], vocab: &Vocabulary) -> Result<CooccurrenceGraph> {
    let mut edges = Vec::new();
    for sentence in corpus {
        let ids = vocab.encode(sentence)?;
        for pair in ids.windows(2) {
            if pair[0] != pair[1] {
                edges.push((pair[0], pair[1]));
            }
        }
    }
    CooccurrenceGraph::from_edges(vocab.len(), edges)
}

/// All nodes within `hops` edges of `node`, excluding `node` itself.
pub fn neighbors(graph: &CooccurrenceGraph, node: TokenId, hops: usize) -> Result<BTreeSet<TokenId>> {
    graph.check_node(node)?;
    let mut seen = BTreeSet::from([node]);
    let mut frontier = VecDeque::from([(node, 0usize)]);
    while let Some((cur, depth)) = frontier.pop_front() {
        if depth == hops {
            continue;
        }
        for &next in graph.adjacent(cur) {
            if seen.insert(next) {
                frontier.push_back((next, depth + 1));
            }
        }
    }
    seen.remove(&node);
    Ok(seen)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjacencyMode {
    /// 0/1 adjacency with a zero diagonal.
    Raw,
    /// `D̃^{-1/2} (A + I) D̃^{-1/2}`, with `D̃` the degrees of `A + I`.
    #[default]
    SymNorm,
}

/// Symmetric `V×V` propagation operator, stored in compressed sparse rows
/// with ascending column order (so products are reproducible).
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyOperator {
    mode: AdjacencyMode,
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f32>,
}

impl AdjacencyOperator {
    pub fn mode(&self) -> AdjacencyMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `Â · x` for a `V×d` matrix `x`.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.dim {
            return Err(Error::ShapeMismatch {
                op: "adjacency apply",
                lhs_rows: self.dim,
                lhs_cols: self.dim,
                rhs_rows: x.rows(),
                rhs_cols: x.cols(),
            });
        }
        // f32 products are exact in f64, so accumulating there makes the
        // result insensitive to neighbour order (node relabeling) except in
        // vanishingly rare double-rounding cases.
        let mut out = Matrix::zeros(self.dim, x.cols());
        let mut acc = vec![0.0f64; x.cols()];
        for r in 0..self.dim {
            acc.iter_mut().for_each(|a| *a = 0.0);
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            for (&c, &w) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                for (a, &v) in acc.iter_mut().zip(x.row(c)) {
                    *a += w as f64 * v as f64;
                }
            }
            for (o, &a) in out.row_mut(r).iter_mut().zip(&acc) {
                *o = a as f32;
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m.set(r, self.col_idx[k], self.values[k]);
            }
        }
        m
    }
}

pub fn adjacency(graph: &CooccurrenceGraph, mode: AdjacencyMode) -> AdjacencyOperator {
    let n = graph.n_nodes();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    let self_loop = mode == AdjacencyMode::SymNorm;
    let norm: Vec<f64> = (0..n)
        .map(|i| 1.0 / libm::sqrt((graph.adj[i].len() + 1) as f64))
        .collect();
    for i in 0..n {
        let mut cols: Vec<usize> = graph.adj[i].iter().map(|t| t.index() - 1).collect();
        if self_loop {
            cols.push(i);
            cols.sort_unstable();
        }
        for c in cols {
            col_idx.push(c);
            values.push(match mode {
                AdjacencyMode::Raw => 1.0,
                AdjacencyMode::SymNorm => (norm[i] * norm[c]) as f32,
            });
        }
        row_ptr.push(col_idx.len());
    }
    AdjacencyOperator { mode, dim: n, row_ptr, col_idx, values }
}

/// Held-out edges for link prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSplit {
    pub train_edges: Vec<Edge>,
    pub test_edges: Vec<Edge>,
    pub test_negatives: Vec<Edge>,
    pub seed: u64,
}

/// Draw one uniformly random non-edge. The graph must have one.
pub(crate) fn sample_non_edge(graph: &CooccurrenceGraph, rng: &mut Rng) -> Edge {
    let n = graph.n_nodes() as u64;
    loop {
        let a = TokenId(rng.below(n) as u32 + 1);
        let b = TokenId(rng.below(n) as u32 + 1);
        if a != b && !graph.has_edge(a, b) {
            return canonical(a, b);
        }
    }
}

/// `count` distinct non-edges, uniform without replacement.
fn sample_distinct_non_edges(graph: &CooccurrenceGraph, count: usize, rng: &mut Rng) -> Result<Vec<Edge>> {
    let available = graph.n_non_edges();
    if available < count {
        return Err(Error::GraphTooSmall("not enough non-edges for negatives"));
    }
    if available <= 4 * count {
        // Dense graph: enumerate and partially shuffle.
        let mut all = Vec::with_capacity(available);
        for a in 1..=graph.n_nodes() as u32 {
            for b in a + 1..=graph.n_nodes() as u32 {
                if !graph.has_edge(TokenId(a), TokenId(b)) {
                    all.push((TokenId(a), TokenId(b)));
                }
            }
        }
        for i in 0..count {
            let j = i + rng.below_usize(all.len() - i);
            all.swap(i, j);
        }
        all.truncate(count);
        return Ok(all);
    }
    let mut picked = Vec::with_capacity(count);
    let mut seen = BTreeSet::new();
    while picked.len() < count {
        let e = sample_non_edge(graph, rng);
        if seen.insert(e) {
            picked.push(e);
        }
    }
    Ok(picked)
}

/// Seeded train/test edge split with one sampled non-edge per test edge.
///
/// The train size is `round(train_fraction · |E|)`, clamped to
/// `1..=|E|-1` so both sides are non-empty.
pub fn split_edges(graph: &CooccurrenceGraph, train_fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if graph.n_edges() < 2 {
        return Err(Error::GraphTooSmall("need at least 2 edges"));
    }
    if graph.n_non_edges() == 0 {
        return Err(Error::GraphTooSmall("complete graph has no negatives"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!("train_fraction {train_fraction} not in (0, 1)")));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let mut edges: Vec<Edge> = graph.edges().collect();
    rng.shuffle(&mut edges);
    let n_train = (libm::round(train_fraction * edges.len() as f64) as usize).clamp(1, edges.len() - 1);
    let test_edges = edges.split_off(n_train);
    let test_negatives = sample_distinct_non_edges(graph, test_edges.len(), &mut rng)?;
    Ok(EdgeSplit { train_edges: edges, test_edges, test_negatives, seed })
}
