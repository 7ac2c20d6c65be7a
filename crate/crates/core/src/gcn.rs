//! Two-layer graph convolutional encoder trained on link prediction.
//!
//! Node features are rows, so a layer is `Â · H · W`:
//!
//! ```text
//! H1 = relu(Â · H0 · W1)
//! Z  = Â · H1 · W2
//! ```
//!
//! The decoder scores a node pair as `sigmoid(z_u · z_v)` and training
//! minimises mean binary cross-entropy over the training edges (label 1)
//! and freshly drawn non-edges (label 0). Message passing during training
//! only sees the training edges; exported embeddings use the full graph.

use alloc::vec::Vec;

use crate::cograph::{adjacency, sample_non_edge, split_edges, AdjacencyMode, AdjacencyOperator, CooccurrenceGraph, Edge, EdgeSplit};
use crate::ngram::{EmbeddingSource, EmbeddingTable};
use crate::numcore::{adam_step, bce_with_logits, dot, sigmoid_raw, AdamState, Matrix};
use crate::rng::{Rng, SplitMix64};
use crate::textprep::TokenId;
use crate::{Error, Result};

/// Standard deviation of the initial node features.
pub const FEATURE_INIT_STD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct GcnTrainConfig {
    pub lr: f32,
    pub epochs: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub d_in: usize,
    pub d_hidden: usize,
    pub d_out: usize,
    pub negatives_per_positive: usize,
    pub adjacency_mode: AdjacencyMode,
    /// When false, the initial node features stay at their random values.
    pub train_features: bool,
}

impl Default for GcnTrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.005,
            epochs: 200,
            train_fraction: 0.8,
            seed: 0,
            d_in: 64,
            d_hidden: 64,
            d_out: 64,
            negatives_per_positive: 1,
            adjacency_mode: AdjacencyMode::SymNorm,
            train_features: true,
        }
    }
}

impl GcnTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("gcn lr must be positive");
        }
        if self.epochs == 0 {
            return bad("gcn epochs must be at least 1");
        }
        if self.d_in == 0 || self.d_hidden == 0 || self.d_out == 0 {
            return bad("gcn dimensions must be at least 1");
        }
        if self.negatives_per_positive == 0 {
            return bad("negatives_per_positive must be at least 1");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("gcn train_fraction must be in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    /// `V×d_in` node features.
    pub h0: Matrix,
    /// `d_in×d_hidden`.
    pub w1: Matrix,
    /// `d_hidden×d_out`.
    pub w2: Matrix,
    pub adjacency_mode: AdjacencyMode,
}

fn glorot(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    let limit = libm::sqrt(6.0 / (rows + cols) as f64);
    Matrix::from_fn(rows, cols, |_, _| rng.uniform(-limit, limit) as f32)
}

impl GcnModel {
    /// Random model: features from N(0, 0.1), weights Glorot-uniform.
    pub fn init(n_nodes: usize, config: &GcnTrainConfig, rng: &mut Rng) -> Self {
        let h0 = Matrix::from_fn(n_nodes, config.d_in, |_, _| rng.normal(FEATURE_INIT_STD) as f32);
        let w1 = glorot(config.d_in, config.d_hidden, rng);
        let w2 = glorot(config.d_hidden, config.d_out, rng);
        Self { h0, w1, w2, adjacency_mode: config.adjacency_mode }
    }

    pub fn n_nodes(&self) -> usize {
        self.h0.rows()
    }

    pub fn check_shapes(&self) -> Result<()> {
        let pairs = [("gcn h0·w1", &self.h0, &self.w1), ("gcn w1·w2", &self.w1, &self.w2)];
        for (op, a, b) in pairs {
            if a.cols() != b.rows() {
                return Err(Error::ShapeMismatch {
                    op,
                    lhs_rows: a.rows(),
                    lhs_cols: a.cols(),
                    rhs_rows: b.rows(),
                    rhs_cols: b.cols(),
                });
            }
        }
        Ok(())
    }
}

struct Forward {
    s1: Matrix,
    h1: Matrix,
    z: Matrix,
}

fn forward_cached(model: &GcnModel, adj: &AdjacencyOperator) -> Result<Forward> {
    if adj.mode() != model.adjacency_mode {
        return Err(Error::InvalidConfig("adjacency mode does not match the model".into()));
    }
    model.check_shapes()?;
    let s1 = adj.apply(&model.h0.matmul(&model.w1)?)?;
    let h1 = s1.map(|x| x.max(0.0));
    let z = adj.apply(&h1.matmul(&model.w2)?)?;
    Ok(Forward { s1, h1, z })
}

/// Node embeddings `Z` (`V×d_out`), row `i` for node id `i + 1`.
pub fn gcn_forward(model: &GcnModel, adj: &AdjacencyOperator) -> Result<Matrix> {
    Ok(forward_cached(model, adj)?.z)
}

fn check_pair(z: &Matrix, u: TokenId, v: TokenId) -> Result<()> {
    for id in [u, v] {
        if id.is_pad() || id.index() > z.rows() {
            return Err(Error::NodeOutOfRange { id: id.0, max: z.rows() as u32 });
        }
    }
    Ok(())
}

/// Probability that `u` and `v` are linked: `sigmoid(z_u · z_v)`.
pub fn link_score(z: &Matrix, u: TokenId, v: TokenId) -> Result<f32> {
    check_pair(z, u, v)?;
    Ok(sigmoid_raw(dot(z.row(u.index() - 1), z.row(v.index() - 1))))
}

/// A scored node pair with its 0/1 label.
pub type LabeledPair = (Edge, f32);

#[derive(Debug, Clone, PartialEq)]
pub struct GcnGrads {
    pub h0: Matrix,
    pub w1: Matrix,
    pub w2: Matrix,
}

/// Mean BCE of the dot-product decoder over `pairs`.
pub fn link_loss(model: &GcnModel, adj: &AdjacencyOperator, pairs: &[LabeledPair]) -> Result<f32> {
    let fwd = forward_cached(model, adj)?;
    pair_loss(&fwd.z, pairs)
}

fn pair_loss(z: &Matrix, pairs: &[LabeledPair]) -> Result<f32> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0f64;
    for &((u, v), y) in pairs {
        check_pair(z, u, v)?;
        let s = dot(z.row(u.index() - 1), z.row(v.index() - 1));
        total += bce_with_logits(s, y) as f64;
    }
    Ok((total / pairs.len() as f64) as f32)
}

/// Loss and analytic gradients with respect to `h0`, `w1` and `w2`.
pub fn link_loss_and_grads(
    model: &GcnModel,
    adj: &AdjacencyOperator,
    pairs: &[LabeledPair],
) -> Result<(f32, GcnGrads)> {
    let fwd = forward_cached(model, adj)?;
    let loss = pair_loss(&fwd.z, pairs)?;
    let z = &fwd.z;
    let scale = 1.0 / pairs.len() as f32;
    let mut dz = Matrix::zeros(z.rows(), z.cols());
    for &((u, v), y) in pairs {
        let (ui, vi) = (u.index() - 1, v.index() - 1);
        let g = (sigmoid_raw(dot(z.row(ui), z.row(vi))) - y) * scale;
        for c in 0..z.cols() {
            let (zu, zv) = (z.get(ui, c), z.get(vi, c));
            dz.row_mut(ui)[c] += g * zv;
            dz.row_mut(vi)[c] += g * zu;
        }
    }
    // Â is symmetric, so Âᵀ·dZ = Â·dZ.
    let dx2 = adj.apply(&dz)?;
    let dw2 = fwd.h1.matmul_tn(&dx2)?;
    let mut ds1 = dx2.matmul_nt(&model.w2)?;
    for (d, &s) in ds1.as_mut_slice().iter_mut().zip(fwd.s1.as_slice()) {
        if s <= 0.0 {
            *d = 0.0;
        }
    }
    let dx1 = adj.apply(&ds1)?;
    let dw1 = model.h0.matmul_tn(&dx1)?;
    let dh0 = dx1.matmul_nt(&model.w1)?;
    Ok((loss, GcnGrads { h0: dh0, w1: dw1, w2: dw2 }))
}

/// Area under the ROC curve: the probability that a random positive
/// outscores a random negative, ties counting one half.
pub fn auc(positive: &[f32], negative: &[f32]) -> Result<f64> {
    if positive.is_empty() || negative.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut all: Vec<(f32, bool)> = positive
        .iter()
        .map(|&s| (s, true))
        .chain(negative.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        // Ranks i+1..=j+1 share their average.
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * all[i..=j].iter().filter(|e| e.1).count() as f64;
        i = j + 1;
    }
    let (p, n) = (positive.len() as f64, negative.len() as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// AUC of held-out edges against the split's sampled non-edges.
pub fn evaluate_auc(model: &GcnModel, adj: &AdjacencyOperator, split: &EdgeSplit) -> Result<f64> {
    let z = gcn_forward(model, adj)?;
    let score = |e: &Edge| link_score(&z, e.0, e.1);
    let pos = split.test_edges.iter().map(score).collect::<Result<Vec<_>>>()?;
    let neg = split.test_negatives.iter().map(score).collect::<Result<Vec<_>>>()?;
    auc(&pos, &neg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcnEpochMetrics {
    pub epoch: usize,
    /// Training BCE of the forward pass that produced this epoch's update.
    pub loss: f32,
    /// Held-out AUC after the update.
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnTrainOutput {
    pub model: GcnModel,
    pub history: Vec<GcnEpochMetrics>,
    pub split: EdgeSplit,
    /// Held-out AUC of the randomly initialised model.
    pub initial_auc: f64,
}

/// Seeds for the edge split, the parameter init and negative sampling,
/// drawn in that order from a SplitMix64 stream over the config seed.
fn sub_seeds(seed: u64) -> [u64; 3] {
    let mut sm = SplitMix64::new(seed);
    [sm.next_u64(), sm.next_u64(), sm.next_u64()]
}

pub fn train_gcn(graph: &CooccurrenceGraph, config: &GcnTrainConfig) -> Result<GcnTrainOutput> {
    config.validate()?;
    let [split_seed, init_seed, neg_seed] = sub_seeds(config.seed);
    let split = split_edges(graph, config.train_fraction, split_seed)?;
    let train_graph = graph.subgraph(&split.train_edges)?;
    let adj = adjacency(&train_graph, config.adjacency_mode);

    let mut model = GcnModel::init(graph.n_nodes(), config, &mut Rng::seed_from_u64(init_seed));
    let mut neg_rng = Rng::seed_from_u64(neg_seed);
    let mut st_h0 = AdamState::new(&model.h0);
    let mut st_w1 = AdamState::new(&model.w1);
    let mut st_w2 = AdamState::new(&model.w2);

    let initial_auc = evaluate_auc(&model, &adj, &split)?;
    let mut history = Vec::with_capacity(config.epochs);
    let n_neg = split.train_edges.len() * config.negatives_per_positive;
    let mut pairs: Vec<LabeledPair> = Vec::with_capacity(split.train_edges.len() + n_neg);
    for epoch in 1..=config.epochs {
        pairs.clear();
        pairs.extend(split.train_edges.iter().map(|&e| (e, 1.0)));
        for _ in 0..n_neg {
            pairs.push((sample_non_edge(graph, &mut neg_rng), 0.0));
        }
        let (loss, grads) = link_loss_and_grads(&model, &adj, &pairs)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite("gcn loss"));
        }
        if config.train_features {
            adam_step(&mut model.h0, &grads.h0, &mut st_h0, config.lr)?;
        }
        adam_step(&mut model.w1, &grads.w1, &mut st_w1, config.lr)?;
        adam_step(&mut model.w2, &grads.w2, &mut st_w2, config.lr)?;
        let auc = evaluate_auc(&model, &adj, &split)?;
        history.push(GcnEpochMetrics { epoch, loss, auc });
    }
    for m in [&model.h0, &model.w1, &model.w2] {
        m.check_finite("gcn parameters")?;
    }
    Ok(GcnTrainOutput { model, history, split, initial_auc })
}

/// Embedding table from the encoder over the full-graph operator `adj`:
/// row 0 is PAD, row `id` is `Z[id − 1]`.
pub fn export_embeddings(model: &GcnModel, adj: &AdjacencyOperator) -> Result<EmbeddingTable> {
    let z = gcn_forward(model, adj)?;
    let mut table = Matrix::zeros(z.rows() + 1, z.cols());
    table.as_mut_slice()[z.cols()..].copy_from_slice(z.as_slice());
    EmbeddingTable::new(table, EmbeddingSource::Ce)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cograph::tests::toy;
    use alloc::vec;

    fn ones_model(n: usize, mode: AdjacencyMode) -> GcnModel {
        GcnModel {
            h0: Matrix::from_fn(n, 1, |_, _| 1.0),
            w1: Matrix::from_rows(&[[1.0]]),
            w2: Matrix::from_rows(&[[1.0]]),
            adjacency_mode: mode,
        }
    }

    #[test]
    fn raw_two_hop_sums_neighbour_degrees() {
        let (_, v, g) = toy();
        let adj = adjacency(&g, AdjacencyMode::Raw);
        let z = gcn_forward(&ones_model(6, AdjacencyMode::Raw), &adj).unwrap();
        // Degrees: the 1, weather 3, is 4, good 1, forecast 2, sunny 1.
        let expect = [("the", 3.0), ("weather", 7.0), ("is", 7.0), ("good", 4.0), ("forecast", 7.0), ("sunny", 4.0)];
        for (w, val) in expect {
            assert_eq!(z.get(v.id(w).unwrap().index() - 1, 0), val, "{w}");
        }
    }

    #[test]
    fn zero_weights_and_empty_graphs_give_zero() {
        let (_, _, g) = toy();
        let adj = adjacency(&g, AdjacencyMode::SymNorm);
        let mut m = GcnModel::init(6, &GcnTrainConfig::default(), &mut Rng::seed_from_u64(1));
        m.w1.fill(0.0);
        assert!(gcn_forward(&m, &adj).unwrap().as_slice().iter().all(|&x| x == 0.0));
        let table = export_embeddings(&m, &adj).unwrap();
        assert!(table.vectors().as_slice().iter().all(|&x| x == 0.0));

        let empty = CooccurrenceGraph::from_edges(4, []).unwrap();
        let cfg = GcnTrainConfig { adjacency_mode: AdjacencyMode::Raw, ..Default::default() };
        let m = GcnModel::init(4, &cfg, &mut Rng::seed_from_u64(2));
        let z = gcn_forward(&m, &adjacency(&empty, AdjacencyMode::Raw)).unwrap();
        assert!(z.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let (_, _, g) = toy();
        let m = ones_model(6, AdjacencyMode::Raw);
        assert!(gcn_forward(&m, &adjacency(&g, AdjacencyMode::SymNorm)).is_err());
    }

    #[test]
    fn link_score_cases() {
        let z = Matrix::zeros(2, 3);
        assert_eq!(link_score(&z, TokenId(1), TokenId(2)).unwrap(), 0.5);
        let c = libm::sqrtf(libm::logf(3.0));
        let z = Matrix::from_rows(&[[c, 0.0], [c, 0.0], [0.3, -1.0]]);
        assert!((link_score(&z, TokenId(1), TokenId(2)).unwrap() - 0.75).abs() < 1e-6);
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            assert_eq!(
                link_score(&z, TokenId(a), TokenId(b)).unwrap(),
                link_score(&z, TokenId(b), TokenId(a)).unwrap()
            );
        }
        assert!(link_score(&z, TokenId(0), TokenId(1)).is_err());
        assert!(link_score(&z, TokenId(1), TokenId(4)).is_err());
    }

    #[test]
    fn auc_matches_pairwise_count() {
        let pos = [0.9f32, 0.4, 0.4, 0.7];
        let neg = [0.4f32, 0.1, 0.8];
        let mut wins = 0.0;
        for p in pos {
            for n in neg {
                wins += if p > n { 1.0 } else if p == n { 0.5 } else { 0.0 };
            }
        }
        assert!((auc(&pos, &neg).unwrap() - wins / 12.0).abs() < 1e-12);
        assert_eq!(auc(&[1.0], &[0.0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5], &[0.5]).unwrap(), 0.5);
        assert!(auc(&[], &[0.5]).is_err());
    }

    #[test]
    fn toy_training_improves_loss_and_is_deterministic() {
        let (_, _, g) = toy();
        let cfg = GcnTrainConfig { seed: 7, ..Default::default() };
        let a = train_gcn(&g, &cfg).unwrap();
        let b = train_gcn(&g, &cfg).unwrap();
        assert_eq!(a.history.len(), 200);
        assert!(a.history.last().unwrap().loss < a.history[0].loss);
        let bits = |o: &GcnTrainOutput| o.history.iter().map(|h| h.loss.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn trained_toy_scores_edges_above_non_edges() {
        let (_, _, g) = toy();
        let out = train_gcn(&g, &GcnTrainConfig { seed: 7, ..Default::default() }).unwrap();
        let z = gcn_forward(&out.model, &adjacency(&g, AdjacencyMode::SymNorm)).unwrap();
        let (mut on, mut off) = (vec![], vec![]);
        for a in 1..=6u32 {
            for b in a + 1..=6 {
                let s = link_score(&z, TokenId(a), TokenId(b)).unwrap();
                if g.has_edge(TokenId(a), TokenId(b)) { on.push(s) } else { off.push(s) }
            }
        }
        assert_eq!(off.len(), 9);
        let mean = |v: &[f32]| v.iter().sum::<f32>() / v.len() as f32;
        assert!(mean(&on) > mean(&off), "{} vs {}", mean(&on), mean(&off));
    }

    #[test]
    fn config_validation() {
        let cfg = GcnTrainConfig { epochs: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
        let (_, _, g) = toy();
        assert!(train_gcn(&g, &cfg).is_err());
        assert!(GcnTrainConfig { lr: 0.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn export_shape_and_pad_row() {
        let (_, _, g) = toy();
        let cfg = GcnTrainConfig::default();
        let m = GcnModel::init(6, &cfg, &mut Rng::seed_from_u64(4));
        let adj = adjacency(&g, cfg.adjacency_mode);
        let t = export_embeddings(&m, &adj).unwrap();
        assert_eq!(t.vectors().shape(), (7, 64));
        assert!(t.vectors().row(0).iter().all(|&x| x == 0.0));
        let z = gcn_forward(&m, &adj).unwrap();
        assert_eq!(t.vectors().row(3), z.row(2));
    }

    #[test]
    fn relabeling_permutes_embeddings() {
        let (_, _, g) = toy();
        let cfg = GcnTrainConfig { d_in: 5, d_hidden: 4, d_out: 3, ..Default::default() };
        let m = GcnModel::init(6, &cfg, &mut Rng::seed_from_u64(8));
        let z = gcn_forward(&m, &adjacency(&g, cfg.adjacency_mode)).unwrap();
        // perm[old] = new (0-based).
        let perm = [3usize, 0, 5, 1, 4, 2];
        let relabel = |t: TokenId| TokenId(perm[t.index() - 1] as u32 + 1);
        let g2 = CooccurrenceGraph::from_edges(6, g.edges().map(|(a, b)| (relabel(a), relabel(b)))).unwrap();
        let mut h0 = Matrix::zeros(6, 5);
        for (old, &new) in perm.iter().enumerate() {
            h0.row_mut(new).copy_from_slice(m.h0.row(old));
        }
        let m2 = GcnModel { h0, ..m.clone() };
        let z2 = gcn_forward(&m2, &adjacency(&g2, cfg.adjacency_mode)).unwrap();
        for (old, &new) in perm.iter().enumerate() {
            let a: Vec<u32> = z.row(old).iter().map(|x| x.to_bits()).collect();
            let b: Vec<u32> = z2.row(new).iter().map(|x| x.to_bits()).collect();
            assert_eq!(a, b);
        }
    }
}
