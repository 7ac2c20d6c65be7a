//! Double-precision reference evaluations used as gradient-check oracles.
//!
//! Written with plain loops over dense arrays and sharing nothing with the
//! model code beyond the parameter containers. Only built with the `oracle`
//! feature.

use alloc::vec;
use alloc::vec::Vec;

use crate::cograph::{adjacency, AdjacencyMode, CooccurrenceGraph, Edge};
use crate::gcn::{link_loss_and_grads, GcnModel};
use crate::lstm::{example_loss_and_grads, LstmParams, Readout, PARAM_NAMES};
use crate::numcore::{finite_diff_grad, relative_error, Matrix};
use crate::rng::Rng;
use crate::TokenId;

fn dense(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(|&x| x as f64).collect()).collect()
}

fn mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| (0..inner).map(|k| row[k] * b[k][c]).sum())
                .collect()
        })
        .collect()
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// Dense propagation matrix built directly from its definition.
pub fn dense_adjacency(n_nodes: usize, edges: &[Edge], mode: AdjacencyMode) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n_nodes]; n_nodes];
    for &(u, v) in edges {
        a[u.index() - 1][v.index() - 1] = 1.0;
        a[v.index() - 1][u.index() - 1] = 1.0;
    }
    if mode == AdjacencyMode::Raw {
        return a;
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    for i in 0..n_nodes {
        for j in 0..n_nodes {
            a[i][j] /= libm::sqrt(deg[i] * deg[j]);
        }
    }
    a
}

/// Mean BCE of `sigmoid(z_u · z_v)` for the two-layer encoder.
pub fn gcn_link_loss(
    adj: &[Vec<f64>],
    h0: &Matrix,
    w1: &Matrix,
    w2: &Matrix,
    pairs: &[(Edge, f32)],
) -> f64 {
    let mut h1 = mul(adj, &mul(&dense(h0), &dense(w1)));
    for row in &mut h1 {
        for x in row.iter_mut() {
            *x = x.max(0.0);
        }
    }
    let z = mul(adj, &mul(&h1, &dense(w2)));
    let mut total = 0.0;
    for &((u, v), y) in pairs {
        let s: f64 = z[u.index() - 1].iter().zip(&z[v.index() - 1]).map(|(a, b)| a * b).sum();
        let p = sig(s);
        let y = y as f64;
        total -= y * libm::log(p) + (1.0 - y) * libm::log(1.0 - p);
    }
    total / pairs.len() as f64
}

/// First-layer pre-activations, for callers that want to avoid relu kinks.
pub fn gcn_first_layer(adj: &[Vec<f64>], h0: &Matrix, w1: &Matrix) -> Vec<Vec<f64>> {
    mul(adj, &mul(&dense(h0), &dense(w1)))
}

/// One cell step in double precision. Returns `(h, c)`.
pub fn lstm_cell(p: &LstmParams, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let dh = p.w_f.rows();
    let concat: Vec<f64> = h.iter().chain(x).copied().collect();
    let gate = |w: &Matrix, b: &Matrix, r: usize| -> f64 {
        b.get(0, r) as f64 + (0..concat.len()).map(|k| w.get(r, k) as f64 * concat[k]).sum::<f64>()
    };
    let mut h_new = vec![0.0; dh];
    let mut c_new = vec![0.0; dh];
    for r in 0..dh {
        let f = sig(gate(&p.w_f, &p.b_f, r));
        let i = sig(gate(&p.w_i, &p.b_i, r));
        let g = libm::tanh(gate(&p.w_c, &p.b_c, r));
        let o = sig(gate(&p.w_o, &p.b_o, r));
        c_new[r] = f * c[r] + i * g;
        h_new[r] = o * libm::tanh(c_new[r]);
    }
    (h_new, c_new)
}

/// Softmax cross-entropy of the many-to-one network at output `class`.
pub fn lstm_example_loss(p: &LstmParams, inputs: &[Vec<f32>], real_len: usize, readout: Readout, class: usize) -> f64 {
    let dh = p.w_f.rows();
    let steps = match readout {
        Readout::LastReal => real_len,
        Readout::FinalStep => inputs.len(),
    };
    let mut h = vec![0.0; dh];
    let mut c = vec![0.0; dh];
    for x in &inputs[..steps] {
        let x64: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        (h, c) = lstm_cell(p, &x64, &h, &c);
    }
    let logits: Vec<f64> = (0..p.w_y.rows())
        .map(|j| p.b_y.get(0, j) as f64 + (0..dh).map(|k| p.w_y.get(j, k) as f64 * h[k]).sum::<f64>())
        .collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + libm::log(logits.iter().map(|l| libm::exp(l - max)).sum::<f64>());
    lse - logits[class]
}

/// Per-tensor relative errors between an analytic gradient and central
/// differences of the matching double-precision loss.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub errors: Vec<(&'static str, f64)>,
}

impl GradientReport {
    pub fn worst(&self) -> f64 {
        self.errors.iter().map(|&(_, e)| e).fold(0.0, f64::max)
    }
}

/// Finite-difference step used by the gradient harnesses.
pub const GRAD_STEP: f32 = 1e-4;

/// Smallest first-layer pre-activation magnitude accepted by
/// [`gcn_gradient_check`]; closer instances straddle the relu kink.
pub const KINK_MARGIN: f64 = 1e-3;

fn normal_matrix(rows: usize, cols: usize, std: f64, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.normal(std) as f32)
}

/// One random 4-node, width-3 link-prediction instance with parameters
/// from N(0, 0.1). Returns `None` when the instance sits on a relu kink or
/// every hidden unit is off.
pub fn gcn_gradient_check(seed: u64) -> Option<GradientReport> {
    const N: usize = 4;
    const D: usize = 3;
    let mut rng = Rng::seed_from_u64(seed);
    let all: Vec<Edge> = (1..=N as u32)
        .flat_map(|u| (u + 1..=N as u32).map(move |v| (TokenId(u), TokenId(v))))
        .collect();
    let mut edges = Vec::new();
    let mut non_edges = Vec::new();
    for &e in &all {
        if rng.next_f64() < 0.5 {
            edges.push(e);
        } else {
            non_edges.push(e);
        }
    }
    if edges.is_empty() || non_edges.is_empty() {
        return None;
    }
    let mode = if seed.is_multiple_of(2) { AdjacencyMode::SymNorm } else { AdjacencyMode::Raw };
    let graph = CooccurrenceGraph::from_edges(N, edges.iter().copied()).ok()?;
    let adj = adjacency(&graph, mode);
    let dense_adj = dense_adjacency(N, &edges, mode);
    let model = GcnModel {
        h0: normal_matrix(N, D, 0.1, &mut rng),
        w1: normal_matrix(D, D, 0.1, &mut rng),
        w2: normal_matrix(D, D, 0.1, &mut rng),
        adjacency_mode: mode,
    };
    let first = gcn_first_layer(&dense_adj, &model.h0, &model.w1);
    if first.iter().flatten().any(|s| s.abs() < KINK_MARGIN) || first.iter().flatten().all(|&s| s < 0.0) {
        return None;
    }
    let pairs: Vec<(Edge, f32)> = edges
        .iter()
        .map(|&e| (e, 1.0))
        .chain(non_edges.iter().map(|&e| (e, 0.0)))
        .collect();
    let (_, grads) = link_loss_and_grads(&model, &adj, &pairs).ok()?;
    let (h0, w1, w2) = (&model.h0, &model.w1, &model.w2);
    let errors = vec![
        ("h0", relative_error(&grads.h0, &finite_diff_grad(|x| gcn_link_loss(&dense_adj, x, w1, w2, &pairs), h0, GRAD_STEP))),
        ("w1", relative_error(&grads.w1, &finite_diff_grad(|x| gcn_link_loss(&dense_adj, h0, x, w2, &pairs), w1, GRAD_STEP))),
        ("w2", relative_error(&grads.w2, &finite_diff_grad(|x| gcn_link_loss(&dense_adj, h0, w1, x, &pairs), w2, GRAD_STEP))),
    ];
    Some(GradientReport { errors })
}

/// One random LSTM instance (`d_h = 4`, `d_emb = 3`, `n = 3`, `V = 5`)
/// with parameters from N(0, 0.1) and a PAD-padded context. Checks every
/// parameter tensor and the input vectors.
pub fn lstm_gradient_check(seed: u64, readout: Readout) -> GradientReport {
    const V: usize = 5;
    const DE: usize = 3;
    const DH: usize = 4;
    const N: usize = 3;
    let mut rng = Rng::seed_from_u64(seed);
    let mut params = LstmParams::zeros(V, DE, DH);
    for m in params.tensors_mut() {
        *m = normal_matrix(m.rows(), m.cols(), 0.1, &mut rng);
    }
    let real_len = 1 + rng.below_usize(N);
    let inputs: Vec<Vec<f32>> = (0..N)
        .map(|t| {
            (0..DE)
                .map(|_| if t < real_len { rng.normal(1.0) as f32 } else { 0.0 })
                .collect()
        })
        .collect();
    let target = TokenId(1 + rng.below_usize(V) as u32);
    let class = target.index() - 1;
    let embedded: Vec<&[f32]> = inputs.iter().map(Vec::as_slice).collect();
    let (_, grads) = example_loss_and_grads(&params, &embedded, real_len, readout, target)
        .expect("well-formed instance");

    let mut errors = Vec::new();
    for (k, name) in PARAM_NAMES.iter().enumerate() {
        let base = params.tensors()[k].clone();
        let numeric = finite_diff_grad(
            |x| {
                let mut p = params.clone();
                *p.tensors_mut()[k] = x.clone();
                lstm_example_loss(&p, &inputs, real_len, readout, class)
            },
            &base,
            GRAD_STEP,
        );
        errors.push((*name, relative_error(grads.params.tensors()[k], &numeric)));
    }
    let x = Matrix::from_rows(&inputs);
    let numeric = finite_diff_grad(
        |m| {
            let rows: Vec<Vec<f32>> = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
            lstm_example_loss(&params, &rows, real_len, readout, class)
        },
        &x,
        GRAD_STEP,
    );
    let analytic = Matrix::from_rows(&grads.inputs);
    errors.push(("inputs", relative_error(&analytic, &numeric)));
    GradientReport { errors }
}
