//! Many-to-one LSTM over embedded n-gram contexts.
//!
//! Each gate reads the concatenation `[h_{t-1}, x_t]`:
//!
//! ```text
//! f_t = σ(W_f·[h, x] + b_f)
//! i_t = σ(W_i·[h, x] + b_i)
//! c̃_t = tanh(W_C·[h, x] + b_C)
//! o_t = σ(W_o·[h, x] + b_o)
//! c_t = f_t ⊙ c_{t-1} + i_t ⊙ c̃_t
//! h_t = o_t ⊙ tanh(c_t)
//! ```
//!
//! One hidden state is read out per context, either at the last real
//! (non-PAD) position or at the final padded position, and projected to one
//! logit per vocabulary word. Output class `j` is token id `j + 1`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ngram::{lookup, EmbeddingTable, NGramExample};
use crate::numcore::{adam_step, argmax, cross_entropy_with_logits, in_top_k, sigmoid_raw, softmax_raw, tanh_raw, AdamState, Matrix};
use crate::rng::{Rng, SplitMix64};
use crate::textprep::{clean_and_tokenize, TokenId, Vocabulary};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Readout {
    /// Hidden state after the last non-PAD input.
    #[default]
    LastReal,
    /// Hidden state after all `n` inputs, PAD included.
    FinalStep,
}

/// Trainable weights. Biases are stored as `1×len` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_f: Matrix,
    pub w_i: Matrix,
    pub w_c: Matrix,
    pub w_o: Matrix,
    pub b_f: Matrix,
    pub b_i: Matrix,
    pub b_c: Matrix,
    pub b_o: Matrix,
    /// `V×d_h` output projection.
    pub w_y: Matrix,
    pub b_y: Matrix,
}

/// Names used for [`LstmParams::tensors`], in order.
pub const PARAM_NAMES: [&str; 10] = ["w_f", "w_i", "w_c", "w_o", "b_f", "b_i", "b_c", "b_o", "w_y", "b_y"];

impl LstmParams {
    pub fn zeros(vocab_size: usize, d_emb: usize, d_hidden: usize) -> Self {
        let w = || Matrix::zeros(d_hidden, d_hidden + d_emb);
        let b = || Matrix::zeros(1, d_hidden);
        Self {
            w_f: w(),
            w_i: w(),
            w_c: w(),
            w_o: w(),
            b_f: b(),
            b_i: b(),
            b_c: b(),
            b_o: b(),
            w_y: Matrix::zeros(vocab_size, d_hidden),
            b_y: Matrix::zeros(1, vocab_size),
        }
    }

    /// Gate weights uniform in `±1/√(d_h + d_emb)`, forget bias 1, other
    /// biases 0, output weights uniform in `±1/√d_h`.
    pub fn init(vocab_size: usize, d_emb: usize, d_hidden: usize, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(vocab_size, d_emb, d_hidden);
        let gate = 1.0 / libm::sqrt((d_hidden + d_emb) as f64);
        for w in [&mut p.w_f, &mut p.w_i, &mut p.w_c, &mut p.w_o] {
            w.as_mut_slice().iter_mut().for_each(|x| *x = rng.uniform(-gate, gate) as f32);
        }
        p.b_f.fill(1.0);
        let out = 1.0 / libm::sqrt(d_hidden as f64);
        p.w_y.as_mut_slice().iter_mut().for_each(|x| *x = rng.uniform(-out, out) as f32);
        p
    }

    pub fn d_hidden(&self) -> usize {
        self.w_f.rows()
    }

    pub fn d_emb(&self) -> usize {
        self.w_f.cols() - self.w_f.rows()
    }

    pub fn vocab_size(&self) -> usize {
        self.w_y.rows()
    }

    pub fn tensors(&self) -> [&Matrix; 10] {
        [
            &self.w_f, &self.w_i, &self.w_c, &self.w_o, &self.b_f, &self.b_i, &self.b_c, &self.b_o, &self.w_y,
            &self.b_y,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix; 10] {
        [
            &mut self.w_f,
            &mut self.w_i,
            &mut self.w_c,
            &mut self.w_o,
            &mut self.b_f,
            &mut self.b_i,
            &mut self.b_c,
            &mut self.b_o,
            &mut self.w_y,
            &mut self.b_y,
        ]
    }

    /// Rebuild from tensors in [`PARAM_NAMES`] order, checking shapes.
    pub fn from_tensors(t: [Matrix; 10]) -> Result<Self> {
        let [w_f, w_i, w_c, w_o, b_f, b_i, b_c, b_o, w_y, b_y] = t;
        let p = Self { w_f, w_i, w_c, w_o, b_f, b_i, b_c, b_o, w_y, b_y };
        p.check_shapes()?;
        Ok(p)
    }

    pub fn check_shapes(&self) -> Result<()> {
        let dh = self.w_f.rows();
        let wide = self.w_f.cols();
        let bad = |m: &Matrix, rows: usize, cols: usize| Error::ShapeMismatch {
            op: "lstm params",
            lhs_rows: m.rows(),
            lhs_cols: m.cols(),
            rhs_rows: rows,
            rhs_cols: cols,
        };
        if wide <= dh {
            return Err(bad(&self.w_f, dh, dh + 1));
        }
        for w in [&self.w_i, &self.w_c, &self.w_o] {
            if w.shape() != (dh, wide) {
                return Err(bad(w, dh, wide));
            }
        }
        for b in [&self.b_f, &self.b_i, &self.b_c, &self.b_o] {
            if b.shape() != (1, dh) {
                return Err(bad(b, 1, dh));
            }
        }
        let v = self.w_y.rows();
        if self.w_y.cols() != dh {
            return Err(bad(&self.w_y, v, dh));
        }
        if self.b_y.shape() != (1, v) {
            return Err(bad(&self.b_y, 1, v));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f32>,
    pub c: Vec<f32>,
}

impl LstmState {
    pub fn zeros(d_hidden: usize) -> Self {
        Self { h: vec![0.0; d_hidden], c: vec![0.0; d_hidden] }
    }
}

/// Gate activations of one step, kept for backpropagation.
#[derive(Debug, Clone)]
struct Step {
    z: Vec<f32>,
    f: Vec<f32>,
    i: Vec<f32>,
    g: Vec<f32>,
    o: Vec<f32>,
    c_prev: Vec<f32>,
    tanh_c: Vec<f32>,
}

fn step(p: &LstmParams, x: &[f32], state: &LstmState) -> (LstmState, Step) {
    let dh = p.d_hidden();
    let mut z = Vec::with_capacity(p.w_f.cols());
    z.extend_from_slice(&state.h);
    z.extend_from_slice(x);
    let pre = |w: &Matrix, b: &Matrix, r: usize| {
        let mut s = b.as_slice()[r];
        for (wv, zv) in w.row(r).iter().zip(&z) {
            s += wv * zv;
        }
        s
    };
    let mut f = vec![0.0; dh];
    let mut i = vec![0.0; dh];
    let mut g = vec![0.0; dh];
    let mut o = vec![0.0; dh];
    let mut c = vec![0.0; dh];
    let mut tanh_c = vec![0.0; dh];
    let mut h = vec![0.0; dh];
    for r in 0..dh {
        f[r] = sigmoid_raw(pre(&p.w_f, &p.b_f, r));
        i[r] = sigmoid_raw(pre(&p.w_i, &p.b_i, r));
        g[r] = tanh_raw(pre(&p.w_c, &p.b_c, r));
        o[r] = sigmoid_raw(pre(&p.w_o, &p.b_o, r));
        c[r] = f[r] * state.c[r] + i[r] * g[r];
        tanh_c[r] = tanh_raw(c[r]);
        h[r] = o[r] * tanh_c[r];
    }
    let cache = Step { z, f, i, g, o, c_prev: state.c.clone(), tanh_c };
    (LstmState { h, c }, cache)
}

/// One application of the cell equations.
pub fn lstm_cell(params: &LstmParams, x: &[f32], state: &LstmState) -> Result<LstmState> {
    params.check_shapes()?;
    let dh = params.d_hidden();
    if x.len() != params.d_emb() || state.h.len() != dh || state.c.len() != dh {
        return Err(Error::ShapeMismatch {
            op: "lstm_cell",
            lhs_rows: dh,
            lhs_cols: params.d_emb(),
            rhs_rows: state.h.len(),
            rhs_cols: x.len(),
        });
    }
    Ok(step(params, x, state).0)
}

fn check_inputs(params: &LstmParams, embedded: &[&[f32]], real_len: usize) -> Result<()> {
    if real_len == 0 || real_len > embedded.len() {
        return Err(Error::InvalidConfig(alloc::format!(
            "real_len {real_len} outside 1..={}",
            embedded.len()
        )));
    }
    if let Some(x) = embedded.iter().find(|x| x.len() != params.d_emb()) {
        return Err(Error::ShapeMismatch {
            op: "lstm input",
            lhs_rows: 1,
            lhs_cols: params.d_emb(),
            rhs_rows: 1,
            rhs_cols: x.len(),
        });
    }
    Ok(())
}

fn steps_to_run(embedded_len: usize, real_len: usize, readout: Readout) -> usize {
    match readout {
        Readout::LastReal => real_len,
        Readout::FinalStep => embedded_len,
    }
}

fn logits_from(params: &LstmParams, h: &[f32]) -> Vec<f32> {
    (0..params.vocab_size())
        .map(|j| {
            let mut s = params.b_y.as_slice()[j];
            for (w, hv) in params.w_y.row(j).iter().zip(h) {
                s += w * hv;
            }
            s
        })
        .collect()
}

/// Run the cell over the context from a zero state and project the readout
/// hidden state to `V` logits.
pub fn forward(params: &LstmParams, embedded: &[&[f32]], real_len: usize, readout: Readout) -> Result<Vec<f32>> {
    params.check_shapes()?;
    check_inputs(params, embedded, real_len)?;
    let mut state = LstmState::zeros(params.d_hidden());
    for x in &embedded[..steps_to_run(embedded.len(), real_len, readout)] {
        state = step(params, x, &state).0;
    }
    Ok(logits_from(params, &state.h))
}

/// Gradients shaped like [`LstmParams`], plus the gradient for each input
/// vector of the context.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads {
    pub params: LstmParams,
    pub inputs: Vec<Vec<f32>>,
}

fn class_of(target: TokenId, vocab_size: usize) -> Result<usize> {
    if target.is_pad() || target.index() > vocab_size {
        return Err(Error::IdOutOfRange { id: target.0, max: vocab_size as u32 });
    }
    Ok(target.index() - 1)
}

/// Cross-entropy of one example and its gradients, accumulated into `acc`
/// after scaling by `scale`. Returns the loss and the logits.
#[allow(clippy::too_many_arguments)]
fn accumulate_example(
    p: &LstmParams,
    embedded: &[&[f32]],
    real_len: usize,
    readout: Readout,
    class: usize,
    scale: f32,
    acc: &mut LstmParams,
    mut input_grads: Option<&mut [Vec<f32>]>,
) -> (f32, Vec<f32>) {
    let dh = p.d_hidden();
    let t_max = steps_to_run(embedded.len(), real_len, readout);
    let mut state = LstmState::zeros(dh);
    let mut caches = Vec::with_capacity(t_max);
    for x in &embedded[..t_max] {
        let (next, cache) = step(p, x, &state);
        caches.push(cache);
        state = next;
    }
    let logits = logits_from(p, &state.h);
    let (loss, mut dlogits) = cross_entropy_with_logits(&logits, class);
    dlogits[class] -= 1.0;
    dlogits.iter_mut().for_each(|d| *d *= scale);

    let mut dh_next = vec![0.0f32; dh];
    for (j, &d) in dlogits.iter().enumerate() {
        acc.b_y.as_mut_slice()[j] += d;
        if d == 0.0 {
            continue;
        }
        let w_row = p.w_y.row(j);
        for (r, (g, &hv)) in acc.w_y.row_mut(j).iter_mut().zip(&state.h).enumerate() {
            *g += d * hv;
            dh_next[r] += d * w_row[r];
        }
    }

    let wide = p.w_f.cols();
    let mut dc_next = vec![0.0f32; dh];
    let mut da = [vec![0.0f32; dh], vec![0.0f32; dh], vec![0.0f32; dh], vec![0.0f32; dh]];
    let mut dz = vec![0.0f32; wide];
    for (t, cache) in caches.iter().enumerate().rev() {
        for r in 0..dh {
            let tc = cache.tanh_c[r];
            let d_o = dh_next[r] * tc;
            let dc = dc_next[r] + dh_next[r] * cache.o[r] * (1.0 - tc * tc);
            let d_f = dc * cache.c_prev[r];
            let d_i = dc * cache.g[r];
            let d_g = dc * cache.i[r];
            dc_next[r] = dc * cache.f[r];
            da[0][r] = d_f * cache.f[r] * (1.0 - cache.f[r]);
            da[1][r] = d_i * cache.i[r] * (1.0 - cache.i[r]);
            da[2][r] = d_g * (1.0 - cache.g[r] * cache.g[r]);
            da[3][r] = d_o * cache.o[r] * (1.0 - cache.o[r]);
        }
        dz.iter_mut().for_each(|v| *v = 0.0);
        let gates = [(&p.w_f, 0usize), (&p.w_i, 1), (&p.w_c, 2), (&p.w_o, 3)];
        for (w, k) in gates {
            let (gw, gb) = match k {
                0 => (&mut acc.w_f, &mut acc.b_f),
                1 => (&mut acc.w_i, &mut acc.b_i),
                2 => (&mut acc.w_c, &mut acc.b_c),
                _ => (&mut acc.w_o, &mut acc.b_o),
            };
            for (r, &d) in da[k].iter().enumerate() {
                gb.as_mut_slice()[r] += d;
                if d == 0.0 {
                    continue;
                }
                let w_row = w.row(r);
                for ((g, &zv), (dzv, &wv)) in gw.row_mut(r).iter_mut().zip(&cache.z).zip(dz.iter_mut().zip(w_row)) {
                    *g += d * zv;
                    *dzv += d * wv;
                }
            }
        }
        dh_next.copy_from_slice(&dz[..dh]);
        if let Some(ig) = input_grads.as_deref_mut() {
            for (g, &v) in ig[t].iter_mut().zip(&dz[dh..]) {
                *g += v;
            }
        }
    }
    (loss, logits)
}

/// Cross-entropy loss of one context against `target` and its gradients
/// with respect to every parameter and every input vector.
pub fn example_loss_and_grads(
    params: &LstmParams,
    embedded: &[&[f32]],
    real_len: usize,
    readout: Readout,
    target: TokenId,
) -> Result<(f32, LstmGrads)> {
    params.check_shapes()?;
    check_inputs(params, embedded, real_len)?;
    let class = class_of(target, params.vocab_size())?;
    let mut acc = LstmParams::zeros(params.vocab_size(), params.d_emb(), params.d_hidden());
    let mut inputs = vec![vec![0.0; params.d_emb()]; embedded.len()];
    let (loss, _) = accumulate_example(params, embedded, real_len, readout, class, 1.0, &mut acc, Some(&mut inputs));
    Ok((loss, LstmGrads { params: acc, inputs }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmTrainConfig {
    pub lr: f32,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub readout: Readout,
    pub d_hidden: usize,
    /// Also update the embedding table (PAD row excluded).
    pub fine_tune_embeddings: bool,
}

impl Default for LstmTrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.0001,
            epochs: 500,
            batch_size: 100,
            seed: 0,
            readout: Readout::LastReal,
            d_hidden: 200,
            fine_tune_embeddings: false,
        }
    }
}

impl LstmTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lstm lr must be positive");
        }
        if self.epochs == 0 {
            return bad("lstm epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.d_hidden == 0 {
            return bad("lstm hidden size must be at least 1");
        }
        Ok(())
    }
}

/// A trained network together with the context length it was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub params: LstmParams,
    pub n: usize,
    pub readout: Readout,
}

impl LstmModel {
    pub fn logits(&self, table: &EmbeddingTable, context: &[TokenId], real_len: usize) -> Result<Vec<f32>> {
        let embedded = lookup(table, context)?;
        forward(&self.params, &embedded, real_len, self.readout)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LstmEpochMetrics {
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's examples.
    pub loss: f32,
    /// Top-1 accuracy of the predictions made during the epoch.
    pub train_acc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmTrainOutput {
    pub model: LstmModel,
    pub history: Vec<LstmEpochMetrics>,
    /// The updated table when fine-tuning was enabled.
    pub tuned_table: Option<EmbeddingTable>,
}

/// Mini-batch Adam training on mean softmax cross-entropy.
///
/// The init and shuffle seeds are the first two outputs of a SplitMix64
/// stream over `config.seed`.
pub fn train(dataset: &[NGramExample], table: &EmbeddingTable, config: &LstmTrainConfig) -> Result<LstmTrainOutput> {
    config.validate()?;
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    let n = first.n();
    if dataset.iter().any(|e| e.n() != n) {
        return Err(Error::InvalidConfig("mixed context lengths in dataset".into()));
    }
    let vocab_size = table.max_id();
    for e in dataset {
        class_of(e.target, vocab_size)?;
        lookup(table, &e.context)?;
    }
    let mut sm = SplitMix64::new(config.seed);
    let (init_seed, shuffle_seed) = (sm.next_u64(), sm.next_u64());
    let mut params = LstmParams::init(vocab_size, table.dim(), config.d_hidden, &mut Rng::seed_from_u64(init_seed));
    let mut shuffle_rng = Rng::seed_from_u64(shuffle_seed);
    let mut states: Vec<AdamState> = params.tensors().iter().map(|m| AdamState::new(m)).collect();
    let mut table = table.clone();
    let mut table_state = config.fine_tune_embeddings.then(|| AdamState::new(table.vectors()));

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut grads = LstmParams::zeros(vocab_size, table.dim(), config.d_hidden);
    let mut input_grads = vec![vec![0.0f32; table.dim()]; n];
    let mut table_grad = Matrix::zeros(0, 0);
    for epoch in 1..=config.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut loss_sum = 0.0f64;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch_size) {
            grads.tensors_mut().into_iter().for_each(|m| m.fill(0.0));
            if table_state.is_some() {
                table_grad = Matrix::zeros(table.vectors().rows(), table.dim());
            }
            let scale = 1.0 / batch.len() as f32;
            for &idx in batch {
                let ex = &dataset[idx];
                let embedded = lookup(&table, &ex.context)?;
                let class = ex.target.index() - 1;
                let tuning = table_state.is_some();
                if tuning {
                    input_grads.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
                }
                let (loss, logits) = accumulate_example(
                    &params,
                    &embedded,
                    ex.real_len,
                    config.readout,
                    class,
                    scale,
                    &mut grads,
                    tuning.then_some(&mut input_grads[..]),
                );
                loss_sum += loss as f64;
                if argmax(&logits) == class {
                    correct += 1;
                }
                if tuning {
                    for (id, g) in ex.context.iter().zip(&input_grads) {
                        if !id.is_pad() {
                            for (t, &v) in table_grad.row_mut(id.index()).iter_mut().zip(g) {
                                *t += v;
                            }
                        }
                    }
                }
            }
            for ((param, grad), st) in params.tensors_mut().into_iter().zip(grads.tensors()).zip(&mut states) {
                adam_step(param, grad, st, config.lr)?;
            }
            if let Some(st) = table_state.as_mut() {
                let vectors = table.vectors_mut();
                adam_step(vectors, &table_grad, st, config.lr)?;
                vectors.row_mut(0).fill(0.0);
            }
        }
        let loss = (loss_sum / dataset.len() as f64) as f32;
        if !loss.is_finite() {
            return Err(Error::NonFinite("lstm loss"));
        }
        history.push(LstmEpochMetrics { epoch, loss, train_acc: correct as f64 / dataset.len() as f64 });
    }
    for m in params.tensors() {
        m.check_finite("lstm parameters")?;
    }
    Ok(LstmTrainOutput {
        model: LstmModel { params, n, readout: config.readout },
        history,
        tuned_table: config.fine_tune_embeddings.then_some(table),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub top1: f64,
    pub top5: f64,
}

/// Top-1 and top-5 accuracy; ties favour the lowest id.
pub fn evaluate(model: &LstmModel, dataset: &[NGramExample], table: &EmbeddingTable) -> Result<Accuracy> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (mut top1, mut top5) = (0usize, 0usize);
    for ex in dataset {
        let class = class_of(ex.target, model.params.vocab_size())?;
        let logits = model.logits(table, &ex.context, ex.real_len)?;
        top1 += in_top_k(&logits, class, 1) as usize;
        top5 += in_top_k(&logits, class, 5) as usize;
    }
    let n = dataset.len() as f64;
    Ok(Accuracy { top1: top1 as f64 / n, top5: top5 as f64 / n })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    pub token: String,
    pub probability: f32,
}

/// Encode free text as a model context: cleaned tokens, unknown words
/// dropped, the last `n` kept, PAD-filled to `n`. Returns the ids and the
/// number of real ones.
pub fn encode_context(vocab: &Vocabulary, text: &str, n: usize) -> Result<(Vec<TokenId>, usize)> {
    let known: Vec<TokenId> = clean_and_tokenize(text).tokens.iter().filter_map(|t| vocab.id(t)).collect();
    if known.is_empty() {
        return Err(Error::NoUsableContext);
    }
    let mut ids = known[known.len().saturating_sub(n)..].to_vec();
    let real_len = ids.len();
    ids.resize(n, TokenId::PAD);
    Ok((ids, real_len))
}

/// The `k` most probable next words, by descending probability (ties by id).
pub fn predict_next(
    model: &LstmModel,
    vocab: &Vocabulary,
    table: &EmbeddingTable,
    context_text: &str,
    k: usize,
) -> Result<Vec<Suggestion>> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let (ids, real_len) = encode_context(vocab, context_text, model.n)?;
    let probs = softmax_raw(&model.logits(table, &ids, real_len)?);
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|j| {
            let token = vocab
                .token(TokenId(j as u32 + 1))
                .ok_or(Error::IdOutOfRange { id: j as u32 + 1, max: vocab.len() as u32 })?;
            Ok(Suggestion { token: token.into(), probability: probs[j] })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ngram::{build_ngrams, random_embeddings, EmbeddingSource};
    use crate::textprep::{build_vocabulary, prepare_corpus, RawDocument};
    use proptest::prelude::*;
    use crate::rng::Rng;

    fn random_params(v: usize, de: usize, dh: usize, seed: u64) -> LstmParams {
        let mut rng = Rng::seed_from_u64(seed);
        let mut p = LstmParams::zeros(v, de, dh);
        for m in p.tensors_mut() {
            m.as_mut_slice().iter_mut().for_each(|x| *x = rng.normal(0.5) as f32);
        }
        p
    }

    #[test]
    fn zero_cell_is_half_open_gates() {
        let p = LstmParams::zeros(4, 2, 3);
        let s = lstm_cell(&p, &[0.7, -1.2], &LstmState::zeros(3)).unwrap();
        assert_eq!(s, LstmState::zeros(3));
        let (_, cache) = step(&p, &[0.7, -1.2], &LstmState::zeros(3));
        assert!(cache.f.iter().chain(&cache.i).chain(&cache.o).all(|&x| x == 0.5));
        assert!(cache.g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn saturated_forget_gate_keeps_memory() {
        let mut p = LstmParams::zeros(2, 2, 3);
        p.b_f.fill(50.0);
        let prev = LstmState { h: vec![0.0; 3], c: vec![0.3, -0.8, 1.5] };
        let s = lstm_cell(&p, &[1.0, 2.0], &prev).unwrap();
        for (a, b) in s.c.iter().zip(&prev.c) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn cell_shape_errors() {
        let p = LstmParams::zeros(2, 2, 3);
        assert!(lstm_cell(&p, &[1.0], &LstmState::zeros(3)).is_err());
        assert!(lstm_cell(&p, &[1.0, 0.0], &LstmState::zeros(2)).is_err());
    }

    #[test]
    fn hidden_state_is_bounded() {
        let p = random_params(3, 2, 4, 5);
        let mut s = LstmState::zeros(4);
        for t in 0..20 {
            s = lstm_cell(&p, &[t as f32 * 0.3 - 2.0, 1.5], &s).unwrap();
            assert!(s.h.iter().all(|&h| h > -1.0 && h < 1.0));
        }
    }

    #[test]
    fn zero_params_give_bias_logits() {
        let mut p = LstmParams::zeros(3, 2, 4);
        p.b_y = Matrix::from_rows(&[[0.1, -0.2, 0.3]]);
        let logits = forward(&p, &[&[1.0, 2.0], &[0.5, 0.5]], 2, Readout::LastReal).unwrap();
        assert_eq!(logits, [0.1, -0.2, 0.3]);
    }

    #[test]
    fn readout_modes() {
        let p = random_params(5, 3, 4, 11);
        let x = [0.4f32, -0.3, 0.9];
        let pad = [0.0f32; 3];
        let short = forward(&p, &[&x], 1, Readout::LastReal).unwrap();
        let padded = forward(&p, &[&x, &pad, &pad], 1, Readout::LastReal).unwrap();
        assert_eq!(short, padded);
        let last = forward(&p, &[&x, &pad, &pad], 1, Readout::FinalStep).unwrap();
        assert_ne!(last, padded);
        assert!(forward(&p, &[&x], 0, Readout::LastReal).is_err());
        assert!(forward(&p, &[&x], 2, Readout::LastReal).is_err());
    }

    #[test]
    fn logits_have_vocab_length() {
        let p = random_params(7, 2, 3, 1);
        for n in 1..6 {
            let xs = vec![[0.1f32, 0.2]; n];
            let refs: Vec<&[f32]> = xs.iter().map(|x| &x[..]).collect();
            assert_eq!(forward(&p, &refs, n, Readout::FinalStep).unwrap().len(), 7);
        }
    }

    fn toy() -> (Vocabulary, Vec<NGramExample>) {
        let c = prepare_corpus(&RawDocument::new("the weather is good. the weather forecast is sunny.", "toy"));
        let v = build_vocabulary(&c).unwrap();
        let ex = build_ngrams(&c, &v, 3).unwrap();
        (v, ex)
    }

    #[test]
    fn constant_predictor_accuracy() {
        let (v, ex) = toy();
        let table = random_embeddings(&v, 4, 0).unwrap();
        let mut params = LstmParams::zeros(6, 4, 3);
        params.b_y.as_mut_slice()[v.id("is").unwrap().index() - 1] = 5.0;
        let model = LstmModel { params, n: 3, readout: Readout::LastReal };
        let acc = evaluate(&model, &ex, &table).unwrap();
        assert!((acc.top1 - 2.0 / 7.0).abs() < 1e-12);
        assert!(acc.top5 >= acc.top1);
        assert!(evaluate(&model, &[], &table).is_err());
    }

    #[test]
    fn first_epoch_loss_near_uniform() {
        let (v, ex) = toy();
        let table = random_embeddings(&v, 8, 1).unwrap();
        let cfg = LstmTrainConfig { epochs: 1, seed: 3, ..Default::default() };
        let out = train(&ex, &table, &cfg).unwrap();
        let l = out.history[0].loss;
        assert!((l - 6f32.ln()).abs() < 0.1 * 6f32.ln(), "{l}");
    }

    #[test]
    fn training_is_deterministic() {
        let (v, ex) = toy();
        let table = random_embeddings(&v, 8, 1).unwrap();
        let cfg = LstmTrainConfig { epochs: 20, d_hidden: 16, lr: 0.01, batch_size: 3, ..Default::default() };
        let a = train(&ex, &table, &cfg).unwrap();
        let b = train(&ex, &table, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(train(&[], &table, &cfg).is_err());
    }

    #[test]
    fn overfits_toy_and_predicts_observed_successors() {
        let (v, ex) = toy();
        let table = random_embeddings(&v, 16, 2).unwrap();
        let cfg = LstmTrainConfig { epochs: 300, d_hidden: 32, lr: 0.01, ..Default::default() };
        let out = train(&ex, &table, &cfg).unwrap();
        let acc = evaluate(&out.model, &ex, &table).unwrap();
        assert!(acc.top1 >= 6.0 / 7.0 - 1e-12, "{acc:?}");
        let top = predict_next(&out.model, &v, &table, "the weather is", 1).unwrap();
        assert!(top[0].token == "good" || top[0].token == "sunny", "{top:?}");
        let all = predict_next(&out.model, &v, &table, "The WEATHER, is!", 50).unwrap();
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0].probability >= w[1].probability));
        assert!(all.iter().map(|s| s.probability).sum::<f32>() <= 1.0 + 1e-5);
    }

    #[test]
    fn fine_tuning_moves_embeddings_but_not_pad() {
        let (v, ex) = toy();
        let table = random_embeddings(&v, 4, 2).unwrap();
        let cfg = LstmTrainConfig { epochs: 5, d_hidden: 8, lr: 0.01, fine_tune_embeddings: true, ..Default::default() };
        let out = train(&ex, &table, &cfg).unwrap();
        let tuned = out.tuned_table.unwrap();
        assert_eq!(tuned.source(), EmbeddingSource::Re);
        assert!(tuned.vectors().row(0).iter().all(|&x| x == 0.0));
        assert_ne!(tuned.vectors(), table.vectors());
    }

    #[test]
    fn context_encoding() {
        let (v, _) = toy();
        let (ids, real) = encode_context(&v, "zebra the weather unknown is", 2).unwrap();
        assert_eq!(ids, [v.id("weather").unwrap(), v.id("is").unwrap()]);
        assert_eq!(real, 2);
        let (ids, real) = encode_context(&v, "sunny", 3).unwrap();
        assert_eq!((ids[1], ids[2], real), (TokenId::PAD, TokenId::PAD, 1));
        assert_eq!(encode_context(&v, "", 3).unwrap_err(), Error::NoUsableContext);
        assert_eq!(encode_context(&v, "zebra!", 3).unwrap_err(), Error::NoUsableContext);
    }

    proptest! {
        #[test]
        fn appending_pad_never_changes_logits(seed in 0u64..10_000, real in 1usize..5, extra in 0usize..6) {
            let p = random_params(6, 3, 4, seed);
            let mut rng = Rng::seed_from_u64(seed ^ 0xabc);
            let xs: Vec<Vec<f32>> = (0..real).map(|_| (0..3).map(|_| rng.normal(1.0) as f32).collect()).collect();
            let pad = [0.0f32; 3];
            let base: Vec<&[f32]> = xs.iter().map(|x| &x[..]).collect();
            let mut padded = base.clone();
            padded.extend(core::iter::repeat_n(&pad[..], extra));
            let a = forward(&p, &base, real, Readout::LastReal).unwrap();
            let b = forward(&p, &padded, real, Readout::LastReal).unwrap();
            prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
    }
}
