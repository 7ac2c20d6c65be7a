//! Fixed-length n-gram examples and the embedding tables that feed the LSTM.
//!
//! Every token after the first in a sentence is a target. Its context is up
//! to `n` preceding tokens of the same sentence, in order, followed by PAD
//! ids up to length `n`.

use alloc::vec::Vec;

use crate::numcore::Matrix;
use crate::rng::Rng;
use crate::textprep::{Sentence, TokenId, Vocabulary};
use crate::{Error, Result};

/// Standard deviation of the baseline's random vectors.
pub const RANDOM_EMBEDDING_STD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NGramExample {
    /// Exactly `n` ids; PAD only as a suffix.
    pub context: Vec<TokenId>,
    pub target: TokenId,
    /// Number of non-PAD ids in `context`.
    pub real_len: usize,
}

impl NGramExample {
    /// Validate and wrap. Fails if PAD appears before a real id, if the
    /// context is empty or all PAD, or if the target is PAD.
    pub fn new(context: Vec<TokenId>, target: TokenId) -> Result<Self> {
        let real_len = context.iter().take_while(|t| !t.is_pad()).count();
        if real_len == 0 || context[real_len..].iter().any(|t| !t.is_pad()) || target.is_pad() {
            return Err(Error::InvalidConfig("malformed n-gram example".into()));
        }
        Ok(Self { context, target, real_len })
    }

    pub fn n(&self) -> usize {
        self.context.len()
    }
}

pub fn build_ngrams(corpus: &[Sentence], vocab: &Vocabulary, n: usize) -> Result<Vec<NGramExample>> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let mut out = Vec::new();
    for sentence in corpus {
        let ids = vocab.encode(sentence)?;
        for t in 1..ids.len() {
            let start = t.saturating_sub(n);
            let mut context = ids[start..t].to_vec();
            let real_len = context.len();
            context.resize(n, TokenId::PAD);
            out.push(NGramExample { context, target: ids[t], real_len });
        }
    }
    Ok(out)
}

/// Seeded shuffle, then the first `round(train_fraction · N)` examples
/// (at least one, at most `N − 1`) become the training set.
pub fn split_dataset<T: Clone>(examples: &[T], train_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if examples.len() < 2 {
        return Err(Error::TooFewExamples { need: 2, got: examples.len() });
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!("train_fraction {train_fraction} not in (0, 1)")));
    }
    let mut order: Vec<usize> = (0..examples.len()).collect();
    Rng::seed_from_u64(seed).shuffle(&mut order);
    let n_train = (libm::round(train_fraction * examples.len() as f64) as usize).clamp(1, examples.len() - 1);
    let train = order[..n_train].iter().map(|&i| examples[i].clone()).collect();
    let test = order[n_train..].iter().map(|&i| examples[i].clone()).collect();
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmbeddingSource {
    /// Context embeddings exported from the graph encoder.
    Ce,
    /// Frozen random vectors (baseline).
    Re,
}

impl EmbeddingSource {
    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingSource::Ce => "CE",
            EmbeddingSource::Re => "RE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "CE" | "ce" => Some(EmbeddingSource::Ce),
            "RE" | "re" => Some(EmbeddingSource::Re),
            _ => None,
        }
    }
}

/// `(V+1)×d` word vectors; row 0 is the all-zero PAD vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    vectors: Matrix,
    source: EmbeddingSource,
}

impl EmbeddingTable {
    /// Wrap a matrix whose row 0 must be zero.
    pub fn new(vectors: Matrix, source: EmbeddingSource) -> Result<Self> {
        if vectors.rows() == 0 || vectors.row(0).iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidConfig("embedding row 0 must be the zero PAD vector".into()));
        }
        vectors.check_finite("embedding table")?;
        Ok(Self { vectors, source })
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub(crate) fn vectors_mut(&mut self) -> &mut Matrix {
        &mut self.vectors
    }

    pub fn source(&self) -> EmbeddingSource {
        self.source
    }

    /// Largest valid id, `V`.
    pub fn max_id(&self) -> usize {
        self.vectors.rows() - 1
    }

    pub fn dim(&self) -> usize {
        self.vectors.cols()
    }

    pub fn row(&self, id: TokenId) -> Result<&[f32]> {
        if id.index() > self.max_id() {
            return Err(Error::IdOutOfRange { id: id.0, max: self.max_id() as u32 });
        }
        Ok(self.vectors.row(id.index()))
    }
}

/// Baseline table: rows `1..=V` i.i.d. normal with std 0.1, row 0 zero.
pub fn random_embeddings(vocab: &Vocabulary, d: usize, seed: u64) -> Result<EmbeddingTable> {
    if d == 0 {
        return Err(Error::InvalidConfig("embedding dimension must be at least 1".into()));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let mut m = Matrix::zeros(vocab.len() + 1, d);
    for x in &mut m.as_mut_slice()[d..] {
        *x = rng.normal(RANDOM_EMBEDDING_STD) as f32;
    }
    EmbeddingTable::new(m, EmbeddingSource::Re)
}

/// One vector per id, in order. PAD maps to the zero vector.
pub fn lookup<'a>(table: &'a EmbeddingTable, context: &[TokenId]) -> Result<Vec<&'a [f32]>> {
    context.iter().map(|&id| table.row(id)).collect()
}
