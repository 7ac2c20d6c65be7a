//! Text ingestion: sentence splitting, cleaning, tokenization, vocabulary
//! and corpus statistics.
//!
//! Sentences are split on `.`, `!` and `?` before any cleaning. Each
//! fragment then loses every ASCII punctuation character, has whitespace
//! runs collapsed, is lowercased and split into tokens. Fragments that end
//! up with no tokens are dropped.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Word id. Id 0 is reserved for padding and never names a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TokenId(pub u32);

impl TokenId {
    pub const PAD: TokenId = TokenId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_pad(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A labelled chunk of raw text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub text: String,
    pub source_label: String,
}

impl RawDocument {
    pub fn new(text: impl Into<String>, source_label: impl Into<String>) -> Self {
        Self { text: text.into(), source_label: source_label.into() }
    }
}

/// One cleaned sentence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub tokens: Vec<String>,
}

impl Sentence {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        Self { tokens: tokens.into_iter().map(Into::into).collect() }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CorpusStats {
    pub n_words: usize,
    pub n_unique_words: usize,
    pub n_sentences: usize,
}

/// Split raw text into sentence fragments on `.`, `!` and `?`.
///
/// Fragments are not trimmed; whitespace-only fragments are dropped.
pub fn split_sentences(raw: &RawDocument) -> Vec<&str> {
    raw.text
        .split(['.', '!', '?'])
        .filter(|frag| !frag.trim().is_empty())
        .collect()
}

/// Remove ASCII punctuation, collapse whitespace, lowercase, split.
pub fn clean_and_tokenize(raw_sentence: &str) -> Sentence {
    let stripped: String = raw_sentence.chars().filter(|c| !c.is_ascii_punctuation()).collect();
    let collapsed = stripped.split_whitespace().collect::<Vec<_>>().join(" ");
    let lowered = collapsed.to_lowercase();
    Sentence { tokens: lowered.split_whitespace().map(ToString::to_string).collect() }
}

/// Split, clean and tokenize a document, dropping empty sentences.
pub fn prepare_corpus(raw: &RawDocument) -> Vec<Sentence> {
    split_sentences(raw)
        .into_iter()
        .map(clean_and_tokenize)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Token ↔ id bijection with contiguous ids `1..=V` in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    token_to_id: BTreeMap<String, TokenId>,
    id_to_token: Vec<String>,
}

impl Vocabulary {
    /// Build from a list of tokens in id order (index 0 gets id 1).
    /// Duplicate tokens are rejected.
    pub fn from_tokens<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut vocab = Vocabulary::default();
        for tok in tokens {
            let tok = tok.into();
            if vocab.token_to_id.contains_key(&tok) {
                return Err(Error::InvalidConfig(alloc::format!("duplicate token {tok:?}")));
            }
            vocab.push(tok);
        }
        Ok(vocab)
    }

    fn push(&mut self, tok: String) -> TokenId {
        let id = TokenId(self.id_to_token.len() as u32 + 1);
        self.token_to_id.insert(tok.clone(), id);
        self.id_to_token.push(tok);
        id
    }

    /// Number of real tokens, `V`. The PAD id is not counted.
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        if id.is_pad() {
            return None;
        }
        self.id_to_token.get(id.index() - 1).map(String::as_str)
    }

    /// `(token, id)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, TokenId)> + '_ {
        self.id_to_token.iter().enumerate().map(|(i, t)| (t.as_str(), TokenId(i as u32 + 1)))
    }

    /// Ids for each token of a sentence; fails on the first unknown token.
    pub fn encode(&self, sentence: &Sentence) -> Result<Vec<TokenId>> {
        sentence
            .tokens
            .iter()
            .map(|t| self.id(t).ok_or_else(|| Error::UnknownToken(t.clone())))
            .collect()
    }
}

/// One id per unique token, assigned in order of first appearance.
pub fn build_vocabulary(corpus: &[Sentence]) -> Result<Vocabulary> {
    if corpus.iter().all(Sentence::is_empty) {
        return Err(Error::EmptyCorpus);
    }
    let mut vocab = Vocabulary::default();
    for tok in corpus.iter().flat_map(|s| &s.tokens) {
        if !vocab.token_to_id.contains_key(tok) {
            vocab.push(tok.clone());
        }
    }
    Ok(vocab)
}

pub fn corpus_stats(corpus: &[Sentence]) -> CorpusStats {
    let mut unique = alloc::collections::BTreeSet::new();
    let mut n_words = 0;
    for tok in corpus.iter().flat_map(|s| &s.tokens) {
        n_words += 1;
        unique.insert(tok.as_str());
    }
    CorpusStats { n_words, n_unique_words: unique.len(), n_sentences: corpus.len() }
}
