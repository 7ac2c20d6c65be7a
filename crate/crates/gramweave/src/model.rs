//! A trained suggestion model: LSTM, vocabulary and embedding table, as
//! stored in and restored from a checkpoint of kind `suggest`.

use std::path::Path;

use gramweave_core::lstm::{predict_next, LstmModel, LstmParams, Readout, Suggestion, PARAM_NAMES};
use gramweave_core::ngram::{EmbeddingSource, EmbeddingTable};
use gramweave_core::Vocabulary;
use serde::Serialize;

use crate::checkpoint::{load_checkpoint, Checkpoint, CheckpointError};

pub const SUGGEST_KIND: &str = "suggest";
const EMBEDDINGS: &str = "embeddings";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelInfo {
    pub corpus_digest: String,
    pub n: usize,
    pub embedding_source: &'static str,
    pub readout: &'static str,
    pub vocab_size: usize,
    pub d_emb: usize,
    pub d_hidden: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuggestModel {
    pub model: LstmModel,
    pub vocab: Vocabulary,
    pub table: EmbeddingTable,
    pub corpus_digest: String,
}

pub fn readout_name(r: Readout) -> &'static str {
    match r {
        Readout::LastReal => "last_real",
        Readout::FinalStep => "final_step",
    }
}

pub fn parse_readout(s: &str) -> Option<Readout> {
    match s {
        "last_real" => Some(Readout::LastReal),
        "final_step" => Some(Readout::FinalStep),
        _ => None,
    }
}

impl SuggestModel {
    pub fn info(&self) -> ModelInfo {
        ModelInfo {
            corpus_digest: self.corpus_digest.clone(),
            n: self.model.n,
            embedding_source: self.table.source().as_str(),
            readout: readout_name(self.model.readout),
            vocab_size: self.vocab.len(),
            d_emb: self.table.dim(),
            d_hidden: self.model.params.d_hidden(),
        }
    }

    pub fn suggest(&self, context: &str, k: usize) -> gramweave_core::Result<Vec<Suggestion>> {
        predict_next(&self.model, &self.vocab, &self.table, context, k)
    }

    pub fn to_checkpoint(&self, config: serde_json::Value) -> Checkpoint {
        let mut ck = Checkpoint::new(SUGGEST_KIND, &self.corpus_digest, config);
        ck.meta.insert("n".into(), self.model.n.to_string());
        ck.meta.insert("readout".into(), readout_name(self.model.readout).into());
        ck.meta.insert("embedding_source".into(), self.table.source().as_str().into());
        ck.vocab = Some(self.vocab.clone());
        for (name, m) in PARAM_NAMES.iter().zip(self.model.params.tensors()) {
            ck.arrays.push(((*name).into(), m.clone()));
        }
        ck.arrays.push((EMBEDDINGS.into(), self.table.vectors().clone()));
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, CheckpointError> {
        let corrupt = |m: String| CheckpointError::Corrupt(m);
        if ck.kind != SUGGEST_KIND {
            return Err(corrupt(format!("expected a {SUGGEST_KIND} checkpoint, found {:?}", ck.kind)));
        }
        let n: usize = ck.meta("n")?.parse().map_err(|_| corrupt("bad n".into()))?;
        let readout = parse_readout(ck.meta("readout")?).ok_or_else(|| corrupt("bad readout".into()))?;
        let source = EmbeddingSource::parse(ck.meta("embedding_source")?)
            .ok_or_else(|| corrupt("bad embedding_source".into()))?;
        let vocab = ck.vocab.clone().ok_or_else(|| corrupt("missing vocabulary".into()))?;
        let tensors: Vec<_> = PARAM_NAMES.iter().map(|name| ck.array(name).cloned()).collect::<Result<_, _>>()?;
        let tensors: [_; 10] = tensors.try_into().expect("one tensor per name");
        let params = LstmParams::from_tensors(tensors).map_err(|e| corrupt(e.to_string()))?;
        let table = EmbeddingTable::new(ck.array(EMBEDDINGS)?.clone(), source).map_err(|e| corrupt(e.to_string()))?;
        if n == 0 || table.max_id() != vocab.len() || params.vocab_size() != vocab.len() || params.d_emb() != table.dim() {
            return Err(corrupt("model, vocabulary and embeddings disagree in shape".into()));
        }
        Ok(Self { model: LstmModel { params, n, readout }, vocab, table, corpus_digest: ck.corpus_digest.clone() })
    }

    pub fn load(dir: &Path) -> Result<Self, CheckpointError> {
        Self::from_checkpoint(&load_checkpoint(dir)?)
    }
}
