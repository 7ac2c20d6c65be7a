#![allow(dead_code)]

use gramweave::core::cograph::{adjacency, build_graph};
use gramweave::core::gcn::{export_embeddings, train_gcn, GcnTrainConfig};
use gramweave::core::lstm::{train, LstmModel, LstmParams, LstmTrainConfig, Readout};
use gramweave::core::ngram::{build_ngrams, random_embeddings};
use gramweave::core::rng::Rng;
use gramweave::core::textprep::{build_vocabulary, prepare_corpus, RawDocument};
use gramweave::core::Vocabulary;
use gramweave::model::SuggestModel;

pub const TOY: &str = "the weather is good. the weather forecast is sunny.";

/// Trigram model overfit on [`TOY`] with graph-derived embeddings.
pub fn toy_model() -> SuggestModel {
    let sentences = prepare_corpus(&RawDocument::new(TOY, "toy"));
    let vocab = build_vocabulary(&sentences).unwrap();
    let graph = build_graph(&sentences, &vocab).unwrap();
    let gcn_cfg = GcnTrainConfig { d_in: 16, d_hidden: 16, d_out: 16, epochs: 50, ..Default::default() };
    let gcn = train_gcn(&graph, &gcn_cfg).unwrap();
    let table = export_embeddings(&gcn.model, &adjacency(&graph, gcn_cfg.adjacency_mode)).unwrap();
    let examples = build_ngrams(&sentences, &vocab, 3).unwrap();
    let cfg = LstmTrainConfig { epochs: 300, d_hidden: 32, lr: 0.01, ..Default::default() };
    let out = train(&examples, &table, &cfg).unwrap();
    SuggestModel { model: out.model, vocab, table, corpus_digest: "toy".into() }
}

/// Untrained model with `v` words `w0..`, sized like a desktop deployment.
pub fn random_model(v: usize, d_emb: usize, d_hidden: usize, n: usize, seed: u64) -> SuggestModel {
    let vocab = Vocabulary::from_tokens((0..v).map(|i| format!("w{i}"))).unwrap();
    let table = random_embeddings(&vocab, d_emb, seed).unwrap();
    let mut rng = Rng::seed_from_u64(seed);
    let params = LstmParams::init(v, d_emb, d_hidden, &mut rng);
    SuggestModel {
        model: LstmModel { params, n, readout: Readout::LastReal },
        vocab,
        table,
        corpus_digest: format!("random-{seed}"),
    }
}

/// Every file under `root`, keyed by relative path.
pub fn snapshot(root: &std::path::Path) -> std::collections::BTreeMap<std::path::PathBuf, Vec<u8>> {
    let mut out = std::collections::BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).unwrap();
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), bytes);
            }
        }
    }
    out
}

/// Small but complete pipeline configuration writing to `out`.
pub fn small_config(out: &std::path::Path) -> gramweave::config::PipelineConfig {
    let seed = 42;
    gramweave::config::PipelineConfig {
        output_dir: out.to_path_buf(),
        ngram_sizes: vec![1, 3],
        seed,
        gcn: GcnTrainConfig { seed, epochs: 30, d_in: 16, d_hidden: 16, d_out: 16, ..Default::default() },
        lstm: LstmTrainConfig { seed, epochs: 5, d_hidden: 16, lr: 0.01, ..Default::default() },
        ..Default::default()
    }
}
