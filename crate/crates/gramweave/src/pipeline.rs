//! End-to-end orchestration: text preparation, graph, encoder, both
//! embedding sources, one LSTM per (source, n), and the accuracy report.
//!
//! Run directory layout:
//!
//! ```text
//! <output_dir>/
//!   stats.json  vocab.tsv  edges.tsv  report.csv  report.txt
//!   gcn/                 encoder checkpoint (h0, w1, w2, embeddings) + metrics.csv
//!   models/<src>-n<n>/   suggestion checkpoint + metrics.csv, train.csv, test.csv
//! ```
//!
//! Every number written depends only on the corpus bytes and the config.

use std::fs;
use std::path::{Path, PathBuf};

use gramweave_core::cograph::{adjacency, build_graph};
use gramweave_core::gcn::{export_embeddings, train_gcn};
use gramweave_core::lstm::{evaluate, train};
use gramweave_core::ngram::{build_ngrams, random_embeddings, split_dataset, EmbeddingSource, EmbeddingTable};
use gramweave_core::textprep::{build_vocabulary, corpus_stats, prepare_corpus, CorpusStats, RawDocument};
use serde_json::json;

use crate::checkpoint::{load_checkpoint, save_checkpoint, sha256_hex, Checkpoint};
use crate::config::PipelineConfig;
use crate::error::{Error, Result, StageExt};
use crate::fetch::fetch_articles;
use crate::formats::{read_text, write_dataset, write_edges, write_file, write_gcn_metrics, write_lstm_metrics, write_vocab};
use crate::model::SuggestModel;
use crate::report::{Report, ReportRow};

pub const GCN_KIND: &str = "gcn";
/// Mixed into the master seed to seed the random embedding table.
const RE_STREAM: u64 = 0x5245_5f45_4d42_4544;

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub label: String,
    pub text: String,
}

impl Corpus {
    pub fn digest(&self) -> String {
        sha256_hex(self.text.as_bytes())
    }
}

/// Read the configured corpus file, or fetch the configured keyword.
pub fn load_corpus(config: &PipelineConfig, cache_override: Option<&Path>) -> Result<Corpus> {
    if let Some(path) = &config.corpus_path {
        let stem = path.file_stem().map_or_else(|| "corpus".into(), |s| s.to_string_lossy().into_owned());
        let label = config.corpus_label.clone().unwrap_or(stem);
        return Ok(Corpus { label, text: read_text(path)? });
    }
    if let Some(keyword) = &config.keyword {
        let cache = config.resolve_cache_dir(cache_override);
        let fetched = fetch_articles(keyword, config.max_articles, &cache, &config.api_url)?;
        let label = config.corpus_label.clone().unwrap_or_else(|| keyword.clone());
        return Ok(Corpus { label, text: fetched.document.text });
    }
    Err(Error::Config("set either `corpus` or `keyword`".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub report: Report,
    pub stats: CorpusStats,
    /// Held-out AUC before and after encoder training, when it was trained.
    pub gcn_auc: Option<(f64, f64)>,
    pub model_dirs: Vec<PathBuf>,
}

fn json_file(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    fs::write(path, text).map_err(Error::io(path))
}

/// Context-embedding table stored in an encoder checkpoint, checked against
/// the corpus it is about to be used with.
pub fn load_gcn_embeddings(dir: &Path, corpus: &Corpus) -> Result<EmbeddingTable> {
    let ck = load_checkpoint(dir)?;
    ck.verify_corpus(corpus.text.as_bytes())?;
    if ck.kind != GCN_KIND {
        return Err(Error::Config(format!("{} is not an encoder checkpoint", dir.display())));
    }
    Ok(EmbeddingTable::new(ck.array("embeddings")?.clone(), EmbeddingSource::Ce)?)
}

pub fn run_pipeline(config: &PipelineConfig, corpus: &Corpus, log: &mut dyn FnMut(&str)) -> Result<PipelineOutput> {
    config.validate()?;
    let digest = corpus.digest();
    let echo = config.echo();
    let out = &config.output_dir;
    fs::create_dir_all(out).map_err(Error::io(out))?;

    let sentences = prepare_corpus(&RawDocument::new(corpus.text.as_str(), corpus.label.as_str()));
    let vocab = build_vocabulary(&sentences).stage("textprep")?;
    let stats = corpus_stats(&sentences);
    log(&format!(
        "corpus {}: {} words, {} unique, {} sentences",
        corpus.label, stats.n_words, stats.n_unique_words, stats.n_sentences
    ));
    let graph = build_graph(&sentences, &vocab).stage("cograph")?;
    log(&format!("graph: {} nodes, {} edges", graph.n_nodes(), graph.n_edges()));
    json_file(
        &out.join("stats.json"),
        &json!({
            "corpus": corpus.label,
            "corpus_digest": digest,
            "n_words": stats.n_words,
            "n_unique_words": stats.n_unique_words,
            "n_sentences": stats.n_sentences,
            "n_edges": graph.n_edges(),
        }),
    )?;
    write_file(&out.join("vocab.tsv"), |w| write_vocab(w, &vocab))?;
    write_file(&out.join("edges.tsv"), |w| write_edges(w, &graph))?;

    let wants = |s: EmbeddingSource| config.embedding_sources.contains(&s);
    let mut gcn_auc = None;
    let ce_table = if !wants(EmbeddingSource::Ce) {
        None
    } else if let Some(dir) = &config.gcn_checkpoint {
        log(&format!("encoder: reusing {}", dir.display()));
        Some(load_gcn_embeddings(dir, corpus)?)
    } else {
        log(&format!("encoder: training {} epochs", config.gcn.epochs));
        let trained = train_gcn(&graph, &config.gcn).stage("gcn")?;
        let full = adjacency(&graph, config.gcn.adjacency_mode);
        let table = export_embeddings(&trained.model, &full).stage("gcn")?;
        let final_auc = trained.history.last().map_or(trained.initial_auc, |m| m.auc);
        log(&format!("encoder: held-out AUC {:.4} -> {:.4}", trained.initial_auc, final_auc));
        gcn_auc = Some((trained.initial_auc, final_auc));

        let dir = out.join("gcn");
        let mut ck = Checkpoint::new(GCN_KIND, &digest, echo.clone());
        ck.meta.insert("initial_auc".into(), trained.initial_auc.to_string());
        ck.meta.insert("final_auc".into(), final_auc.to_string());
        ck.vocab = Some(vocab.clone());
        let m = &trained.model;
        for (name, a) in [("h0", &m.h0), ("w1", &m.w1), ("w2", &m.w2), ("embeddings", table.vectors())] {
            ck.arrays.push((name.into(), a.clone()));
        }
        save_checkpoint(&dir, &ck)?;
        write_file(&dir.join("metrics.csv"), |w| write_gcn_metrics(w, &trained.history))?;
        Some(table)
    };
    let re_table = if wants(EmbeddingSource::Re) {
        Some(random_embeddings(&vocab, config.gcn.d_out, config.seed ^ RE_STREAM).stage("ngram")?)
    } else {
        None
    };

    let mut report = Report::default();
    let mut model_dirs = Vec::new();
    for &n in &config.ngram_sizes {
        let run_seed = config.seed.wrapping_add(n as u64);
        let examples = build_ngrams(&sentences, &vocab, n).stage("ngram")?;
        let (train_set, test_set) = split_dataset(&examples, config.lstm_train_fraction, run_seed).stage("ngram")?;
        for &source in &config.embedding_sources {
            let table = match source {
                EmbeddingSource::Ce => ce_table.as_ref(),
                EmbeddingSource::Re => re_table.as_ref(),
            }
            .expect("table built for every selected source");
            let lstm_cfg = gramweave_core::lstm::LstmTrainConfig { seed: run_seed, ..config.lstm.clone() };
            log(&format!("lstm {} n={n}: {} train / {} test examples", source.as_str(), train_set.len(), test_set.len()));
            let trained = train(&train_set, table, &lstm_cfg).stage("lstm")?;
            let table = trained.tuned_table.unwrap_or_else(|| table.clone());
            let train_acc = evaluate(&trained.model, &train_set, &table).stage("evaluate")?;
            let test_acc = evaluate(&trained.model, &test_set, &table).stage("evaluate")?;
            log(&format!(
                "lstm {} n={n}: train {:.2}%  test {:.2}%",
                source.as_str(),
                100.0 * train_acc.top1,
                100.0 * test_acc.top1
            ));
            report.rows.push(ReportRow {
                corpus: corpus.label.clone(),
                source: source.as_str().into(),
                n: Some(n),
                train_acc: train_acc.top1,
                test_acc: test_acc.top1,
            });

            let dir = out.join("models").join(format!("{}-n{n}", source.as_str().to_ascii_lowercase()));
            let model = SuggestModel { model: trained.model, vocab: vocab.clone(), table, corpus_digest: digest.clone() };
            save_checkpoint(&dir, &model.to_checkpoint(echo.clone()))?;
            write_file(&dir.join("metrics.csv"), |w| write_lstm_metrics(w, &trained.history))?;
            write_file(&dir.join("train.csv"), |w| write_dataset(w, &train_set))?;
            write_file(&dir.join("test.csv"), |w| write_dataset(w, &test_set))?;
            model_dirs.push(dir);
        }
    }
    report.add_aggregates();
    write_file(&out.join("report.csv"), |w| report.write_csv(w))?;
    fs::write(out.join("report.txt"), report.to_table()).map_err(Error::io(&out.join("report.txt")))?;
    Ok(PipelineOutput { report, stats, gcn_auc, model_dirs })
}
