//! Pipeline configuration.
//!
//! The file format is TOML. Every key is optional and falls back to the
//! default shown in [`DEFAULT_CONFIG`], which is itself a valid config file.
//! Relative paths resolve against the directory of the config file.

use std::path::{Path, PathBuf};

use gramweave_core::cograph::AdjacencyMode;
use gramweave_core::gcn::GcnTrainConfig;
use gramweave_core::lstm::LstmTrainConfig;
use gramweave_core::ngram::EmbeddingSource;
use serde::Deserialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::formats::read_text;
use crate::model::{parse_readout, readout_name};

/// Environment variable that overrides the article cache directory.
pub const CACHE_ENV: &str = "GRAMWEAVE_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".gramweave-cache";
pub const DEFAULT_API_URL: &str = "https://en.wikipedia.org/w/api.php";

/// The documented default configuration.
pub const DEFAULT_CONFIG: &str = r#"# gramweave pipeline configuration; all keys optional, defaults shown.

# Corpus source: a UTF-8 text file, or a keyword fetched from Wikipedia.
# corpus = "corpus.txt"
# keyword = "sports"
max_articles = 1000
# cache_dir = ".gramweave-cache"    # GRAMWEAVE_CACHE takes precedence
api_url = "https://en.wikipedia.org/w/api.php"

# corpus_label = "sports"           # report name; defaults to keyword or file stem
output_dir = "run"
ngram_sizes = [1, 2, 3, 5, 10]
embedding_source = "both"           # "CE", "RE" or "both"
seed = 0

[gcn]
lr = 0.005
epochs = 200
train_fraction = 0.8
d_in = 64
d_hidden = 64
d_out = 64
negatives_per_positive = 1
adjacency = "sym_norm"              # or "raw"
train_features = true
# checkpoint = "run/gcn"            # reuse a trained encoder for this corpus

[lstm]
lr = 0.0001
epochs = 500
batch_size = 100
d_hidden = 200
readout = "last_real"               # or "final_step"
train_fraction = 0.8
fine_tune_embeddings = false
"#;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus_path: Option<PathBuf>,
    pub keyword: Option<String>,
    pub max_articles: usize,
    pub cache_dir: Option<PathBuf>,
    pub api_url: String,
    pub corpus_label: Option<String>,
    pub output_dir: PathBuf,
    pub ngram_sizes: Vec<usize>,
    /// Sources to train and report, in report order.
    pub embedding_sources: Vec<EmbeddingSource>,
    /// Master seed. The encoder uses it directly; the run for context
    /// length `n` uses `seed + n`.
    pub seed: u64,
    pub gcn: GcnTrainConfig,
    pub gcn_checkpoint: Option<PathBuf>,
    pub lstm: LstmTrainConfig,
    pub lstm_train_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            corpus_path: None,
            keyword: None,
            max_articles: 1000,
            cache_dir: None,
            api_url: DEFAULT_API_URL.into(),
            corpus_label: None,
            output_dir: PathBuf::from("run"),
            ngram_sizes: vec![1, 2, 3, 5, 10],
            embedding_sources: vec![EmbeddingSource::Re, EmbeddingSource::Ce],
            seed: 0,
            gcn: GcnTrainConfig::default(),
            gcn_checkpoint: None,
            lstm: LstmTrainConfig::default(),
            lstm_train_fraction: 0.8,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    corpus: Option<PathBuf>,
    keyword: Option<String>,
    max_articles: Option<usize>,
    cache_dir: Option<PathBuf>,
    api_url: Option<String>,
    corpus_label: Option<String>,
    output_dir: Option<PathBuf>,
    ngram_sizes: Option<Vec<usize>>,
    embedding_source: Option<String>,
    seed: Option<u64>,
    #[serde(default)]
    gcn: RawGcn,
    #[serde(default)]
    lstm: RawLstm,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGcn {
    lr: Option<f32>,
    epochs: Option<usize>,
    train_fraction: Option<f64>,
    d_in: Option<usize>,
    d_hidden: Option<usize>,
    d_out: Option<usize>,
    negatives_per_positive: Option<usize>,
    adjacency: Option<String>,
    train_features: Option<bool>,
    checkpoint: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLstm {
    lr: Option<f32>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    d_hidden: Option<usize>,
    readout: Option<String>,
    train_fraction: Option<f64>,
    fine_tune_embeddings: Option<bool>,
}

fn adjacency_name(m: AdjacencyMode) -> &'static str {
    match m {
        AdjacencyMode::Raw => "raw",
        AdjacencyMode::SymNorm => "sym_norm",
    }
}

fn parse_sources(s: &str) -> Option<Vec<EmbeddingSource>> {
    match s {
        "both" => Some(vec![EmbeddingSource::Re, EmbeddingSource::Ce]),
        _ => EmbeddingSource::parse(s).map(|src| vec![src]),
    }
}

fn sources_name(sources: &[EmbeddingSource]) -> String {
    match sources {
        [one] => one.as_str().into(),
        _ => "both".into(),
    }
}

impl PipelineConfig {
    /// Parse TOML text. Relative paths are joined onto `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let d = Self::default();
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let adjacency_mode = match raw.gcn.adjacency.as_deref() {
            None => d.gcn.adjacency_mode,
            Some("raw") => AdjacencyMode::Raw,
            Some("sym_norm") => AdjacencyMode::SymNorm,
            Some(other) => return Err(Error::Config(format!("unknown adjacency {other:?}"))),
        };
        let readout = match raw.lstm.readout.as_deref() {
            None => d.lstm.readout,
            Some(s) => parse_readout(s).ok_or_else(|| Error::Config(format!("unknown readout {s:?}")))?,
        };
        let embedding_sources = match raw.embedding_source.as_deref() {
            None => d.embedding_sources,
            Some(s) => parse_sources(s).ok_or_else(|| Error::Config(format!("unknown embedding_source {s:?}")))?,
        };
        let seed = raw.seed.unwrap_or(d.seed);
        let cfg = Self {
            corpus_path: raw.corpus.map(resolve),
            keyword: raw.keyword,
            max_articles: raw.max_articles.unwrap_or(d.max_articles),
            cache_dir: raw.cache_dir.map(resolve),
            api_url: raw.api_url.unwrap_or(d.api_url),
            corpus_label: raw.corpus_label,
            output_dir: raw.output_dir.map_or_else(|| resolve(d.output_dir), resolve),
            ngram_sizes: raw.ngram_sizes.unwrap_or(d.ngram_sizes),
            embedding_sources,
            seed,
            gcn: GcnTrainConfig {
                lr: raw.gcn.lr.unwrap_or(d.gcn.lr),
                epochs: raw.gcn.epochs.unwrap_or(d.gcn.epochs),
                train_fraction: raw.gcn.train_fraction.unwrap_or(d.gcn.train_fraction),
                seed,
                d_in: raw.gcn.d_in.unwrap_or(d.gcn.d_in),
                d_hidden: raw.gcn.d_hidden.unwrap_or(d.gcn.d_hidden),
                d_out: raw.gcn.d_out.unwrap_or(d.gcn.d_out),
                negatives_per_positive: raw.gcn.negatives_per_positive.unwrap_or(d.gcn.negatives_per_positive),
                adjacency_mode,
                train_features: raw.gcn.train_features.unwrap_or(d.gcn.train_features),
            },
            gcn_checkpoint: raw.gcn.checkpoint.map(resolve),
            lstm: LstmTrainConfig {
                lr: raw.lstm.lr.unwrap_or(d.lstm.lr),
                epochs: raw.lstm.epochs.unwrap_or(d.lstm.epochs),
                batch_size: raw.lstm.batch_size.unwrap_or(d.lstm.batch_size),
                seed,
                readout,
                d_hidden: raw.lstm.d_hidden.unwrap_or(d.lstm.d_hidden),
                fine_tune_embeddings: raw.lstm.fine_tune_embeddings.unwrap_or(d.lstm.fine_tune_embeddings),
            },
            lstm_train_fraction: raw.lstm.train_fraction.unwrap_or(d.lstm_train_fraction),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    /// Check every setting that does not depend on the filesystem.
    pub fn validate(&self) -> Result<()> {
        if self.ngram_sizes.is_empty() || self.ngram_sizes.contains(&0) {
            return Err(Error::Config("ngram_sizes must be non-empty with every size at least 1".into()));
        }
        if self.embedding_sources.is_empty() {
            return Err(Error::Config("no embedding source selected".into()));
        }
        if self.max_articles == 0 {
            return Err(Error::Config("max_articles must be at least 1".into()));
        }
        if !(self.lstm_train_fraction > 0.0 && self.lstm_train_fraction < 1.0) {
            return Err(Error::Config("lstm train_fraction must lie in (0, 1)".into()));
        }
        self.gcn.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.lstm.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Cache directory: `override_dir`, else `$GRAMWEAVE_CACHE`, else the
    /// config value, else `.gramweave-cache`.
    pub fn resolve_cache_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        resolve_cache_dir(override_dir, self.cache_dir.as_deref())
    }

    /// Every setting that affects emitted numbers, without filesystem paths.
    pub fn echo(&self) -> serde_json::Value {
        json!({
            "keyword": self.keyword,
            "max_articles": self.max_articles,
            "ngram_sizes": self.ngram_sizes,
            "embedding_source": sources_name(&self.embedding_sources),
            "seed": self.seed,
            "gcn": {
                "lr": self.gcn.lr,
                "epochs": self.gcn.epochs,
                "train_fraction": self.gcn.train_fraction,
                "d_in": self.gcn.d_in,
                "d_hidden": self.gcn.d_hidden,
                "d_out": self.gcn.d_out,
                "negatives_per_positive": self.gcn.negatives_per_positive,
                "adjacency": adjacency_name(self.gcn.adjacency_mode),
                "train_features": self.gcn.train_features,
            },
            "lstm": {
                "lr": self.lstm.lr,
                "epochs": self.lstm.epochs,
                "batch_size": self.lstm.batch_size,
                "d_hidden": self.lstm.d_hidden,
                "readout": readout_name(self.lstm.readout),
                "train_fraction": self.lstm_train_fraction,
                "fine_tune_embeddings": self.lstm.fine_tune_embeddings,
            },
        })
    }
}

pub fn resolve_cache_dir(override_dir: Option<&Path>, configured: Option<&Path>) -> PathBuf {
    if let Some(d) = override_dir {
        return d.to_path_buf();
    }
    if let Some(d) = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(d);
    }
    configured.map_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR), Path::to_path_buf)
}
