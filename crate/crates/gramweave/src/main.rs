use std::io::{self, IsTerminal};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::RangedU64ValueParser;
use clap::{Parser, Subcommand};
use gramweave::config::{resolve_cache_dir, PipelineConfig, DEFAULT_API_URL, DEFAULT_CONFIG};
use gramweave::core::cograph::build_graph;
use gramweave::core::lstm::evaluate;
use gramweave::core::textprep::{build_vocabulary, corpus_stats, prepare_corpus, RawDocument};
use gramweave::fetch::{fetch_articles, keyword_dir};
use gramweave::formats::{open_file, read_dataset, read_text, write_edges, write_file, write_vocab};
use gramweave::model::SuggestModel;
use gramweave::pipeline::{load_corpus, run_pipeline};
use gramweave::report::Report;
use gramweave::{chart, repl, serve, Error, Result, EXIT_USAGE};

/// Next-word suggestion from graph-encoded context embeddings.
#[derive(Debug, Parser)]
#[command(name = "gramweave", version)]
struct Cli {
    /// Suppress progress messages.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Download and cache articles matching a keyword.
    Fetch {
        #[arg(long)]
        keyword: String,
        #[arg(long = "max", default_value_t = 1000, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
        max_articles: usize,
        /// Cache directory [default: $GRAMWEAVE_CACHE or .gramweave-cache]
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_API_URL)]
        api_url: String,
        /// Where to write the concatenated corpus [default: inside the cache]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clean a text file and report corpus statistics.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Also write vocab.tsv and edges.tsv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline described by a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the cache directory used for keyword corpora.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Accuracy of a trained model on its stored or a given dataset.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Interactive suggestions: one context per line, blank line to quit.
    Suggest {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(short, default_value_t = 5, value_parser = RangedU64ValueParser::<usize>::new().range(1..))]
        k: usize,
    },
    /// Serve suggestions over HTTP.
    Serve {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = serve::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
    /// Render a report CSV as an SVG bar chart.
    Chart {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the default configuration file.
    Config,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let quiet = cli.quiet;
    let mut log = |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    };
    match cli.command {
        Command::Fetch { keyword, max_articles, cache, api_url, out } => {
            let cache = resolve_cache_dir(cache.as_deref(), None);
            let fetched = fetch_articles(&keyword, max_articles, &cache, &api_url)?;
            let out = out.unwrap_or_else(|| keyword_dir(&cache, &keyword).join("corpus.txt"));
            std::fs::write(&out, &fetched.document.text).map_err(|e| Error::Io { path: out.clone(), source: e })?;
            let origin = if fetched.from_cache { "cache" } else { "network" };
            println!("{} articles for {keyword:?} ({origin}) -> {}", fetched.articles, out.display());
        }
        Command::Ingest { input, out } => {
            let text = read_text(&input)?;
            let label = input.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let sentences = prepare_corpus(&RawDocument::new(text, label));
            let stats = corpus_stats(&sentences);
            println!("words\tunique\tsentences");
            println!("{}\t{}\t{}", stats.n_words, stats.n_unique_words, stats.n_sentences);
            if let Some(dir) = out {
                let vocab = build_vocabulary(&sentences)?;
                let graph = build_graph(&sentences, &vocab)?;
                std::fs::create_dir_all(&dir).map_err(|e| Error::Io { path: dir.clone(), source: e })?;
                write_file(&dir.join("vocab.tsv"), |w| write_vocab(w, &vocab))?;
                write_file(&dir.join("edges.tsv"), |w| write_edges(w, &graph))?;
                log(&format!("wrote vocab.tsv and edges.tsv to {}", dir.display()));
            }
        }
        Command::Train { config, out, cache } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let corpus = load_corpus(&cfg, cache.as_deref())?;
            let output = run_pipeline(&cfg, &corpus, &mut log)?;
            print!("{}", output.report.to_table());
            log(&format!("report: {}", cfg.output_dir.join("report.csv").display()));
        }
        Command::Evaluate { checkpoint, dataset } => {
            let model = SuggestModel::load(&checkpoint)?;
            let sets: Vec<PathBuf> = match dataset {
                Some(d) => vec![d],
                None => ["train.csv", "test.csv"].iter().map(|f| checkpoint.join(f)).filter(|p| p.exists()).collect(),
            };
            if sets.is_empty() {
                return Err(Error::Config(format!("no dataset given and none stored in {}", checkpoint.display())));
            }
            println!("dataset\texamples\ttop1\ttop5");
            for path in sets {
                let examples = read_dataset(open_file(&path)?)?;
                if examples.iter().any(|e| e.n() != model.model.n) {
                    return Err(Error::Config(format!("{}: context length differs from n={}", path.display(), model.model.n)));
                }
                let acc = evaluate(&model.model, &examples, &model.table)?;
                println!("{}\t{}\t{:.4}\t{:.4}", display_name(&path), examples.len(), acc.top1, acc.top5);
            }
        }
        Command::Suggest { checkpoint, k } => {
            let model = SuggestModel::load(&checkpoint)?;
            if io::stdin().is_terminal() {
                eprintln!("n={} {}; type a context, blank line to quit", model.model.n, model.table.source().as_str());
            }
            repl::suggest_repl(&model, k, io::stdin().lock(), io::stdout().lock())?;
        }
        Command::Serve { checkpoint, port, host } => {
            let model = SuggestModel::load(&checkpoint)?;
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new()?;
            log(&format!("serving {} on http://{addr}", checkpoint.display()));
            rt.block_on(serve::serve(model, addr))?;
        }
        Command::Chart { report, out } => {
            let report = Report::read_csv(open_file(&report)?)?;
            std::fs::write(&out, chart::render_svg(&report)).map_err(|e| Error::Io { path: out.clone(), source: e })?;
        }
        Command::Config => print!("{DEFAULT_CONFIG}"),
    }
    Ok(())
}

fn display_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}
