use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const TOY: &str = "the weather is good. the weather forecast is sunny.";

fn gramweave(args: &[&str]) -> Output {
    gramweave_with_input(args, "")
}

fn gramweave_with_input(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_gramweave"))
        .args(args)
        .env_remove("GRAMWEAVE_CACHE")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_toy_config(dir: &Path) -> std::path::PathBuf {
    fs::write(dir.join("toy.txt"), TOY).unwrap();
    let cfg = dir.join("toy.toml");
    fs::write(
        &cfg,
        "corpus = \"toy.txt\"\noutput_dir = \"run\"\nngram_sizes = [1, 3]\n\
         [gcn]\nepochs = 20\nd_in = 8\nd_hidden = 8\nd_out = 8\n\
         [lstm]\nepochs = 30\nd_hidden = 8\nlr = 0.01\n",
    )
    .unwrap();
    cfg
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(gramweave(&[]).status.code(), Some(1));
    assert_eq!(gramweave(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gramweave(&["suggest", "--checkpoint", "x", "-k", "0"]).status.code(), Some(1));
    assert_eq!(gramweave(&["fetch", "--keyword", "x", "--max", "0"]).status.code(), Some(1));
    assert_eq!(gramweave(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing");
    let o = gramweave(&["suggest", "--checkpoint", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[lstm]\nlr = -1.0\n").unwrap();
    assert_eq!(gramweave(&["train", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&bad, "ngram_sizes = \"three\"\n").unwrap();
    assert_eq!(gramweave(&["train", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn config_prints_parseable_defaults() {
    let o = gramweave(&["config"]);
    assert!(o.status.success());
    let tmp = tempfile::tempdir().unwrap();
    let cfg = gramweave::config::PipelineConfig::from_toml_str(&stdout(&o), tmp.path()).unwrap();
    assert_eq!(cfg.ngram_sizes, [1, 2, 3, 5, 10]);
}

#[test]
fn ingest_reports_stats_and_writes_graph() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("toy.txt");
    fs::write(&input, TOY).unwrap();
    let out = tmp.path().join("graph");
    let o = gramweave(&["-q", "ingest", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "words\tunique\tsentences\n9\t6\t2\n");
    assert_eq!(fs::read_to_string(out.join("edges.tsv")).unwrap().lines().count(), 6);
}

#[test]
fn train_evaluate_suggest_chart() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_toy_config(tmp.path());
    let o = gramweave(&["-q", "train", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = tmp.path().join("run");
    for f in ["report.csv", "report.txt", "stats.json", "vocab.tsv", "edges.tsv", "gcn/manifest.json"] {
        assert!(run.join(f).exists(), "{f}");
    }
    let report = fs::read_to_string(run.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 1 + 4 + 2);

    let model = run.join("models/ce-n3");
    let o = gramweave(&["evaluate", "--checkpoint", model.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("dataset\texamples\ttop1\ttop5\ntrain.csv\t"), "{text}");
    assert!(text.contains("\ntest.csv\t"));

    let o = gramweave_with_input(&["suggest", "--checkpoint", model.to_str().unwrap(), "-k", "2"], "the weather\n\nthe\n");
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].split("  ").count(), 2);

    let svg = tmp.path().join("chart.svg");
    let o = gramweave(&["chart", "--report", run.join("report.csv").to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(fs::read_to_string(svg).unwrap().starts_with("<svg"));

    let other = tmp.path().join("other.csv");
    fs::write(&other, "context_ids,target_id,real_len\n1,2,1\n").unwrap();
    let o = gramweave(&["evaluate", "--checkpoint", model.to_str().unwrap(), "--dataset", other.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fetch_uses_seeded_cache_offline() {
    let tmp = tempfile::tempdir().unwrap();
    gramweave::fetch::seed_cache(tmp.path(), "weather", &[("Rain", "It rains."), ("Sun", "It shines.")]).unwrap();
    let out = tmp.path().join("corpus.txt");
    let args = [
        "fetch", "--keyword", "weather", "--max", "5",
        "--cache", tmp.path().to_str().unwrap(),
        "--api-url", "http://127.0.0.1:9/api.php",
        "--out", out.to_str().unwrap(),
    ];
    let o = gramweave(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("2 articles for \"weather\" (cache)"));
    assert_eq!(fs::read_to_string(&out).unwrap(), "It rains.\n\nIt shines.");

    let empty = tempfile::tempdir().unwrap();
    let o = gramweave(&[
        "fetch", "--keyword", "weather",
        "--cache", empty.path().to_str().unwrap(),
        "--api-url", "http://127.0.0.1:9/api.php",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gramweave ingest"));
}
