//! Drives the installed binary end to end: exit codes, artifact layout,
//! config precedence, and generation determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use codesieve::NgramModel;

const BIN: &str = env!("CARGO_BIN_EXE_codesieve");
const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/mini_corpus.jsonl");
const SUITE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/prompts.json");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in ["curate", "stats", "train", "generate", "eval", "compare"] {
        assert!(text.contains(sub), "--help does not mention {sub}");
    }
}

#[test]
fn compare_help_lists_every_flag() {
    let out = run(&["compare", "--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for flag in [
        "--in", "--format", "--out-dir", "--suite", "--seed", "--order", "--repeats",
        "--temperature", "--max-tokens", "--truncate", "--min-severity", "--jobs", "--config",
    ] {
        assert!(text.contains(flag), "compare --help does not mention {flag}");
    }
}

#[test]
fn unknown_flag_is_an_error() {
    let out = run(&["curate", "--in", CORPUS, "--out-dir", "/tmp/x", "--frobnicate"]);
    assert!(!out.status.success());
}

#[test]
fn missing_input_exits_with_ingest_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["curate", "--in", "/no/such/file.jsonl", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_corpus_exits_with_empty_code() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let model = tmp.path().join("model.bin");
    let out = run(&["train", "--in", empty.to_str().unwrap(), "--out", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let out_dir = tmp.path().join("exp");
    let out = run(&[
        "compare", "--in", empty.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn curate_writes_the_four_artifacts_and_stats_reads_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["curate", "--in", CORPUS, "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in ["all.jsonl", "secure.jsonl", "findings.jsonl", "report.json"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let all = fs::read_to_string(out_dir.join("all.jsonl")).unwrap();
    assert_eq!(all.lines().count(), 200);
    let secure = fs::read_to_string(out_dir.join("secure.jsonl")).unwrap();
    assert_eq!(secure.lines().count(), 180);

    let report = out_dir.join("report.json");
    let out = run(&["stats", "--report", report.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("200"), "stats output lacks the corpus size:\n{text}");
    assert!(text.contains("SQL-INJECT"), "stats output lacks the findings histogram:\n{text}");
}

#[test]
fn same_seed_generates_identical_text() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.bin");
    let out = run(&["train", "--in", CORPUS, "--out", model.to_str().unwrap(), "--order", "3"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let generate = |seed: &str| {
        let out = run(&[
            "generate", "--model", model.to_str().unwrap(),
            "--prompt", "Deserializes data from file",
            "--seed", seed, "--temperature", "1.0",
        ]);
        assert!(out.status.success());
        stdout(&out)
    };
    let first = generate("41");
    let second = generate("41");
    assert_eq!(first, second);
    assert!(!first.is_empty());
}

#[test]
fn eval_writes_a_report_for_the_bundled_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let model = tmp.path().join("model.bin");
    let out = run(&["train", "--in", CORPUS, "--out", model.to_str().unwrap()]);
    assert!(out.status.success());

    let report = tmp.path().join("eval.json");
    let out = run(&[
        "eval", "--model", model.to_str().unwrap(), "--suite", SUITE,
        "--repeats", "2", "--seed", "7", "--out", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&report).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["repeats"], 2);
    assert_eq!(parsed["cases"].as_array().map(Vec::len), Some(5));
}

#[test]
fn config_file_fills_gaps_and_flags_beat_it() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("codesieve.toml");
    fs::write(&config, "[train]\norder = 4\n").unwrap();

    let from_file = tmp.path().join("from_file.bin");
    let out = run(&[
        "--config", config.to_str().unwrap(),
        "train", "--in", CORPUS, "--out", from_file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(NgramModel::load(Path::new(&from_file)).unwrap().order(), 4);

    let from_flag = tmp.path().join("from_flag.bin");
    let out = run(&[
        "--config", config.to_str().unwrap(),
        "train", "--in", CORPUS, "--out", from_flag.to_str().unwrap(), "--order", "2",
    ]);
    assert!(out.status.success());
    assert_eq!(NgramModel::load(Path::new(&from_flag)).unwrap().order(), 2);
}

#[test]
fn unknown_config_section_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "[surprises]\nx = 1\n").unwrap();
    let out = run(&[
        "--config", config.to_str().unwrap(),
        "stats", "--report", "/tmp/nothing.json",
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
