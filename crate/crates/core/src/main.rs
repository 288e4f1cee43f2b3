//! Command-line front end for the curation and evaluation pipeline.
//!
//! Settings resolve in precedence order: command-line flags, then the
//! optional TOML config file, then built-in defaults. Every artifact a
//! subcommand writes embeds the effective settings it ran with.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use codesieve::analyzer::Severity;
use codesieve::corpus::{
    read_samples_jsonl, render_stats, run_curation, CorpusError, CurateConfig, CurationReport,
    InputFormat, ReportFile,
};
use codesieve::eval::{run_suite, EvalConfig, EvalReport, EvalSummary, PromptCase};
use codesieve::ngram::{NgramError, NgramModel, SamplerConfig, DEFAULT_BANNED};

const DEFAULT_SUITE: &str = include_str!("../testdata/prompts.json");
const DEFAULT_ORDER: usize = 3;

// ---------------------------------------------------------------------------
// argument definitions
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "codesieve",
    version,
    about = "Curate Python corpora, train n-gram models on them, and compare the results"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a corpus into all/secure variants and write reports.
    Curate(CurateArgs),
    /// Print a human-readable summary of a curation report.
    Stats(StatsArgs),
    /// Train an n-gram model on a JSONL corpus.
    Train(TrainArgs),
    /// Generate code from a trained model.
    Generate(GenerateArgs),
    /// Run the prompt suite against a trained model.
    Eval(EvalArgs),
    /// Run the full two-corpus experiment end to end.
    Compare(CompareArgs),
}

#[derive(Args)]
struct CurateArgs {
    /// Input corpus path.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Input format: jsonl or columnar.
    #[arg(long)]
    format: Option<InputFormat>,
    /// Directory for all.jsonl, secure.jsonl, findings.jsonl, report.json.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Cut each sample down to at most this many characters.
    #[arg(long, value_name = "N")]
    truncate: Option<usize>,
    /// Lowest severity that excludes a sample from the secure corpus.
    #[arg(long, value_name = "LEVEL")]
    min_severity: Option<Severity>,
    /// Worker threads for per-sample processing (default: all processors).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// A report.json written by curate.
    #[arg(long, value_name = "PATH", default_value = "report.json")]
    report: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Training corpus (JSONL with code fields).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Context size; an order-3 model conditions on two tokens.
    #[arg(long, value_name = "N")]
    order: Option<usize>,
    /// Where to write the model file.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
    /// Label stored in the model (default: input file stem).
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Trained model file.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Prompt text; matched against function names seen in training.
    #[arg(long)]
    prompt: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Sampling temperature; 0 is greedy.
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// Trained model file.
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Prompt suite (JSON list of cases).
    #[arg(long, value_name = "PATH")]
    suite: PathBuf,
    /// Runs per prompt; run i uses seed + i.
    #[arg(long, value_name = "N")]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,
    /// Where to write the evaluation report.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Input corpus path.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Input format: jsonl or columnar.
    #[arg(long)]
    format: Option<InputFormat>,
    /// Directory for every artifact of the experiment.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    /// Prompt suite to evaluate with (default: the bundled five prompts).
    #[arg(long, value_name = "PATH")]
    suite: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    order: Option<usize>,
    #[arg(long, value_name = "N")]
    repeats: Option<usize>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_name = "N")]
    max_tokens: Option<usize>,
    /// Cut each sample down to at most this many characters.
    #[arg(long, value_name = "N")]
    truncate: Option<usize>,
    /// Lowest severity that excludes a sample from the secure corpus.
    #[arg(long, value_name = "LEVEL")]
    min_severity: Option<Severity>,
    /// Worker threads for curation (never changes the output bytes).
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

// ---------------------------------------------------------------------------
// config file
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    curate: CurateSection,
    #[serde(default)]
    train: TrainSection,
    #[serde(default)]
    generate: SamplingSection,
    #[serde(default)]
    eval: EvalSection,
    #[serde(default)]
    compare: CompareSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurateSection {
    format: Option<String>,
    min_severity: Option<String>,
    truncate: Option<usize>,
    jobs: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainSection {
    order: Option<usize>,
    label: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SamplingSection {
    seed: Option<u64>,
    temperature: Option<f64>,
    max_tokens: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalSection {
    repeats: Option<usize>,
    seed: Option<u64>,
    temperature: Option<f64>,
    max_tokens: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareSection {
    format: Option<String>,
    min_severity: Option<String>,
    truncate: Option<usize>,
    jobs: Option<usize>,
    seed: Option<u64>,
    order: Option<usize>,
    repeats: Option<usize>,
    temperature: Option<f64>,
    max_tokens: Option<usize>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

fn parse_format(value: Option<String>) -> Result<Option<InputFormat>, CliError> {
    value.map(|s| s.parse().map_err(CliError::Config)).transpose()
}

fn parse_severity(value: Option<String>) -> Result<Option<Severity>, CliError> {
    value.map(|s| s.parse().map_err(CliError::Config)).transpose()
}

// ---------------------------------------------------------------------------
// errors and exit codes
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] NgramError),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Corpus(CorpusError::Ingest(_)) => 2,
            CliError::Model(NgramError::EmptyCorpus) => 3,
            _ => 1,
        }
    }
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_file_config(cli.config.as_deref())?;
    match cli.command {
        Command::Curate(args) => cmd_curate(args, file.curate),
        Command::Stats(args) => cmd_stats(args),
        Command::Train(args) => cmd_train(args, file.train),
        Command::Generate(args) => cmd_generate(args, file.generate),
        Command::Eval(args) => cmd_eval(args, file.eval),
        Command::Compare(args) => cmd_compare(args, file.compare),
    }
}

fn cmd_curate(args: CurateArgs, file: CurateSection) -> Result<(), CliError> {
    let format = args.format.or(parse_format(file.format)?).unwrap_or(InputFormat::Jsonl);
    let cfg = CurateConfig {
        min_severity: args
            .min_severity
            .or(parse_severity(file.min_severity)?)
            .unwrap_or(Severity::Low),
        truncate: args.truncate.or(file.truncate),
        jobs: args.jobs.or(file.jobs),
    };
    let output = run_curation(&args.input, format, &args.out_dir, &cfg)?;
    print!("{}", render_stats(&output.report));
    println!("\nwrote all.jsonl, secure.jsonl, findings.jsonl, report.json to {}", args.out_dir.display());
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.report)
        .map_err(|e| CliError::Config(format!("cannot read report {}: {e}", args.report.display())))?;
    let report: ReportFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid report {}: {e}", args.report.display())))?;
    println!("input format            {}", report.config.input_format);
    println!("min severity            {}", report.config.min_severity);
    match report.config.truncate {
        Some(limit) => println!("truncate                {limit}"),
        None => println!("truncate                none"),
    }
    println!();
    print!("{}", render_stats(&report.report));
    Ok(())
}

fn cmd_train(args: TrainArgs, file: TrainSection) -> Result<(), CliError> {
    let order = args.order.or(file.order).unwrap_or(DEFAULT_ORDER);
    let label = args.label.or(file.label).unwrap_or_else(|| {
        args.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".to_string())
    });
    let samples = read_samples_jsonl(&args.input)?;
    let codes: Vec<String> = samples.into_iter().map(|s| s.code).collect();
    let model = NgramModel::train(&codes, order, &label)?;
    model.save(&args.out)?;
    println!("trained model '{label}' (order {order}) on {} samples", codes.len());
    println!("vocabulary {} tokens, digest {}", model.vocabulary_size(), model.digest_hex());
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_generate(args: GenerateArgs, file: SamplingSection) -> Result<(), CliError> {
    let model = NgramModel::load(&args.model)?;
    let cfg = SamplerConfig {
        seed: args.seed.or(file.seed).unwrap_or(7),
        temperature: args.temperature.or(file.temperature).unwrap_or(1.0),
        max_tokens: args.max_tokens.or(file.max_tokens).unwrap_or(256),
    };
    print!("{}", model.generate(&args.prompt, &cfg));
    Ok(())
}

fn load_suite(path: Option<&Path>) -> Result<Vec<PromptCase>, CliError> {
    match path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read suite {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("invalid suite {}: {e}", path.display())))
        }
        None => Ok(serde_json::from_str(DEFAULT_SUITE).expect("bundled suite is valid")),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn eval_config(
    seed: Option<u64>,
    repeats: Option<usize>,
    temperature: Option<f64>,
    max_tokens: Option<usize>,
) -> EvalConfig {
    let defaults = EvalConfig::default();
    EvalConfig {
        seed: seed.unwrap_or(defaults.seed),
        repeats: repeats.unwrap_or(defaults.repeats),
        temperature: temperature.unwrap_or(defaults.temperature),
        max_tokens: max_tokens.unwrap_or(defaults.max_tokens),
    }
}

fn print_eval_summary(report: &EvalReport) {
    let s = &report.summary;
    println!(
        "evaluated '{}' on {} prompts x {} repeats (seed {}, temperature {})",
        report.model_label,
        report.cases.len(),
        report.repeats,
        report.seed,
        report.temperature
    );
    println!("correct {}  correctable {}  incorrect {}", s.correct, s.correctable, s.incorrect);
    println!(
        "secure {}  not secure {}  not applicable {}",
        s.secure, s.not_secure, s.not_applicable
    );
    println!("mean repetition {:.4}", s.mean_repetition);
}

fn cmd_eval(args: EvalArgs, file: EvalSection) -> Result<(), CliError> {
    let model = NgramModel::load(&args.model)?;
    let suite = load_suite(Some(&args.suite))?;
    let cfg = eval_config(
        args.seed.or(file.seed),
        args.repeats.or(file.repeats),
        args.temperature.or(file.temperature),
        args.max_tokens.or(file.max_tokens),
    );
    let report = run_suite(&model, &suite, &cfg);
    write_json(&args.out, &report)?;
    print_eval_summary(&report);
    println!("wrote {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// the two-corpus experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct CompareReport {
    config: CompareConfigEcho,
    curation: CurationReport,
    all: ModelSide,
    secure: ModelSide,
}

#[derive(Debug, Serialize, Deserialize)]
struct CompareConfigEcho {
    input_format: String,
    min_severity: String,
    truncate: Option<usize>,
    seed: u64,
    order: usize,
    repeats: usize,
    temperature: f64,
    max_tokens: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelSide {
    samples: usize,
    digest: String,
    banned_token_rate: f64,
    summary: EvalSummary,
}

fn cmd_compare(args: CompareArgs, file: CompareSection) -> Result<(), CliError> {
    let format = args.format.or(parse_format(file.format)?).unwrap_or(InputFormat::Jsonl);
    let min_severity =
        args.min_severity.or(parse_severity(file.min_severity)?).unwrap_or(Severity::Low);
    let truncate = args.truncate.or(file.truncate);
    let order = args.order.or(file.order).unwrap_or(DEFAULT_ORDER);
    let cfg = eval_config(
        args.seed.or(file.seed),
        args.repeats.or(file.repeats),
        args.temperature.or(file.temperature),
        args.max_tokens.or(file.max_tokens),
    );

    let curate_cfg =
        CurateConfig { min_severity, truncate, jobs: args.jobs.or(file.jobs) };
    let output = run_curation(&args.input, format, &args.out_dir, &curate_cfg)?;

    let all_codes: Vec<String> = output.all.iter().map(|s| s.code.clone()).collect();
    let secure_codes: Vec<String> = output.secure.iter().map(|s| s.code.clone()).collect();
    let model_all = NgramModel::train(&all_codes, order, "all")?;
    let model_secure = NgramModel::train(&secure_codes, order, "secure")?;
    model_all.save(&args.out_dir.join("model_all.bin"))?;
    model_secure.save(&args.out_dir.join("model_secure.bin"))?;

    let suite = load_suite(args.suite.as_deref())?;
    let eval_all = run_suite(&model_all, &suite, &cfg);
    let eval_secure = run_suite(&model_secure, &suite, &cfg);
    write_json(&args.out_dir.join("eval_all.json"), &eval_all)?;
    write_json(&args.out_dir.join("eval_secure.json"), &eval_secure)?;

    let banned: Vec<String> = DEFAULT_BANNED.iter().map(|s| s.to_string()).collect();
    let side = |model: &NgramModel, samples: usize, report: &EvalReport| ModelSide {
        samples,
        digest: model.digest_hex(),
        banned_token_rate: model.banned_token_rate(&banned),
        summary: report.summary.clone(),
    };
    let report = CompareReport {
        config: CompareConfigEcho {
            input_format: format.as_str().to_string(),
            min_severity: min_severity.to_string(),
            truncate,
            seed: cfg.seed,
            order,
            repeats: cfg.repeats,
            temperature: cfg.temperature,
            max_tokens: cfg.max_tokens,
        },
        curation: output.report.clone(),
        all: side(&model_all, output.all.len(), &eval_all),
        secure: side(&model_secure, output.secure.len(), &eval_secure),
    };
    write_json(&args.out_dir.join("compare.json"), &report)?;
    let text = render_compare(&report);
    fs::write(args.out_dir.join("compare.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn render_compare(report: &CompareReport) -> String {
    use std::fmt::Write;

    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "two-corpus comparison (seed {}, order {}, repeats {}, temperature {})",
        c.seed, c.order, c.repeats, c.temperature
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "curation: {} in, {} kept, {} secure, {} flagged ({:.2}%)",
        report.curation.total_in,
        report.curation.total_all,
        report.curation.total_secure,
        report.curation.flagged,
        report.curation.vulnerable_fraction * 100.0
    );
    let _ = writeln!(out);
    let row = |out: &mut String, name: &str, all: String, secure: String| {
        let _ = writeln!(out, "{name:<22} {all:<14} {secure:<14}");
    };
    row(&mut out, "", "all".to_string(), "secure".to_string());
    row(&mut out, "samples", report.all.samples.to_string(), report.secure.samples.to_string());
    row(
        &mut out,
        "model digest",
        report.all.digest[..12].to_string(),
        report.secure.digest[..12].to_string(),
    );
    row(
        &mut out,
        "banned vocab rate",
        format!("{:.4}", report.all.banned_token_rate),
        format!("{:.4}", report.secure.banned_token_rate),
    );
    let summary_rows: [(&str, fn(&EvalSummary) -> String); 7] = [
        ("correct", |s| s.correct.to_string()),
        ("correctable", |s| s.correctable.to_string()),
        ("incorrect", |s| s.incorrect.to_string()),
        ("secure", |s| s.secure.to_string()),
        ("not secure", |s| s.not_secure.to_string()),
        ("not applicable", |s| s.not_applicable.to_string()),
        ("mean repetition", |s| format!("{:.4}", s.mean_repetition)),
    ];
    for (name, get) in summary_rows {
        row(&mut out, name, get(&report.all.summary), get(&report.secure.summary));
    }
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
