//! Corpus ingest and security-gated curation.
//!
//! Ingest normalizes JSONL or parquet inputs into [`CodeSample`] records.
//! Curation strips comments and docstrings from each sample, analyzes the
//! stripped text, and splits the corpus into an "all" set and a "secure"
//! subset that carries no finding at or above the configured severity.
//! The pipeline is order-preserving and its outputs are byte-identical
//! regardless of worker count.

use crate::analyzer::{analyze, catalog_default, Finding, Severity, PARSE_FAIL};
use crate::lex::tokenize;
use crate::strip::strip_with_stats;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

// ---------------------------------------------------------------------------
// samples and ingest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSample {
    pub id: String,
    pub code: String,
    pub comment: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Columnar,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(InputFormat::Jsonl),
            "columnar" => Ok(InputFormat::Columnar),
            other => Err(format!("unknown input format '{other}' (expected jsonl or columnar)")),
        }
    }
}

impl InputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            InputFormat::Jsonl => "jsonl",
            InputFormat::Columnar => "columnar",
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{0}")]
    Ingest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestResult {
    pub samples: Vec<CodeSample>,
    pub skipped_malformed: usize,
}

/// Lenient per-record shape for JSONL inputs: `comment` falls back to
/// `docstring`, a missing id falls back to the input line number.
#[derive(Deserialize)]
struct RawRecord {
    id: Option<serde_json::Value>,
    code: Option<String>,
    comment: Option<String>,
    docstring: Option<String>,
}

pub fn ingest(path: &Path, format: InputFormat) -> Result<IngestResult, CorpusError> {
    match format {
        InputFormat::Jsonl => ingest_jsonl(path),
        InputFormat::Columnar => ingest_columnar(path),
    }
}

fn id_from_value(value: Option<serde_json::Value>, line_no: usize) -> String {
    match value {
        Some(serde_json::Value::String(s)) => s,
        Some(serde_json::Value::Number(n)) => n.to_string(),
        _ => format!("line-{line_no}"),
    }
}

fn ingest_jsonl(path: &Path) -> Result<IngestResult, CorpusError> {
    let file = File::open(path)
        .map_err(|e| CorpusError::Ingest(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    let mut skipped_malformed = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line
            .map_err(|e| CorpusError::Ingest(format!("cannot read {}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        match serde_json::from_str::<RawRecord>(&line) {
            Ok(record) => match record.code {
                Some(code) => samples.push(CodeSample {
                    id: id_from_value(record.id, line_no),
                    code,
                    comment: record.comment.or(record.docstring).unwrap_or_default(),
                }),
                None => skipped_malformed += 1,
            },
            Err(_) => skipped_malformed += 1,
        }
    }
    Ok(IngestResult { samples, skipped_malformed })
}

fn ingest_columnar(path: &Path) -> Result<IngestResult, CorpusError> {
    use parquet::file::reader::{FileReader, SerializedFileReader};
    use parquet::record::Field;

    let file = File::open(path)
        .map_err(|e| CorpusError::Ingest(format!("cannot open {}: {e}", path.display())))?;
    let reader = SerializedFileReader::new(file)
        .map_err(|e| CorpusError::Ingest(format!("cannot read {}: {e}", path.display())))?;
    let rows = reader
        .get_row_iter(None)
        .map_err(|e| CorpusError::Ingest(format!("cannot read {}: {e}", path.display())))?;

    let mut samples = Vec::new();
    let mut skipped_malformed = 0usize;
    for (idx, row) in rows.enumerate() {
        let row = match row {
            Ok(row) => row,
            Err(_) => {
                skipped_malformed += 1;
                continue;
            }
        };
        let mut id: Option<String> = None;
        let mut code: Option<String> = None;
        let mut comment: Option<String> = None;
        for (name, field) in row.get_column_iter() {
            match (name.as_str(), field) {
                ("code", Field::Str(s)) => code = Some(s.clone()),
                ("docstring", Field::Str(s)) | ("comment", Field::Str(s)) => {
                    comment = Some(s.clone())
                }
                ("id", Field::Str(s)) => id = Some(s.clone()),
                ("id", Field::Long(v)) => id = Some(v.to_string()),
                ("id", Field::Int(v)) => id = Some(v.to_string()),
                _ => {}
            }
        }
        match code {
            Some(code) => samples.push(CodeSample {
                id: id.unwrap_or_else(|| format!("row-{}", idx + 1)),
                code,
                comment: comment.unwrap_or_default(),
            }),
            None => skipped_malformed += 1,
        }
    }
    Ok(IngestResult { samples, skipped_malformed })
}

// ---------------------------------------------------------------------------
// curation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurateConfig {
    pub min_severity: Severity,
    pub truncate: Option<usize>,
    pub jobs: Option<usize>,
}

impl Default for CurateConfig {
    fn default() -> Self {
        CurateConfig { min_severity: Severity::Low, truncate: None, jobs: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub total_in: usize,
    pub total_all: usize,
    pub total_secure: usize,
    pub flagged: usize,
    pub vulnerable_fraction: f64,
    pub per_rule: BTreeMap<String, u64>,
    pub parse_failures: usize,
    pub pass_patches: usize,
    pub dropped_empty_comment: usize,
    pub skipped_malformed: usize,
    pub truncated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurationOutput {
    /// Every kept sample, stripped (and truncated when configured).
    pub all: Vec<CodeSample>,
    /// The subset of `all` with no finding at or above the threshold.
    pub secure: Vec<CodeSample>,
    /// Findings for each flagged sample, in corpus order.
    pub findings: Vec<FindingsRecord>,
    pub report: CurationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingsRecord {
    pub id: String,
    pub findings: Vec<Finding>,
}

struct ProcessedSample {
    sample: CodeSample,
    findings: Vec<Finding>,
    flagged: bool,
    pass_patches: usize,
    truncated: bool,
}

pub fn curate(
    samples: Vec<CodeSample>,
    skipped_malformed: usize,
    cfg: &CurateConfig,
) -> CurationOutput {
    let total_in = samples.len();
    let kept: Vec<CodeSample> =
        samples.into_iter().filter(|s| !s.comment.trim().is_empty()).collect();
    let dropped_empty_comment = total_in - kept.len();

    let process_all = |kept: &[CodeSample]| -> Vec<ProcessedSample> {
        kept.par_iter().map(|sample| process_sample(sample, cfg)).collect()
    };
    let processed: Vec<ProcessedSample> = match cfg.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .expect("worker pool construction cannot fail with a positive thread count");
            pool.install(|| process_all(&kept))
        }
        None => process_all(&kept),
    };

    let mut report = CurationReport {
        total_in,
        total_all: processed.len(),
        total_secure: 0,
        flagged: 0,
        vulnerable_fraction: 0.0,
        per_rule: BTreeMap::new(),
        parse_failures: 0,
        pass_patches: 0,
        dropped_empty_comment,
        skipped_malformed,
        truncated: 0,
    };
    let mut all = Vec::with_capacity(processed.len());
    let mut secure = Vec::new();
    let mut findings_records = Vec::new();
    for item in processed {
        report.pass_patches += item.pass_patches;
        if item.truncated {
            report.truncated += 1;
        }
        for finding in &item.findings {
            if finding.rule_id == PARSE_FAIL {
                report.parse_failures += 1;
            } else {
                *report.per_rule.entry(finding.rule_id.clone()).or_insert(0) += 1;
            }
        }
        if item.flagged {
            report.flagged += 1;
            findings_records
                .push(FindingsRecord { id: item.sample.id.clone(), findings: item.findings });
        } else {
            report.total_secure += 1;
            secure.push(item.sample.clone());
        }
        all.push(item.sample);
    }
    if report.total_all > 0 {
        report.vulnerable_fraction = report.flagged as f64 / report.total_all as f64;
    }
    CurationOutput { all, secure, findings: findings_records, report }
}

fn process_sample(sample: &CodeSample, cfg: &CurateConfig) -> ProcessedSample {
    let (code, pass_patches) = match strip_with_stats(&sample.code) {
        Ok(outcome) => (outcome.code, outcome.pass_patches),
        // Unlexable input is kept verbatim; the analyzer reports it.
        Err(_) => (sample.code.clone(), 0),
    };
    let findings = analyze(&code, &catalog_default());
    let flagged = findings.iter().any(|f| f.severity >= cfg.min_severity);
    let (code, truncated) = match cfg.truncate {
        Some(limit) => truncate_at_token_boundary(&code, limit),
        None => (code, false),
    };
    ProcessedSample {
        sample: CodeSample { id: sample.id.clone(), code, comment: sample.comment.clone() },
        findings,
        flagged,
        pass_patches,
        truncated,
    }
}

/// Cut `code` down to at most `limit` characters, ending on a token
/// boundary when the text lexes. Returns the (possibly unchanged) text and
/// whether a cut happened.
fn truncate_at_token_boundary(code: &str, limit: usize) -> (String, bool) {
    let total_chars = code.chars().count();
    if total_chars <= limit {
        return (code.to_string(), false);
    }
    if let Ok(stream) = tokenize(code) {
        let mut end_chars = 0usize;
        let mut cursor = 0usize;
        for tok in &stream.tokens {
            let tok_chars = tok.gap.chars().count() + tok.text.chars().count();
            if cursor + tok_chars > limit {
                break;
            }
            cursor += tok_chars;
            if !tok.text.is_empty() {
                end_chars = cursor;
            }
        }
        let byte_end = char_to_byte(code, end_chars);
        return (code[..byte_end].to_string(), true);
    }
    let byte_end = char_to_byte(code, limit);
    (code[..byte_end].to_string(), true)
}

fn char_to_byte(s: &str, chars: usize) -> usize {
    s.char_indices().nth(chars).map(|(i, _)| i).unwrap_or(s.len())
}

// ---------------------------------------------------------------------------
// the file pipeline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: ConfigEcho,
    #[serde(flatten)]
    pub report: CurationReport,
}

/// The settings echoed into report.json. Worker count is intentionally
/// absent: it can never change the output bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input_format: String,
    pub min_severity: String,
    pub truncate: Option<usize>,
}

/// Ingest, curate, and write `all.jsonl`, `secure.jsonl`, `findings.jsonl`,
/// and `report.json` into `out_dir`.
pub fn run_curation(
    input: &Path,
    format: InputFormat,
    out_dir: &Path,
    cfg: &CurateConfig,
) -> Result<CurationOutput, CorpusError> {
    let ingested = ingest(input, format)?;
    let output = curate(ingested.samples, ingested.skipped_malformed, cfg);
    fs::create_dir_all(out_dir)?;
    write_jsonl(&out_dir.join("all.jsonl"), &output.all)?;
    write_jsonl(&out_dir.join("secure.jsonl"), &output.secure)?;
    write_jsonl(&out_dir.join("findings.jsonl"), &output.findings)?;
    let report_file = ReportFile {
        config: ConfigEcho {
            input_format: format.as_str().to_string(),
            min_severity: cfg.min_severity.to_string(),
            truncate: cfg.truncate,
        },
        report: output.report.clone(),
    };
    let mut report_json = serde_json::to_string_pretty(&report_file)
        .expect("report serialization cannot fail");
    report_json.push('\n');
    fs::write(out_dir.join("report.json"), report_json)?;
    Ok(output)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CorpusError> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).expect("record serialization cannot fail");
        writer.write_all(line.as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_samples_jsonl(path: &Path) -> Result<Vec<CodeSample>, CorpusError> {
    Ok(ingest_jsonl(path)?.samples)
}

// ---------------------------------------------------------------------------
// stats rendering
// ---------------------------------------------------------------------------

/// Human-readable summary of a curation report: headline counts, then a
/// findings histogram sorted by count (descending) with alphabetical
/// tie-breaks.
pub fn render_stats(report: &CurationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "samples ingested        {}", report.total_in);
    let _ = writeln!(out, "skipped (malformed)     {}", report.skipped_malformed);
    let _ = writeln!(out, "dropped (empty comment) {}", report.dropped_empty_comment);
    let _ = writeln!(out, "curated (all)           {}", report.total_all);
    let _ = writeln!(out, "curated (secure)        {}", report.total_secure);
    let _ = writeln!(
        out,
        "flagged                 {} ({})",
        report.flagged,
        format!("{:.2}%", report.vulnerable_fraction * 100.0)
    );
    let _ = writeln!(out, "parse failures          {}", report.parse_failures);
    let _ = writeln!(out, "pass patches            {}", report.pass_patches);
    let _ = writeln!(out, "truncated               {}", report.truncated);
    let mut rules: Vec<(&String, &u64)> = report.per_rule.iter().collect();
    rules.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    if !rules.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "findings by rule");
        for (rule, count) in rules {
            let _ = writeln!(out, "  {rule:<16} {count}");
        }
    }
    out
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
