//! Deterministic n-gram language model over lexed Python tokens.
//!
//! Training lexes each sample and maps its token stream onto a flat
//! sequence: token texts plus the structural markers `<NL>`, `<INDENT>`,
//! and `<DEDENT>`, padded with `<BOS>` and terminated by `<EOS>`. Only
//! full (order-1)-length context counts are stored; shorter backoff tables
//! are derived by marginalization when sampling. Everything is ordered
//! (BTree maps, seeded ChaCha8), so training the same corpus twice yields
//! byte-identical model files and generation is reproducible from a seed.

use crate::eval::{Generator, GeneratorError};
use crate::lex::{tokenize, TokenKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use thiserror::Error;

pub const BOS: &str = "<BOS>";
pub const EOS: &str = "<EOS>";
pub const NEWLINE_MARK: &str = "<NL>";
pub const INDENT_MARK: &str = "<INDENT>";
pub const DEDENT_MARK: &str = "<DEDENT>";

/// Identifiers whose presence in a model's vocabulary counts against it in
/// the leakage diagnostic.
pub const DEFAULT_BANNED: [&str; 6] = ["eval", "exec", "pickle", "marshal", "md5", "system"];

const MAGIC: &[u8; 4] = b"NGLM";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NgramError {
    #[error("corpus contains no usable samples")]
    EmptyCorpus,
    #[error("model order must be at least 2 (got {0})")]
    InvalidOrder(usize),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub temperature: f64,
    pub max_tokens: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { seed: 7, temperature: 1.0, max_tokens: 256 }
    }
}

type Counts = BTreeMap<Vec<String>, BTreeMap<String, u64>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramModel {
    order: usize,
    label: String,
    def_names: BTreeSet<String>,
    counts: Counts,
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

/// Map one source onto the flat marker sequence the model is trained on.
/// Sources that fail to lex yield None.
pub(crate) fn code_to_lm_tokens(code: &str) -> Option<Vec<String>> {
    let stream = tokenize(code).ok()?;
    let mut out = Vec::with_capacity(stream.tokens.len());
    for tok in &stream.tokens {
        match tok.kind {
            TokenKind::Newline => out.push(NEWLINE_MARK.to_string()),
            TokenKind::Indent => out.push(INDENT_MARK.to_string()),
            TokenKind::Dedent => out.push(DEDENT_MARK.to_string()),
            TokenKind::Comment | TokenKind::EndMarker => {}
            _ => out.push(tok.text.clone()),
        }
    }
    Some(out)
}

fn looks_like_identifier(token: &str) -> bool {
    let mut chars = token.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

impl NgramModel {
    /// Train over raw sources. Samples that fail to lex are skipped; an
    /// entirely unusable corpus is an error.
    pub fn train(samples: &[String], order: usize, label: &str) -> Result<Self, NgramError> {
        let sequences: Vec<Vec<String>> =
            samples.iter().filter_map(|code| code_to_lm_tokens(code)).collect();
        Self::train_sequences(&sequences, order, label)
    }

    /// Train over already-tokenized sequences (markers included, no
    /// BOS/EOS padding).
    pub fn train_sequences(
        sequences: &[Vec<String>],
        order: usize,
        label: &str,
    ) -> Result<Self, NgramError> {
        if order < 2 {
            return Err(NgramError::InvalidOrder(order));
        }
        let mut counts = Counts::new();
        let mut def_names = BTreeSet::new();
        let mut trained_any = false;
        for seq in sequences {
            if seq.is_empty() {
                continue;
            }
            trained_any = true;
            for pair in seq.windows(2) {
                if pair[0] == "def" && looks_like_identifier(&pair[1]) {
                    def_names.insert(pair[1].clone());
                }
            }
            let mut padded: Vec<String> = vec![BOS.to_string(); order - 1];
            padded.reserve(seq.len() + 1);
            padded.extend(seq.iter().cloned());
            padded.push(EOS.to_string());
            for window in padded.windows(order) {
                let context = window[..order - 1].to_vec();
                let next = window[order - 1].clone();
                *counts.entry(context).or_default().entry(next).or_insert(0) += 1;
            }
        }
        if !trained_any {
            return Err(NgramError::EmptyCorpus);
        }
        Ok(NgramModel { order, label: label.to_string(), def_names, counts })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn def_names(&self) -> impl Iterator<Item = &str> {
        self.def_names.iter().map(String::as_str)
    }

    pub fn context_count(&self) -> usize {
        self.counts.len()
    }

    /// Every token the model can emit.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        let mut vocab = BTreeSet::new();
        for successors in self.counts.values() {
            for token in successors.keys() {
                vocab.insert(token.as_str());
            }
        }
        vocab
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary().len()
    }

    /// Fraction of the banned identifiers that appear in the vocabulary.
    /// Duplicates in the banned list count once; an empty list scores 0.
    pub fn banned_token_rate(&self, banned: &[String]) -> f64 {
        let unique: BTreeSet<&str> = banned.iter().map(String::as_str).collect();
        if unique.is_empty() {
            return 0.0;
        }
        let vocab = self.vocabulary();
        let present = unique.iter().filter(|t| vocab.contains(*t)).count();
        present as f64 / unique.len() as f64
    }

    // -- generation ---------------------------------------------------------

    /// Generate token text from a prompt. The prompt is matched against
    /// harvested function names; on a hit, generation is forced to start
    /// with `def <name>` and continues from the model.
    pub fn generate(&self, prompt: &str, cfg: &SamplerConfig) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let tables = self.backoff_tables();
        let mut window: Vec<String> = vec![BOS.to_string(); self.order - 1];
        let mut generated: Vec<String> = Vec::new();

        if let Some(name) = self.best_def_name(prompt) {
            for forced in ["def".to_string(), name] {
                push_window(&mut window, forced.clone());
                generated.push(forced);
                if generated.len() >= cfg.max_tokens {
                    return render_tokens(&generated);
                }
            }
        }

        while generated.len() < cfg.max_tokens {
            let next = sample_next(&tables, &window, cfg.temperature, &mut rng);
            if next == EOS {
                break;
            }
            push_window(&mut window, next.clone());
            generated.push(next);
        }
        render_tokens(&generated)
    }

    /// The successor distribution the sampler would draw from after
    /// `context`, with backoff and temperature applied. Greedy sampling
    /// (temperature at or below zero) is a one-hot distribution. The
    /// probabilities of a non-empty result sum to one.
    pub fn next_distribution(&self, context: &[String], temperature: f64) -> Vec<(String, f64)> {
        let tables = self.backoff_tables();
        let longest = (self.order - 1).min(context.len());
        for k in (0..=longest).rev() {
            let suffix = context[context.len() - k..].to_vec();
            if let Some(successors) = tables[k].get(&suffix) {
                if !successors.is_empty() {
                    return distribution(successors, temperature);
                }
            }
        }
        Vec::new()
    }

    /// Stored full-length contexts at index `order - 1`, derived
    /// marginalizations at every shorter length down to the empty context.
    fn backoff_tables(&self) -> Vec<Counts> {
        let mut tables: Vec<Counts> = vec![Counts::new(); self.order - 1];
        for (context, successors) in &self.counts {
            for k in 0..self.order - 1 {
                let suffix = context[context.len() - k..].to_vec();
                let merged = tables[k].entry(suffix).or_default();
                for (token, count) in successors {
                    *merged.entry(token.clone()).or_insert(0) += count;
                }
            }
        }
        tables.push(self.counts.clone());
        tables
    }

    /// The harvested function name best matching the prompt, if any words
    /// overlap. Ties resolve to the lexicographically smallest name.
    pub fn best_def_name(&self, prompt: &str) -> Option<String> {
        let words: Vec<String> = prompt
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        let mut best: Option<(usize, &String)> = None;
        for name in &self.def_names {
            let score = name
                .split('_')
                .filter(|p| !p.is_empty())
                .filter(|part| {
                    let part = part.to_lowercase();
                    words.iter().any(|w| word_matches(w, &part))
                })
                .count();
            if score == 0 {
                continue;
            }
            best = match best {
                Some((s, _)) if s >= score => best,
                _ => Some((score, name)),
            };
        }
        best.map(|(_, name)| name.clone())
    }

    // -- persistence --------------------------------------------------------

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload_bytes();
        let digest = Sha256::digest(&payload);
        let mut out = Vec::with_capacity(payload.len() + 64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.order as u32).to_le_bytes());
        write_str(&mut out, &self.label);
        out.extend_from_slice(&digest);
        out.extend_from_slice(&payload);
        out
    }

    fn payload_bytes(&self) -> Vec<u8> {
        let mut payload = Vec::new();
        payload.extend_from_slice(&(self.def_names.len() as u32).to_le_bytes());
        for name in &self.def_names {
            write_str(&mut payload, name);
        }
        payload.extend_from_slice(&(self.counts.len() as u32).to_le_bytes());
        for (context, successors) in &self.counts {
            for token in context {
                write_str(&mut payload, token);
            }
            payload.extend_from_slice(&(successors.len() as u32).to_le_bytes());
            for (token, count) in successors {
                write_str(&mut payload, token);
                payload.extend_from_slice(&count.to_le_bytes());
            }
        }
        payload
    }

    /// Hex digest of the payload; identical corpora and settings produce
    /// identical digests.
    pub fn digest_hex(&self) -> String {
        let digest = Sha256::digest(self.payload_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self, NgramError> {
        let mut r = Reader { data, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(NgramError::Format("not a model file (bad magic)".to_string()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(NgramError::Format(format!("unsupported model format version {version}")));
        }
        let order = r.u32()? as usize;
        if order < 2 {
            return Err(NgramError::InvalidOrder(order));
        }
        let label = r.string()?;
        let stored_digest = r.take(32)?.to_vec();
        let payload = &r.data[r.pos..];
        let actual = Sha256::digest(payload);
        if actual.as_slice() != stored_digest.as_slice() {
            return Err(NgramError::Format("model file corrupt (digest mismatch)".to_string()));
        }
        let def_count = r.u32()? as usize;
        let mut def_names = BTreeSet::new();
        for _ in 0..def_count {
            def_names.insert(r.string()?);
        }
        let context_count = r.u32()? as usize;
        let mut counts = Counts::new();
        for _ in 0..context_count {
            let mut context = Vec::with_capacity(order - 1);
            for _ in 0..order - 1 {
                context.push(r.string()?);
            }
            let successor_count = r.u32()? as usize;
            let mut successors = BTreeMap::new();
            for _ in 0..successor_count {
                let token = r.string()?;
                let count = r.u64()?;
                successors.insert(token, count);
            }
            counts.insert(context, successors);
        }
        if r.pos != r.data.len() {
            return Err(NgramError::Format("trailing bytes after model payload".to_string()));
        }
        Ok(NgramModel { order, label, def_names, counts })
    }

    pub fn save(&self, path: &Path) -> Result<(), NgramError> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, NgramError> {
        let data = fs::read(path)?;
        Self::from_bytes(&data)
    }
}

impl Generator for NgramModel {
    fn generate(
        &self,
        prompt: &str,
        seed: u64,
        temperature: f64,
        max_tokens: usize,
    ) -> Result<String, GeneratorError> {
        Ok(NgramModel::generate(self, prompt, &SamplerConfig { seed, temperature, max_tokens }))
    }

    fn label(&self) -> &str {
        &self.label
    }
}

// ---------------------------------------------------------------------------
// sampling helpers
// ---------------------------------------------------------------------------

fn push_window(window: &mut Vec<String>, token: String) {
    window.remove(0);
    window.push(token);
}

fn word_matches(word: &str, part: &str) -> bool {
    if word == part {
        return true;
    }
    (part.len() >= 3 && word.starts_with(part)) || (word.len() >= 3 && part.starts_with(word))
}

fn sample_next(
    tables: &[Counts],
    window: &[String],
    temperature: f64,
    rng: &mut ChaCha8Rng,
) -> String {
    for k in (0..tables.len()).rev() {
        let context = window[window.len() - k..].to_vec();
        if let Some(successors) = tables[k].get(&context) {
            if !successors.is_empty() {
                return draw(successors, temperature, rng);
            }
        }
    }
    EOS.to_string()
}

fn draw(successors: &BTreeMap<String, u64>, temperature: f64, rng: &mut ChaCha8Rng) -> String {
    if temperature <= 0.0 {
        // Greedy: highest count, ties to the lexicographically smallest
        // token (map iteration is key-ordered).
        let mut best: Option<(&String, u64)> = None;
        for (token, &count) in successors {
            match best {
                Some((_, c)) if c >= count => {}
                _ => best = Some((token, count)),
            }
        }
        return best.map(|(t, _)| t.clone()).unwrap_or_else(|| EOS.to_string());
    }
    let items: Vec<(&String, u64)> = successors.iter().map(|(t, &c)| (t, c)).collect();
    let scaled: Vec<f64> = items.iter().map(|(_, c)| (*c as f64).ln() / temperature).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        target -= w;
        if target <= 0.0 {
            return items[i].0.clone();
        }
    }
    items.last().map(|(t, _)| (*t).clone()).unwrap_or_else(|| EOS.to_string())
}

/// The normalized probabilities `draw` samples from, in token key order.
fn distribution(successors: &BTreeMap<String, u64>, temperature: f64) -> Vec<(String, f64)> {
    if temperature <= 0.0 {
        let mut best: Option<(&String, u64)> = None;
        for (token, &count) in successors {
            match best {
                Some((_, c)) if c >= count => {}
                _ => best = Some((token, count)),
            }
        }
        return best.map(|(t, _)| vec![(t.clone(), 1.0)]).unwrap_or_default();
    }
    let items: Vec<(&String, u64)> = successors.iter().map(|(t, &c)| (t, c)).collect();
    let scaled: Vec<f64> = items.iter().map(|(_, c)| (*c as f64).ln() / temperature).collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    items
        .into_iter()
        .zip(weights)
        .map(|((token, _), w)| (token.clone(), w / total))
        .collect()
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

/// Turn a generated marker sequence back into indented source text. Tokens
/// on a line are space-joined; indentation is four spaces per level.
pub fn render_tokens(tokens: &[String]) -> String {
    let mut out = String::new();
    let mut depth = 0usize;
    let mut line_empty = true;
    for token in tokens {
        match token.as_str() {
            NEWLINE_MARK => {
                out.push('\n');
                line_empty = true;
            }
            INDENT_MARK => depth += 1,
            DEDENT_MARK => depth = depth.saturating_sub(1),
            text => {
                if line_empty {
                    for _ in 0..depth {
                        out.push_str("    ");
                    }
                    line_empty = false;
                } else {
                    out.push(' ');
                }
                out.push_str(text);
            }
        }
    }
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// byte-format helpers
// ---------------------------------------------------------------------------

fn write_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NgramError> {
        if self.pos + n > self.data.len() {
            return Err(NgramError::Format("model file truncated".to_string()));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, NgramError> {
        let bytes = self.take(4)?;
        Ok(u32::from_le_bytes(bytes.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NgramError> {
        let bytes = self.take(8)?;
        Ok(u64::from_le_bytes(bytes.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, NgramError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| NgramError::Format("model file holds invalid utf-8".to_string()))
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
