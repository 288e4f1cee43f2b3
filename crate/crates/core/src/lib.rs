//! codesieve: security-aware curation of Python code corpora.
//!
//! The pipeline goes source -> lossless token stream -> comment/docstring
//! stripping -> lightweight syntax tree -> rule findings -> corpus variants
//! (`all` and `secure`), and then drives n-gram baselines trained on each
//! variant through a dual-axis (correctness x security) generation harness.
//!
//! Everything downstream of the lexer works on the same token stream, so the
//! stripping guarantees (byte-exact round trips, token-sequence equivalence)
//! are checked where they are produced rather than re-derived per consumer.

pub mod analyzer;
pub mod corpus;
pub mod demo;
pub mod eval;
pub mod lex;
pub mod ngram;
pub mod strip;

pub use analyzer::{analyze, catalog_default, parse, Confidence, Finding, Rule, Severity};
pub use corpus::{curate, ingest, CodeSample, CurateConfig, CurationReport, InputFormat};
pub use eval::{judge_correctness, judge_security, repetition_score, run_suite, PromptCase};
pub use lex::{reassemble, tokenize, LexError, Token, TokenKind, TokenStream};
pub use ngram::{NgramModel, SamplerConfig};
pub use strip::{strip, strip_with_stats, tokens_equivalent, StripOutcome};
