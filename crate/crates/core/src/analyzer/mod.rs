//! Static analysis of Python sources for risky API usage.
//!
//! A small recursive-descent parser builds a syntax tree from the lossless
//! token stream, and a fixed catalog of rules walks that tree. Each rule
//! match becomes a [`Finding`] carrying severity, confidence, the source
//! line, and a trimmed excerpt. Sources that fail to lex or parse yield a
//! single `PARSE-FAIL` finding instead, so the curation pipeline can treat
//! "unanalyzable" as its own risk class.

mod parser;
pub mod rules;

pub use parser::{parse, parse_stream, ParseError};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

// ---------------------------------------------------------------------------
// syntax tree
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Module,
    FunctionDef,
    ClassDef,
    If,
    While,
    For,
    With,
    Try,
    Return,
    Raise,
    Pass,
    Assign,
    Import,
    ImportFrom,
    Call,
    Attribute,
    Name,
    StringConst,
    NumberConst,
    JoinedString,
    KeywordArg,
    BinOp,
    BoolOp,
    UnaryOp,
    Compare,
    Other,
}

/// One tree node. `label` carries the node's distinguishing text: the name
/// for `Name`/`FunctionDef`/`ClassDef`, the attribute for `Attribute`, the
/// operator for `BinOp`, the raw token for string and number constants, the
/// keyword for `KeywordArg`, and a shape tag for `Other`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    pub kind: NodeKind,
    pub line: usize,
    pub label: Option<String>,
    pub children: Vec<SyntaxNode>,
}

impl SyntaxNode {
    /// Preorder traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a SyntaxNode)) {
        f(self);
        for child in &self.children {
            child.walk(f);
        }
    }
}

// ---------------------------------------------------------------------------
// severities and rules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Low,
    Medium,
    High,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
        })
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Severity::Low),
            "medium" => Ok(Severity::Medium),
            "high" => Ok(Severity::High),
            other => Err(format!("unknown severity '{other}' (expected low, medium, or high)")),
        }
    }
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::Low => "low",
            Confidence::Medium => "medium",
            Confidence::High => "high",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Rule {
    pub id: &'static str,
    pub severity: Severity,
    pub confidence: Confidence,
    pub description: &'static str,
}

/// Rule id reported when a source cannot be lexed or parsed.
pub const PARSE_FAIL: &str = "PARSE-FAIL";

pub fn catalog_default() -> Vec<Rule> {
    vec![
        Rule {
            id: "WEAK-HASH",
            severity: Severity::High,
            confidence: Confidence::High,
            description: "use of a broken hash function (hashlib.md5 or hashlib.sha1)",
        },
        Rule {
            id: "HARDCODED-CRED",
            severity: Severity::Medium,
            confidence: Confidence::Medium,
            description: "credential-looking name bound to a non-empty string literal",
        },
        Rule {
            id: "NO-TIMEOUT",
            severity: Severity::Low,
            confidence: Confidence::Medium,
            description: "requests call without a timeout keyword",
        },
        Rule {
            id: "SQL-INJECT",
            severity: Severity::Medium,
            confidence: Confidence::Low,
            description: "SQL query assembled from dynamic values",
        },
        Rule {
            id: "EVAL-USE",
            severity: Severity::High,
            confidence: Confidence::High,
            description: "call to eval or exec",
        },
        Rule {
            id: "UNSAFE-DESERIAL",
            severity: Severity::High,
            confidence: Confidence::High,
            description: "unsafe deserialization (pickle, marshal, or yaml.load without a safe loader)",
        },
        Rule {
            id: "SHELL-INJECT",
            severity: Severity::High,
            confidence: Confidence::Medium,
            description: "shell execution with dynamic input or shell=True",
        },
    ]
}

// ---------------------------------------------------------------------------
// findings
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub severity: Severity,
    pub confidence: Confidence,
    pub line: usize,
    pub excerpt: String,
}

const EXCERPT_MAX_CHARS: usize = 160;

fn excerpt_for(lines: &[&str], line: usize) -> String {
    let raw = line.checked_sub(1).and_then(|i| lines.get(i)).copied().unwrap_or("");
    let trimmed = raw.trim();
    if trimmed.chars().count() <= EXCERPT_MAX_CHARS {
        trimmed.to_string()
    } else {
        trimmed.chars().take(EXCERPT_MAX_CHARS).collect()
    }
}

/// Run the given rules over one source. Unparseable input produces exactly
/// one `PARSE-FAIL` finding; otherwise findings are sorted by line and then
/// rule id.
pub fn analyze(source: &str, rules: &[Rule]) -> Vec<Finding> {
    let tree = match parse(source) {
        Ok(tree) => tree,
        Err(err) => {
            return vec![Finding {
                rule_id: PARSE_FAIL.to_string(),
                severity: Severity::High,
                confidence: Confidence::High,
                line: err.line,
                excerpt: format!("parse failure: {}", err.reason),
            }]
        }
    };
    let aliases = rules::collect_aliases(&tree);
    let lines: Vec<&str> = source.lines().collect();
    let mut findings = Vec::new();
    tree.walk(&mut |node| {
        for rule in rules {
            if rules::node_fires(rule.id, node, &aliases) {
                findings.push(Finding {
                    rule_id: rule.id.to_string(),
                    severity: rule.severity,
                    confidence: rule.confidence,
                    line: node.line,
                    excerpt: excerpt_for(&lines, node.line),
                });
            }
        }
    });
    findings.sort_by(|a, b| a.line.cmp(&b.line).then_with(|| a.rule_id.cmp(&b.rule_id)));
    findings
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
