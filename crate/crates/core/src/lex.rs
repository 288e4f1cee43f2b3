//! Lossless Python lexer.
//!
//! Produces a flat token stream in which every byte of the input is owned by
//! exactly one token: either as its `text` or as part of its `gap`, the raw
//! stretch of source (whitespace, blank lines, line continuations, a leading
//! BOM) between the previous token's end and this token's start. Concatenating
//! `gap + text` over the stream reproduces the input byte for byte, which is
//! what lets the stripper edit token streams instead of strings.
//!
//! Structural conventions:
//!
//! * `Newline` tokens terminate logical lines only. Blank lines, the line
//!   endings of comment-only lines, newlines inside brackets, and backslash
//!   continuations all live in gaps. A file whose last line has no trailing
//!   newline still gets a final `Newline` token with empty text.
//! * `Indent` / `Dedent` / `EndMarker` are zero-width: empty text, column 0,
//!   placed at the start of the line that triggered them. Leading whitespace
//!   of every line rides in the gap of the first real token on that line.
//! * Tabs advance to the next multiple of 8 columns; formfeed resets the
//!   indentation width counter.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

// ---------------------------------------------------------------------------
// token model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Indent,
    Dedent,
    Newline,
    Name,
    Number,
    StringLiteral,
    Operator,
    Comment,
    EndMarker,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    /// Exact source slice. Empty for the synthetic kinds and for a final
    /// Newline synthesized at EOF.
    pub text: String,
    /// 1-based physical line of the token start.
    pub line: usize,
    /// 0-based character column of the token start.
    pub column: usize,
    /// Raw source between the previous token's end and this token's start.
    pub gap: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    /// Hex sha256 of the source text the stream was built from.
    pub source_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct LexError {
    pub line: usize,
    pub reason: String,
}

impl LexError {
    fn new(line: usize, reason: impl Into<String>) -> Self {
        LexError { line, reason: reason.into() }
    }
}

/// Rebuild the exact source text the stream was lexed from.
pub fn reassemble(stream: &TokenStream) -> String {
    let mut out = String::new();
    for tok in &stream.tokens {
        out.push_str(&tok.gap);
        out.push_str(&tok.text);
    }
    out
}

pub fn source_hash(source: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(source.as_bytes());
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

// ---------------------------------------------------------------------------
// lexer
// ---------------------------------------------------------------------------

pub fn tokenize(source: &str) -> Result<TokenStream, LexError> {
    let mut lexer = Lexer::new(source);
    lexer.run()?;
    Ok(TokenStream { tokens: lexer.tokens, source_hash: source_hash(source) })
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    line_start: usize,
    indents: Vec<usize>,
    depth: usize,
    tokens: Vec<Token>,
    gap_start: usize,
    has_stmt: bool,
    at_line_start: bool,
}

const TRIPLE_OPS: [&str; 5] = ["**=", "//=", ">>=", "<<=", "..."];
const DOUBLE_OPS: [&str; 19] = [
    "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "->", "+=", "-=", "*=", "/=", "%=", "@=",
    "&=", "|=", "^=", ":=",
];
const SINGLE_OPS: &str = "+-*/%@&|^~<>()[]{},:.;=";

fn is_name_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_name_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

fn is_horizontal(c: char) -> bool {
    c == ' ' || c == '\t' || c == '\x0c'
}

fn is_string_prefix(word: &str) -> bool {
    word.len() <= 2 && word.chars().all(|c| matches!(c, 'r' | 'R' | 'b' | 'B' | 'u' | 'U' | 'f' | 'F'))
}

impl Lexer {
    fn new(source: &str) -> Self {
        Lexer {
            chars: source.chars().collect(),
            pos: 0,
            line: 1,
            line_start: 0,
            indents: vec![0],
            depth: 0,
            tokens: Vec::new(),
            gap_start: 0,
            has_stmt: false,
            at_line_start: true,
        }
    }

    fn cur(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn column_of(&self, pos: usize) -> usize {
        pos - self.line_start
    }

    fn emit(&mut self, kind: TokenKind, start: usize, end: usize, line: usize, column: usize) {
        let gap: String = self.chars[self.gap_start..start].iter().collect();
        let text: String = self.chars[start..end].iter().collect();
        self.gap_start = end;
        self.tokens.push(Token { kind, text, line, column, gap });
    }

    fn emit_zero_width(&mut self, kind: TokenKind, line: usize) {
        self.emit(kind, self.pos, self.pos, line, 0);
    }

    fn run(&mut self) -> Result<(), LexError> {
        if self.cur() == Some('\u{feff}') {
            self.pos += 1;
        }
        loop {
            if self.at_line_start && self.depth == 0 {
                self.handle_line_start()?;
            }
            while self.cur().map(is_horizontal).unwrap_or(false) {
                self.pos += 1;
            }
            let c = match self.cur() {
                Some(c) => c,
                None => break,
            };
            if c == '\n' || c == '\r' {
                self.consume_line_ending();
                continue;
            }
            if c == '#' {
                self.scan_comment();
                continue;
            }
            if c == '\\' {
                match self.peek(1) {
                    Some('\n') | Some('\r') => {
                        self.pos += 1;
                        let start = self.pos;
                        self.eat_newline_chars();
                        debug_assert!(self.pos > start);
                        continue;
                    }
                    Some(_) => {
                        return Err(LexError::new(
                            self.line,
                            "unexpected character after line continuation character",
                        ));
                    }
                    None => {
                        return Err(LexError::new(
                            self.line,
                            "unexpected EOF after line continuation character",
                        ));
                    }
                }
            }
            self.scan_significant(c)?;
        }
        if self.has_stmt {
            let line = self.line;
            let column = self.column_of(self.pos);
            let start = self.pos;
            self.emit(TokenKind::Newline, start, start, line, column);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.emit_zero_width(TokenKind::Dedent, self.line);
        }
        self.emit_zero_width(TokenKind::EndMarker, self.line);
        Ok(())
    }

    /// Measure the indentation of a statement-bearing line and emit
    /// Indent/Dedent tokens. Blank and comment-only lines keep the current
    /// indentation context untouched.
    fn handle_line_start(&mut self) -> Result<(), LexError> {
        let mut j = self.pos;
        let mut width = 0usize;
        while let Some(c) = self.chars.get(j).copied() {
            match c {
                ' ' => width += 1,
                '\t' => width = (width / 8 + 1) * 8,
                '\x0c' => width = 0,
                _ => break,
            }
            j += 1;
        }
        self.at_line_start = false;
        match self.chars.get(j).copied() {
            None | Some('\n') | Some('\r') | Some('#') => return Ok(()),
            _ => {}
        }
        let top = *self.indents.last().expect("indent stack never empty");
        if width > top {
            self.indents.push(width);
            let line = self.line;
            self.emit_zero_width(TokenKind::Indent, line);
        } else if width < top {
            while *self.indents.last().unwrap() > width {
                self.indents.pop();
                let line = self.line;
                self.emit_zero_width(TokenKind::Dedent, line);
            }
            if *self.indents.last().unwrap() != width {
                return Err(LexError::new(
                    self.line,
                    "unindent does not match any outer indentation level",
                ));
            }
        }
        Ok(())
    }

    fn eat_newline_chars(&mut self) {
        if self.cur() == Some('\r') && self.peek(1) == Some('\n') {
            self.pos += 2;
        } else {
            self.pos += 1;
        }
        self.line += 1;
        self.line_start = self.pos;
    }

    fn consume_line_ending(&mut self) {
        let start = self.pos;
        let line = self.line;
        let column = self.column_of(start);
        let emit_token = self.depth == 0 && self.has_stmt;
        self.eat_newline_chars();
        if emit_token {
            let end = self.pos;
            self.emit(TokenKind::Newline, start, end, line, column);
            self.has_stmt = false;
        }
        if self.depth == 0 {
            self.at_line_start = true;
        }
    }

    fn scan_comment(&mut self) {
        let start = self.pos;
        let line = self.line;
        let column = self.column_of(start);
        while let Some(c) = self.cur() {
            if c == '\n' || c == '\r' {
                break;
            }
            self.pos += 1;
        }
        let end = self.pos;
        self.emit(TokenKind::Comment, start, end, line, column);
    }

    fn scan_significant(&mut self, c: char) -> Result<(), LexError> {
        if is_name_start(c) {
            self.scan_name_or_prefixed_string()?;
        } else if c.is_ascii_digit() || (c == '.' && self.peek(1).map(|d| d.is_ascii_digit()).unwrap_or(false)) {
            self.scan_number();
        } else if c == '"' || c == '\'' {
            self.scan_string(self.pos, self.line, self.column_of(self.pos))?;
        } else {
            self.scan_operator(c)?;
        }
        self.has_stmt = true;
        Ok(())
    }

    fn scan_name_or_prefixed_string(&mut self) -> Result<(), LexError> {
        let start = self.pos;
        let line = self.line;
        let column = self.column_of(start);
        while self.cur().map(is_name_continue).unwrap_or(false) {
            self.pos += 1;
        }
        let word: String = self.chars[start..self.pos].iter().collect();
        if is_string_prefix(&word) && matches!(self.cur(), Some('"') | Some('\'')) {
            return self.scan_string(start, line, column);
        }
        self.emit(TokenKind::Name, start, self.pos, line, column);
        Ok(())
    }

    /// `start` points at the first char of the token (prefix included);
    /// `self.pos` points at the opening quote.
    fn scan_string(&mut self, start: usize, line: usize, column: usize) -> Result<(), LexError> {
        let quote = self.cur().expect("caller checked quote");
        let triple = self.peek(1) == Some(quote) && self.peek(2) == Some(quote);
        self.pos += if triple { 3 } else { 1 };
        loop {
            let c = match self.cur() {
                Some(c) => c,
                None => {
                    let what = if triple { "unterminated triple-quoted string literal" } else { "unterminated string literal" };
                    return Err(LexError::new(line, what));
                }
            };
            if c == '\\' {
                self.pos += 1;
                match self.cur() {
                    None => return Err(LexError::new(line, "unterminated string literal")),
                    Some('\n') | Some('\r') => self.eat_newline_chars(),
                    Some(_) => self.pos += 1,
                }
                continue;
            }
            if c == '\n' || c == '\r' {
                if !triple {
                    return Err(LexError::new(self.line, "unterminated string literal"));
                }
                self.eat_newline_chars();
                continue;
            }
            if c == quote {
                if !triple {
                    self.pos += 1;
                    break;
                }
                if self.peek(1) == Some(quote) && self.peek(2) == Some(quote) {
                    self.pos += 3;
                    break;
                }
            }
            self.pos += 1;
        }
        self.emit(TokenKind::StringLiteral, start, self.pos, line, column);
        Ok(())
    }

    fn scan_number(&mut self) {
        let start = self.pos;
        let line = self.line;
        let column = self.column_of(start);
        if self.cur() == Some('0') && matches!(self.peek(1), Some('x') | Some('X') | Some('o') | Some('O') | Some('b') | Some('B')) {
            self.pos += 2;
            while self.cur().map(|c| c.is_ascii_alphanumeric() || c == '_').unwrap_or(false) {
                self.pos += 1;
            }
            self.emit(TokenKind::Number, start, self.pos, line, column);
            return;
        }
        while self.cur().map(|c| c.is_ascii_digit() || c == '_').unwrap_or(false) {
            self.pos += 1;
        }
        if self.cur() == Some('.') {
            self.pos += 1;
            while self.cur().map(|c| c.is_ascii_digit() || c == '_').unwrap_or(false) {
                self.pos += 1;
            }
        }
        if matches!(self.cur(), Some('e') | Some('E')) {
            let mut k = 1;
            if matches!(self.peek(1), Some('+') | Some('-')) {
                k = 2;
            }
            if self.peek(k).map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += k;
                while self.cur().map(|c| c.is_ascii_digit() || c == '_').unwrap_or(false) {
                    self.pos += 1;
                }
            }
        }
        if matches!(self.cur(), Some('j') | Some('J')) {
            self.pos += 1;
        }
        self.emit(TokenKind::Number, start, self.pos, line, column);
    }

    fn scan_operator(&mut self, c: char) -> Result<(), LexError> {
        let start = self.pos;
        let line = self.line;
        let column = self.column_of(start);
        let avail: String = self.chars[self.pos..(self.pos + 3).min(self.chars.len())].iter().collect();
        let matched = TRIPLE_OPS
            .iter()
            .find(|op| avail.starts_with(**op))
            .map(|op| op.len())
            .or_else(|| {
                DOUBLE_OPS
                    .iter()
                    .find(|op| avail.starts_with(**op))
                    .map(|op| op.len())
            })
            .or_else(|| if SINGLE_OPS.contains(c) { Some(1) } else { None });
        let len = match matched {
            Some(len) => len,
            None => return Err(LexError::new(self.line, format!("unexpected character {c:?}"))),
        };
        match c {
            '(' | '[' | '{' if len == 1 => self.depth += 1,
            ')' | ']' | '}' if len == 1 => self.depth = self.depth.saturating_sub(1),
            _ => {}
        }
        self.pos += len;
        self.emit(TokenKind::Operator, start, self.pos, line, column);
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// docstring positions
// ---------------------------------------------------------------------------

/// A docstring statement located in a token stream: the indices of its
/// StringLiteral tokens plus the Newline or `;` token that terminates the
/// statement, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocstringSpan {
    /// Index of the first StringLiteral token of the statement.
    pub start: usize,
    /// Indices of every token belonging to the statement (strings plus
    /// terminator), ascending.
    pub members: Vec<usize>,
    /// Removing this docstring would leave a def/class suite empty, so the
    /// stripper must substitute `pass` in its place.
    pub needs_pass: bool,
}

const COMPOUND_KEYWORDS: [&str; 12] = [
    "def", "class", "if", "elif", "else", "while", "for", "try", "except", "finally", "with",
    "async",
];

/// True when the token at `index` is part of a docstring statement: a
/// string-literal-only expression statement sitting first in a module,
/// function, or class body.
pub fn is_docstring_position(stream: &TokenStream, index: usize) -> bool {
    docstring_spans(stream)
        .iter()
        .any(|span| span.members.contains(&index))
}

struct SuiteCtx {
    is_defclass: bool,
    ends_at_newline: bool,
    expect_first: bool,
    stmts: usize,
    doc_span: Option<usize>,
}

pub fn docstring_spans(stream: &TokenStream) -> Vec<DocstringSpan> {
    let toks = &stream.tokens;
    let mut spans: Vec<DocstringSpan> = Vec::new();
    let mut stack: Vec<SuiteCtx> = vec![SuiteCtx {
        is_defclass: false,
        ends_at_newline: false,
        expect_first: true,
        stmts: 0,
        doc_span: None,
    }];
    // Module docstrings survive on their own; only emptied def/class suites
    // need a pass patch.
    let mut pending_block_defclass: Option<bool> = None;
    let mut in_stmt = false;
    let mut stmt_depth = 0usize;
    let mut stmt_kw: Option<String> = None;

    let close_suite = |stack: &mut Vec<SuiteCtx>, spans: &mut Vec<DocstringSpan>| {
        if let Some(suite) = stack.pop() {
            if suite.is_defclass && suite.stmts == 1 {
                if let Some(idx) = suite.doc_span {
                    spans[idx].needs_pass = true;
                }
            }
        }
    };

    let mut i = 0;
    while i < toks.len() {
        let tok = &toks[i];
        match tok.kind {
            TokenKind::Comment => {}
            TokenKind::Indent => {
                let is_defclass = pending_block_defclass.take().unwrap_or(false);
                stack.push(SuiteCtx {
                    is_defclass,
                    ends_at_newline: false,
                    expect_first: true,
                    stmts: 0,
                    doc_span: None,
                });
            }
            TokenKind::Dedent => {
                while stack.len() > 1 && stack.last().unwrap().ends_at_newline {
                    close_suite(&mut stack, &mut spans);
                }
                if stack.len() > 1 {
                    close_suite(&mut stack, &mut spans);
                }
            }
            TokenKind::Newline => {
                in_stmt = false;
                stmt_kw = None;
                stmt_depth = 0;
                while stack.len() > 1 && stack.last().unwrap().ends_at_newline {
                    close_suite(&mut stack, &mut spans);
                }
            }
            TokenKind::EndMarker => {
                while stack.len() > 1 {
                    close_suite(&mut stack, &mut spans);
                }
            }
            _ => {
                if !in_stmt {
                    pending_block_defclass = None;
                    let suite = stack.last_mut().unwrap();
                    suite.stmts += 1;
                    let first = std::mem::take(&mut suite.expect_first);
                    let can_doc = stack.len() == 1 || stack.last().unwrap().is_defclass;
                    if first && can_doc && tok.kind == TokenKind::StringLiteral {
                        if let Some(span) = docstring_statement_at(toks, i) {
                            let span_idx = spans.len();
                            stack.last_mut().unwrap().doc_span = Some(span_idx);
                            i = *span.members.last().unwrap() + 1;
                            spans.push(span);
                            continue;
                        }
                    }
                    in_stmt = true;
                    stmt_depth = 0;
                    stmt_kw = match tok.kind {
                        TokenKind::Name if COMPOUND_KEYWORDS.contains(&tok.text.as_str()) => {
                            Some(tok.text.clone())
                        }
                        _ => None,
                    };
                    if tok.kind == TokenKind::Operator {
                        update_depth(&mut stmt_depth, &tok.text);
                    }
                } else {
                    if tok.kind == TokenKind::Operator {
                        if tok.text == ";" && stmt_depth == 0 {
                            in_stmt = false;
                            stmt_kw = None;
                        } else if tok.text == ":" && stmt_depth == 0 && stmt_kw.is_some() {
                            let kw = stmt_kw.take().unwrap();
                            let is_defclass = kw == "def" || kw == "class";
                            in_stmt = false;
                            // Inline suite when more tokens follow on this
                            // logical line; block suite otherwise.
                            let inline = next_significant_before_newline(toks, i + 1);
                            if inline {
                                stack.push(SuiteCtx {
                                    is_defclass,
                                    ends_at_newline: true,
                                    expect_first: true,
                                    stmts: 0,
                                    doc_span: None,
                                });
                            } else {
                                pending_block_defclass = Some(is_defclass);
                            }
                        } else {
                            update_depth(&mut stmt_depth, &tok.text);
                        }
                    }
                }
            }
        }
        i += 1;
    }
    spans
}

fn update_depth(depth: &mut usize, op: &str) {
    match op {
        "(" | "[" | "{" => *depth += 1,
        ")" | "]" | "}" => *depth = depth.saturating_sub(1),
        _ => {}
    }
}

fn next_significant_before_newline(toks: &[Token], from: usize) -> bool {
    for tok in &toks[from..] {
        match tok.kind {
            TokenKind::Comment => continue,
            TokenKind::Newline | TokenKind::EndMarker | TokenKind::Dedent => return false,
            _ => return true,
        }
    }
    false
}

/// Starting at a StringLiteral token, decide whether the statement it opens
/// consists of string literals only, and collect its token indices.
fn docstring_statement_at(toks: &[Token], start: usize) -> Option<DocstringSpan> {
    let mut members = vec![start];
    let mut j = start + 1;
    loop {
        match toks.get(j) {
            None => break,
            Some(tok) => match tok.kind {
                TokenKind::StringLiteral => {
                    members.push(j);
                    j += 1;
                }
                TokenKind::Comment => {
                    j += 1;
                }
                TokenKind::Newline => {
                    members.push(j);
                    break;
                }
                TokenKind::Operator if tok.text == ";" => {
                    members.push(j);
                    break;
                }
                TokenKind::Dedent | TokenKind::EndMarker => break,
                _ => return None,
            },
        }
    }
    Some(DocstringSpan { start, members, needs_pass: false })
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
