//! Recursive-descent parser from token streams to a lightweight syntax tree.
//!
//! The tree models the statement and expression subset the rules need;
//! anything outside it folds into `Other` nodes. Parsing is total for any
//! stream that is bracket-balanced and indentation-consistent: a statement
//! the grammar cannot shape becomes an `Other` leaf spanning its logical
//! line, and an unexpected indented block becomes an `Other("block")` node
//! with the block's statements as children. Hard failures are reserved for
//! lexical errors and structural breakage (unmatched or crossed brackets,
//! missing dedents), which is exactly the boundary the curation pipeline
//! treats as unparseable.

use crate::analyzer::{NodeKind, SyntaxNode};
use crate::lex::{tokenize, Token, TokenKind, TokenStream};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

pub fn parse(source: &str) -> Result<SyntaxNode, ParseError> {
    let stream =
        tokenize(source).map_err(|e| ParseError { line: e.line, reason: e.reason })?;
    parse_stream(&stream)
}

pub fn parse_stream(stream: &TokenStream) -> Result<SyntaxNode, ParseError> {
    check_brackets(stream)?;
    let toks: Vec<&Token> = stream
        .tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Comment)
        .collect();
    let mut parser = Parser { toks, pos: 0 };
    let body = parser.block_body()?;
    match parser.cur().kind {
        TokenKind::EndMarker => {}
        _ => {
            return Err(parser.err("unexpected trailing tokens"));
        }
    }
    Ok(SyntaxNode { kind: NodeKind::Module, line: 1, label: None, children: body })
}

fn check_brackets(stream: &TokenStream) -> Result<(), ParseError> {
    let mut stack: Vec<(&str, usize)> = Vec::new();
    for tok in &stream.tokens {
        if tok.kind != TokenKind::Operator {
            continue;
        }
        match tok.text.as_str() {
            "(" | "[" | "{" => stack.push((tok.text.as_str(), tok.line)),
            ")" | "]" | "}" => {
                let expected = match tok.text.as_str() {
                    ")" => "(",
                    "]" => "[",
                    _ => "{",
                };
                match stack.pop() {
                    None => {
                        return Err(ParseError {
                            line: tok.line,
                            reason: format!("unmatched '{}'", tok.text),
                        })
                    }
                    Some((open, _)) if open != expected => {
                        return Err(ParseError {
                            line: tok.line,
                            reason: format!("closing '{}' does not match '{}'", tok.text, open),
                        })
                    }
                    Some(_) => {}
                }
            }
            _ => {}
        }
    }
    if let Some((open, line)) = stack.pop() {
        return Err(ParseError { line, reason: format!("'{open}' was never closed") });
    }
    Ok(())
}

// ---------------------------------------------------------------------------

struct Parser<'a> {
    toks: Vec<&'a Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

static END: Token = Token {
    kind: TokenKind::EndMarker,
    text: String::new(),
    line: 0,
    column: 0,
    gap: String::new(),
};

impl<'a> Parser<'a> {
    fn cur(&self) -> &Token {
        self.toks.get(self.pos).copied().unwrap_or(&END)
    }

    fn peek(&self, ahead: usize) -> &Token {
        self.toks.get(self.pos + ahead).copied().unwrap_or(&END)
    }

    fn bump(&mut self) -> &'a Token {
        let tok = self.toks.get(self.pos).copied().unwrap_or(&END);
        if self.pos < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn err(&self, reason: impl Into<String>) -> ParseError {
        let line = if self.cur().line == 0 {
            self.toks.last().map(|t| t.line).unwrap_or(1)
        } else {
            self.cur().line
        };
        ParseError { line, reason: reason.into() }
    }

    fn at_op(&self, text: &str) -> bool {
        let t = self.cur();
        t.kind == TokenKind::Operator && t.text == text
    }

    fn at_name(&self, text: &str) -> bool {
        let t = self.cur();
        t.kind == TokenKind::Name && t.text == text
    }

    fn eat_op(&mut self, text: &str) -> bool {
        if self.at_op(text) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, text: &str) -> PResult<()> {
        if self.eat_op(text) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{text}'")))
        }
    }

    fn expect_name_token(&mut self) -> PResult<&'a Token> {
        if self.cur().kind == TokenKind::Name {
            Ok(self.bump())
        } else {
            Err(self.err("expected a name"))
        }
    }

    // -- statements -------------------------------------------------------

    /// Statements until a Dedent or EndMarker, recovering unshapeable
    /// statements as `Other` leaves.
    fn block_body(&mut self) -> PResult<Vec<SyntaxNode>> {
        let mut stmts = Vec::new();
        loop {
            match self.cur().kind {
                TokenKind::Newline => {
                    self.bump();
                }
                TokenKind::Dedent | TokenKind::EndMarker => break,
                TokenKind::Indent => {
                    let line = self.cur().line;
                    self.bump();
                    let inner = self.block_body()?;
                    if self.cur().kind == TokenKind::Dedent {
                        self.bump();
                    }
                    stmts.push(SyntaxNode {
                        kind: NodeKind::Other,
                        line,
                        label: Some("block".to_string()),
                        children: inner,
                    });
                }
                _ => {
                    let start = self.pos;
                    match self.statement() {
                        Ok(mut nodes) => stmts.append(&mut nodes),
                        Err(_) => {
                            self.pos = start;
                            stmts.push(self.skim_unparsed());
                        }
                    }
                }
            }
        }
        Ok(stmts)
    }

    /// Consume one unshapeable logical line and fold it into an Other leaf.
    fn skim_unparsed(&mut self) -> SyntaxNode {
        let line = self.cur().line;
        loop {
            match self.cur().kind {
                TokenKind::Newline => {
                    self.bump();
                    break;
                }
                TokenKind::Dedent | TokenKind::EndMarker => break,
                TokenKind::Indent => {
                    // Inside a skimmed line only when the header colon was
                    // consumed by junk; swallow the block wholesale.
                    self.bump();
                    let mut depth = 1usize;
                    while depth > 0 {
                        match self.cur().kind {
                            TokenKind::Indent => depth += 1,
                            TokenKind::Dedent => depth -= 1,
                            TokenKind::EndMarker => break,
                            _ => {}
                        }
                        self.bump();
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
        SyntaxNode { kind: NodeKind::Other, line, label: Some("unparsed".to_string()), children: Vec::new() }
    }

    /// One logical line of simple statements, or one compound statement.
    fn statement(&mut self) -> PResult<Vec<SyntaxNode>> {
        let tok = self.cur();
        if tok.kind == TokenKind::Name {
            match tok.text.as_str() {
                "def" => return Ok(vec![self.funcdef(false)?]),
                "class" => return Ok(vec![self.classdef()?]),
                "async" => {
                    let next = self.peek(1);
                    if next.kind == TokenKind::Name
                        && matches!(next.text.as_str(), "def" | "for" | "with")
                    {
                        self.bump();
                        return match self.cur().text.as_str() {
                            "def" => Ok(vec![self.funcdef(true)?]),
                            "for" => Ok(vec![self.for_stmt()?]),
                            _ => Ok(vec![self.with_stmt()?]),
                        };
                    }
                }
                "if" => return Ok(vec![self.if_stmt()?]),
                "while" => return Ok(vec![self.while_stmt()?]),
                "for" => return Ok(vec![self.for_stmt()?]),
                "try" => return Ok(vec![self.try_stmt()?]),
                "with" => return Ok(vec![self.with_stmt()?]),
                "elif" | "else" | "except" | "finally" => {
                    return Err(self.err(format!("unexpected '{}'", tok.text)))
                }
                _ => {}
            }
        }
        if tok.kind == TokenKind::Operator && tok.text == "@" {
            let line = tok.line;
            self.bump();
            let expr = self.expression()?;
            self.end_simple_line()?;
            return Ok(vec![SyntaxNode {
                kind: NodeKind::Other,
                line,
                label: Some("decorator".to_string()),
                children: vec![expr],
            }]);
        }
        // Simple statements, possibly several separated by semicolons.
        let mut nodes = vec![self.simple_statement()?];
        while self.at_op(";") {
            self.bump();
            if matches!(self.cur().kind, TokenKind::Newline | TokenKind::Dedent | TokenKind::EndMarker)
            {
                break;
            }
            nodes.push(self.simple_statement()?);
        }
        self.end_simple_line()?;
        Ok(nodes)
    }

    fn end_simple_line(&mut self) -> PResult<()> {
        match self.cur().kind {
            TokenKind::Newline => {
                self.bump();
                Ok(())
            }
            TokenKind::Dedent | TokenKind::EndMarker => Ok(()),
            TokenKind::Operator if self.cur().text == ";" => Ok(()),
            _ => Err(self.err("expected end of statement")),
        }
    }

    fn simple_statement(&mut self) -> PResult<SyntaxNode> {
        let tok = self.cur();
        let line = tok.line;
        if tok.kind == TokenKind::Name {
            match tok.text.as_str() {
                "return" => {
                    self.bump();
                    let mut children = Vec::new();
                    if !self.at_line_end() {
                        children.push(self.testlist()?);
                    }
                    return Ok(SyntaxNode { kind: NodeKind::Return, line, label: None, children });
                }
                "raise" => {
                    self.bump();
                    let mut children = Vec::new();
                    if !self.at_line_end() {
                        children.push(self.expression()?);
                        if self.at_name("from") {
                            self.bump();
                            children.push(self.expression()?);
                        }
                    }
                    return Ok(SyntaxNode { kind: NodeKind::Raise, line, label: None, children });
                }
                "pass" => {
                    self.bump();
                    return Ok(SyntaxNode { kind: NodeKind::Pass, line, label: None, children: vec![] });
                }
                "break" | "continue" => {
                    let label = tok.text.clone();
                    self.bump();
                    return Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some(label), children: vec![] });
                }
                "import" => return self.import_stmt(),
                "from" => return self.from_import_stmt(),
                "global" | "nonlocal" | "del" | "assert" | "yield" => {
                    let label = tok.text.clone();
                    self.bump();
                    let mut children = Vec::new();
                    while !self.at_line_end() {
                        children.push(self.expression()?);
                        if !self.eat_op(",") {
                            break;
                        }
                    }
                    return Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some(label), children });
                }
                _ => {}
            }
        }
        self.expr_or_assign()
    }

    fn at_line_end(&self) -> bool {
        matches!(self.cur().kind, TokenKind::Newline | TokenKind::Dedent | TokenKind::EndMarker)
            || self.at_op(";")
    }

    /// Expression statement, assignment chain, augmented or annotated
    /// assignment.
    fn expr_or_assign(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        let first = self.testlist()?;
        if self.at_op(":") {
            // Annotated: target ':' annotation ['=' value]
            self.bump();
            let _annotation = self.expression()?;
            if self.eat_op("=") {
                let value = self.testlist()?;
                return Ok(SyntaxNode {
                    kind: NodeKind::Assign,
                    line,
                    label: None,
                    children: vec![first, value],
                });
            }
            return Ok(SyntaxNode {
                kind: NodeKind::Other,
                line,
                label: Some("annotation".to_string()),
                children: vec![first],
            });
        }
        if self.at_op("=") {
            let mut parts = vec![first];
            while self.eat_op("=") {
                parts.push(self.testlist()?);
            }
            return Ok(SyntaxNode { kind: NodeKind::Assign, line, label: None, children: parts });
        }
        const AUG: [&str; 13] = [
            "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**=",
        ];
        if self.cur().kind == TokenKind::Operator && AUG.contains(&self.cur().text.as_str()) {
            let op = self.bump().text.clone();
            let value = self.testlist()?;
            return Ok(SyntaxNode {
                kind: NodeKind::Other,
                line,
                label: Some(format!("augassign {op}")),
                children: vec![first, value],
            });
        }
        Ok(first)
    }

    // -- compound statements ----------------------------------------------

    fn suite(&mut self) -> PResult<Vec<SyntaxNode>> {
        if self.cur().kind == TokenKind::Newline {
            self.bump();
            if self.cur().kind != TokenKind::Indent {
                return Err(self.err("expected an indented block"));
            }
            self.bump();
            let body = self.block_body()?;
            if self.cur().kind == TokenKind::Dedent {
                self.bump();
            }
            Ok(body)
        } else {
            let mut nodes = vec![self.simple_statement()?];
            while self.at_op(";") {
                self.bump();
                if matches!(self.cur().kind, TokenKind::Newline | TokenKind::Dedent | TokenKind::EndMarker)
                {
                    break;
                }
                nodes.push(self.simple_statement()?);
            }
            match self.cur().kind {
                TokenKind::Newline => {
                    self.bump();
                }
                TokenKind::Dedent | TokenKind::EndMarker => {}
                _ => return Err(self.err("expected end of inline suite")),
            }
            Ok(nodes)
        }
    }

    fn wrapper(label: &str, line: usize, children: Vec<SyntaxNode>) -> SyntaxNode {
        SyntaxNode { kind: NodeKind::Other, line, label: Some(label.to_string()), children }
    }

    fn funcdef(&mut self, _is_async: bool) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump(); // def
        let name = self.expect_name_token()?.text.clone();
        self.expect_op("(")?;
        let params = self.def_params()?;
        self.expect_op(")")?;
        if self.eat_op("->") {
            let _returns = self.expression()?;
        }
        self.expect_op(":")?;
        let body = self.suite()?;
        Ok(SyntaxNode {
            kind: NodeKind::FunctionDef,
            line,
            label: Some(name),
            children: vec![Self::wrapper("params", line, params), Self::wrapper("body", line, body)],
        })
    }

    fn def_params(&mut self) -> PResult<Vec<SyntaxNode>> {
        let mut params = Vec::new();
        while !self.at_op(")") {
            if self.at_op("*") || self.at_op("**") {
                self.bump();
                if self.cur().kind == TokenKind::Name {
                    let tok = self.bump();
                    params.push(SyntaxNode {
                        kind: NodeKind::Name,
                        line: tok.line,
                        label: Some(tok.text.clone()),
                        children: vec![],
                    });
                    if self.eat_op(":") {
                        let _ann = self.expression()?;
                    }
                }
            } else if self.at_op("/") {
                self.bump();
            } else if self.cur().kind == TokenKind::Name {
                let tok = self.bump();
                let pline = tok.line;
                let pname = tok.text.clone();
                if self.eat_op(":") {
                    let _ann = self.expression()?;
                }
                if self.eat_op("=") {
                    let default = self.expression()?;
                    params.push(SyntaxNode {
                        kind: NodeKind::KeywordArg,
                        line: pline,
                        label: Some(pname),
                        children: vec![default],
                    });
                } else {
                    params.push(SyntaxNode {
                        kind: NodeKind::Name,
                        line: pline,
                        label: Some(pname),
                        children: vec![],
                    });
                }
            } else {
                return Err(self.err("expected a parameter"));
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(params)
    }

    fn classdef(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump(); // class
        let name = self.expect_name_token()?.text.clone();
        let mut bases = Vec::new();
        if self.eat_op("(") {
            while !self.at_op(")") {
                bases.push(self.call_arg()?);
                if !self.eat_op(",") {
                    break;
                }
            }
            self.expect_op(")")?;
        }
        self.expect_op(":")?;
        let body = self.suite()?;
        Ok(SyntaxNode {
            kind: NodeKind::ClassDef,
            line,
            label: Some(name),
            children: vec![Self::wrapper("bases", line, bases), Self::wrapper("body", line, body)],
        })
    }

    fn if_stmt(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump(); // if or elif
        let cond = self.expression()?;
        self.expect_op(":")?;
        let then = self.suite()?;
        let mut children = vec![cond, Self::wrapper("then", line, then)];
        if self.at_name("elif") {
            let elif_line = self.cur().line;
            let nested = self.if_stmt()?;
            children.push(Self::wrapper("else", elif_line, vec![nested]));
        } else if self.at_name("else") {
            let else_line = self.cur().line;
            self.bump();
            self.expect_op(":")?;
            let body = self.suite()?;
            children.push(Self::wrapper("else", else_line, body));
        }
        Ok(SyntaxNode { kind: NodeKind::If, line, label: None, children })
    }

    fn while_stmt(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump();
        let cond = self.expression()?;
        self.expect_op(":")?;
        let body = self.suite()?;
        let mut children = vec![cond, Self::wrapper("body", line, body)];
        if self.at_name("else") {
            let else_line = self.cur().line;
            self.bump();
            self.expect_op(":")?;
            let orelse = self.suite()?;
            children.push(Self::wrapper("else", else_line, orelse));
        }
        Ok(SyntaxNode { kind: NodeKind::While, line, label: None, children })
    }

    fn for_stmt(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump();
        let target = self.testlist_no_in()?;
        if !self.at_name("in") {
            return Err(self.err("expected 'in'"));
        }
        self.bump();
        let iter = self.testlist()?;
        self.expect_op(":")?;
        let body = self.suite()?;
        let mut children = vec![target, iter, Self::wrapper("body", line, body)];
        if self.at_name("else") {
            let else_line = self.cur().line;
            self.bump();
            self.expect_op(":")?;
            let orelse = self.suite()?;
            children.push(Self::wrapper("else", else_line, orelse));
        }
        Ok(SyntaxNode { kind: NodeKind::For, line, label: None, children })
    }

    fn with_stmt(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump();
        let mut items = Vec::new();
        loop {
            let ctx = self.expression()?;
            items.push(ctx);
            if self.at_name("as") {
                self.bump();
                items.push(self.expression()?);
            }
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(":")?;
        let body = self.suite()?;
        Ok(SyntaxNode {
            kind: NodeKind::With,
            line,
            label: None,
            children: vec![Self::wrapper("items", line, items), Self::wrapper("body", line, body)],
        })
    }

    fn try_stmt(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump();
        self.expect_op(":")?;
        let body = self.suite()?;
        let mut children = vec![Self::wrapper("body", line, body)];
        while self.at_name("except") {
            let h_line = self.cur().line;
            self.bump();
            let mut handler = Vec::new();
            if !self.at_op(":") {
                handler.push(self.expression()?);
                if self.at_name("as") {
                    self.bump();
                    let tok = self.expect_name_token()?;
                    handler.push(SyntaxNode {
                        kind: NodeKind::Name,
                        line: tok.line,
                        label: Some(tok.text.clone()),
                        children: vec![],
                    });
                }
            }
            self.expect_op(":")?;
            let h_body = self.suite()?;
            handler.push(Self::wrapper("body", h_line, h_body));
            children.push(Self::wrapper("except", h_line, handler));
        }
        if self.at_name("else") {
            let e_line = self.cur().line;
            self.bump();
            self.expect_op(":")?;
            let orelse = self.suite()?;
            children.push(Self::wrapper("orelse", e_line, orelse));
        }
        if self.at_name("finally") {
            let f_line = self.cur().line;
            self.bump();
            self.expect_op(":")?;
            let fin = self.suite()?;
            children.push(Self::wrapper("finally", f_line, fin));
        }
        if children.len() == 1 {
            return Err(self.err("expected 'except' or 'finally'"));
        }
        Ok(SyntaxNode { kind: NodeKind::Try, line, label: None, children })
    }

    // -- imports ------------------------------------------------------------

    fn dotted_name(&mut self) -> PResult<(String, usize)> {
        let tok = self.expect_name_token()?;
        let line = tok.line;
        let mut path = tok.text.clone();
        while self.at_op(".") && self.peek(1).kind == TokenKind::Name {
            self.bump();
            let part = self.bump();
            path.push('.');
            path.push_str(&part.text);
        }
        Ok((path, line))
    }

    fn import_stmt(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump(); // import
        let mut bindings = Vec::new();
        loop {
            let (path, p_line) = self.dotted_name()?;
            let mut children = Vec::new();
            if self.at_name("as") {
                self.bump();
                let alias = self.expect_name_token()?;
                children.push(SyntaxNode {
                    kind: NodeKind::Name,
                    line: alias.line,
                    label: Some(alias.text.clone()),
                    children: vec![],
                });
            }
            bindings.push(SyntaxNode {
                kind: NodeKind::Name,
                line: p_line,
                label: Some(path),
                children,
            });
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(SyntaxNode { kind: NodeKind::Import, line, label: None, children: bindings })
    }

    fn from_import_stmt(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump(); // from
        let mut module = String::new();
        while self.at_op(".") || self.at_op("...") {
            module.push_str(&self.bump().text);
        }
        if self.cur().kind == TokenKind::Name && !self.at_name("import") {
            let (path, _) = self.dotted_name()?;
            module.push_str(&path);
        }
        if !self.at_name("import") {
            return Err(self.err("expected 'import'"));
        }
        self.bump();
        let mut bindings = Vec::new();
        if self.at_op("*") {
            self.bump();
            return Ok(SyntaxNode {
                kind: NodeKind::ImportFrom,
                line,
                label: Some(module),
                children: bindings,
            });
        }
        let parenthesized = self.eat_op("(");
        loop {
            if parenthesized && self.at_op(")") {
                break;
            }
            let name = self.expect_name_token()?;
            let mut children = Vec::new();
            let n_line = name.line;
            let n_text = name.text.clone();
            if self.at_name("as") {
                self.bump();
                let alias = self.expect_name_token()?;
                children.push(SyntaxNode {
                    kind: NodeKind::Name,
                    line: alias.line,
                    label: Some(alias.text.clone()),
                    children: vec![],
                });
            }
            bindings.push(SyntaxNode { kind: NodeKind::Name, line: n_line, label: Some(n_text), children });
            if !self.eat_op(",") {
                break;
            }
        }
        if parenthesized {
            self.expect_op(")")?;
        }
        Ok(SyntaxNode { kind: NodeKind::ImportFrom, line, label: Some(module), children: bindings })
    }

    // -- expressions --------------------------------------------------------

    fn testlist(&mut self) -> PResult<SyntaxNode> {
        self.testlist_impl(false)
    }

    fn testlist_no_in(&mut self) -> PResult<SyntaxNode> {
        self.testlist_impl(true)
    }

    fn testlist_impl(&mut self, no_in: bool) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        let first = self.expression_impl(no_in)?;
        if !self.at_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.at_line_end() || self.at_op("=") || self.at_op(")") || self.at_op("]") || self.at_op("}") || self.at_op(":") || self.at_name("in")
            {
                break;
            }
            items.push(self.expression_impl(no_in)?);
        }
        Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some("tuple".to_string()), children: items })
    }

    fn expression(&mut self) -> PResult<SyntaxNode> {
        self.expression_impl(false)
    }

    fn expression_impl(&mut self, no_in: bool) -> PResult<SyntaxNode> {
        if self.at_name("lambda") {
            return self.lambda();
        }
        if self.at_name("yield") {
            let line = self.cur().line;
            self.bump();
            let mut children = Vec::new();
            if self.at_name("from") {
                self.bump();
                children.push(self.expression_impl(no_in)?);
            } else if !self.at_line_end() && !self.at_op(")") && !self.at_op("]") && !self.at_op("}") && !self.at_op(",")
            {
                children.push(self.testlist()?);
            }
            return Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some("yield".to_string()), children });
        }
        let body = self.or_expr(no_in)?;
        if self.at_name("if") {
            let line = self.cur().line;
            self.bump();
            let cond = self.or_expr(no_in)?;
            if !self.at_name("else") {
                return Err(self.err("expected 'else' in conditional expression"));
            }
            self.bump();
            let orelse = self.expression_impl(no_in)?;
            return Ok(SyntaxNode {
                kind: NodeKind::Other,
                line,
                label: Some("ternary".to_string()),
                children: vec![body, cond, orelse],
            });
        }
        Ok(body)
    }

    fn lambda(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        self.bump(); // lambda
        let mut children = Vec::new();
        while !self.at_op(":") {
            if self.at_op("*") || self.at_op("**") || self.at_op("/") {
                self.bump();
                continue;
            }
            if self.cur().kind == TokenKind::Name {
                let tok = self.bump();
                if self.eat_op("=") {
                    let default = self.expression()?;
                    children.push(SyntaxNode {
                        kind: NodeKind::KeywordArg,
                        line: tok.line,
                        label: Some(tok.text.clone()),
                        children: vec![default],
                    });
                }
                if !self.eat_op(",") && !self.at_op(":") {
                    return Err(self.err("expected ',' or ':' in lambda parameters"));
                }
                continue;
            }
            return Err(self.err("expected lambda parameter"));
        }
        self.expect_op(":")?;
        let body = self.expression()?;
        children.push(body);
        Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some("lambda".to_string()), children })
    }

    fn or_expr(&mut self, no_in: bool) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        let mut node = self.and_expr(no_in)?;
        while self.at_name("or") {
            self.bump();
            let rhs = self.and_expr(no_in)?;
            node = SyntaxNode {
                kind: NodeKind::BoolOp,
                line,
                label: Some("or".to_string()),
                children: vec![node, rhs],
            };
        }
        Ok(node)
    }

    fn and_expr(&mut self, no_in: bool) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        let mut node = self.not_expr(no_in)?;
        while self.at_name("and") {
            self.bump();
            let rhs = self.not_expr(no_in)?;
            node = SyntaxNode {
                kind: NodeKind::BoolOp,
                line,
                label: Some("and".to_string()),
                children: vec![node, rhs],
            };
        }
        Ok(node)
    }

    fn not_expr(&mut self, no_in: bool) -> PResult<SyntaxNode> {
        if self.at_name("not") {
            let line = self.cur().line;
            self.bump();
            let operand = self.not_expr(no_in)?;
            return Ok(SyntaxNode {
                kind: NodeKind::UnaryOp,
                line,
                label: Some("not".to_string()),
                children: vec![operand],
            });
        }
        self.comparison(no_in)
    }

    fn comparison(&mut self, no_in: bool) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        let first = self.bitor()?;
        let mut operands = vec![first];
        let mut op_label: Option<String> = None;
        loop {
            let op = if self.cur().kind == TokenKind::Operator
                && matches!(self.cur().text.as_str(), "<" | ">" | "==" | ">=" | "<=" | "!=")
            {
                Some(self.bump().text.clone())
            } else if self.at_name("in") && !no_in {
                self.bump();
                Some("in".to_string())
            } else if self.at_name("not") && self.peek(1).kind == TokenKind::Name && self.peek(1).text == "in" && !no_in
            {
                self.bump();
                self.bump();
                Some("not in".to_string())
            } else if self.at_name("is") {
                self.bump();
                if self.at_name("not") {
                    self.bump();
                    Some("is not".to_string())
                } else {
                    Some("is".to_string())
                }
            } else {
                None
            };
            match op {
                Some(op) => {
                    if op_label.is_none() {
                        op_label = Some(op);
                    }
                    operands.push(self.bitor()?);
                }
                None => break,
            }
        }
        if operands.len() == 1 {
            return Ok(operands.pop().unwrap());
        }
        Ok(SyntaxNode { kind: NodeKind::Compare, line, label: op_label, children: operands })
    }

    fn binop_level(
        &mut self,
        ops: &[&str],
        next: fn(&mut Self) -> PResult<SyntaxNode>,
    ) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        let mut node = next(self)?;
        while self.cur().kind == TokenKind::Operator && ops.contains(&self.cur().text.as_str()) {
            let op = self.bump().text.clone();
            let rhs = next(self)?;
            node = SyntaxNode {
                kind: NodeKind::BinOp,
                line,
                label: Some(op),
                children: vec![node, rhs],
            };
        }
        Ok(node)
    }

    fn bitor(&mut self) -> PResult<SyntaxNode> {
        self.binop_level(&["|"], |p| p.bitxor())
    }

    fn bitxor(&mut self) -> PResult<SyntaxNode> {
        self.binop_level(&["^"], |p| p.bitand())
    }

    fn bitand(&mut self) -> PResult<SyntaxNode> {
        self.binop_level(&["&"], |p| p.shift())
    }

    fn shift(&mut self) -> PResult<SyntaxNode> {
        self.binop_level(&["<<", ">>"], |p| p.arith())
    }

    fn arith(&mut self) -> PResult<SyntaxNode> {
        self.binop_level(&["+", "-"], |p| p.term())
    }

    fn term(&mut self) -> PResult<SyntaxNode> {
        self.binop_level(&["*", "/", "//", "%", "@"], |p| p.factor())
    }

    fn factor(&mut self) -> PResult<SyntaxNode> {
        if self.cur().kind == TokenKind::Operator
            && matches!(self.cur().text.as_str(), "+" | "-" | "~")
        {
            let line = self.cur().line;
            let op = self.bump().text.clone();
            let operand = self.factor()?;
            return Ok(SyntaxNode {
                kind: NodeKind::UnaryOp,
                line,
                label: Some(op),
                children: vec![operand],
            });
        }
        self.power()
    }

    fn power(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        let base = self.atom_with_trailers()?;
        if self.at_op("**") {
            self.bump();
            let exp = self.factor()?;
            return Ok(SyntaxNode {
                kind: NodeKind::BinOp,
                line,
                label: Some("**".to_string()),
                children: vec![base, exp],
            });
        }
        Ok(base)
    }

    fn atom_with_trailers(&mut self) -> PResult<SyntaxNode> {
        if self.at_name("await") {
            let line = self.cur().line;
            self.bump();
            let operand = self.atom_with_trailers()?;
            return Ok(SyntaxNode {
                kind: NodeKind::Other,
                line,
                label: Some("await".to_string()),
                children: vec![operand],
            });
        }
        let mut node = self.atom()?;
        loop {
            if self.at_op(".") && self.peek(1).kind == TokenKind::Name {
                self.bump();
                let attr = self.bump();
                node = SyntaxNode {
                    kind: NodeKind::Attribute,
                    line: attr.line,
                    label: Some(attr.text.clone()),
                    children: vec![node],
                };
            } else if self.at_op("(") {
                let line = self.cur().line;
                self.bump();
                let mut children = vec![node];
                children.extend(self.call_args()?);
                self.expect_op(")")?;
                node = SyntaxNode { kind: NodeKind::Call, line, label: None, children };
            } else if self.at_op("[") {
                let line = self.cur().line;
                self.bump();
                let mut children = vec![node];
                while !self.at_op("]") {
                    children.push(self.subscript_item()?);
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op("]")?;
                node = SyntaxNode {
                    kind: NodeKind::Other,
                    line,
                    label: Some("subscript".to_string()),
                    children,
                };
            } else {
                break;
            }
        }
        Ok(node)
    }

    fn subscript_item(&mut self) -> PResult<SyntaxNode> {
        let line = self.cur().line;
        let mut parts = Vec::new();
        let mut is_slice = false;
        if !self.at_op(":") {
            parts.push(self.expression()?);
        }
        while self.at_op(":") {
            is_slice = true;
            self.bump();
            if !self.at_op(":") && !self.at_op("]") && !self.at_op(",") {
                parts.push(self.expression()?);
            }
        }
        if is_slice {
            Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some("slice".to_string()), children: parts })
        } else {
            Ok(parts.pop().ok_or_else(|| self.err("expected subscript"))?)
        }
    }

    fn call_args(&mut self) -> PResult<Vec<SyntaxNode>> {
        let mut args = Vec::new();
        while !self.at_op(")") {
            args.push(self.call_arg()?);
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(args)
    }

    fn call_arg(&mut self) -> PResult<SyntaxNode> {
        if self.at_op("*") || self.at_op("**") {
            let line = self.cur().line;
            self.bump();
            let value = self.expression()?;
            return Ok(SyntaxNode {
                kind: NodeKind::Other,
                line,
                label: Some("star".to_string()),
                children: vec![value],
            });
        }
        if self.cur().kind == TokenKind::Name
            && self.peek(1).kind == TokenKind::Operator
            && self.peek(1).text == "="
        {
            let name = self.bump();
            let line = name.line;
            let key = name.text.clone();
            self.bump(); // =
            let value = self.expression()?;
            return Ok(SyntaxNode {
                kind: NodeKind::KeywordArg,
                line,
                label: Some(key),
                children: vec![value],
            });
        }
        let expr = self.expression()?;
        if self.at_name("for") || self.at_name("async") {
            return self.comprehension(expr);
        }
        Ok(expr)
    }

    fn comprehension(&mut self, elt: SyntaxNode) -> PResult<SyntaxNode> {
        let line = elt.line;
        let mut children = vec![elt];
        loop {
            if self.at_name("async") && self.peek(1).kind == TokenKind::Name && self.peek(1).text == "for" {
                self.bump();
            }
            if self.at_name("for") {
                self.bump();
                children.push(self.testlist_no_in()?);
                if !self.at_name("in") {
                    return Err(self.err("expected 'in' in comprehension"));
                }
                self.bump();
                // The iterable and any filter stop short of `if`: a trailing
                // `if` always belongs to the comprehension, never a ternary.
                children.push(self.or_expr(true)?);
            } else if self.at_name("if") {
                self.bump();
                children.push(self.or_expr(true)?);
            } else {
                break;
            }
        }
        Ok(SyntaxNode {
            kind: NodeKind::Other,
            line,
            label: Some("comprehension".to_string()),
            children,
        })
    }

    fn atom(&mut self) -> PResult<SyntaxNode> {
        let tok = self.cur();
        let line = tok.line;
        match tok.kind {
            TokenKind::Name => {
                let text = self.bump().text.clone();
                Ok(SyntaxNode { kind: NodeKind::Name, line, label: Some(text), children: vec![] })
            }
            TokenKind::Number => {
                let text = self.bump().text.clone();
                Ok(SyntaxNode { kind: NodeKind::NumberConst, line, label: Some(text), children: vec![] })
            }
            TokenKind::StringLiteral => {
                let mut parts: Vec<(String, usize)> = Vec::new();
                while self.cur().kind == TokenKind::StringLiteral {
                    let t = self.bump();
                    parts.push((t.text.clone(), t.line));
                }
                Ok(string_node(parts))
            }
            TokenKind::Operator => match tok.text.as_str() {
                "(" => {
                    self.bump();
                    if self.eat_op(")") {
                        return Ok(SyntaxNode {
                            kind: NodeKind::Other,
                            line,
                            label: Some("tuple".to_string()),
                            children: vec![],
                        });
                    }
                    let first = if self.at_op("*") {
                        self.call_arg()?
                    } else {
                        self.expression()?
                    };
                    if self.at_name("for") || self.at_name("async") {
                        let comp = self.comprehension(first)?;
                        self.expect_op(")")?;
                        return Ok(comp);
                    }
                    if self.at_op(",") {
                        let mut items = vec![first];
                        while self.eat_op(",") {
                            if self.at_op(")") {
                                break;
                            }
                            items.push(self.expression()?);
                        }
                        self.expect_op(")")?;
                        return Ok(SyntaxNode {
                            kind: NodeKind::Other,
                            line,
                            label: Some("tuple".to_string()),
                            children: items,
                        });
                    }
                    if self.at_op(":=") {
                        self.bump();
                        let value = self.expression()?;
                        self.expect_op(")")?;
                        return Ok(SyntaxNode {
                            kind: NodeKind::Other,
                            line,
                            label: Some("walrus".to_string()),
                            children: vec![first, value],
                        });
                    }
                    self.expect_op(")")?;
                    Ok(first)
                }
                "[" => {
                    self.bump();
                    let mut items = Vec::new();
                    if !self.at_op("]") {
                        let first = if self.at_op("*") { self.call_arg()? } else { self.expression()? };
                        if self.at_name("for") || self.at_name("async") {
                            let comp = self.comprehension(first)?;
                            self.expect_op("]")?;
                            return Ok(comp);
                        }
                        items.push(first);
                        while self.eat_op(",") {
                            if self.at_op("]") {
                                break;
                            }
                            items.push(self.expression()?);
                        }
                    }
                    self.expect_op("]")?;
                    Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some("list".to_string()), children: items })
                }
                "{" => {
                    self.bump();
                    let mut items = Vec::new();
                    let mut is_dict = false;
                    if !self.at_op("}") {
                        if self.at_op("**") {
                            is_dict = true;
                            self.bump();
                            items.push(self.expression()?);
                        } else {
                            let first = self.expression()?;
                            if self.at_op(":") {
                                is_dict = true;
                                self.bump();
                                let value = self.expression()?;
                                items.push(first);
                                items.push(value);
                            } else {
                                items.push(first);
                            }
                            if self.at_name("for") || self.at_name("async") {
                                let elt = items.pop().unwrap();
                                let comp = self.comprehension(elt)?;
                                self.expect_op("}")?;
                                return Ok(comp);
                            }
                        }
                        while self.eat_op(",") {
                            if self.at_op("}") {
                                break;
                            }
                            if self.at_op("**") {
                                self.bump();
                                items.push(self.expression()?);
                                continue;
                            }
                            let key = self.expression()?;
                            items.push(key);
                            if is_dict && self.eat_op(":") {
                                items.push(self.expression()?);
                            }
                        }
                    } else {
                        is_dict = true;
                    }
                    self.expect_op("}")?;
                    let label = if is_dict { "dict" } else { "set" };
                    Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some(label.to_string()), children: items })
                }
                "..." => {
                    self.bump();
                    Ok(SyntaxNode { kind: NodeKind::Other, line, label: Some("ellipsis".to_string()), children: vec![] })
                }
                _ => Err(self.err(format!("unexpected '{}'", tok.text))),
            },
            _ => Err(self.err("expected an expression")),
        }
    }
}

// ---------------------------------------------------------------------------
// string literal helpers
// ---------------------------------------------------------------------------

/// Build a node for one or more adjacent string literal tokens.
fn string_node(parts: Vec<(String, usize)>) -> SyntaxNode {
    let line = parts.first().map(|p| p.1).unwrap_or(1);
    let interpolated = parts.iter().any(|(text, _)| fstring_is_interpolated(text));
    if parts.len() == 1 {
        let (text, _) = parts.into_iter().next().unwrap();
        let kind = if interpolated { NodeKind::JoinedString } else { NodeKind::StringConst };
        return SyntaxNode { kind, line, label: Some(text), children: vec![] };
    }
    let children: Vec<SyntaxNode> = parts
        .into_iter()
        .map(|(text, p_line)| {
            let kind = if fstring_is_interpolated(&text) {
                NodeKind::JoinedString
            } else {
                NodeKind::StringConst
            };
            SyntaxNode { kind, line: p_line, label: Some(text), children: vec![] }
        })
        .collect();
    let kind = if interpolated { NodeKind::JoinedString } else { NodeKind::StringConst };
    SyntaxNode { kind, line, label: None, children }
}

/// True for f-string tokens whose body contains at least one `{...}`
/// interpolation field (doubled braces are escapes).
pub fn fstring_is_interpolated(raw: &str) -> bool {
    let prefix_len = raw.chars().take_while(|c| c.is_ascii_alphabetic()).count();
    let prefix: String = raw.chars().take(prefix_len).collect();
    if !prefix.to_ascii_lowercase().contains('f') {
        return false;
    }
    let body = string_body(raw);
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '{' {
            if chars.get(i + 1) == Some(&'{') {
                i += 2;
                continue;
            }
            return true;
        }
        i += 1;
    }
    false
}

/// The content between the quotes of a string token, prefix excluded.
pub fn string_body(raw: &str) -> &str {
    let prefix_len = raw.chars().take_while(|c| c.is_ascii_alphabetic()).count();
    let rest = &raw[prefix_len..];
    for quote in ["\"\"\"", "'''"] {
        if rest.starts_with(quote) {
            let inner = &rest[3..];
            return inner.strip_suffix(quote).unwrap_or(inner);
        }
    }
    for quote in ["\"", "'"] {
        if rest.starts_with(quote) {
            let inner = &rest[1..];
            return inner.strip_suffix(quote).unwrap_or(inner);
        }
    }
    rest
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
