//! Comment and docstring removal over token streams.
//!
//! Removal is an edit on the token stream, never on raw strings: dropped
//! tokens contribute (normalized) gap text only, kept tokens are emitted
//! verbatim. The seam rules below keep the output lexable and parseable and
//! keep its token sequence identical to the input's minus the removed
//! Comment/StringLiteral/terminator tokens:
//!
//! * a dropped token's gap loses its trailing horizontal whitespace, so
//!   inline comments do not leave dangling blanks;
//! * a comment that was the only content of its line also swallows the
//!   following line break, erasing the whole line;
//! * a removed docstring statement takes its terminating Newline (or `;`)
//!   token with it;
//! * a def/class suite that would end up empty gets `pass` substituted at
//!   the docstring's position;
//! * any kept gap holding two or more line breaks (and no continuation
//!   backslash) collapses to a single blank line plus final indentation.
//!
//! Intra-line spacing of surviving code is never touched. The result is
//! idempotent: stripping stripped output is a no-op.

use crate::lex::{docstring_spans, tokenize, LexError, TokenKind, TokenStream};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripOutcome {
    pub code: String,
    pub comments_removed: usize,
    pub docstrings_removed: usize,
    /// Number of `pass` statements substituted for docstrings whose removal
    /// would have emptied a def/class body.
    pub pass_patches: usize,
}

/// Strip comments and docstrings, returning just the cleaned source.
pub fn strip(source: &str) -> Result<String, LexError> {
    strip_with_stats(source).map(|o| o.code)
}

pub fn strip_with_stats(source: &str) -> Result<StripOutcome, LexError> {
    let stream = tokenize(source)?;
    Ok(strip_stream(&stream))
}

/// Verify that `stripped` carries exactly the token sequence of `source`
/// minus comments and docstring statements, with `pass` standing in where a
/// removal would have emptied a suite. Returns false when either text fails
/// to lex. This is the invariant `strip` promises, packaged so pipelines
/// can spot-check their own outputs.
pub fn tokens_equivalent(source: &str, stripped: &str) -> bool {
    let stream = match tokenize(source) {
        Ok(s) => s,
        Err(_) => return false,
    };
    let restream = match tokenize(stripped) {
        Ok(s) => s,
        Err(_) => return false,
    };

    let spans = docstring_spans(&stream);
    let mut drop = vec![false; stream.tokens.len()];
    let mut pass_at = vec![false; stream.tokens.len()];
    for (i, t) in stream.tokens.iter().enumerate() {
        if t.kind == TokenKind::Comment {
            drop[i] = true;
        }
    }
    for span in &spans {
        for &i in &span.members {
            drop[i] = true;
        }
        if span.needs_pass {
            pass_at[span.start] = true;
            let last = *span.members.last().unwrap();
            if last != span.start {
                drop[last] = false;
            }
        }
    }
    let mut expected = Vec::new();
    for (i, t) in stream.tokens.iter().enumerate() {
        if pass_at[i] {
            expected.push((TokenKind::Name, "pass"));
        } else if !drop[i] {
            expected.push((t.kind, t.text.as_str()));
        }
    }
    let got: Vec<(TokenKind, &str)> =
        restream.tokens.iter().map(|t| (t.kind, t.text.as_str())).collect();
    got == expected
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Action {
    Keep,
    Drop,
    ReplaceWithPass,
}

pub fn strip_stream(stream: &TokenStream) -> StripOutcome {
    let toks = &stream.tokens;
    let mut action = vec![Action::Keep; toks.len()];
    let mut comments_removed = 0usize;

    for (i, tok) in toks.iter().enumerate() {
        if tok.kind == TokenKind::Comment {
            action[i] = Action::Drop;
            comments_removed += 1;
        }
    }

    let spans = docstring_spans(stream);
    let docstrings_removed = spans.len();
    let mut pass_patches = 0usize;
    for span in &spans {
        for &i in &span.members {
            action[i] = Action::Drop;
        }
        if span.needs_pass {
            action[span.start] = Action::ReplaceWithPass;
            pass_patches += 1;
            // The substituted statement still needs the line terminator the
            // docstring carried.
            let last = *span.members.last().unwrap();
            if last != span.start {
                action[last] = Action::Keep;
            }
        }
    }

    let mut out = String::new();
    let mut pending = String::new();
    let mut swallow_newline = false;
    let mut last_kept_line = 0usize;

    for (i, tok) in toks.iter().enumerate() {
        match action[i] {
            Action::Drop => {
                let mut gap = trim_trailing_horizontal(&tok.gap);
                if swallow_newline {
                    gap = swallow_one_newline(&gap);
                    swallow_newline = false;
                }
                pending.push_str(&gap);
                match tok.kind {
                    TokenKind::Comment if tok.line != last_kept_line => {
                        // Sole content of its line: erase the line break too.
                        swallow_newline = true;
                    }
                    TokenKind::Newline => {
                        // A dropped terminator already removes its own line
                        // break, so nothing is owed from the next gap.
                        swallow_newline = false;
                    }
                    _ => {}
                }
            }
            Action::Keep | Action::ReplaceWithPass => {
                let mut gap = format!("{pending}{}", tok.gap);
                pending.clear();
                if swallow_newline {
                    gap = swallow_one_newline(&gap);
                    swallow_newline = false;
                }
                out.push_str(&collapse_blank_run(&gap));
                if action[i] == Action::ReplaceWithPass {
                    out.push_str("pass");
                    last_kept_line = tok.line;
                } else {
                    out.push_str(&tok.text);
                    if !tok.text.is_empty() && tok.kind != TokenKind::Newline {
                        last_kept_line = tok.line;
                    }
                }
            }
        }
    }

    StripOutcome { code: out, comments_removed, docstrings_removed, pass_patches }
}

pub(crate) fn trim_trailing_horizontal(gap: &str) -> String {
    gap.trim_end_matches([' ', '\t', '\x0c']).to_string()
}

/// Remove leading horizontal whitespace plus at most one line break.
fn swallow_one_newline(gap: &str) -> String {
    let rest = gap.trim_start_matches([' ', '\t', '\x0c']);
    if let Some(stripped) = rest.strip_prefix("\r\n") {
        stripped.to_string()
    } else if let Some(stripped) = rest.strip_prefix(['\n', '\r']) {
        stripped.to_string()
    } else {
        rest.to_string()
    }
}

/// Collapse a gap carrying more than one line break down to one blank line,
/// keeping whatever indentation follows the final break. Gaps with
/// continuation backslashes are left alone.
fn collapse_blank_run(gap: &str) -> String {
    if gap.contains('\\') {
        return gap.to_string();
    }
    let breaks = gap.chars().filter(|&c| c == '\n' || c == '\r').count();
    let breaks = breaks - gap.matches("\r\n").count();
    if breaks < 2 {
        return gap.to_string();
    }
    let tail_start = gap
        .rfind(['\n', '\r'])
        .map(|i| i + 1)
        .unwrap_or(0);
    format!("\n{}", &gap[tail_start..])
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lex::{reassemble, Token};

    fn stripped(src: &str) -> String {
        strip(src).unwrap()
    }

    fn assert_token_equivalent(src: &str) {
        let out = stripped(src);
        assert!(tokens_equivalent(src, &out), "token mismatch for {src:?}: {out:?}");
    }

    #[test]
    fn inline_comment_removed_without_trailing_blank() {
        assert_eq!(stripped("x = 1  # note\n"), "x = 1\n");
    }

    #[test]
    fn comment_only_line_vanishes() {
        assert_eq!(stripped("# header\nx = 1\n"), "x = 1\n");
        assert_eq!(stripped("x = 1\n# middle\ny = 2\n"), "x = 1\ny = 2\n");
    }

    #[test]
    fn chained_comment_lines_vanish() {
        assert_eq!(stripped("x = 1\n# a\n# b\n# c\ny = 2\n"), "x = 1\ny = 2\n");
    }

    #[test]
    fn indented_comment_line_vanishes() {
        let src = "def f():\n    # setup\n    return 1\n";
        assert_eq!(stripped(src), "def f():\n    return 1\n");
    }

    #[test]
    fn module_docstring_removed() {
        assert_eq!(stripped("\"\"\"module doc\"\"\"\nx = 1\n"), "x = 1\n");
    }

    #[test]
    fn module_docstring_only_leaves_empty_module() {
        assert_eq!(stripped("\"\"\"module doc\"\"\"\n"), "");
    }

    #[test]
    fn def_docstring_removed_keeps_indentation() {
        let src = "def f():\n    \"\"\"doc\"\"\"\n    return 1\n";
        assert_eq!(stripped(src), "def f():\n    return 1\n");
    }

    #[test]
    fn docstring_only_def_gets_pass() {
        let src = "def f():\n    \"\"\"doc\"\"\"\n";
        assert_eq!(stripped(src), "def f():\n    pass\n");
    }

    #[test]
    fn docstring_only_class_gets_pass() {
        let src = "class C:\n    \"doc\"\n";
        assert_eq!(stripped(src), "class C:\n    pass\n");
    }

    #[test]
    fn inline_def_docstring_gets_pass() {
        assert_eq!(stripped("def f(): \"doc\"\n"), "def f(): pass\n");
    }

    #[test]
    fn multiline_docstring_removed() {
        let src = "def f():\n    \"\"\"line one\n    line two\n    \"\"\"\n    return 1\n";
        assert_eq!(stripped(src), "def f():\n    return 1\n");
    }

    #[test]
    fn adjacent_string_docstring_removed_entirely() {
        let src = "def f():\n    \"one \" \"two\"\n    return 1\n";
        assert_eq!(stripped(src), "def f():\n    return 1\n");
    }

    #[test]
    fn mid_body_string_statement_kept() {
        let src = "def f():\n    x = 1\n    \"kept\"\n    return x\n";
        assert_eq!(stripped(src), src);
    }

    #[test]
    fn blank_runs_collapse_to_single_blank_line() {
        assert_eq!(stripped("x = 1\n\n\n\ny = 2\n"), "x = 1\n\ny = 2\n");
    }

    #[test]
    fn single_blank_line_untouched() {
        assert_eq!(stripped("x = 1\n\ny = 2\n"), "x = 1\n\ny = 2\n");
    }

    #[test]
    fn comment_block_between_functions_leaves_one_blank() {
        let src = "def f():\n    return 1\n\n\n# section\n# more\n\n\ndef g():\n    return 2\n";
        assert_eq!(stripped(src), "def f():\n    return 1\n\ndef g():\n    return 2\n");
    }

    #[test]
    fn docstring_followed_by_comment_line() {
        let src = "def f():\n    \"doc\"  # why\n    return 1\n";
        assert_eq!(stripped(src), "def f():\n    return 1\n");
    }

    #[test]
    fn intra_line_spacing_untouched() {
        let src = "x  =   1\ny =2\n";
        assert_eq!(stripped(src), src);
    }

    #[test]
    fn trailing_whitespace_on_untouched_lines_survives() {
        let src = "x = 1   \ny = 2\n";
        assert_eq!(stripped(src), src);
    }

    #[test]
    fn continuation_gaps_are_preserved() {
        let src = "x = 1 + \\\n    2\n";
        assert_eq!(stripped(src), src);
    }

    #[test]
    fn strings_keep_their_content() {
        let src = "s = 'text with # not a comment'\n";
        assert_eq!(stripped(src), src);
    }

    #[test]
    fn nested_docstrings_all_removed() {
        let src = "def f():\n    \"outer\"\n    def g():\n        \"inner\"\n    return g\n";
        assert_eq!(stripped(src), "def f():\n    def g():\n        pass\n    return g\n");
    }

    #[test]
    fn eof_docstring_without_newline() {
        assert_eq!(stripped("def f():\n    \"doc\""), "def f():\n    pass");
    }

    #[test]
    fn idempotent_on_typical_source() {
        let sources = [
            "\"\"\"mod\"\"\"\n# c\ndef f():\n    \"doc\"\n    # inner\n    return 1  # trailing\n\n\n\ndef g():\n    'just doc'\n",
            "x = 1\n\n\n# only comments\n\n\ny = 2\n",
            "class C:\n    \"doc\"\n    def m(self):\n        \"m doc\"\n        return self\n",
        ];
        for src in sources {
            let once = stripped(src);
            let twice = strip(&once).unwrap();
            assert_eq!(once, twice, "not idempotent for {src:?}");
        }
    }

    #[test]
    fn token_sequences_equivalent_after_strip() {
        let sources = [
            "x = 1  # note\n",
            "# header\nx = 1\n",
            "\"\"\"mod\"\"\"\ndef f():\n    \"doc\"\n    return 1\n",
            "def f():\n    \"\"\"doc\"\"\"\n",
            "def f(): \"doc\"\n",
            "class C:\n    \"doc\"\n    x = 1\n",
            "def f():\n    x = 1  # a\n    # b\n    return x\n",
            "x = 1\n\n\n\ny = 2\n",
        ];
        for src in sources {
            assert_token_equivalent(src);
        }
    }

    #[test]
    fn stripped_output_still_lexes_and_reassembles() {
        let src = "\"\"\"mod\"\"\"\n# c\ndef f():\n    \"doc\"\n    return 1\n";
        let out = stripped(src);
        let stream = tokenize(&out).unwrap();
        assert_eq!(reassemble(&stream), out);
    }

    #[test]
    fn comment_with_no_trailing_newline_at_eof() {
        assert_eq!(stripped("x = 1\n# last"), "x = 1\n");
    }

    #[test]
    fn formfeed_in_gap_survives() {
        let src = "x = 1\n\x0cy = 2\n";
        assert_eq!(stripped(src), src);
    }

    #[test]
    fn stats_are_counted() {
        let src = "\"\"\"mod\"\"\"\n# one\ndef f():\n    \"doc\"\n# two\n";
        let o = strip_with_stats(src).unwrap();
        assert_eq!(o.comments_removed, 2);
        assert_eq!(o.docstrings_removed, 2);
        assert_eq!(o.pass_patches, 1);
    }

    #[test]
    fn lex_error_propagates() {
        assert!(strip("s = 'unterminated\n").is_err());
    }

    #[test]
    fn strip_stream_accepts_prebuilt_streams() {
        let stream = tokenize("x = 1  # c\n").unwrap();
        let out = strip_stream(&stream);
        assert_eq!(out.code, "x = 1\n");
        // The input stream is untouched; Token is cheap to clone but the
        // stripper never needs to.
        let _: &Token = &stream.tokens[0];
    }
}
