//! The rule checkers and the import-alias resolution they share.

use crate::analyzer::{NodeKind, SyntaxNode};
use std::collections::HashMap;

/// Locally bound name -> module path segments it stands for.
///
/// `import hashlib as h` maps `h` to `["hashlib"]`; `from hashlib import
/// md5 as m` maps `m` to `["hashlib", "md5"]`. Bindings from relative
/// imports keep a leading `"."` segment so they can never collide with an
/// absolute module path.
pub type AliasMap = HashMap<String, Vec<String>>;

pub fn collect_aliases(root: &SyntaxNode) -> AliasMap {
    let mut map = AliasMap::new();
    root.walk(&mut |node| match node.kind {
        NodeKind::Import => {
            for binding in &node.children {
                let Some(path) = binding.label.as_deref() else { continue };
                let segments: Vec<String> = path.split('.').map(str::to_string).collect();
                match binding.children.first().and_then(|a| a.label.clone()) {
                    Some(alias) => {
                        map.insert(alias, segments);
                    }
                    None => {
                        let first = segments[0].clone();
                        map.insert(first.clone(), vec![first]);
                    }
                }
            }
        }
        NodeKind::ImportFrom => {
            let module = node.label.as_deref().unwrap_or("");
            let mut base: Vec<String> = Vec::new();
            if module.starts_with('.') {
                base.push(".".to_string());
            }
            base.extend(module.split('.').filter(|s| !s.is_empty()).map(str::to_string));
            for binding in &node.children {
                let Some(name) = binding.label.as_deref() else { continue };
                let mut path = base.clone();
                path.push(name.to_string());
                let bound = binding
                    .children
                    .first()
                    .and_then(|a| a.label.clone())
                    .unwrap_or_else(|| name.to_string());
                map.insert(bound, path);
            }
        }
        _ => {}
    });
    map
}

// ---------------------------------------------------------------------------
// node inspection helpers
// ---------------------------------------------------------------------------

/// The `a.b.c` chain of a callee, base first. Breaks (returns None) if the
/// chain passes through anything but names and attribute accesses.
fn attr_chain(node: &SyntaxNode) -> Option<Vec<&str>> {
    match node.kind {
        NodeKind::Name => Some(vec![node.label.as_deref()?]),
        NodeKind::Attribute => {
            let mut chain = attr_chain(node.children.first()?)?;
            chain.push(node.label.as_deref()?);
            Some(chain)
        }
        _ => None,
    }
}

/// The callee chain with its first segment resolved through import aliases.
fn resolved_callee(call: &SyntaxNode, aliases: &AliasMap) -> Option<Vec<String>> {
    let chain = attr_chain(call.children.first()?)?;
    let mut resolved: Vec<String> = match aliases.get(chain[0]) {
        Some(target) => target.clone(),
        None => vec![chain[0].to_string()],
    };
    resolved.extend(chain[1..].iter().map(|s| s.to_string()));
    Some(resolved)
}

/// The last identifier of the callee, chain or no chain: `execute` for both
/// `cursor.execute(...)` and `conn.cursor().execute(...)`.
fn terminal_callee_name(call: &SyntaxNode) -> Option<&str> {
    let callee = call.children.first()?;
    match callee.kind {
        NodeKind::Name | NodeKind::Attribute => callee.label.as_deref(),
        _ => None,
    }
}

fn call_args(call: &SyntaxNode) -> &[SyntaxNode] {
    if call.children.is_empty() {
        &[]
    } else {
        &call.children[1..]
    }
}

fn kwarg<'a>(call: &'a SyntaxNode, name: &str) -> Option<&'a SyntaxNode> {
    call_args(call)
        .iter()
        .find(|a| a.kind == NodeKind::KeywordArg && a.label.as_deref() == Some(name))
        .and_then(|a| a.children.first())
}

fn first_positional(call: &SyntaxNode) -> Option<&SyntaxNode> {
    call_args(call).iter().find(|a| {
        a.kind != NodeKind::KeywordArg
            && !(a.kind == NodeKind::Other && a.label.as_deref() == Some("star"))
    })
}

/// Conservative constant folding: literals, True/False/None, and operators
/// or containers built purely from constants.
pub(crate) fn is_constant(node: &SyntaxNode) -> bool {
    match node.kind {
        NodeKind::StringConst | NodeKind::NumberConst => true,
        NodeKind::Name => {
            matches!(node.label.as_deref(), Some("True") | Some("False") | Some("None"))
        }
        NodeKind::UnaryOp | NodeKind::BinOp => node.children.iter().all(is_constant),
        NodeKind::Other => match node.label.as_deref() {
            Some("tuple") | Some("list") | Some("set") | Some("dict") => {
                node.children.iter().all(is_constant)
            }
            _ => false,
        },
        _ => false,
    }
}

/// String-literal-shaped: a plain string constant or an f-string, including
/// the merged adjacent-literal forms.
fn is_string_literal(node: &SyntaxNode) -> bool {
    matches!(node.kind, NodeKind::StringConst | NodeKind::JoinedString)
}

/// True when a string constant holds no characters between its quotes.
fn string_const_is_empty(node: &SyntaxNode) -> bool {
    if node.kind != NodeKind::StringConst {
        return false;
    }
    match &node.label {
        Some(raw) => super::parser::string_body(raw).is_empty(),
        None => node
            .children
            .iter()
            .all(|part| part.label.as_deref().is_some_and(|raw| super::parser::string_body(raw).is_empty())),
    }
}

// ---------------------------------------------------------------------------
// the checkers
// ---------------------------------------------------------------------------

pub fn node_fires(rule_id: &str, node: &SyntaxNode, aliases: &AliasMap) -> bool {
    match rule_id {
        "WEAK-HASH" => weak_hash(node, aliases),
        "HARDCODED-CRED" => hardcoded_cred(node),
        "NO-TIMEOUT" => no_timeout(node, aliases),
        "SQL-INJECT" => sql_inject(node),
        "EVAL-USE" => eval_use(node),
        "UNSAFE-DESERIAL" => unsafe_deserial(node, aliases),
        "SHELL-INJECT" => shell_inject(node, aliases),
        _ => false,
    }
}

fn weak_hash(node: &SyntaxNode, aliases: &AliasMap) -> bool {
    if node.kind != NodeKind::Call {
        return false;
    }
    match resolved_callee(node, aliases) {
        Some(path) => path.len() == 2 && path[0] == "hashlib" && (path[1] == "md5" || path[1] == "sha1"),
        None => false,
    }
}

const CRED_NAMES: [&str; 6] = ["password", "passwd", "pwd", "secret", "token", "api_key"];

fn is_cred_name(name: &str) -> bool {
    CRED_NAMES.iter().any(|c| name.eq_ignore_ascii_case(c))
}

fn hardcoded_cred(node: &SyntaxNode) -> bool {
    match node.kind {
        NodeKind::Assign => {
            let Some((value, targets)) = node.children.split_last() else { return false };
            if !(value.kind == NodeKind::StringConst && !string_const_is_empty(value)) {
                return false;
            }
            targets.iter().any(|t| {
                matches!(t.kind, NodeKind::Name | NodeKind::Attribute)
                    && t.label.as_deref().is_some_and(is_cred_name)
            })
        }
        NodeKind::KeywordArg => {
            let named = node.label.as_deref().is_some_and(is_cred_name);
            named
                && node.children.first().is_some_and(|v| {
                    v.kind == NodeKind::StringConst && !string_const_is_empty(v)
                })
        }
        _ => false,
    }
}

const TIMEOUT_METHODS: [&str; 6] = ["get", "post", "put", "delete", "head", "patch"];

fn no_timeout(node: &SyntaxNode, aliases: &AliasMap) -> bool {
    if node.kind != NodeKind::Call {
        return false;
    }
    let Some(path) = resolved_callee(node, aliases) else { return false };
    path.len() == 2
        && path[0] == "requests"
        && TIMEOUT_METHODS.contains(&path[1].as_str())
        && kwarg(node, "timeout").is_none()
}

fn sql_inject(node: &SyntaxNode) -> bool {
    if node.kind != NodeKind::Call {
        return false;
    }
    match terminal_callee_name(node) {
        Some("execute") | Some("executemany") => {}
        _ => return false,
    }
    first_positional(node).is_some_and(query_is_dynamic)
}

fn query_is_dynamic(query: &SyntaxNode) -> bool {
    match query.kind {
        // An f-string node only exists when it has a real interpolation.
        NodeKind::JoinedString => true,
        NodeKind::BinOp => match query.label.as_deref() {
            Some("+") => {
                let mut parts = Vec::new();
                flatten_concat(query, &mut parts);
                parts.iter().any(|p| is_string_literal(p)) && parts.iter().any(|p| !is_constant(p))
            }
            Some("%") => {
                is_string_literal(&query.children[0]) && !is_constant(&query.children[1])
            }
            _ => false,
        },
        NodeKind::Call => {
            let Some(callee) = query.children.first() else { return false };
            if callee.kind != NodeKind::Attribute || callee.label.as_deref() != Some("format") {
                return false;
            }
            let Some(base) = callee.children.first() else { return false };
            if !is_string_literal(base) {
                return false;
            }
            call_args(query).iter().any(|arg| match arg.kind {
                NodeKind::KeywordArg => arg.children.first().is_some_and(|v| !is_constant(v)),
                NodeKind::Other if arg.label.as_deref() == Some("star") => true,
                _ => !is_constant(arg),
            })
        }
        _ => false,
    }
}

fn flatten_concat<'a>(node: &'a SyntaxNode, out: &mut Vec<&'a SyntaxNode>) {
    if node.kind == NodeKind::BinOp && node.label.as_deref() == Some("+") {
        for child in &node.children {
            flatten_concat(child, out);
        }
    } else {
        out.push(node);
    }
}

fn eval_use(node: &SyntaxNode) -> bool {
    if node.kind != NodeKind::Call {
        return false;
    }
    let Some(callee) = node.children.first() else { return false };
    callee.kind == NodeKind::Name
        && matches!(callee.label.as_deref(), Some("eval") | Some("exec"))
}

fn unsafe_deserial(node: &SyntaxNode, aliases: &AliasMap) -> bool {
    if node.kind != NodeKind::Call {
        return false;
    }
    let Some(path) = resolved_callee(node, aliases) else { return false };
    if path.len() != 2 {
        return false;
    }
    match (path[0].as_str(), path[1].as_str()) {
        ("pickle", "load") | ("pickle", "loads") | ("marshal", "load") | ("marshal", "loads") => {
            true
        }
        ("yaml", "load") => match kwarg(node, "Loader") {
            None => true,
            Some(loader) => {
                let name = match loader.kind {
                    NodeKind::Name | NodeKind::Attribute => loader.label.as_deref(),
                    _ => None,
                };
                !matches!(name, Some("SafeLoader") | Some("CSafeLoader"))
            }
        },
        _ => false,
    }
}

fn shell_inject(node: &SyntaxNode, aliases: &AliasMap) -> bool {
    if node.kind != NodeKind::Call {
        return false;
    }
    let Some(path) = resolved_callee(node, aliases) else { return false };
    if path.len() == 2 && path[0] == "subprocess" {
        if let Some(shell) = kwarg(node, "shell") {
            return shell.kind == NodeKind::Name && shell.label.as_deref() == Some("True");
        }
        return false;
    }
    if path.len() == 2 && path[0] == "os" && (path[1] == "system" || path[1] == "popen") {
        return first_positional(node).is_some_and(|arg| !is_constant(arg));
    }
    false
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
