//! Heuristic symbol indexing and task-comment scanning for C-like sources.
//!
//! The indexer is not a parser. It blanks out comments and literals, then
//! tracks brace scopes over a token stream and classifies each statement
//! that ends in `{` or `;` at file scope or directly inside a class body.
//! Supported patterns:
//!
//! - `#define NAME ...` → [`SymbolKind::Macro`] (any position)
//! - `[typedef] [template<...>] class|struct NAME [: bases] {` at file scope
//!   → [`SymbolKind::Class`]
//! - `TYPE NAME(...) ... {` at file scope → [`SymbolKind::Function`];
//!   `Qual::NAME(...) {` is recorded as `NAME`
//! - `TYPE NAME(...) ... {` directly inside a class body (constructors and
//!   destructors need no type) → [`SymbolKind::Function`] with a container
//! - `TYPE NAME;`, `TYPE NAME = ...;`, `TYPE NAME[...]...;` at file scope →
//!   [`SymbolKind::GlobalVariable`]
//!
//! `namespace X {` and `extern "C" {` bodies count as file scope. Prototypes,
//! function pointers, forward declarations, enums and unions are skipped.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::crumbs::{Mode, NavTree, NodeKind};
use crate::lexer::{self, RegionKind};
use crate::workspace::{Document, LanguageHint};
use crate::Location;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Class,
    Function,
    GlobalVariable,
    Macro,
}

impl SymbolKind {
    pub fn name(self) -> &'static str {
        match self {
            SymbolKind::Class => "class",
            SymbolKind::Function => "function",
            SymbolKind::GlobalVariable => "variable",
            SymbolKind::Macro => "macro",
        }
    }

    fn node_kind(self) -> NodeKind {
        match self {
            SymbolKind::Class => NodeKind::Class,
            SymbolKind::Function => NodeKind::Function,
            SymbolKind::GlobalVariable => NodeKind::GlobalVariable,
            SymbolKind::Macro => NodeKind::Macro,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub kind: SymbolKind,
    pub name: String,
    /// Enclosing class, only for functions defined inside a class body.
    pub container: Option<String>,
    pub file: String,
    pub line: usize,
}

impl Symbol {
    pub fn location(&self) -> Location {
        Location::new(self.file.clone(), self.line)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{0}: not a C-like source")]
pub struct UnsupportedLanguage(pub String);

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Punct(char),
    Other,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
}

impl Token {
    fn ident(&self) -> Option<&str> {
        match &self.tok {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn is(&self, c: char) -> bool {
        self.tok == Tok::Punct(c)
    }

    fn is_word(&self, w: &str) -> bool {
        self.ident() == Some(w)
    }
}

const KEYWORDS: &[&str] = &[
    "alignas",
    "alignof",
    "asm",
    "auto",
    "bool",
    "break",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "constexpr",
    "continue",
    "decltype",
    "default",
    "delete",
    "do",
    "double",
    "else",
    "enum",
    "explicit",
    "extern",
    "false",
    "float",
    "for",
    "friend",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "mutable",
    "namespace",
    "new",
    "noexcept",
    "nullptr",
    "operator",
    "private",
    "protected",
    "public",
    "register",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "static_assert",
    "struct",
    "switch",
    "template",
    "this",
    "throw",
    "true",
    "try",
    "typedef",
    "typename",
    "union",
    "unsigned",
    "using",
    "virtual",
    "void",
    "volatile",
    "while",
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

/// Tokens of the code portion of each line, skipping preprocessor lines, and
/// the macros those lines define.
fn tokenize(doc: &Document) -> (Vec<Token>, Vec<(String, usize)>) {
    let regions = lexer::regions(&doc.lines);
    let mut tokens = Vec::new();
    let mut macros = Vec::new();
    let mut continued = false;
    for (idx, (line, regs)) in doc.lines.iter().zip(&regions).enumerate() {
        let lineno = idx + 1;
        let code = lexer::code_only(line, regs);
        let trimmed = code.trim();
        if continued || trimmed.starts_with('#') {
            if !continued {
                let directive = trimmed[1..].trim_start();
                if let Some(rest) = directive.strip_prefix("define") {
                    if rest.starts_with(char::is_whitespace) {
                        let name: String = rest
                            .trim_start()
                            .chars()
                            .take_while(|c| c.is_alphanumeric() || *c == '_')
                            .collect();
                        if !name.is_empty() {
                            macros.push((name, lineno));
                        }
                    }
                }
            }
            continued = trimmed.ends_with('\\');
            continue;
        }
        let mut chars = code.char_indices().peekable();
        while let Some((_, c)) = chars.next() {
            if c.is_alphabetic() || c == '_' {
                let mut word = c.to_string();
                while let Some(&(_, n)) = chars.peek() {
                    if n.is_alphanumeric() || n == '_' {
                        word.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    tok: Tok::Ident(word),
                    line: lineno,
                });
            } else if c.is_ascii_digit() {
                while let Some(&(_, n)) = chars.peek() {
                    if n.is_alphanumeric() || n == '.' || n == '\'' || n == '_' {
                        chars.next();
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    tok: Tok::Other,
                    line: lineno,
                });
            } else if !c.is_whitespace() {
                tokens.push(Token {
                    tok: Tok::Punct(c),
                    line: lineno,
                });
            }
        }
    }
    (tokens, macros)
}

#[derive(Clone, Debug, PartialEq)]
enum Scope {
    File,
    Class(String),
    Other,
}

/// Drops a leading `template <...>` clause.
fn strip_template(stmt: &[Token]) -> &[Token] {
    if stmt.first().is_some_and(|t| t.is_word("template")) && stmt.get(1).is_some_and(|t| t.is('<')) {
        let mut depth = 0i32;
        for (i, t) in stmt.iter().enumerate().skip(1) {
            if t.is('<') {
                depth += 1;
            } else if t.is('>') {
                depth -= 1;
                if depth == 0 {
                    return &stmt[i + 1..];
                }
            }
        }
    }
    stmt
}

/// Index of the first token matching `pred` outside parentheses/brackets.
fn find_top_level(stmt: &[Token], pred: impl Fn(&Token) -> bool) -> Option<usize> {
    let mut depth = 0i32;
    for (i, t) in stmt.iter().enumerate() {
        if depth == 0 && pred(t) {
            return Some(i);
        }
        if t.is('(') || t.is('[') {
            depth += 1;
        } else if t.is(')') || t.is(']') {
            depth -= 1;
        }
    }
    None
}

/// Start index of a qualified name ending at `name_idx` (`A::B::name`,
/// `~name`).
fn qualified_start(stmt: &[Token], name_idx: usize) -> (usize, bool) {
    let mut start = name_idx;
    if start > 0 && stmt[start - 1].is('~') {
        start -= 1;
    }
    let mut qualified = false;
    while start >= 3 && stmt[start - 1].is(':') && stmt[start - 2].is(':') && stmt[start - 3].ident().is_some() {
        start -= 3;
        qualified = true;
    }
    (start, qualified)
}

fn has_type_tokens(prefix: &[Token]) -> bool {
    prefix.iter().any(|t| match &t.tok {
        Tok::Ident(s) => !matches!(
            s.as_str(),
            "static" | "inline" | "extern" | "virtual" | "explicit" | "friend"
        ),
        Tok::Punct(c) => matches!(c, '*' | '&' | '>'),
        Tok::Other => false,
    })
}

type Found<'a> = Option<(SymbolKind, &'a Token, Option<String>)>;

/// Classifies a statement ending in `{`. Returns the symbol (if any) and the
/// scope the brace opens.
fn classify_block<'a>(stmt: &'a [Token], scope: &Scope) -> (Found<'a>, Scope) {
    let mut stmt = strip_template(stmt);
    if stmt.first().is_some_and(|t| t.is_word("typedef")) {
        stmt = &stmt[1..];
    }
    let Some(first) = stmt.first() else {
        return (None, Scope::Other);
    };
    if *scope == Scope::File {
        if first.is_word("namespace") {
            return (None, Scope::File);
        }
        if first.is_word("extern") && stmt[1..].iter().all(|t| t.tok == Tok::Other) {
            return (None, Scope::File);
        }
    }
    if first.is_word("class") || first.is_word("struct") {
        if *scope != Scope::File {
            return (None, Scope::Other);
        }
        let name = stmt.get(1).filter(|t| t.ident().is_some_and(|s| !is_keyword(s)));
        let tail_ok = match stmt.get(2) {
            None => true,
            Some(t) => t.is(':') || t.is_word("final"),
        };
        return match name {
            Some(n) if tail_ok => {
                let class = n.ident().unwrap().to_string();
                (Some((SymbolKind::Class, n, None)), Scope::Class(class))
            }
            _ => (None, Scope::Other),
        };
    }
    if first.is_word("enum") || first.is_word("union") {
        return (None, Scope::Other);
    }
    let eq = find_top_level(stmt, |t| t.is('='));
    let paren = find_top_level(stmt, |t| t.is('('));
    match (paren, eq) {
        (Some(p), eq) if eq.is_none_or(|e| p < e) => {
            let container = match scope {
                Scope::Class(c) => Some(c.clone()),
                _ => None,
            };
            if matches!(scope, Scope::Other) || p == 0 {
                return (None, Scope::Other);
            }
            let name_tok = &stmt[p - 1];
            let Some(name) = name_tok.ident().filter(|s| !is_keyword(s)) else {
                return (None, Scope::Other);
            };
            let (start, qualified) = qualified_start(stmt, p - 1);
            let destructor = stmt[start..p - 1].iter().any(|t| t.is('~'));
            let ctor = container.as_deref() == Some(name) || destructor;
            if has_type_tokens(&stmt[..start]) || qualified || ctor {
                (Some((SymbolKind::Function, name_tok, container)), Scope::Other)
            } else {
                (None, Scope::Other)
            }
        }
        (_, Some(e)) if *scope == Scope::File => (
            variable_at(stmt, e).map(|t| (SymbolKind::GlobalVariable, t, None)),
            Scope::Other,
        ),
        _ => (None, Scope::Other),
    }
}

/// The declarator name ending just before `end`, if preceded by a type.
fn variable_at(stmt: &[Token], end: usize) -> Option<&Token> {
    if end == 0 {
        return None;
    }
    let name = &stmt[end - 1];
    let ident = name.ident()?;
    if is_keyword(ident) {
        return None;
    }
    let prefix = &stmt[..end - 1];
    let class_key_only = prefix.len() == 1
        && prefix[0]
            .ident()
            .is_some_and(|s| matches!(s, "struct" | "class" | "union" | "enum"));
    if class_key_only || !has_type_tokens(prefix) {
        return None;
    }
    Some(name)
}

fn classify_declaration(stmt: &[Token]) -> Option<&Token> {
    let stmt = strip_template(stmt);
    let first = stmt.first()?;
    if [
        "typedef",
        "using",
        "friend",
        "static_assert",
        "return",
        "template",
        "namespace",
    ]
    .iter()
    .any(|w| first.is_word(w))
    {
        return None;
    }
    let end = find_top_level(stmt, |t| t.is('=') || t.is('[') || t.is(',') || t.is('(')).unwrap_or(stmt.len());
    if stmt.get(end).is_some_and(|t| t.is('(')) {
        return None;
    }
    if stmt[..end].iter().any(|t| t.is('(') || t.is(')')) {
        return None;
    }
    variable_at(stmt, end)
}

/// Indexes the symbols declared in one C-like document, ordered by line.
pub fn index_file(doc: &Document) -> Result<Vec<Symbol>, UnsupportedLanguage> {
    if doc.language_hint != LanguageHint::CLike {
        return Err(UnsupportedLanguage(doc.path.clone()));
    }
    let (tokens, macros) = tokenize(doc);
    let mut out: Vec<Symbol> = macros
        .into_iter()
        .map(|(name, line)| Symbol {
            kind: SymbolKind::Macro,
            name,
            container: None,
            file: doc.path.clone(),
            line,
        })
        .collect();
    let mut push = |kind: SymbolKind, tok: &Token, container: Option<String>| {
        out.push(Symbol {
            kind,
            name: tok.ident().unwrap_or_default().to_string(),
            container,
            file: doc.path.clone(),
            line: tok.line,
        });
    };

    let mut scopes = vec![Scope::File];
    let mut stmt: Vec<Token> = Vec::new();
    let mut parens = 0i32;
    for tok in tokens {
        let scope = scopes.last().cloned().unwrap_or(Scope::File);
        if scope == Scope::Other {
            if tok.is('{') {
                scopes.push(Scope::Other);
            } else if tok.is('}') {
                scopes.pop();
            }
            continue;
        }
        if tok.is('(') {
            parens += 1;
        } else if tok.is(')') {
            parens = (parens - 1).max(0);
        }
        if parens > 0 {
            stmt.push(tok);
            continue;
        }
        if tok.is('{') {
            let (sym, next) = classify_block(&stmt, &scope);
            if let Some((kind, t, container)) = sym {
                push(kind, t, container);
            }
            scopes.push(next);
            stmt.clear();
        } else if tok.is('}') {
            if scopes.len() > 1 {
                scopes.pop();
            }
            stmt.clear();
        } else if tok.is(';') {
            if scope == Scope::File {
                if let Some(t) = classify_declaration(&stmt) {
                    push(SymbolKind::GlobalVariable, t, None);
                }
            }
            stmt.clear();
        } else if tok.is(':')
            && scope != Scope::File
            && stmt.len() == 1
            && stmt[0]
                .ident()
                .is_some_and(|s| matches!(s, "public" | "private" | "protected"))
        {
            stmt.clear();
        } else {
            stmt.push(tok);
        }
    }
    out.sort_by_key(|s| s.line);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Task {
    pub keyword: String,
    /// Comment text after the keyword and any `:` or `-` separator, trimmed.
    pub text: String,
    pub file: String,
    pub line: usize,
    /// 1-based byte column of the keyword.
    pub column: usize,
}

impl Task {
    pub fn location(&self) -> Location {
        Location::new(self.file.clone(), self.line)
    }
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Finds whole-word, case-sensitive keyword occurrences inside comments,
/// ordered by (line, column).
pub fn scan_tasks(doc: &Document, keywords: &BTreeSet<String>) -> Vec<Task> {
    let regions = lexer::regions(&doc.lines);
    let mut out = Vec::new();
    for (idx, (line, regs)) in doc.lines.iter().zip(&regions).enumerate() {
        for r in regs.iter().filter(|r| r.kind == RegionKind::Comment) {
            let body = &line[r.start..r.end];
            let bytes = body.as_bytes();
            let mut found: Vec<(usize, &str)> = Vec::new();
            for kw in keywords {
                let mut from = 0;
                while let Some(pos) = body[from..].find(kw.as_str()) {
                    let at = from + pos;
                    let end = at + kw.len();
                    let left_ok = at == 0 || !is_word_byte(bytes[at - 1]);
                    let right_ok = end == bytes.len() || !is_word_byte(bytes[end]);
                    if left_ok && right_ok {
                        found.push((at, kw.as_str()));
                    }
                    from = at + kw.len().max(1);
                }
            }
            found.sort();
            for (at, kw) in found {
                out.push(Task {
                    keyword: kw.to_string(),
                    text: body[at + kw.len()..]
                        .trim_start()
                        .trim_start_matches([':', '-'])
                        .trim()
                        .to_string(),
                    file: doc.path.clone(),
                    line: idx + 1,
                    column: r.start + at + 1,
                });
            }
        }
    }
    out
}

/// Code-objects tree: one node per document, its top-level symbols below it,
/// and class member functions below their class. Documents are ordered by
/// path; symbols by line. Documents that are not C-like appear as leaves.
pub fn build_code_tree(documents: &[Document]) -> NavTree {
    let mut tree = NavTree::new(Mode::CodeObjects, "code");
    let mut docs: Vec<&Document> = documents.iter().collect();
    docs.sort_by(|a, b| a.path.cmp(&b.path));
    for doc in docs {
        let doc_node = tree.add_child(
            tree.root(),
            doc.path.clone(),
            NodeKind::Document,
            None,
            Some(doc.path.clone()),
        );
        let symbols = index_file(doc).unwrap_or_default();
        let mut classes = HashMap::new();
        for s in symbols {
            let parent = s
                .container
                .as_ref()
                .and_then(|c| classes.get(c).copied())
                .unwrap_or(doc_node);
            let id = tree.add_child(parent, s.name.clone(), s.kind.node_kind(), Some(s.location()), None);
            if s.kind == SymbolKind::Class {
                classes.insert(s.name.clone(), id);
            }
        }
    }
    tree
}

/// The innermost symbol declared at or above `line` in `doc_node`'s subtree.
pub fn symbol_at_line(tree: &NavTree, doc_node: crate::crumbs::NodeId, line: usize) -> Option<crate::crumbs::NodeId> {
    let mut best: Option<(usize, usize, crate::crumbs::NodeId)> = None;
    let mut stack: Vec<(crate::crumbs::NodeId, usize)> =
        tree.node(doc_node)?.children.iter().map(|c| (*c, 1)).collect();
    while let Some((id, depth)) = stack.pop() {
        let n = tree.node(id)?;
        if let Some(loc) = &n.location {
            if loc.line <= line && best.is_none_or(|(l, d, _)| (loc.line, depth) > (l, d)) {
                best = Some((loc.line, depth, id));
            }
        }
        stack.extend(n.children.iter().map(|c| (*c, depth + 1)));
    }
    best.map(|(_, _, id)| id)
}
