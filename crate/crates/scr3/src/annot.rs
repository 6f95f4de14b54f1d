//! Annotated-source parsing and the sac annotation-correctness check.
//!
//! The parser accepts a structured C-like subset: one entry function
//! (default `main`), if/else, while, for, switch, blocks, and opaque
//! statements. Annotation lines start with `@@`, either bare or inside
//! `//` / `/* ... */` comments. Assignments and branch tests of code
//! variables are detected textually; everything else is opaque.

use std::collections::BTreeSet;

use crate::diag::{Diagnostic, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnKind {
    Initial,
    Update,
    Assert,
}

/// One conjunct of an annotation payload. `CC=Inactive` parses as a mode
/// equality; `Ignition` / `~Ignition` / `x=true` as boolean facts. Names
/// resolve against the specification later, in the analyses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnnAtom {
    Bool { var: String, value: bool },
    ModeEq { class: String, mode: String },
}

impl AnnAtom {
    /// The requirements-side name the atom mentions.
    pub fn name(&self) -> &str {
        match self {
            AnnAtom::Bool { var, .. } => var,
            AnnAtom::ModeEq { class, .. } => class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub kind: AnnKind,
    pub atoms: Vec<AnnAtom>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Entry,
    Exit,
    /// Opaque statement text.
    Stmt(String),
    /// Simple assignment `var = ...`.
    Assign { var: String, text: String },
    /// Two-way branch; `vars` are the identifiers tested by the condition.
    Branch { vars: Vec<String>, text: String },
    Join,
    Annot(Annotation),
}

#[derive(Debug, Clone)]
pub struct CfgNode {
    pub kind: NodeKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub struct Cfg {
    pub nodes: Vec<CfgNode>,
    pub succ: Vec<Vec<usize>>,
    pub entry: usize,
    pub exit: usize,
}

#[derive(Debug, Clone)]
pub struct AnnotatedProgram {
    pub cfg: Cfg,
}

impl AnnotatedProgram {
    pub fn annotations(&self) -> impl Iterator<Item = (usize, &Annotation)> {
        self.cfg.nodes.iter().enumerate().filter_map(|(i, n)| {
            if let NodeKind::Annot(a) = &n.kind {
                Some((i, a))
            } else {
                None
            }
        })
    }
}

/// All acyclic entry-to-exit paths, or None when the graph has a cycle or
/// more than `limit` paths. Test oracle for loop-free programs.
pub fn enumerate_paths(cfg: &Cfg, limit: usize) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut path = vec![cfg.entry];
    let mut on_path = vec![false; cfg.nodes.len()];
    on_path[cfg.entry] = true;
    fn go(
        cfg: &Cfg,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) -> bool {
        let cur = *path.last().unwrap();
        if cur == cfg.exit {
            if out.len() >= limit {
                return false;
            }
            out.push(path.clone());
            return true;
        }
        for &s in &cfg.succ[cur] {
            if on_path[s] {
                return false; // cycle
            }
            path.push(s);
            on_path[s] = true;
            let ok = go(cfg, path, on_path, out, limit);
            on_path[s] = false;
            path.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    if go(cfg, &mut path, &mut on_path, &mut out, limit) {
        Some(out)
    } else {
        None
    }
}

const C_KEYWORDS: &[&str] = &[
    "if", "else", "while", "for", "switch", "case", "default", "return", "break", "continue",
    "int", "bool", "char", "long", "short", "unsigned", "signed", "void", "true", "false",
    "struct", "enum", "union", "const", "static", "sizeof", "do", "goto", "typedef", "NULL",
];

fn identifiers(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let id = &text[start..i];
            if !C_KEYWORDS.contains(&id) && !out.iter().any(|o| o == id) {
                out.push(id.to_string());
            }
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    out
}

struct Parser<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: u32,
    col: u32,
    file: String,
    nodes: Vec<CfgNode>,
    succ: Vec<Vec<usize>>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, file: &str) -> Self {
        Parser {
            src: text.as_bytes(),
            text,
            pos: 0,
            line: 1,
            col: 1,
            file: file.to_string(),
            nodes: Vec::new(),
            succ: Vec::new(),
        }
    }

    fn span(&self) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            line: self.line,
            column: self.col,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error("annot-parse", self.span(), msg)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn at(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at(s) {
            for _ in 0..s.len() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    /// True when the cursor sits on an annotation: `@@`, `// @@` or `/* @@`.
    fn at_annotation(&self) -> bool {
        let rest = &self.text[self.pos..];
        if rest.starts_with("@@") {
            return true;
        }
        for open in ["//", "/*"] {
            if let Some(tail) = rest.strip_prefix(open) {
                return tail.trim_start_matches([' ', '\t']).starts_with("@@");
            }
        }
        false
    }

    /// Skips whitespace and comments that are not annotations.
    fn skip_blanks(&mut self) {
        loop {
            self.skip_ws();
            if self.at_annotation() {
                return;
            }
            if self.at("//") {
                while !matches!(self.peek(), None | Some(b'\n')) {
                    self.bump();
                }
            } else if self.at("/*") {
                self.bump();
                self.bump();
                while !self.at("*/") && self.peek().is_some() {
                    self.bump();
                }
                self.eat("*/");
            } else {
                return;
            }
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        if !self.at(kw) {
            return false;
        }
        match self.src.get(self.pos + kw.len()) {
            Some(c) => !c.is_ascii_alphanumeric() && *c != b'_',
            None => true,
        }
    }

    fn read_ident(&mut self) -> Option<String> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {}
            _ => return None,
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        Some(self.text[start..self.pos].to_string())
    }

    /// Reads a balanced `( ... )` group, returning the inner text.
    fn paren_text(&mut self) -> Result<String, Diagnostic> {
        self.skip_blanks();
        if self.peek() != Some(b'(') {
            return Err(self.err("expected `(`"));
        }
        self.bump();
        let start = self.pos;
        let mut depth = 1;
        loop {
            match self.peek() {
                None => return Err(self.err("unbalanced parentheses")),
                Some(b'(') => depth += 1,
                Some(b')') => {
                    depth -= 1;
                    if depth == 0 {
                        let inner = self.text[start..self.pos].to_string();
                        self.bump();
                        return Ok(inner);
                    }
                }
                _ => {}
            }
            self.bump();
        }
    }

    // --- CFG building -----------------------------------------------------

    fn add(&mut self, kind: NodeKind, span: SourceSpan) -> usize {
        self.nodes.push(CfgNode { kind, span });
        self.succ.push(Vec::new());
        self.nodes.len() - 1
    }

    fn link(&mut self, from: usize, to: usize) {
        self.succ[from].push(to);
    }

    fn append(&mut self, frontier: &mut Vec<usize>, kind: NodeKind, span: SourceSpan) -> usize {
        let id = self.add(kind, span);
        for &t in frontier.iter() {
            self.link(t, id);
        }
        *frontier = vec![id];
        id
    }

    // --- statements -------------------------------------------------------

    fn parse_annotation(&mut self) -> Result<Annotation, Diagnostic> {
        let span = self.span();
        let payload: String = if self.eat("@@") {
            // bare form: the payload ends at the first `;` (so code may
            // follow on the same line) or at end of line
            let start = self.pos;
            while !matches!(self.peek(), None | Some(b'\n') | Some(b';')) {
                self.bump();
            }
            let text = self.text[start..self.pos].to_string();
            self.eat(";");
            text
        } else if self.eat("//") {
            self.skip_inline_ws();
            if !self.eat("@@") {
                return Err(self.err("expected `@@` in annotation comment"));
            }
            self.take_line()
        } else if self.eat("/*") {
            self.skip_inline_ws();
            if !self.eat("@@") {
                return Err(self.err("expected `@@` in annotation comment"));
            }
            let start = self.pos;
            while !self.at("*/") {
                if self.bump().is_none() {
                    return Err(self.err("unterminated annotation comment"));
                }
            }
            let text = self.text[start..self.pos].to_string();
            self.eat("*/");
            text
        } else {
            return Err(self.err("expected annotation"));
        };
        parse_annotation_payload(&payload, span)
    }

    fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(b' ') | Some(b'\t')) {
            self.bump();
        }
    }

    fn take_line(&mut self) -> String {
        let start = self.pos;
        while !matches!(self.peek(), None | Some(b'\n')) {
            self.bump();
        }
        self.text[start..self.pos].to_string()
    }

    fn parse_stmt(&mut self, frontier: &mut Vec<usize>) -> Result<(), Diagnostic> {
        self.skip_blanks();
        if self.at_annotation() {
            let span = self.span();
            let ann = self.parse_annotation()?;
            self.append(frontier, NodeKind::Annot(ann), span);
            return Ok(());
        }
        if self.peek() == Some(b'{') {
            return self.parse_block(frontier);
        }
        if self.at_kw("if") {
            return self.parse_if(frontier);
        }
        if self.at_kw("while") {
            return self.parse_while(frontier);
        }
        if self.at_kw("for") {
            return self.parse_for(frontier);
        }
        if self.at_kw("switch") {
            return self.parse_switch(frontier);
        }
        // opaque statement or simple assignment, up to `;`
        let span = self.span();
        let text = self.stmt_text()?;
        if text.is_empty() {
            return Ok(());
        }
        let kind = match classify_assign(&text) {
            Some(var) => NodeKind::Assign { var, text },
            None => NodeKind::Stmt(text),
        };
        self.append(frontier, kind, span);
        Ok(())
    }

    fn stmt_text(&mut self) -> Result<String, Diagnostic> {
        let start = self.pos;
        let mut depth = 0i32;
        loop {
            match self.peek() {
                None => return Err(self.err("unterminated statement")),
                Some(b';') if depth == 0 => {
                    let text = self.text[start..self.pos].trim().to_string();
                    self.bump();
                    return Ok(text);
                }
                Some(b'(') | Some(b'[') => depth += 1,
                Some(b')') | Some(b']') => depth -= 1,
                Some(b'}') if depth == 0 => {
                    return Ok(self.text[start..self.pos].trim().to_string());
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn parse_block(&mut self, frontier: &mut Vec<usize>) -> Result<(), Diagnostic> {
        if self.peek() != Some(b'{') {
            return Err(self.err("expected `{`"));
        }
        self.bump();
        loop {
            self.skip_blanks();
            match self.peek() {
                None => return Err(self.err("unbalanced braces")),
                Some(b'}') => {
                    self.bump();
                    return Ok(());
                }
                _ => self.parse_stmt(frontier)?,
            }
        }
    }

    fn parse_if(&mut self, frontier: &mut Vec<usize>) -> Result<(), Diagnostic> {
        let span = self.span();
        self.eat("if");
        let cond = self.paren_text()?;
        let branch = self.append(
            frontier,
            NodeKind::Branch {
                vars: identifiers(&cond),
                text: cond,
            },
            span,
        );
        let mut then_tails = vec![branch];
        self.skip_blanks();
        self.parse_stmt(&mut then_tails)?;
        let mut else_tails = vec![branch];
        self.skip_blanks();
        if self.at_kw("else") {
            self.eat("else");
            self.skip_blanks();
            self.parse_stmt(&mut else_tails)?;
        }
        let join_span = self.span();
        let join = self.add(NodeKind::Join, join_span);
        for t in then_tails.into_iter().chain(else_tails) {
            self.link(t, join);
        }
        *frontier = vec![join];
        Ok(())
    }

    fn parse_while(&mut self, frontier: &mut Vec<usize>) -> Result<(), Diagnostic> {
        let span = self.span();
        self.eat("while");
        let cond = self.paren_text()?;
        let head = self.append(frontier, NodeKind::Join, span.clone());
        let branch = self.append(
            frontier,
            NodeKind::Branch {
                vars: identifiers(&cond),
                text: cond,
            },
            span,
        );
        let mut body_tails = vec![branch];
        self.skip_blanks();
        self.parse_stmt(&mut body_tails)?;
        for t in body_tails {
            self.link(t, head);
        }
        *frontier = vec![branch];
        Ok(())
    }

    fn parse_for(&mut self, frontier: &mut Vec<usize>) -> Result<(), Diagnostic> {
        let span = self.span();
        self.eat("for");
        let header = self.paren_text()?;
        let mut parts = header.splitn(3, ';');
        let init = parts.next().unwrap_or("").trim().to_string();
        let cond = parts.next().unwrap_or("").trim().to_string();
        let step = parts.next().unwrap_or("").trim().to_string();
        if !init.is_empty() {
            let kind = match classify_assign(&init) {
                Some(var) => NodeKind::Assign {
                    var,
                    text: init.clone(),
                },
                None => NodeKind::Stmt(init.clone()),
            };
            self.append(frontier, kind, span.clone());
        }
        let head = self.append(frontier, NodeKind::Join, span.clone());
        let branch = self.append(
            frontier,
            NodeKind::Branch {
                vars: identifiers(&cond),
                text: cond,
            },
            span.clone(),
        );
        let mut body_tails = vec![branch];
        self.skip_blanks();
        self.parse_stmt(&mut body_tails)?;
        if !step.is_empty() {
            let kind = match classify_assign(&step) {
                Some(var) => NodeKind::Assign {
                    var,
                    text: step.clone(),
                },
                None => NodeKind::Stmt(step.clone()),
            };
            let id = self.add(kind, span);
            for t in &body_tails {
                self.link(*t, id);
            }
            body_tails = vec![id];
        }
        for t in body_tails {
            self.link(t, head);
        }
        *frontier = vec![branch];
        Ok(())
    }

    fn parse_switch(&mut self, frontier: &mut Vec<usize>) -> Result<(), Diagnostic> {
        let span = self.span();
        self.eat("switch");
        let cond = self.paren_text()?;
        let vars = identifiers(&cond);
        self.skip_blanks();
        if self.peek() != Some(b'{') {
            return Err(self.err("expected `{` after switch"));
        }
        self.bump();
        // a k-arm switch becomes a cascade of two-way branches on the same
        // condition text; the default arm takes the last else edge.
        let mut chain = std::mem::take(frontier);
        let mut arm_tails: Vec<usize> = Vec::new();
        loop {
            self.skip_blanks();
            match self.peek() {
                None => return Err(self.err("unbalanced braces in switch")),
                Some(b'}') => {
                    self.bump();
                    break;
                }
                _ => {}
            }
            let mut arm = if self.at_kw("case") {
                self.eat("case");
                while !matches!(self.peek(), None | Some(b':')) {
                    self.bump();
                }
                if !self.eat(":") {
                    return Err(self.err("expected `:` after case label"));
                }
                let branch = self.add(
                    NodeKind::Branch {
                        vars: vars.clone(),
                        text: cond.clone(),
                    },
                    span.clone(),
                );
                for &t in &chain {
                    self.link(t, branch);
                }
                chain = vec![branch];
                vec![branch]
            } else if self.at_kw("default") {
                self.eat("default");
                if !self.eat(":") {
                    return Err(self.err("expected `:` after default label"));
                }
                std::mem::take(&mut chain)
            } else {
                return Err(self.err("expected `case` or `default` in switch"));
            };
            loop {
                self.skip_blanks();
                if self.at_kw("case") || self.at_kw("default") || matches!(self.peek(), None | Some(b'}')) {
                    break;
                }
                self.parse_stmt(&mut arm)?;
            }
            arm_tails.extend(arm);
        }
        let join_span = self.span();
        let join = self.add(NodeKind::Join, join_span);
        for t in arm_tails.into_iter().chain(chain) {
            self.link(t, join);
        }
        *frontier = vec![join];
        Ok(())
    }

    /// Scans forward to the entry function's opening brace.
    fn find_entry(&mut self, entry: &str) -> Result<(), Diagnostic> {
        loop {
            self.skip_blanks();
            if self.at_annotation() {
                // annotations outside the entry function are ignored here
                self.parse_annotation()?;
                continue;
            }
            match self.peek() {
                None => {
                    return Err(Diagnostic::error(
                        "no-entry-function",
                        self.span(),
                        format!("no entry function found (expected `{entry}`)"),
                    ))
                }
                Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                    let id = self.read_ident().unwrap();
                    if id == entry {
                        self.skip_blanks();
                        if self.peek() == Some(b'(') {
                            self.paren_text()?;
                            self.skip_blanks();
                            if self.peek() == Some(b'{') {
                                return Ok(());
                            }
                        }
                    }
                }
                _ => {
                    self.bump();
                }
            }
        }
    }
}

fn classify_assign(text: &str) -> Option<String> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
        i += 1;
    }
    if i == 0 || !(bytes[0].is_ascii_alphabetic() || bytes[0] == b'_') {
        return None;
    }
    let var = &text[..i];
    if C_KEYWORDS.contains(&var) {
        return None;
    }
    let rest = text[i..].trim_start();
    if rest.starts_with('=') && !rest.starts_with("==") {
        Some(var.to_string())
    } else {
        None
    }
}

fn parse_annotation_payload(payload: &str, span: SourceSpan) -> Result<Annotation, Diagnostic> {
    let text = payload.trim().trim_end_matches(';').trim();
    let err = |msg: String| Diagnostic::error("bad-annotation", span.clone(), msg);
    let (kw, rest) = match text.split_once(char::is_whitespace) {
        Some((k, r)) => (k, r.trim()),
        None => (text, ""),
    };
    let kind = match kw {
        "Initial" => AnnKind::Initial,
        "Update" => AnnKind::Update,
        "Assert" => AnnKind::Assert,
        other => return Err(err(format!("unknown annotation kind `{other}`"))),
    };
    let mut atoms = Vec::new();
    if !rest.is_empty() {
        for piece in rest.split(['&', ',']) {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(err("empty conjunct in annotation payload".into()));
            }
            let (negated, body) = match piece.strip_prefix('~') {
                Some(b) => (true, b.trim()),
                None => (false, piece),
            };
            let ok_ident =
                |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if let Some((lhs, rhs)) = body.split_once('=') {
                let (lhs, rhs) = (lhs.trim(), rhs.trim());
                if !ok_ident(lhs) || !ok_ident(rhs) {
                    return Err(err(format!("malformed annotation atom `{piece}`")));
                }
                if negated {
                    return Err(err(format!("negated equality `{piece}` is not supported")));
                }
                match rhs {
                    "true" => atoms.push(AnnAtom::Bool {
                        var: lhs.to_string(),
                        value: true,
                    }),
                    "false" => atoms.push(AnnAtom::Bool {
                        var: lhs.to_string(),
                        value: false,
                    }),
                    _ => atoms.push(AnnAtom::ModeEq {
                        class: lhs.to_string(),
                        mode: rhs.to_string(),
                    }),
                }
            } else {
                if !ok_ident(body) {
                    return Err(err(format!("malformed annotation atom `{piece}`")));
                }
                atoms.push(AnnAtom::Bool {
                    var: body.to_string(),
                    value: !negated,
                });
            }
        }
    }
    if atoms.is_empty() {
        return Err(err("annotation payload is empty".into()));
    }
    Ok(Annotation { kind, atoms, span })
}

/// Parses annotated source, building the CFG of the entry function.
pub fn parse_annotated_source(text: &str, file: &str) -> Result<AnnotatedProgram, Diagnostic> {
    parse_annotated_source_with_entry(text, file, "main")
}

pub fn parse_annotated_source_with_entry(
    text: &str,
    file: &str,
    entry: &str,
) -> Result<AnnotatedProgram, Diagnostic> {
    let mut p = Parser::new(text, file);
    p.find_entry(entry)?;
    let entry_span = p.span();
    let entry_id = p.add(NodeKind::Entry, entry_span);
    let mut frontier = vec![entry_id];
    p.parse_block(&mut frontier)?;
    let exit_span = p.span();
    let exit_id = p.add(NodeKind::Exit, exit_span);
    for t in frontier {
        p.link(t, exit_id);
    }
    Ok(AnnotatedProgram {
        cfg: Cfg {
            nodes: p.nodes,
            succ: p.succ,
            entry: entry_id,
            exit: exit_id,
        },
    })
}

// ---------------------------------------------------------------------------
// Correspondences

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorEntry {
    pub spec_vars: Vec<String>,
    pub code_vars: Vec<String>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Correspondences {
    pub entries: Vec<CorEntry>,
}

impl Correspondences {
    pub fn code_vars(&self) -> BTreeSet<&str> {
        self.entries
            .iter()
            .flat_map(|e| e.code_vars.iter().map(|s| s.as_str()))
            .collect()
    }

    /// Requirements-side names corresponding to a code variable.
    pub fn spec_for_code(&self, code: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .entries
            .iter()
            .filter(|e| e.code_vars.iter().any(|c| c == code))
            .flat_map(|e| e.spec_vars.iter().map(|s| s.as_str()))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Checks every requirements-side name against the specification.
    pub fn validate(&self, spec: &crate::ast::Spec) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for e in &self.entries {
            for v in &e.spec_vars {
                let known = spec.is_monitored(v)
                    || spec.is_controlled(v)
                    || spec.mode_class(v).is_some();
                if !known {
                    out.push(Diagnostic::error(
                        "undeclared-name",
                        e.span.clone(),
                        format!("correspondence names undeclared requirements variable `{v}`"),
                    ));
                }
            }
        }
        out
    }
}

/// Parses the correspondences surface syntax: an optional
/// `correspondences:` header, then `{a, b} -> {x, y};` entries.
pub fn parse_correspondences(text: &str, file: &str) -> Result<Correspondences, Diagnostic> {
    let mut p = Parser::new(text, file);
    p.skip_blanks();
    if p.at("correspondences") {
        p.eat("correspondences");
        p.skip_blanks();
        if !p.eat(":") {
            return Err(p.err("expected `:` after `correspondences`"));
        }
    }
    let mut entries = Vec::new();
    loop {
        p.skip_blanks();
        if p.peek().is_none() {
            break;
        }
        let span = p.span();
        let spec_vars = parse_brace_list(&mut p)?;
        p.skip_blanks();
        if !p.eat("->") {
            return Err(p.err("expected `->` in correspondence"));
        }
        let code_vars = parse_brace_list(&mut p)?;
        p.skip_blanks();
        if !p.eat(";") {
            return Err(p.err("expected `;` after correspondence"));
        }
        let mut lhs = spec_vars.clone();
        lhs.sort();
        for prev in &entries {
            let mut other: Vec<String> = {
                let e: &CorEntry = prev;
                e.spec_vars.clone()
            };
            other.sort();
            if other == lhs {
                return Err(Diagnostic::error(
                    "duplicate-correspondence",
                    span,
                    format!("left-hand side {{{}}} appears twice", lhs.join(", ")),
                ));
            }
        }
        entries.push(CorEntry {
            spec_vars,
            code_vars,
            span,
        });
    }
    Ok(Correspondences { entries })
}

fn parse_brace_list(p: &mut Parser) -> Result<Vec<String>, Diagnostic> {
    p.skip_blanks();
    if !p.eat("{") {
        return Err(p.err("expected `{`"));
    }
    let mut out = Vec::new();
    loop {
        p.skip_blanks();
        match p.read_ident() {
            Some(id) => out.push(id),
            None => return Err(p.err("expected an identifier")),
        }
        p.skip_blanks();
        if p.eat(",") {
            continue;
        }
        if p.eat("}") {
            return Ok(out);
        }
        return Err(p.err("expected `,` or `}`"));
    }
}

// ---------------------------------------------------------------------------
// sac: annotation-correctness check

fn update_matches(ann: &Annotation, spec_names: &[&str]) -> bool {
    ann.kind == AnnKind::Update && ann.atoms.iter().any(|a| spec_names.contains(&a.name()))
}

fn assert_matches(ann: &Annotation, spec_names: &[&str]) -> bool {
    ann.kind == AnnKind::Assert && ann.atoms.iter().any(|a| spec_names.contains(&a.name()))
}

/// Checks that corresponded assignments are followed by a matching Update
/// and that branches testing corresponded variables open each non-empty arm
/// with a matching Assert. Presence-only: values are never compared to the
/// code, replicating the annotation check's documented blind spot.
pub fn sac_check(program: &AnnotatedProgram, cor: &Correspondences) -> Vec<Diagnostic> {
    let cfg = &program.cfg;
    let code_vars = cor.code_vars();
    let mut out = Vec::new();

    for (i, node) in cfg.nodes.iter().enumerate() {
        match &node.kind {
            NodeKind::Assign { var, .. } if code_vars.contains(var.as_str()) => {
                let spec_names = cor.spec_for_code(var);
                if !update_follows(cfg, i, &spec_names, &code_vars) {
                    out.push(Diagnostic::error(
                        "missing-update",
                        node.span.clone(),
                        format!(
                            "assignment to `{var}` is not followed by an Update of {}",
                            name_list(&spec_names)
                        ),
                    ));
                }
            }
            NodeKind::Branch { vars, .. } => {
                let tested: Vec<&String> =
                    vars.iter().filter(|v| code_vars.contains(v.as_str())).collect();
                if tested.is_empty() {
                    continue;
                }
                let mut spec_names: Vec<&str> =
                    tested.iter().flat_map(|v| cor.spec_for_code(v)).collect();
                spec_names.sort_unstable();
                spec_names.dedup();
                let mut seen_arms = BTreeSet::new();
                for &arm in &cfg.succ[i] {
                    if !seen_arms.insert(arm) {
                        continue;
                    }
                    if let ArmVerdict::Missing = arm_first_annotation(cfg, arm, &spec_names) {
                        out.push(Diagnostic::error(
                            "missing-assert",
                            node.span.clone(),
                            format!(
                                "branch on {} has an arm whose first annotation is not an Assert of {}",
                                tested
                                    .iter()
                                    .map(|v| format!("`{v}`"))
                                    .collect::<Vec<_>>()
                                    .join(", "),
                                name_list(&spec_names)
                            ),
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    out.sort_by(|a, b| {
        (a.span.line, a.span.column, &a.code).cmp(&(b.span.line, b.span.column, &b.code))
    });
    out
}

fn name_list(names: &[&str]) -> String {
    names
        .iter()
        .map(|n| format!("`{n}`"))
        .collect::<Vec<_>>()
        .join(" or ")
}

/// Rule (a): from an assignment, every path must hit a matching Update
/// before the next corresponded assignment, branch, join or exit.
fn update_follows(
    cfg: &Cfg,
    assign: usize,
    spec_names: &[&str],
    code_vars: &BTreeSet<&str>,
) -> bool {
    let mut stack: Vec<usize> = cfg.succ[assign].clone();
    let mut visited = BTreeSet::new();
    while let Some(n) = stack.pop() {
        if !visited.insert(n) {
            continue;
        }
        match &cfg.nodes[n].kind {
            NodeKind::Annot(a) if update_matches(a, spec_names) => {}
            NodeKind::Annot(_) | NodeKind::Stmt(_) => stack.extend(cfg.succ[n].iter().copied()),
            NodeKind::Assign { var, .. } if !code_vars.contains(var.as_str()) => {
                stack.extend(cfg.succ[n].iter().copied())
            }
            NodeKind::Assign { .. }
            | NodeKind::Branch { .. }
            | NodeKind::Join
            | NodeKind::Exit => return false,
            NodeKind::Entry => {}
        }
    }
    true
}

enum ArmVerdict {
    Ok,
    Missing,
}

/// Rule (b): walks one branch arm. Empty arms (no nodes before the join)
/// are exempt; otherwise the first annotation must be a matching Assert.
fn arm_first_annotation(cfg: &Cfg, start: usize, spec_names: &[&str]) -> ArmVerdict {
    let mut cur = start;
    let mut empty = true;
    loop {
        match &cfg.nodes[cur].kind {
            NodeKind::Annot(a) => {
                return if assert_matches(a, spec_names) {
                    ArmVerdict::Ok
                } else {
                    ArmVerdict::Missing
                };
            }
            NodeKind::Join | NodeKind::Exit | NodeKind::Branch { .. } | NodeKind::Entry => {
                return if empty {
                    ArmVerdict::Ok
                } else {
                    ArmVerdict::Missing
                };
            }
            NodeKind::Stmt(_) | NodeKind::Assign { .. } => {
                empty = false;
                match cfg.succ[cur].first() {
                    Some(&next) => cur = next,
                    None => return ArmVerdict::Missing,
                }
            }
        }
    }
}
