//! Parser and pretty-printer for the textual specification language.
//!
//! The concrete syntax is keyword-based and line-friendly:
//!
//! ```text
//! spec cruise
//! monitored Ignition "ignition is on"
//! assumption Running -->> Ignition
//! assumption one-of {speed_slow, speed_ok, speed_fast}
//! modeclass CC {
//!   modes Off, Inactive;
//!   initial Off when ~Ignition;
//!   from Off to Inactive on @T(Ignition);
//! }
//! controlled Light {
//!   initial false;
//!   in Inactive: true on @T(inmode);
//! }
//! goal "g" expect holds: AG(CC=Off -> ~Running)
//! ```
//!
//! `#` starts a comment running to end of line.

use std::fmt::Write as _;

use crate::ast::*;
use crate::ctl::Ctl;
use crate::diag::{Diagnostic, SourceSpan};

const KEYWORDS: &[&str] = &[
    "spec",
    "monitored",
    "assumption",
    "one-of",
    "at-most-one",
    "modeclass",
    "controlled",
    "goal",
    "modes",
    "initial",
    "when",
    "from",
    "to",
    "on",
    "in",
    "expect",
    "holds",
    "fails",
    "true",
    "false",
    "inmode",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Semi,
    Colon,
    Eq,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    AssumeArrow,
    AtT,
    AtF,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::LBrack => "`[`".to_string(),
            Tok::RBrack => "`]`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Tilde => "`~`".to_string(),
            Tok::Amp => "`&`".to_string(),
            Tok::Pipe => "`|`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::AssumeArrow => "`-->>`".to_string(),
            Tok::AtT => "`@T`".to_string(),
            Tok::AtF => "`@F`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: &'a str,
}

type Spanned = (Tok, SourceSpan);

impl<'a> Lexer<'a> {
    fn new(text: &str, file: &'a str) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            file,
        }
    }

    fn span(&self) -> SourceSpan {
        SourceSpan::new(self.file, self.line, self.col)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, Diagnostic> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c == '#' {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let span = self.span();
            let Some(c) = self.peek() else {
                out.push((Tok::Eof, span));
                return Ok(out);
            };
            let tok = match c {
                '{' => {
                    self.bump();
                    Tok::LBrace
                }
                '}' => {
                    self.bump();
                    Tok::RBrace
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '[' => {
                    self.bump();
                    Tok::LBrack
                }
                ']' => {
                    self.bump();
                    Tok::RBrack
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ':' => {
                    self.bump();
                    Tok::Colon
                }
                '=' => {
                    self.bump();
                    Tok::Eq
                }
                '~' => {
                    self.bump();
                    Tok::Tilde
                }
                '&' => {
                    self.bump();
                    Tok::Amp
                }
                '|' => {
                    self.bump();
                    Tok::Pipe
                }
                '@' => {
                    self.bump();
                    match self.bump() {
                        Some('T') => Tok::AtT,
                        Some('F') => Tok::AtF,
                        _ => {
                            return Err(Diagnostic::error(
                                "syntax",
                                span,
                                "expected `@T` or `@F`",
                            ))
                        }
                    }
                }
                '-' => {
                    self.bump();
                    if self.peek() == Some('-') {
                        self.bump();
                        if self.bump() == Some('>') && self.peek() == Some('>') {
                            self.bump();
                            Tok::AssumeArrow
                        } else {
                            return Err(Diagnostic::error("syntax", span, "expected `-->>`"));
                        }
                    } else if self.peek() == Some('>') {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(Diagnostic::error("syntax", span, "expected `->` or `-->>`"));
                    }
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some('"') => break,
                            Some('\\') => match self.bump() {
                                Some('n') => s.push('\n'),
                                Some(other) => s.push(other),
                                None => {
                                    return Err(Diagnostic::error(
                                        "syntax",
                                        span,
                                        "unterminated string literal",
                                    ))
                                }
                            },
                            Some(other) => s.push(other),
                            None => {
                                return Err(Diagnostic::error(
                                    "syntax",
                                    span,
                                    "unterminated string literal",
                                ))
                            }
                        }
                    }
                    Tok::Str(s)
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut s = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            s.push(c);
                            self.bump();
                        } else if c == '-' {
                            // `one-of` / `at-most-one` keywords
                            let rest: String = self.chars[self.pos..]
                                .iter()
                                .take_while(|c| c.is_ascii_alphanumeric() || **c == '-')
                                .collect();
                            let candidate = format!("{s}{rest}");
                            if KEYWORDS.contains(&candidate.as_str()) {
                                for _ in 0..rest.len() {
                                    self.bump();
                                }
                                s = candidate;
                            }
                            break;
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(s)
                }
                other => {
                    return Err(Diagnostic::error(
                        "syntax",
                        span,
                        format!("unexpected character `{other}`"),
                    ))
                }
            };
            out.push((tok, span));
        }
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_span(&self) -> SourceSpan {
        self.toks[self.pos].1.clone()
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error("syntax", self.peek_span(), msg.into())
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, Diagnostic> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.err(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            )))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<SourceSpan, Diagnostic> {
        match self.peek() {
            Tok::Ident(s) if s == kw => Ok(self.bump().1),
            other => Err(self.err(format!("expected `{kw}`, found {}", other.describe()))),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let span = self.bump().1;
                Ok((s, span))
            }
            other => Err(self.err(format!("expected {what}, found {}", other.describe()))),
        }
    }

    fn boolean(&mut self) -> Result<bool, Diagnostic> {
        if self.at_kw("true") {
            self.bump();
            Ok(true)
        } else if self.at_kw("false") {
            self.bump();
            Ok(false)
        } else {
            Err(self.err(format!(
                "expected `true` or `false`, found {}",
                self.peek().describe()
            )))
        }
    }

    fn literal(&mut self) -> Result<Literal, Diagnostic> {
        let value = if *self.peek() == Tok::Tilde {
            self.bump();
            false
        } else {
            true
        };
        let (var, _) = self.ident("a variable name")?;
        Ok(Literal { var, value })
    }

    /// `lit (& lit)*`, optionally wrapped in `[ ... ]`.
    fn conj(&mut self) -> Result<Conj, Diagnostic> {
        let bracketed = *self.peek() == Tok::LBrack;
        if bracketed {
            self.bump();
        }
        let mut out = Vec::new();
        if self.at_kw("true") {
            // `when true` denotes the empty guard
            self.bump();
        } else {
            out.push(self.literal()?);
            while *self.peek() == Tok::Amp {
                self.bump();
                out.push(self.literal()?);
            }
        }
        if bracketed {
            self.expect(Tok::RBrack)?;
        }
        Ok(out)
    }

    fn event(&mut self) -> Result<EventExpr, Diagnostic> {
        let rising = match self.peek() {
            Tok::AtT => true,
            Tok::AtF => false,
            other => {
                return Err(self.err(format!(
                    "expected `@T` or `@F`, found {}",
                    other.describe()
                )))
            }
        };
        self.bump();
        self.expect(Tok::LParen)?;
        let subject = if self.at_kw("inmode") {
            self.bump();
            EventSubject::Inmode
        } else {
            let (v, _) = self.ident("a variable name or `inmode`")?;
            EventSubject::Var(v)
        };
        self.expect(Tok::RParen)?;
        Ok(EventExpr { rising, subject })
    }

    fn spec(&mut self, file: &str) -> Result<Spec, Diagnostic> {
        if !self.at_kw("spec") {
            return Err(self.err("expected 'spec' header"));
        }
        self.bump();
        let (name, _) = self.ident("a specification name")?;
        let mut spec = Spec::empty(name);
        let _ = file;
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "monitored" => self.monitored(&mut spec)?,
                    "assumption" => self.assumption(&mut spec)?,
                    "modeclass" => self.modeclass(&mut spec)?,
                    "controlled" => self.controlled(&mut spec)?,
                    "goal" => self.goal(&mut spec)?,
                    other => {
                        return Err(self.err(format!("unknown keyword `{other}`")));
                    }
                },
                other => {
                    return Err(self.err(format!(
                        "expected a declaration, found {}",
                        other.describe()
                    )))
                }
            }
        }
        Ok(spec)
    }

    fn check_fresh(&self, spec: &Spec, name: &str, span: &SourceSpan) -> Result<(), Diagnostic> {
        let taken = spec.is_monitored(name)
            || spec.is_controlled(name)
            || spec.mode_class(name).is_some()
            || spec.class_of_mode(name).is_some();
        if taken {
            Err(Diagnostic::error(
                "duplicate-declaration",
                span.clone(),
                format!("name `{name}` is already declared"),
            ))
        } else {
            Ok(())
        }
    }

    fn monitored(&mut self, spec: &mut Spec) -> Result<(), Diagnostic> {
        self.expect_kw("monitored")?;
        let (name, span) = self.ident("a variable name")?;
        self.check_fresh(spec, &name, &span)?;
        let description = match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Some(s)
            }
            _ => None,
        };
        spec.monitored.push(MonitoredVar {
            name,
            description,
            span,
        });
        Ok(())
    }

    fn assumption(&mut self, spec: &mut Spec) -> Result<(), Diagnostic> {
        let span = self.expect_kw("assumption")?;
        if self.at_kw("one-of") || self.at_kw("at-most-one") {
            let exactly = self.at_kw("one-of");
            self.bump();
            self.expect(Tok::LBrace)?;
            let mut vars = Vec::new();
            let (v, _) = self.ident("a variable name")?;
            vars.push(v);
            while *self.peek() == Tok::Comma {
                self.bump();
                let (v, _) = self.ident("a variable name")?;
                vars.push(v);
            }
            self.expect(Tok::RBrace)?;
            spec.assumptions.push(if exactly {
                Assumption::ExactlyOne { vars, span }
            } else {
                Assumption::AtMostOne { vars, span }
            });
        } else {
            let (antecedent, _) = self.ident("a variable name")?;
            self.expect(Tok::AssumeArrow)?;
            let (consequent, _) = self.ident("a variable name")?;
            spec.assumptions.push(Assumption::Implies {
                antecedent,
                consequent,
                span,
            });
        }
        Ok(())
    }

    fn modeclass(&mut self, spec: &mut Spec) -> Result<(), Diagnostic> {
        self.expect_kw("modeclass")?;
        let (name, span) = self.ident("a mode class name")?;
        self.check_fresh(spec, &name, &span)?;
        self.expect(Tok::LBrace)?;
        self.expect_kw("modes")?;
        let mut modes = Vec::new();
        let (m, mspan) = self.ident("a mode name")?;
        self.check_fresh(spec, &m, &mspan)?;
        modes.push(m);
        while *self.peek() == Tok::Comma {
            self.bump();
            let (m, mspan) = self.ident("a mode name")?;
            self.check_fresh(spec, &m, &mspan)?;
            if modes.contains(&m) {
                return Err(Diagnostic::error(
                    "duplicate-declaration",
                    mspan,
                    format!("mode `{m}` is already declared"),
                ));
            }
            modes.push(m);
        }
        self.expect(Tok::Semi)?;
        self.expect_kw("initial")?;
        let (initial_mode, _) = self.ident("a mode name")?;
        self.expect_kw("when")?;
        let initial_condition = self.conj()?;
        self.expect(Tok::Semi)?;
        let mut rows = Vec::new();
        while self.at_kw("from") {
            let rspan = self.expect_kw("from")?;
            let (from_mode, _) = self.ident("a mode name")?;
            self.expect_kw("to")?;
            let (to_mode, _) = self.ident("a mode name")?;
            self.expect_kw("on")?;
            let mut triggers = vec![self.event()?];
            while *self.peek() == Tok::Amp {
                self.bump();
                triggers.push(self.event()?);
            }
            let guard = if self.at_kw("when") {
                self.bump();
                self.conj()?
            } else {
                Vec::new()
            };
            self.expect(Tok::Semi)?;
            rows.push(TransitionRow {
                from_mode,
                triggers,
                guard,
                to_mode,
                span: rspan,
            });
        }
        self.expect(Tok::RBrace)?;
        spec.mode_classes.push(ModeClass {
            name,
            modes,
            initial_mode,
            initial_condition,
            rows,
            span,
        });
        Ok(())
    }

    fn controlled(&mut self, spec: &mut Spec) -> Result<(), Diagnostic> {
        self.expect_kw("controlled")?;
        let (name, span) = self.ident("a variable name")?;
        self.check_fresh(spec, &name, &span)?;
        self.expect(Tok::LBrace)?;
        self.expect_kw("initial")?;
        let initial = self.boolean()?;
        self.expect(Tok::Semi)?;
        let mut rows = Vec::new();
        while self.at_kw("in") {
            let rspan = self.expect_kw("in")?;
            let (mode, _) = self.ident("a mode name")?;
            self.expect(Tok::Colon)?;
            let sets_to = self.boolean()?;
            self.expect_kw("on")?;
            let trigger = self.event()?;
            let when = if self.at_kw("when") {
                self.bump();
                Some(self.conj()?)
            } else {
                None
            };
            self.expect(Tok::Semi)?;
            rows.push(CtrlRow {
                mode,
                sets_to,
                trigger,
                when,
                span: rspan,
            });
        }
        self.expect(Tok::RBrace)?;
        spec.controlled.push(ControlledVar {
            name,
            initial,
            rows,
            span,
        });
        Ok(())
    }

    fn goal(&mut self, spec: &mut Spec) -> Result<(), Diagnostic> {
        let span = self.expect_kw("goal")?;
        let name = match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                s
            }
            other => {
                return Err(self.err(format!(
                    "expected a goal name string, found {}",
                    other.describe()
                )))
            }
        };
        if spec.goals.iter().any(|g| g.name == name) {
            return Err(Diagnostic::error(
                "duplicate-declaration",
                span,
                format!("goal `{name}` is already declared"),
            ));
        }
        let expected = if self.at_kw("expect") {
            self.bump();
            if self.at_kw("holds") {
                self.bump();
                Some(true)
            } else if self.at_kw("fails") {
                self.bump();
                Some(false)
            } else {
                return Err(self.err("expected `holds` or `fails`"));
            }
        } else {
            None
        };
        self.expect(Tok::Colon)?;
        let formula = self.ctl_implies()?;
        spec.goals.push(Goal {
            name,
            formula,
            expected,
            span,
        });
        Ok(())
    }

    // CTL grammar, loosest first: implication < or < and < unary < primary.

    fn ctl_implies(&mut self) -> Result<Ctl, Diagnostic> {
        let lhs = self.ctl_or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.ctl_implies()?;
            Ok(lhs.implies(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ctl_or(&mut self) -> Result<Ctl, Diagnostic> {
        let mut lhs = self.ctl_and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            lhs = lhs.or(self.ctl_and()?);
        }
        Ok(lhs)
    }

    fn ctl_and(&mut self) -> Result<Ctl, Diagnostic> {
        let mut lhs = self.ctl_unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            lhs = lhs.and(self.ctl_unary()?);
        }
        Ok(lhs)
    }

    fn ctl_unary(&mut self) -> Result<Ctl, Diagnostic> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(self.ctl_unary()?.not())
            }
            Tok::AtT | Tok::AtF => {
                let ev = self.event()?;
                match ev.subject {
                    EventSubject::Var(v) => {
                        if ev.rising {
                            Ok(Ctl::BecomesTrue(v))
                        } else {
                            Ok(Ctl::BecomesFalse(v))
                        }
                    }
                    EventSubject::Inmode => Err(self.err(
                        "event operators in goals apply to variables, not `inmode`".to_string(),
                    )),
                }
            }
            Tok::Ident(s) => match s.as_str() {
                "AX" | "EX" | "AF" | "EF" | "AG" | "EG" => {
                    self.bump();
                    let arg = self.ctl_unary()?;
                    Ok(match s.as_str() {
                        "AX" => Ctl::Ax(Box::new(arg)),
                        "EX" => Ctl::Ex(Box::new(arg)),
                        "AF" => Ctl::Af(Box::new(arg)),
                        "EF" => Ctl::Ef(Box::new(arg)),
                        "AG" => Ctl::Ag(Box::new(arg)),
                        _ => Ctl::Eg(Box::new(arg)),
                    })
                }
                "A" | "E" => {
                    self.bump();
                    self.expect(Tok::LBrack)?;
                    let lhs = self.ctl_implies()?;
                    self.expect_kw("U")?;
                    let rhs = self.ctl_implies()?;
                    self.expect(Tok::RBrack)?;
                    Ok(if s == "A" {
                        Ctl::Au(Box::new(lhs), Box::new(rhs))
                    } else {
                        Ctl::Eu(Box::new(lhs), Box::new(rhs))
                    })
                }
                _ => self.ctl_primary(),
            },
            _ => self.ctl_primary(),
        }
    }

    fn ctl_primary(&mut self) -> Result<Ctl, Diagnostic> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.ctl_implies()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(s) => {
                if s == "true" {
                    self.bump();
                    return Ok(Ctl::True);
                }
                if s == "false" {
                    self.bump();
                    return Ok(Ctl::False);
                }
                if KEYWORDS.contains(&s.as_str()) {
                    return Err(self.err(format!("expected a formula, found `{s}`")));
                }
                self.bump();
                if *self.peek() == Tok::Eq {
                    self.bump();
                    let (mode, _) = self.ident("a mode name")?;
                    Ok(Ctl::ModeEq(s, mode))
                } else {
                    Ok(Ctl::Atom(s))
                }
            }
            other => Err(self.err(format!("expected a formula, found {}", other.describe()))),
        }
    }
}

/// Parses a complete specification.
pub fn parse_spec(text: &str) -> Result<Spec, Vec<Diagnostic>> {
    parse_spec_named(text, "<input>")
}

/// Parses a specification, attributing spans to `file`.
pub fn parse_spec_named(text: &str, file: &str) -> Result<Spec, Vec<Diagnostic>> {
    let toks = Lexer::new(text, file).tokenize().map_err(|d| vec![d])?;
    let mut p = Parser { toks, pos: 0 };
    p.spec(file).map_err(|d| vec![d])
}

/// Parses a single goal formula. The entire input must be consumed.
pub fn parse_goal(text: &str) -> Result<Ctl, Diagnostic> {
    let toks = Lexer::new(text, "<goal>").tokenize()?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.ctl_implies()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(format!(
            "unexpected {} after formula",
            p.peek().describe()
        )));
    }
    Ok(f)
}

fn fmt_conj(conj: &Conj) -> String {
    if conj.is_empty() {
        return "true".to_string();
    }
    conj.iter()
        .map(|l| {
            if l.value {
                l.var.clone()
            } else {
                format!("~{}", l.var)
            }
        })
        .collect::<Vec<_>>()
        .join(" & ")
}

fn fmt_event(ev: &EventExpr) -> String {
    let op = if ev.rising { "@T" } else { "@F" };
    match &ev.subject {
        EventSubject::Var(v) => format!("{op}({v})"),
        EventSubject::Inmode => format!("{op}(inmode)"),
    }
}

fn quote(s: &str) -> String {
    let escaped = s.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

/// Deterministic canonical rendering; `parse_spec(format_spec(s))` is
/// structurally equal to `s` (spans aside).
pub fn format_spec(spec: &Spec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "spec {}", spec.name);
    if !spec.monitored.is_empty() {
        let _ = writeln!(out);
    }
    for m in &spec.monitored {
        match &m.description {
            Some(d) => {
                let _ = writeln!(out, "monitored {} {}", m.name, quote(d));
            }
            None => {
                let _ = writeln!(out, "monitored {}", m.name);
            }
        }
    }
    if !spec.assumptions.is_empty() {
        let _ = writeln!(out);
    }
    for a in &spec.assumptions {
        match a {
            Assumption::Implies {
                antecedent,
                consequent,
                ..
            } => {
                let _ = writeln!(out, "assumption {antecedent} -->> {consequent}");
            }
            Assumption::ExactlyOne { vars, .. } => {
                let _ = writeln!(out, "assumption one-of {{{}}}", vars.join(", "));
            }
            Assumption::AtMostOne { vars, .. } => {
                let _ = writeln!(out, "assumption at-most-one {{{}}}", vars.join(", "));
            }
        }
    }
    for mc in &spec.mode_classes {
        let _ = writeln!(out);
        let _ = writeln!(out, "modeclass {} {{", mc.name);
        let _ = writeln!(out, "  modes {};", mc.modes.join(", "));
        let _ = writeln!(
            out,
            "  initial {} when {};",
            mc.initial_mode,
            fmt_conj(&mc.initial_condition)
        );
        for r in &mc.rows {
            let trig = r
                .triggers
                .iter()
                .map(fmt_event)
                .collect::<Vec<_>>()
                .join(" & ");
            let _ = write!(out, "  from {} to {} on {}", r.from_mode, r.to_mode, trig);
            if !r.guard.is_empty() {
                let _ = write!(out, " when {}", fmt_conj(&r.guard));
            }
            let _ = writeln!(out, ";");
        }
        let _ = writeln!(out, "}}");
    }
    for c in &spec.controlled {
        let _ = writeln!(out);
        let _ = writeln!(out, "controlled {} {{", c.name);
        let _ = writeln!(out, "  initial {};", c.initial);
        for r in &c.rows {
            let _ = write!(
                out,
                "  in {}: {} on {}",
                r.mode,
                r.sets_to,
                fmt_event(&r.trigger)
            );
            if let Some(when) = &r.when {
                let _ = write!(out, " when {}", fmt_conj(when));
            }
            let _ = writeln!(out, ";");
        }
        let _ = writeln!(out, "}}");
    }
    if !spec.goals.is_empty() {
        let _ = writeln!(out);
    }
    for g in &spec.goals {
        let expect = match g.expected {
            Some(true) => " expect holds",
            Some(false) => " expect fails",
            None => "",
        };
        let _ = writeln!(out, "goal {}{expect}: {}", quote(&g.name), g.formula);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_wants_spec_header() {
        let err = parse_spec("").unwrap_err();
        assert!(err[0].message.contains("expected 'spec' header"));
    }

    #[test]
    fn parses_transition_row() {
        let text = "spec t\nmonitored Ignition\nmodeclass CC {\n  modes Off, Inactive;\n  initial Off when ~Ignition;\n  from Off to Inactive on @T(Ignition);\n}\n";
        let spec = parse_spec(text).unwrap();
        let row = &spec.mode_classes[0].rows[0];
        assert_eq!(row.from_mode, "Off");
        assert_eq!(row.to_mode, "Inactive");
        assert_eq!(row.triggers, vec![EventExpr::rises("Ignition")]);
        assert!(row.guard.is_empty());
    }

    #[test]
    fn goal_with_event_operator() {
        let f = parse_goal("AG(CC=Cruise -> AX(@F(Ignition) -> CC=Off))").unwrap();
        assert_eq!(f.to_string(), "AG(CC=Cruise -> AX(@F(Ignition) -> CC=Off))");
        assert!(f.has_event_ops());
    }

    #[test]
    fn goal_precedence() {
        let f = parse_goal("~a & b | c -> d").unwrap();
        assert_eq!(f.to_string(), "~a & b | c -> d");
        // (((~a) & b) | c) -> d
        assert!(matches!(f, Ctl::Implies(..)));
    }

    #[test]
    fn truncated_goal_reports_column() {
        let err = parse_goal("AG(").unwrap_err();
        assert_eq!(err.span.column, 4);
    }

    #[test]
    fn duplicate_monitored_rejected() {
        let err = parse_spec("spec t\nmonitored a\nmonitored a\n").unwrap_err();
        assert_eq!(err[0].code, "duplicate-declaration");
    }

    #[test]
    fn format_round_trips() {
        let text = "spec t\nmonitored x \"the input\"\nassumption one-of {a, b}\nmonitored a\nmonitored b\nmodeclass M {\n  modes Off, On;\n  initial Off when ~x;\n  from Off to On on @T(x) when a;\n  from On to Off on @F(x);\n}\ncontrolled c {\n  initial false;\n  in On: true on @T(inmode) when a & ~b;\n}\ngoal \"g\" expect holds: AG(M=On -> x)\n";
        let mut first = parse_spec(text).unwrap();
        let printed = format_spec(&first);
        let mut second = parse_spec(&printed).unwrap();
        first.strip_spans();
        second.strip_spans();
        assert_eq!(first, second);
        // printing is a fixed point
        assert_eq!(printed, format_spec(&second));
    }

    #[test]
    fn multiple_triggers_parse_for_later_checking() {
        let text = "spec t\nmonitored a\nmonitored b\nmodeclass M {\n  modes X, Y;\n  initial X when true;\n  from X to Y on @T(a) & @F(b);\n}\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.mode_classes[0].rows[0].triggers.len(), 2);
    }
}
