//! SMV text generation for detailed specifications, plus a checker and
//! mini-interpreter for the emitted subset.
//!
//! The target surface is the classic SMV 2.x syntax restricted to a subset
//! modern derivatives also accept: MODULE/VAR/ASSIGN with init(), next() and
//! case expressions, one TRANS and one INVAR constraint, and SPEC lines.
//! There is no INIT section; initial-condition literals become init()
//! assignments. Previous-value variables get a `P` prefix and a name
//! collision is a hard error, never an auto-rename.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::ast::*;
use crate::ctl::{compile_events, Ctl};
use crate::diag::{Diagnostic, SourceSpan};

#[derive(Debug, Error)]
pub enum SmvError {
    #[error("{0}")]
    Emit(Diagnostic),
}

fn changed_rising(var: &str) -> String {
    format!("(!{var} & next({var}))")
}

fn changed_falling(var: &str) -> String {
    format!("({var} & !next({var}))")
}

fn conj_to_smv(conj: &Conj) -> Vec<String> {
    conj.iter()
        .map(|l| {
            if l.value {
                l.var.clone()
            } else {
                format!("!{}", l.var)
            }
        })
        .collect()
}

fn formula_to_smv(f: &Ctl) -> String {
    fn prec(f: &Ctl) -> u8 {
        match f {
            Ctl::Implies(..) => 0,
            Ctl::Or(..) => 1,
            Ctl::And(..) => 2,
            Ctl::Not(_) | Ctl::Ax(_) | Ctl::Ex(_) | Ctl::Af(_) | Ctl::Ef(_) | Ctl::Ag(_)
            | Ctl::Eg(_) => 3,
            _ => 4,
        }
    }
    fn go(f: &Ctl, min: u8, out: &mut String) {
        let paren = prec(f) < min;
        if paren {
            out.push('(');
        }
        match f {
            Ctl::True => out.push_str("TRUE"),
            Ctl::False => out.push_str("FALSE"),
            Ctl::Atom(a) => out.push_str(a),
            Ctl::Prev(a) => {
                out.push('P');
                out.push_str(a);
            }
            Ctl::ModeEq(c, m) => {
                out.push_str(c);
                out.push_str(" = ");
                out.push_str(m);
            }
            Ctl::Not(a) => {
                out.push('!');
                go(a, 3, out);
            }
            Ctl::And(a, b) => {
                go(a, 2, out);
                out.push_str(" & ");
                go(b, 3, out);
            }
            Ctl::Or(a, b) => {
                go(a, 1, out);
                out.push_str(" | ");
                go(b, 2, out);
            }
            Ctl::Implies(a, b) => {
                go(a, 1, out);
                out.push_str(" -> ");
                go(b, 0, out);
            }
            Ctl::Ax(a) => unary("AX", a, out),
            Ctl::Ex(a) => unary("EX", a, out),
            Ctl::Af(a) => unary("AF", a, out),
            Ctl::Ef(a) => unary("EF", a, out),
            Ctl::Ag(a) => unary("AG", a, out),
            Ctl::Eg(a) => unary("EG", a, out),
            Ctl::Au(a, b) => until('A', a, b, out),
            Ctl::Eu(a, b) => until('E', a, b, out),
            Ctl::BecomesTrue(_) | Ctl::BecomesFalse(_) => {
                unreachable!("events are compiled before emission")
            }
        }
        if paren {
            out.push(')');
        }
    }
    fn unary(op: &str, a: &Ctl, out: &mut String) {
        out.push_str(op);
        out.push('(');
        go(a, 0, out);
        out.push(')');
    }
    fn until(q: char, a: &Ctl, b: &Ctl, out: &mut String) {
        out.push(q);
        out.push('[');
        go(a, 0, out);
        out.push_str(" U ");
        go(b, 0, out);
        out.push(']');
    }
    let mut s = String::new();
    go(f, 0, &mut s);
    s
}

/// Translates a specification and goals to SMV text. Deterministic:
/// identical input yields byte-identical output.
pub fn emit_smv(spec: &Spec, goals: &[Goal]) -> Result<String, SmvError> {
    let err = |code: &str, msg: String| {
        SmvError::Emit(Diagnostic::error(code, SourceSpan::synthetic(), msg))
    };

    let mut tracked: Vec<String> = goals.iter().flat_map(|g| g.formula.event_vars()).collect();
    tracked.sort();
    tracked.dedup();

    let mut declared: Vec<&str> = Vec::new();
    declared.extend(spec.monitored.iter().map(|m| m.name.as_str()));
    declared.extend(spec.controlled.iter().map(|c| c.name.as_str()));
    for mc in &spec.mode_classes {
        declared.push(&mc.name);
        declared.extend(mc.modes.iter().map(|m| m.as_str()));
    }
    for t in &tracked {
        let p = format!("P{t}");
        if declared.iter().any(|d| *d == p) {
            return Err(err(
                "prev-name-collision",
                format!("prev-variable name `{p}` collides with a declared name"),
            ));
        }
    }

    // initial-condition literals become init() assignments; contradictory
    // pins mean the spec has no initial states at all.
    let mut pinned: BTreeMap<&str, bool> = BTreeMap::new();
    for mc in &spec.mode_classes {
        for lit in &mc.initial_condition {
            if let Some(&prev) = pinned.get(lit.var.as_str()) {
                if prev != lit.value {
                    return Err(err(
                        "contradictory-initial-conditions",
                        format!("initial conditions pin `{}` both ways", lit.var),
                    ));
                }
            }
            pinned.insert(&lit.var, lit.value);
        }
    }

    let mut out = String::new();
    out.push_str("MODULE main\n");

    out.push_str("VAR\n");
    for m in &spec.monitored {
        out.push_str(&format!("  {} : boolean;\n", m.name));
    }
    for mc in &spec.mode_classes {
        out.push_str(&format!("  {} : {{{}}};\n", mc.name, mc.modes.join(", ")));
    }
    for c in &spec.controlled {
        out.push_str(&format!("  {} : boolean;\n", c.name));
    }
    for t in &tracked {
        out.push_str(&format!("  P{t} : boolean;\n"));
    }

    out.push_str("ASSIGN\n");
    for m in &spec.monitored {
        if let Some(&v) = pinned.get(m.name.as_str()) {
            out.push_str(&format!(
                "  init({}) := {};\n",
                m.name,
                if v { "TRUE" } else { "FALSE" }
            ));
        }
    }
    for mc in &spec.mode_classes {
        out.push_str(&format!("  init({}) := {};\n", mc.name, mc.initial_mode));
        out.push_str(&format!("  next({}) := case\n", mc.name));
        for row in &mc.rows {
            let trig = row.trigger();
            let mut parts = vec![format!("{} = {}", mc.name, row.from_mode)];
            if let Some(v) = trig.var() {
                parts.push(if trig.rising {
                    changed_rising(v)
                } else {
                    changed_falling(v)
                });
            }
            parts.extend(conj_to_smv(&row.guard));
            out.push_str(&format!("    {} : {};\n", parts.join(" & "), row.to_mode));
        }
        out.push_str(&format!("    TRUE : {};\n  esac;\n", mc.name));
    }
    for c in &spec.controlled {
        out.push_str(&format!(
            "  init({}) := {};\n",
            c.name,
            if c.initial { "TRUE" } else { "FALSE" }
        ));
        out.push_str(&format!("  next({}) := case\n", c.name));
        for row in &c.rows {
            let class = spec
                .class_of_mode(&row.mode)
                .expect("well-formed controlled rows name declared modes");
            let mut parts = Vec::new();
            match &row.trigger.subject {
                EventSubject::Var(v) => {
                    parts.push(format!("next({}) = {}", class.name, row.mode));
                    parts.push(if row.trigger.rising {
                        changed_rising(v)
                    } else {
                        changed_falling(v)
                    });
                }
                EventSubject::Inmode => {
                    if row.trigger.rising {
                        parts.push(format!("!({} = {})", class.name, row.mode));
                        parts.push(format!("next({}) = {}", class.name, row.mode));
                    } else {
                        parts.push(format!("{} = {}", class.name, row.mode));
                        parts.push(format!("!(next({}) = {})", class.name, row.mode));
                    }
                }
            }
            if let Some(when) = &row.when {
                parts.extend(conj_to_smv(when));
            }
            out.push_str(&format!(
                "    {} : {};\n",
                parts.join(" & "),
                if row.sets_to { "TRUE" } else { "FALSE" }
            ));
        }
        out.push_str(&format!("    TRUE : {};\n  esac;\n", c.name));
    }
    for t in &tracked {
        out.push_str(&format!("  init(P{t}) := {t};\n"));
        out.push_str(&format!("  next(P{t}) := {t};\n"));
    }

    // single-input-change: exactly one unit fires per step; members of an
    // exactly-one group move as a pair, so a unit only frees that group.
    let mon_names: Vec<&str> = spec.monitored.iter().map(|m| m.name.as_str()).collect();
    let mut units = Vec::new();
    for m in &spec.monitored {
        let group = spec.exactly_one_group(&m.name);
        let mut parts = Vec::new();
        match group {
            Some(_) => parts.push(changed_rising(&m.name)),
            None => parts.push(format!("next({0}) != {0}", m.name)),
        }
        for other in &mon_names {
            if *other == m.name {
                continue;
            }
            if group.map(|g| g.iter().any(|v| v == other)).unwrap_or(false) {
                continue;
            }
            parts.push(format!("next({other}) = {other}"));
        }
        units.push(format!("({})", parts.join(" & ")));
    }
    if !units.is_empty() {
        out.push_str("TRANS\n  ");
        out.push_str(&units.join("\n  | "));
        out.push('\n');
    }

    let mut invars = Vec::new();
    for a in &spec.assumptions {
        match a {
            Assumption::Implies {
                antecedent,
                consequent,
                ..
            } => invars.push(format!("({antecedent} -> {consequent})")),
            Assumption::ExactlyOne { vars, .. } => {
                let cases: Vec<String> = vars
                    .iter()
                    .map(|v| {
                        let mut lits = vec![v.clone()];
                        lits.extend(vars.iter().filter(|o| *o != v).map(|o| format!("!{o}")));
                        format!("({})", lits.join(" & "))
                    })
                    .collect();
                invars.push(format!("({})", cases.join(" | ")));
            }
            Assumption::AtMostOne { vars, .. } => {
                for (i, v) in vars.iter().enumerate() {
                    for w in &vars[i + 1..] {
                        invars.push(format!("!({v} & {w})"));
                    }
                }
            }
        }
    }
    if !invars.is_empty() {
        out.push_str("INVAR\n  ");
        out.push_str(&invars.join("\n  & "));
        out.push('\n');
    }

    for g in goals {
        let compiled = compile_events(&g.formula, &tracked)
            .map_err(SmvError::Emit)?;
        out.push_str(&format!("SPEC {}\n", formula_to_smv(&compiled)));
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// Subset grammar checker and mini-interpreter.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmvExpr {
    Bool(bool),
    Var(String),
    Next(String),
    Not(Box<SmvExpr>),
    And(Box<SmvExpr>, Box<SmvExpr>),
    Or(Box<SmvExpr>, Box<SmvExpr>),
    Implies(Box<SmvExpr>, Box<SmvExpr>),
    Eq(Box<SmvExpr>, Box<SmvExpr>),
    Neq(Box<SmvExpr>, Box<SmvExpr>),
    /// Symbolic constant of an enumerated type (a mode name).
    Sym(String),
    Case(Vec<(SmvExpr, SmvExpr)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SmvType {
    Boolean,
    Enum(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct SmvProgram {
    pub vars: Vec<(String, SmvType)>,
    pub init_assigns: Vec<(String, SmvExpr)>,
    pub next_assigns: Vec<(String, SmvExpr)>,
    pub trans: Option<SmvExpr>,
    pub invar: Option<SmvExpr>,
    pub specs: Vec<String>,
}

struct SmvLexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SmvTok {
    Ident(String),
    Assign,   // :=
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Not,
    And,
    Or,
    Implies,
    Eq,
    Neq,
    Eof,
}

impl<'a> SmvLexer<'a> {
    fn new(src: &'a str) -> Self {
        SmvLexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn next_tok(&mut self) -> Result<SmvTok, String> {
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos + 1 < self.src.len() && &self.src[self.pos..self.pos + 2] == b"--" {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= self.src.len() {
            return Ok(SmvTok::Eof);
        }
        let c = self.src[self.pos];
        let two = if self.pos + 1 < self.src.len() {
            &self.src[self.pos..self.pos + 2]
        } else {
            b""
        };
        let tok = match c {
            b':' if two == b":=" => {
                self.pos += 2;
                return Ok(SmvTok::Assign);
            }
            b'-' if two == b"->" => {
                self.pos += 2;
                return Ok(SmvTok::Implies);
            }
            b'!' if two == b"!=" => {
                self.pos += 2;
                return Ok(SmvTok::Neq);
            }
            b':' => SmvTok::Colon,
            b';' => SmvTok::Semi,
            b',' => SmvTok::Comma,
            b'(' => SmvTok::LParen,
            b')' => SmvTok::RParen,
            b'{' => SmvTok::LBrace,
            b'}' => SmvTok::RBrace,
            b'!' => SmvTok::Not,
            b'&' => SmvTok::And,
            b'|' => SmvTok::Or,
            b'=' => SmvTok::Eq,
            _ if c.is_ascii_alphanumeric() || c == b'_' || c == b'[' || c == b']' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(format!("unexpected character `{}`", c as char));
                }
                return Ok(SmvTok::Ident(
                    std::str::from_utf8(&self.src[start..self.pos])
                        .unwrap()
                        .to_string(),
                ));
            }
            _ => return Err(format!("unexpected character `{}`", c as char)),
        };
        self.pos += 1;
        Ok(tok)
    }
}

struct SmvParser {
    toks: Vec<SmvTok>,
    pos: usize,
}

impl SmvParser {
    fn peek(&self) -> &SmvTok {
        self.toks.get(self.pos).unwrap_or(&SmvTok::Eof)
    }

    fn bump(&mut self) -> SmvTok {
        let t = self.peek().clone();
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: SmvTok) -> Result<(), String> {
        let got = self.bump();
        if got == tok {
            Ok(())
        } else {
            Err(format!("expected {tok:?}, got {got:?}"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), String> {
        match self.bump() {
            SmvTok::Ident(s) if s == kw => Ok(()),
            got => Err(format!("expected `{kw}`, got {got:?}")),
        }
    }

    fn ident(&mut self) -> Result<String, String> {
        match self.bump() {
            SmvTok::Ident(s) => Ok(s),
            got => Err(format!("expected identifier, got {got:?}")),
        }
    }

    fn expr(&mut self) -> Result<SmvExpr, String> {
        let lhs = self.or_expr()?;
        if *self.peek() == SmvTok::Implies {
            self.bump();
            let rhs = self.expr()?;
            return Ok(SmvExpr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<SmvExpr, String> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == SmvTok::Or {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = SmvExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<SmvExpr, String> {
        let mut lhs = self.eq_expr()?;
        while *self.peek() == SmvTok::And {
            self.bump();
            let rhs = self.eq_expr()?;
            lhs = SmvExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn eq_expr(&mut self) -> Result<SmvExpr, String> {
        let lhs = self.unary()?;
        match self.peek() {
            SmvTok::Eq => {
                self.bump();
                let rhs = self.unary()?;
                Ok(SmvExpr::Eq(Box::new(lhs), Box::new(rhs)))
            }
            SmvTok::Neq => {
                self.bump();
                let rhs = self.unary()?;
                Ok(SmvExpr::Neq(Box::new(lhs), Box::new(rhs)))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<SmvExpr, String> {
        if *self.peek() == SmvTok::Not {
            self.bump();
            return Ok(SmvExpr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<SmvExpr, String> {
        match self.bump() {
            SmvTok::LParen => {
                let e = self.expr()?;
                self.expect(SmvTok::RParen)?;
                Ok(e)
            }
            SmvTok::Ident(s) if s == "TRUE" => Ok(SmvExpr::Bool(true)),
            SmvTok::Ident(s) if s == "FALSE" => Ok(SmvExpr::Bool(false)),
            SmvTok::Ident(s) if s == "case" => {
                let mut arms = Vec::new();
                loop {
                    if let SmvTok::Ident(k) = self.peek() {
                        if k == "esac" {
                            self.bump();
                            break;
                        }
                    }
                    let cond = self.expr()?;
                    self.expect(SmvTok::Colon)?;
                    let val = self.expr()?;
                    self.expect(SmvTok::Semi)?;
                    arms.push((cond, val));
                }
                if arms.is_empty() {
                    return Err("empty case expression".into());
                }
                Ok(SmvExpr::Case(arms))
            }
            SmvTok::Ident(s) if s == "next" => {
                self.expect(SmvTok::LParen)?;
                let name = self.ident()?;
                self.expect(SmvTok::RParen)?;
                Ok(SmvExpr::Next(name))
            }
            SmvTok::Ident(s) => Ok(SmvExpr::Var(s)),
            got => Err(format!("expected expression, got {got:?}")),
        }
    }
}

/// Parses the emitted SMV subset; any construct outside the subset is an
/// error. This is the "grammar check" for emitted output.
pub fn parse_smv(text: &str) -> Result<SmvProgram, String> {
    let mut lexer = SmvLexer::new(text);
    let mut toks = Vec::new();
    loop {
        let t = lexer.next_tok()?;
        let done = t == SmvTok::Eof;
        toks.push(t);
        if done {
            break;
        }
    }
    let mut p = SmvParser { toks, pos: 0 };
    p.expect_kw("MODULE")?;
    p.expect_kw("main")?;

    let mut prog = SmvProgram {
        vars: Vec::new(),
        init_assigns: Vec::new(),
        next_assigns: Vec::new(),
        trans: None,
        invar: None,
        specs: Vec::new(),
    };

    loop {
        let section = match p.bump() {
            SmvTok::Eof => break,
            SmvTok::Ident(s) => s,
            got => return Err(format!("expected section keyword, got {got:?}")),
        };
        match section.as_str() {
            "VAR" => {
                while let SmvTok::Ident(name) = p.peek().clone() {
                    if matches!(
                        name.as_str(),
                        "ASSIGN" | "TRANS" | "INVAR" | "SPEC" | "VAR"
                    ) {
                        break;
                    }
                    p.bump();
                    p.expect(SmvTok::Colon)?;
                    let ty = match p.bump() {
                        SmvTok::Ident(t) if t == "boolean" => SmvType::Boolean,
                        SmvTok::LBrace => {
                            let mut syms = vec![p.ident()?];
                            while *p.peek() == SmvTok::Comma {
                                p.bump();
                                syms.push(p.ident()?);
                            }
                            p.expect(SmvTok::RBrace)?;
                            SmvType::Enum(syms)
                        }
                        got => return Err(format!("expected type, got {got:?}")),
                    };
                    p.expect(SmvTok::Semi)?;
                    prog.vars.push((name, ty));
                }
            }
            "ASSIGN" => {
                while let SmvTok::Ident(kind) = p.peek().clone() {
                    if kind != "init" && kind != "next" {
                        break;
                    }
                    p.bump();
                    p.expect(SmvTok::LParen)?;
                    let name = p.ident()?;
                    p.expect(SmvTok::RParen)?;
                    p.expect(SmvTok::Assign)?;
                    let e = p.expr()?;
                    p.expect(SmvTok::Semi)?;
                    if kind == "init" {
                        prog.init_assigns.push((name, e));
                    } else {
                        prog.next_assigns.push((name, e));
                    }
                }
            }
            "TRANS" => {
                prog.trans = Some(p.expr()?);
            }
            "INVAR" => {
                prog.invar = Some(p.expr()?);
            }
            "SPEC" => {
                // the formula body is not interpreted; skim tokens to the
                // next section or end of input while balancing parens
                let mut text = String::new();
                let mut depth = 0i32;
                loop {
                    match p.peek() {
                        SmvTok::Eof => break,
                        SmvTok::Ident(s)
                            if depth == 0
                                && matches!(
                                    s.as_str(),
                                    "SPEC" | "VAR" | "ASSIGN" | "TRANS" | "INVAR"
                                ) =>
                        {
                            break
                        }
                        t => {
                            if *t == SmvTok::LParen {
                                depth += 1;
                            }
                            if *t == SmvTok::RParen {
                                depth -= 1;
                            }
                            text.push_str(&format!("{t:?} "));
                            p.bump();
                        }
                    }
                }
                if text.is_empty() {
                    return Err("empty SPEC".into());
                }
                prog.specs.push(text);
            }
            other => return Err(format!("unsupported section `{other}`")),
        }
    }

    // declared-name discipline: every assigned variable must be declared
    for (name, _) in prog.init_assigns.iter().chain(&prog.next_assigns) {
        if !prog.vars.iter().any(|(v, _)| v == name) {
            return Err(format!("assignment to undeclared variable `{name}`"));
        }
    }
    Ok(prog)
}

/// One concrete SMV state: every variable mapped to a value.
pub type SmvState = BTreeMap<String, SmvVal>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SmvVal {
    Bool(bool),
    Sym(String),
}

#[derive(Debug, Clone)]
pub struct SmvModel {
    pub states: Vec<SmvState>,
    pub initial: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

fn eval(e: &SmvExpr, cur: &SmvState, next: Option<&SmvState>) -> Result<SmvVal, String> {
    Ok(match e {
        SmvExpr::Bool(b) => SmvVal::Bool(*b),
        SmvExpr::Var(v) => cur
            .get(v)
            .cloned()
            .unwrap_or_else(|| SmvVal::Sym(v.clone())),
        SmvExpr::Next(v) => next
            .ok_or("next() outside a transition context")?
            .get(v)
            .cloned()
            .ok_or_else(|| format!("unknown variable `{v}`"))?,
        SmvExpr::Sym(s) => SmvVal::Sym(s.clone()),
        SmvExpr::Not(a) => match eval(a, cur, next)? {
            SmvVal::Bool(b) => SmvVal::Bool(!b),
            _ => return Err("! applied to a non-boolean".into()),
        },
        SmvExpr::And(a, b) => bool_op(a, b, cur, next, |x, y| x && y)?,
        SmvExpr::Or(a, b) => bool_op(a, b, cur, next, |x, y| x || y)?,
        SmvExpr::Implies(a, b) => bool_op(a, b, cur, next, |x, y| !x || y)?,
        SmvExpr::Eq(a, b) => SmvVal::Bool(eval(a, cur, next)? == eval(b, cur, next)?),
        SmvExpr::Neq(a, b) => SmvVal::Bool(eval(a, cur, next)? != eval(b, cur, next)?),
        SmvExpr::Case(arms) => {
            for (cond, val) in arms {
                if eval(cond, cur, next)? == SmvVal::Bool(true) {
                    return eval(val, cur, next);
                }
            }
            return Err("no case arm matched".into());
        }
    })
}

fn bool_op(
    a: &SmvExpr,
    b: &SmvExpr,
    cur: &SmvState,
    next: Option<&SmvState>,
    f: impl Fn(bool, bool) -> bool,
) -> Result<SmvVal, String> {
    match (eval(a, cur, next)?, eval(b, cur, next)?) {
        (SmvVal::Bool(x), SmvVal::Bool(y)) => Ok(SmvVal::Bool(f(x, y))),
        _ => Err("boolean operator applied to non-booleans".into()),
    }
}

fn all_states(vars: &[(String, SmvType)]) -> Vec<SmvState> {
    let mut states = vec![SmvState::new()];
    for (name, ty) in vars {
        let values: Vec<SmvVal> = match ty {
            SmvType::Boolean => vec![SmvVal::Bool(false), SmvVal::Bool(true)],
            SmvType::Enum(syms) => syms.iter().map(|s| SmvVal::Sym(s.clone())).collect(),
        };
        let mut next_states = Vec::with_capacity(states.len() * values.len());
        for s in &states {
            for v in &values {
                let mut s2 = s.clone();
                s2.insert(name.clone(), v.clone());
                next_states.push(s2);
            }
        }
        states = next_states;
    }
    states
}

/// Brute-force interpreter for the emitted subset: enumerates all variable
/// assignments, filters initial states by init assigns + INVAR, and keeps a
/// transition when every next assign, TRANS and INVAR agree. Reachable part
/// only. Desk-scale by construction.
pub fn interpret(prog: &SmvProgram) -> Result<SmvModel, String> {
    let universe = all_states(&prog.vars);
    let truthy = |e: &SmvExpr, cur: &SmvState, next: Option<&SmvState>| -> Result<bool, String> {
        Ok(eval(e, cur, next)? == SmvVal::Bool(true))
    };

    let mut initial_states = Vec::new();
    'outer: for s in &universe {
        for (name, e) in &prog.init_assigns {
            if s[name] != eval(e, s, None)? {
                continue 'outer;
            }
        }
        if let Some(inv) = &prog.invar {
            if !truthy(inv, s, None)? {
                continue;
            }
        }
        initial_states.push(s.clone());
    }

    let step_ok = |cur: &SmvState, next: &SmvState| -> Result<bool, String> {
        for (name, e) in &prog.next_assigns {
            if next[name] != eval(e, cur, Some(next))? {
                return Ok(false);
            }
        }
        if let Some(t) = &prog.trans {
            if !truthy(t, cur, Some(next))? {
                return Ok(false);
            }
        }
        if let Some(inv) = &prog.invar {
            if !truthy(inv, next, None)? {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut states: Vec<SmvState> = Vec::new();
    let mut initial = Vec::new();
    let mut edges = Vec::new();
    let mut index: BTreeMap<SmvState, usize> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::new();
    for s in initial_states {
        let id = *index.entry(s.clone()).or_insert_with(|| {
            states.push(s.clone());
            states.len() - 1
        });
        if !initial.contains(&id) {
            initial.push(id);
            queue.push_back(id);
        }
    }
    while let Some(id) = queue.pop_front() {
        let cur = states[id].clone();
        for cand in &universe {
            if step_ok(&cur, cand)? {
                let target = match index.get(cand) {
                    Some(&t) => t,
                    None => {
                        index.insert(cand.clone(), states.len());
                        states.push(cand.clone());
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    }
                };
                edges.push((id, target));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(SmvModel {
        states,
        initial,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_goal, parse_spec};
    use crate::sem::{build_model, DEFAULT_STATE_CAP};

    fn toy() -> Spec {
        parse_spec(
            "spec toy\nmonitored x\nmodeclass M {\n  modes Off, On;\n  initial Off when ~x;\n  from Off to On on @T(x);\n  from On to Off on @F(x);\n}\ncontrolled lamp {\n  initial false;\n  in On : true on @T(inmode);\n  in On : false on @F(inmode);\n}\n",
        )
        .unwrap()
    }

    fn goal(name: &str, text: &str) -> Goal {
        Goal {
            name: name.into(),
            formula: parse_goal(text).unwrap(),
            expected: None,
            span: SourceSpan::synthetic(),
        }
    }

    #[test]
    fn emission_is_deterministic_and_passes_grammar_check() {
        let spec = toy();
        let goals = vec![goal("g", "AG(M=On -> x)")];
        let a = emit_smv(&spec, &goals).unwrap();
        let b = emit_smv(&spec, &goals).unwrap();
        assert_eq!(a, b);
        parse_smv(&a).unwrap();
    }

    #[test]
    fn event_goal_declares_prev_variable() {
        let spec = toy();
        let out = emit_smv(&spec, &[goal("g", "AG(@F(x) -> M=Off)")]).unwrap();
        assert!(out.contains("PX") || out.contains("Px : boolean;"), "{out}");
        assert!(out.contains("next(Px) := x;"));
        assert!(out.contains("init(Px) := x;"));
        assert!(out.contains("SPEC AG(Px & !x -> M = Off)"));
    }

    #[test]
    fn no_goals_no_spec_lines() {
        let out = emit_smv(&toy(), &[]).unwrap();
        assert!(!out.contains("SPEC"));
        parse_smv(&out).unwrap();
    }

    #[test]
    fn prev_name_collision_is_an_error() {
        let spec = parse_spec(
            "spec s\nmonitored x\nmonitored Px\nmodeclass M {\n  modes A;\n  initial A when true;\n}\n",
        )
        .unwrap();
        let goals = vec![goal("g", "AG(@T(x) -> true)")];
        assert!(emit_smv(&spec, &goals).is_err());
    }

    #[test]
    fn initial_condition_literal_becomes_init_assign() {
        let out = emit_smv(&toy(), &[]).unwrap();
        assert!(out.contains("init(x) := FALSE;"), "{out}");
        assert!(!out.contains("INIT\n"));
    }

    #[test]
    fn interpreter_model_is_isomorphic_to_build_model() {
        let spec = toy();
        let smv = emit_smv(&spec, &[]).unwrap();
        let prog = parse_smv(&smv).unwrap();
        let smv_model = interpret(&prog).unwrap();
        let sem_model = build_model(&spec, &[], DEFAULT_STATE_CAP).unwrap();

        let key = |s: &SmvState| -> String { format!("{s:?}") };
        let sem_key = |s: &crate::sem::SystemState| -> String {
            let mut m = SmvState::new();
            for (k, v) in &s.monitored {
                m.insert(k.clone(), SmvVal::Bool(*v));
            }
            for (k, v) in &s.modes {
                m.insert(k.clone(), SmvVal::Sym(v.clone()));
            }
            for (k, v) in &s.controlled {
                m.insert(k.clone(), SmvVal::Bool(*v));
            }
            format!("{m:?}")
        };

        let mut smv_states: Vec<String> = smv_model.states.iter().map(key).collect();
        let mut sem_states: Vec<String> = sem_model.states.iter().map(sem_key).collect();
        smv_states.sort();
        sem_states.sort();
        assert_eq!(smv_states, sem_states);

        let mut smv_edges: Vec<(String, String)> = smv_model
            .edges
            .iter()
            .map(|(a, b)| (key(&smv_model.states[*a]), key(&smv_model.states[*b])))
            .collect();
        let mut sem_edges: Vec<(String, String)> = sem_model
            .succs
            .iter()
            .enumerate()
            .flat_map(|(i, es)| {
                es.iter()
                    .map(move |e| (i, e.target))
                    .collect::<Vec<_>>()
            })
            .map(|(a, b)| (sem_key(&sem_model.states[a]), sem_key(&sem_model.states[b])))
            .collect();
        smv_edges.sort();
        sem_edges.sort();
        assert_eq!(smv_edges, sem_edges);

        let mut smv_init: Vec<String> = smv_model
            .initial
            .iter()
            .map(|&i| key(&smv_model.states[i]))
            .collect();
        let mut sem_init: Vec<String> = sem_model
            .initial
            .iter()
            .map(|&i| sem_key(&sem_model.states[i]))
            .collect();
        smv_init.sort();
        sem_init.sort();
        assert_eq!(smv_init, sem_init);
    }

    #[test]
    fn interpreter_respects_exactly_one_groups() {
        let spec = parse_spec(
            "spec s\nmonitored a\nmonitored b\nassumption one-of {a, b}\nmodeclass M {\n  modes A;\n  initial A when true;\n}\n",
        )
        .unwrap();
        let smv = emit_smv(&spec, &[]).unwrap();
        let prog = parse_smv(&smv).unwrap();
        let model = interpret(&prog).unwrap();
        assert_eq!(model.states.len(), 2);
        for s in &model.states {
            let a = s["a"] == SmvVal::Bool(true);
            let b = s["b"] == SmvVal::Bool(true);
            assert!(a ^ b);
        }
        // the pair flip is one edge in each direction
        assert_eq!(model.edges.len(), 2);
    }

    #[test]
    fn grammar_check_rejects_unsupported_sections() {
        assert!(parse_smv("MODULE main\nDEFINE\n  x := TRUE;\n").is_err());
        assert!(parse_smv("MODULE main\nVAR\n  x : boolean\n").is_err());
    }
}
