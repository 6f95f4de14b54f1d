//! Goal formulas: CTL extended with the event connectives @T and @F.

use std::fmt;

use crate::diag::{Diagnostic, SourceSpan};

/// A goal formula. Event connectives @T/@F apply to atoms only; the checker
/// compiles them away against previous-value bookkeeping variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ctl {
    True,
    False,
    /// A boolean monitored or controlled variable.
    Atom(String),
    /// The previous-step value of a tracked variable. Produced by
    /// [`compile_events`]; rendered with a `P` prefix.
    Prev(String),
    /// `class = mode`
    ModeEq(String, String),
    Not(Box<Ctl>),
    And(Box<Ctl>, Box<Ctl>),
    Or(Box<Ctl>, Box<Ctl>),
    Implies(Box<Ctl>, Box<Ctl>),
    Ax(Box<Ctl>),
    Ex(Box<Ctl>),
    Af(Box<Ctl>),
    Ef(Box<Ctl>),
    Ag(Box<Ctl>),
    Eg(Box<Ctl>),
    Au(Box<Ctl>, Box<Ctl>),
    Eu(Box<Ctl>, Box<Ctl>),
    /// `@T(a)`: a is false in the previous state and true in the current.
    BecomesTrue(String),
    /// `@F(a)`: a is true in the previous state and false in the current.
    BecomesFalse(String),
}

impl Ctl {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Ctl {
        Ctl::Not(Box::new(self))
    }

    pub fn and(self, other: Ctl) -> Ctl {
        Ctl::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Ctl) -> Ctl {
        Ctl::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Ctl) -> Ctl {
        Ctl::Implies(Box::new(self), Box::new(other))
    }

    pub fn ag(self) -> Ctl {
        Ctl::Ag(Box::new(self))
    }

    pub fn af(self) -> Ctl {
        Ctl::Af(Box::new(self))
    }

    pub fn ax(self) -> Ctl {
        Ctl::Ax(Box::new(self))
    }

    pub fn ef(self) -> Ctl {
        Ctl::Ef(Box::new(self))
    }

    /// All plain variable names the formula mentions, event operands included.
    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |f| match f {
            Ctl::Atom(a) | Ctl::BecomesTrue(a) | Ctl::BecomesFalse(a) | Ctl::Prev(a) => {
                out.push(a.clone());
            }
            _ => {}
        });
        out.sort();
        out.dedup();
        out
    }

    /// Mode class names mentioned in `class = mode` tests.
    pub fn mode_classes(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Ctl::ModeEq(class, _) = f {
                out.push(class.clone());
            }
        });
        out.sort();
        out.dedup();
        out
    }

    /// Variables appearing under @T/@F; the model must track previous values
    /// for exactly these.
    pub fn event_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |f| match f {
            Ctl::BecomesTrue(a) | Ctl::BecomesFalse(a) | Ctl::Prev(a) => out.push(a.clone()),
            _ => {}
        });
        out.sort();
        out.dedup();
        out
    }

    pub fn has_event_ops(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| {
            if matches!(f, Ctl::BecomesTrue(_) | Ctl::BecomesFalse(_)) {
                found = true;
            }
        });
        found
    }

    fn walk(&self, visit: &mut impl FnMut(&Ctl)) {
        visit(self);
        match self {
            Ctl::Not(a) | Ctl::Ax(a) | Ctl::Ex(a) | Ctl::Af(a) | Ctl::Ef(a) | Ctl::Ag(a)
            | Ctl::Eg(a) => a.walk(visit),
            Ctl::And(a, b)
            | Ctl::Or(a, b)
            | Ctl::Implies(a, b)
            | Ctl::Au(a, b)
            | Ctl::Eu(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            _ => {}
        }
    }
}

/// Rewrites @T/@F against previous-value variables:
/// `@T(a)` becomes `~Pa & a` and `@F(a)` becomes `Pa & ~a`.
/// Every event operand must be in `tracked`.
pub fn compile_events(formula: &Ctl, tracked: &[String]) -> Result<Ctl, Diagnostic> {
    let rewrite = |a: &String| -> Result<(), Diagnostic> {
        if tracked.iter().any(|t| t == a) {
            Ok(())
        } else {
            Err(Diagnostic::error(
                "untracked-event-var",
                SourceSpan::synthetic(),
                format!("event operator applied to untracked variable `{a}`"),
            ))
        }
    };
    let compiled = match formula {
        Ctl::BecomesTrue(a) => {
            rewrite(a)?;
            Ctl::Prev(a.clone()).not().and(Ctl::Atom(a.clone()))
        }
        Ctl::BecomesFalse(a) => {
            rewrite(a)?;
            Ctl::Prev(a.clone()).and(Ctl::Atom(a.clone()).not())
        }
        Ctl::Not(a) => compile_events(a, tracked)?.not(),
        Ctl::And(a, b) => compile_events(a, tracked)?.and(compile_events(b, tracked)?),
        Ctl::Or(a, b) => compile_events(a, tracked)?.or(compile_events(b, tracked)?),
        Ctl::Implies(a, b) => compile_events(a, tracked)?.implies(compile_events(b, tracked)?),
        Ctl::Ax(a) => Ctl::Ax(Box::new(compile_events(a, tracked)?)),
        Ctl::Ex(a) => Ctl::Ex(Box::new(compile_events(a, tracked)?)),
        Ctl::Af(a) => Ctl::Af(Box::new(compile_events(a, tracked)?)),
        Ctl::Ef(a) => Ctl::Ef(Box::new(compile_events(a, tracked)?)),
        Ctl::Ag(a) => Ctl::Ag(Box::new(compile_events(a, tracked)?)),
        Ctl::Eg(a) => Ctl::Eg(Box::new(compile_events(a, tracked)?)),
        Ctl::Au(a, b) => Ctl::Au(
            Box::new(compile_events(a, tracked)?),
            Box::new(compile_events(b, tracked)?),
        ),
        Ctl::Eu(a, b) => Ctl::Eu(
            Box::new(compile_events(a, tracked)?),
            Box::new(compile_events(b, tracked)?),
        ),
        other => other.clone(),
    };
    Ok(compiled)
}

// Precedence levels used by both the printer and the parser:
// 0: ->   1: |   2: &   3: unary   4: primary
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

fn fmt_at(f: &Ctl, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(f);
    let paren = p < min;
    if paren {
        write!(out, "(")?;
    }
    match f {
        Ctl::True => write!(out, "true")?,
        Ctl::False => write!(out, "false")?,
        Ctl::Atom(a) => write!(out, "{a}")?,
        Ctl::Prev(a) => write!(out, "P{a}")?,
        Ctl::ModeEq(c, m) => write!(out, "{c}={m}")?,
        Ctl::Not(a) => {
            write!(out, "~")?;
            fmt_at(a, 3, out)?;
        }
        Ctl::And(a, b) => {
            fmt_at(a, 2, out)?;
            write!(out, " & ")?;
            fmt_at(b, 3, out)?;
        }
        Ctl::Or(a, b) => {
            fmt_at(a, 1, out)?;
            write!(out, " | ")?;
            fmt_at(b, 2, out)?;
        }
        Ctl::Implies(a, b) => {
            fmt_at(a, 1, out)?;
            write!(out, " -> ")?;
            fmt_at(b, 0, out)?;
        }
        Ctl::Ax(a) => {
            write!(out, "AX")?;
            fmt_unary_arg(a, out)?;
        }
        Ctl::Ex(a) => {
            write!(out, "EX")?;
            fmt_unary_arg(a, out)?;
        }
        Ctl::Af(a) => {
            write!(out, "AF")?;
            fmt_unary_arg(a, out)?;
        }
        Ctl::Ef(a) => {
            write!(out, "EF")?;
            fmt_unary_arg(a, out)?;
        }
        Ctl::Ag(a) => {
            write!(out, "AG")?;
            fmt_unary_arg(a, out)?;
        }
        Ctl::Eg(a) => {
            write!(out, "EG")?;
            fmt_unary_arg(a, out)?;
        }
        Ctl::Au(a, b) => {
            write!(out, "A[")?;
            fmt_at(a, 0, out)?;
            write!(out, " U ")?;
            fmt_at(b, 0, out)?;
            write!(out, "]")?;
        }
        Ctl::Eu(a, b) => {
            write!(out, "E[")?;
            fmt_at(a, 0, out)?;
            write!(out, " U ")?;
            fmt_at(b, 0, out)?;
            write!(out, "]")?;
        }
        Ctl::BecomesTrue(a) => write!(out, "@T({a})")?,
        Ctl::BecomesFalse(a) => write!(out, "@F({a})")?,
    }
    if paren {
        write!(out, ")")?;
    }
    Ok(())
}

// Temporal unary operators always parenthesize their argument; the output
// stays unambiguous and re-parses to the same tree.
fn fmt_unary_arg(a: &Ctl, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(out, "(")?;
    fmt_at(a, 0, out)?;
    write!(out, ")")
}

impl fmt::Display for Ctl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compile_is_identity_without_events() {
        let f = Ctl::Atom("a".into()).implies(Ctl::ModeEq("M".into(), "On".into()).ag());
        assert_eq!(compile_events(&f, &[]).unwrap(), f);
    }

    #[test]
    fn compile_is_idempotent() {
        let f = Ctl::BecomesTrue("a".into()).ag();
        let tracked = vec!["a".to_string()];
        let once = compile_events(&f, &tracked).unwrap();
        let twice = compile_events(&once, &tracked).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn compile_rejects_untracked_operand() {
        let f = Ctl::BecomesFalse("a".into());
        assert!(compile_events(&f, &[]).is_err());
    }

    #[test]
    fn property_one_compiles_to_prev_variable_form() {
        // AG(CC=Cruise -> AX(@F(Ignition) -> CC=Off))
        let f = Ctl::ModeEq("CC".into(), "Cruise".into())
            .implies(
                Ctl::BecomesFalse("Ignition".into())
                    .implies(Ctl::ModeEq("CC".into(), "Off".into()))
                    .ax(),
            )
            .ag();
        let compiled = compile_events(&f, &["Ignition".to_string()]).unwrap();
        assert_eq!(
            compiled.to_string(),
            "AG(CC=Cruise -> AX(PIgnition & ~Ignition -> CC=Off))"
        );
    }
}
