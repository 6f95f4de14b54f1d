//! Domain types for tabular requirements specifications.
//!
//! A specification names a set of boolean monitored variables (inputs), one
//! or more mode classes (finite-state machines over the inputs), boolean
//! controlled variables (outputs driven by per-mode event tables),
//! environmental assumptions, and goal formulas.

use crate::ctl::Ctl;
use crate::diag::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spec {
    pub name: String,
    pub monitored: Vec<MonitoredVar>,
    pub mode_classes: Vec<ModeClass>,
    pub controlled: Vec<ControlledVar>,
    pub assumptions: Vec<Assumption>,
    pub goals: Vec<Goal>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitoredVar {
    pub name: String,
    pub description: Option<String>,
    pub span: SourceSpan,
}

/// One conjunct of a guard: a variable required to be true or false.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub var: String,
    pub value: bool,
}

impl Literal {
    pub fn new(var: impl Into<String>, value: bool) -> Self {
        Literal {
            var: var.into(),
            value,
        }
    }
}

/// A guard cell row: conjunction of literals, evaluated in the old state.
pub type Conj = Vec<Literal>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventSubject {
    /// A monitored (or, for controlled tables, monitored-only) variable.
    Var(String),
    /// `inmode`: entry to / exit from the row's mode.
    Inmode,
}

/// `@T(x)` (rising) or `@F(x)` (falling) across one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventExpr {
    pub rising: bool,
    pub subject: EventSubject,
}

impl EventExpr {
    pub fn rises(var: impl Into<String>) -> Self {
        EventExpr {
            rising: true,
            subject: EventSubject::Var(var.into()),
        }
    }

    pub fn falls(var: impl Into<String>) -> Self {
        EventExpr {
            rising: false,
            subject: EventSubject::Var(var.into()),
        }
    }

    pub fn enters_mode() -> Self {
        EventExpr {
            rising: true,
            subject: EventSubject::Inmode,
        }
    }

    pub fn exits_mode() -> Self {
        EventExpr {
            rising: false,
            subject: EventSubject::Inmode,
        }
    }

    pub fn var(&self) -> Option<&str> {
        match &self.subject {
            EventSubject::Var(v) => Some(v),
            EventSubject::Inmode => None,
        }
    }
}

/// One row of a mode transition table. Well-formed rows carry exactly one
/// trigger; the parser accepts more so the checker can report them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionRow {
    pub from_mode: String,
    pub triggers: Vec<EventExpr>,
    pub guard: Conj,
    pub to_mode: String,
    pub span: SourceSpan,
}

impl TransitionRow {
    /// The single trigger of a well-formed row.
    pub fn trigger(&self) -> &EventExpr {
        &self.triggers[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeClass {
    pub name: String,
    pub modes: Vec<String>,
    pub initial_mode: String,
    /// Condition on the monitored variables in initial states.
    pub initial_condition: Conj,
    pub rows: Vec<TransitionRow>,
    pub span: SourceSpan,
}

/// One row of a controlled-variable event table: in `mode`, set the variable
/// to `sets_to` when `trigger` occurs and `when` held in the old state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtrlRow {
    pub mode: String,
    pub sets_to: bool,
    pub trigger: EventExpr,
    pub when: Option<Conj>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlledVar {
    pub name: String,
    pub initial: bool,
    pub rows: Vec<CtrlRow>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assumption {
    /// `a -->> b`: whenever a holds, b holds.
    Implies {
        antecedent: String,
        consequent: String,
        span: SourceSpan,
    },
    /// Exactly one of the group is true at any time.
    ExactlyOne { vars: Vec<String>, span: SourceSpan },
    /// At most one of the group is true at any time.
    AtMostOne { vars: Vec<String>, span: SourceSpan },
}

impl Assumption {
    pub fn operands(&self) -> Vec<&str> {
        match self {
            Assumption::Implies {
                antecedent,
                consequent,
                ..
            } => vec![antecedent, consequent],
            Assumption::ExactlyOne { vars, .. } | Assumption::AtMostOne { vars, .. } => {
                vars.iter().map(|s| s.as_str()).collect()
            }
        }
    }

    pub fn span(&self) -> &SourceSpan {
        match self {
            Assumption::Implies { span, .. }
            | Assumption::ExactlyOne { span, .. }
            | Assumption::AtMostOne { span, .. } => span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Goal {
    pub name: String,
    pub formula: Ctl,
    /// Recorded verdict for regression: Some(true) = expected to hold.
    pub expected: Option<bool>,
    pub span: SourceSpan,
}

impl Spec {
    pub fn empty(name: impl Into<String>) -> Self {
        Spec {
            name: name.into(),
            monitored: Vec::new(),
            mode_classes: Vec::new(),
            controlled: Vec::new(),
            assumptions: Vec::new(),
            goals: Vec::new(),
        }
    }

    pub fn monitored_names(&self) -> Vec<&str> {
        self.monitored.iter().map(|m| m.name.as_str()).collect()
    }

    pub fn is_monitored(&self, name: &str) -> bool {
        self.monitored.iter().any(|m| m.name == name)
    }

    pub fn is_controlled(&self, name: &str) -> bool {
        self.controlled.iter().any(|c| c.name == name)
    }

    pub fn mode_class(&self, name: &str) -> Option<&ModeClass> {
        self.mode_classes.iter().find(|mc| mc.name == name)
    }

    pub fn controlled_var(&self, name: &str) -> Option<&ControlledVar> {
        self.controlled.iter().find(|c| c.name == name)
    }

    /// Mode class that declares `mode`, if any. Mode names are unique
    /// across the specification.
    pub fn class_of_mode(&self, mode: &str) -> Option<&ModeClass> {
        self.mode_classes
            .iter()
            .find(|mc| mc.modes.iter().any(|m| m == mode))
    }

    /// Exactly-one groups the variable belongs to.
    pub fn exactly_one_group(&self, var: &str) -> Option<&[String]> {
        self.assumptions.iter().find_map(|a| match a {
            Assumption::ExactlyOne { vars, .. } if vars.iter().any(|v| v == var) => {
                Some(vars.as_slice())
            }
            _ => None,
        })
    }

    /// Resets every span to the synthetic default. Used by structural
    /// comparisons that should ignore source locations.
    pub fn strip_spans(&mut self) {
        for m in &mut self.monitored {
            m.span = SourceSpan::synthetic();
        }
        for mc in &mut self.mode_classes {
            mc.span = SourceSpan::synthetic();
            for r in &mut mc.rows {
                r.span = SourceSpan::synthetic();
            }
        }
        for c in &mut self.controlled {
            c.span = SourceSpan::synthetic();
            for r in &mut c.rows {
                r.span = SourceSpan::synthetic();
            }
        }
        for a in &mut self.assumptions {
            match a {
                Assumption::Implies { span, .. }
                | Assumption::ExactlyOne { span, .. }
                | Assumption::AtMostOne { span, .. } => *span = SourceSpan::synthetic(),
            }
        }
        for g in &mut self.goals {
            g.span = SourceSpan::synthetic();
        }
    }
}
