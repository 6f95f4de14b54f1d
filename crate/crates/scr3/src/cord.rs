//! Constant-propagation abstraction of annotated code and conformance
//! checking against the specification.
//!
//! Forward dataflow over the annotated CFG: Update writes facts, Assert
//! refines them, join points fold with a pointwise join, loops iterate to a
//! fixpoint. The resulting abstract model is compared with the spec three
//! ways: INITIAL (same starting state), ALT ("all legal transitions",
//! optimistic: findings may miss real omissions), OLT ("only legal
//! transitions", pessimistic: findings may be spurious because Unknown is
//! compatible with anything).

use std::collections::{BTreeMap, BTreeSet};

use crate::annot::{AnnAtom, AnnKind, Annotation, AnnotatedProgram, NodeKind};
use crate::ast::{Assumption, EventSubject, Spec};
use crate::ctl::Ctl;
use crate::diag::{Diagnostic, SourceSpan};

/// Three-valued fact about a boolean variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn of(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }

    fn join(self, other: Tri) -> Tri {
        if self == other {
            self
        } else {
            Tri::Unknown
        }
    }
}

/// Abstract state: a three-valued fact per boolean spec variable and a
/// nonempty mode subset per mode class (the full set meaning unknown).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbsState {
    pub bools: BTreeMap<String, Tri>,
    pub modes: BTreeMap<String, BTreeSet<String>>,
}

impl AbsState {
    pub fn top(spec: &Spec) -> AbsState {
        let mut bools = BTreeMap::new();
        for m in &spec.monitored {
            bools.insert(m.name.clone(), Tri::Unknown);
        }
        for c in &spec.controlled {
            bools.insert(c.name.clone(), Tri::Unknown);
        }
        let modes = spec
            .mode_classes
            .iter()
            .map(|mc| (mc.name.clone(), mc.modes.iter().cloned().collect()))
            .collect();
        AbsState { bools, modes }
    }

    pub fn join(&self, other: &AbsState) -> AbsState {
        let bools = self
            .bools
            .iter()
            .map(|(k, v)| {
                let o = other.bools.get(k).copied().unwrap_or(Tri::Unknown);
                (k.clone(), v.join(o))
            })
            .collect();
        let modes = self
            .modes
            .iter()
            .map(|(k, v)| {
                let mut set = v.clone();
                if let Some(o) = other.modes.get(k) {
                    set.extend(o.iter().cloned());
                }
                (k.clone(), set)
            })
            .collect();
        AbsState { bools, modes }
    }

    pub fn bool_fact(&self, var: &str) -> Tri {
        self.bools.get(var).copied().unwrap_or(Tri::Unknown)
    }
}

/// Three-valued evaluation of a propositional condition over an abstract
/// state. Temporal operators are out of scope and evaluate to Unknown.
pub fn eval3(state: &AbsState, f: &Ctl) -> Tri {
    match f {
        Ctl::True => Tri::True,
        Ctl::False => Tri::False,
        Ctl::Atom(a) => state.bool_fact(a),
        Ctl::ModeEq(class, mode) => match state.modes.get(class) {
            Some(set) if !set.contains(mode) => Tri::False,
            Some(set) if set.len() == 1 => Tri::True,
            _ => Tri::Unknown,
        },
        Ctl::Not(a) => match eval3(state, a) {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        },
        Ctl::And(a, b) => match (eval3(state, a), eval3(state, b)) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        },
        Ctl::Or(a, b) => match (eval3(state, a), eval3(state, b)) {
            (Tri::True, _) | (_, Tri::True) => Tri::True,
            (Tri::False, Tri::False) => Tri::False,
            _ => Tri::Unknown,
        },
        Ctl::Implies(a, b) => eval3(state, &Ctl::Or(Box::new(Ctl::Not(a.clone())), b.clone())),
        _ => Tri::Unknown,
    }
}

/// A mode-class transition implemented by the code: a mode-targeting Update
/// with the abstract state as of just before its triggering event.
#[derive(Debug, Clone)]
pub struct CodeTransition {
    pub pre: AbsState,
    pub event: Option<(String, bool)>,
    pub class: String,
    pub mode: String,
    pub span: SourceSpan,
}

/// A controlled-variable Update, checked OLT-style against its table.
#[derive(Debug, Clone)]
pub struct CtrlUpdate {
    pub pre: AbsState,
    pub event: Option<(String, bool)>,
    pub var: String,
    pub value: bool,
    pub span: SourceSpan,
}

/// Dataflow fact at a program point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flow {
    pub state: AbsState,
    /// Snapshot from just before the most recent monitored Update; equals
    /// `state` when no event is pending. Transition pre-states read this,
    /// because spec guards are old-state conditions.
    pub pre_event_state: AbsState,
    pub event: Option<(String, bool)>,
    /// Set when an Assert contradiction was folded over; downstream
    /// annotations are reported unreachable.
    pub infeasible: bool,
}

impl Flow {
    fn top(spec: &Spec) -> Flow {
        let s = AbsState::top(spec);
        Flow {
            pre_event_state: s.clone(),
            state: s,
            event: None,
            infeasible: false,
        }
    }

    fn join(&self, other: &Flow) -> Flow {
        Flow {
            state: self.state.join(&other.state),
            pre_event_state: self.pre_event_state.join(&other.pre_event_state),
            event: if self.event == other.event {
                self.event.clone()
            } else {
                None
            },
            infeasible: self.infeasible && other.infeasible,
        }
    }
}

#[derive(Debug)]
pub struct AbstractModel {
    /// In-flow per CFG node; None = never reached by the dataflow.
    pub points: Vec<Option<Flow>>,
    pub transitions: Vec<CodeTransition>,
    pub ctrl_updates: Vec<CtrlUpdate>,
    /// Post-state and span of the Initial annotation, when present.
    pub initial: Option<(AbsState, SourceSpan)>,
    /// Undeclared payload names and Assert contradictions.
    pub diagnostics: Vec<Diagnostic>,
}

impl AbstractModel {
    /// Distinct abstract states among the reached program points.
    pub fn distinct_states(&self) -> usize {
        let mut seen: Vec<&AbsState> = Vec::new();
        for f in self.points.iter().flatten() {
            if !seen.contains(&&f.state) {
                seen.push(&f.state);
            }
        }
        seen.len()
    }
}

enum ResolvedAtom {
    Bool { var: String, value: bool, monitored: bool },
    Mode { class: String, mode: String },
}

fn resolve_atom(atom: &AnnAtom, spec: &Spec, span: &SourceSpan) -> Result<ResolvedAtom, Diagnostic> {
    match atom {
        AnnAtom::Bool { var, value } => {
            let monitored = spec.is_monitored(var);
            let controlled = spec.is_controlled(var);
            if !monitored && !controlled {
                return Err(Diagnostic::error(
                    "undeclared-name",
                    span.clone(),
                    format!("annotation names undeclared variable `{var}`"),
                ));
            }
            Ok(ResolvedAtom::Bool {
                var: var.clone(),
                value: *value,
                monitored,
            })
        }
        AnnAtom::ModeEq { class, mode } => {
            let Some(mc) = spec.mode_class(class) else {
                return Err(Diagnostic::error(
                    "undeclared-name",
                    span.clone(),
                    format!("annotation names undeclared mode class `{class}`"),
                ));
            };
            if !mc.modes.iter().any(|m| m == mode) {
                return Err(Diagnostic::error(
                    "undeclared-name",
                    span.clone(),
                    format!("mode class `{class}` has no mode `{mode}`"),
                ));
            }
            Ok(ResolvedAtom::Mode {
                class: class.clone(),
                mode: mode.clone(),
            })
        }
    }
}

/// Applies one annotation to a flow. When `record` is given, transitions,
/// controlled updates, initial snapshots and diagnostics are collected
/// (used on the post-fixpoint pass only, so nothing is double-counted).
fn apply_annotation(
    ann: &Annotation,
    flow: &mut Flow,
    spec: &Spec,
    mut record: Option<&mut AbstractModel>,
) {
    for atom in &ann.atoms {
        let resolved = match resolve_atom(atom, spec, &ann.span) {
            Ok(r) => r,
            Err(d) => {
                if let Some(model) = record.as_deref_mut() {
                    model.diagnostics.push(d);
                }
                continue;
            }
        };
        match (ann.kind, resolved) {
            (AnnKind::Assert, ResolvedAtom::Bool { var, value, .. }) => {
                let cur = flow.state.bool_fact(&var);
                if cur != Tri::Unknown && cur != Tri::of(value) {
                    if let Some(model) = record.as_deref_mut() {
                        model.diagnostics.push(Diagnostic::error(
                            "assert-contradiction",
                            ann.span.clone(),
                            format!("Assert contradicts the incoming facts about `{var}`"),
                        ));
                    }
                    flow.infeasible = true;
                }
                flow.state.bools.insert(var.clone(), Tri::of(value));
                flow.pre_event_state.bools.insert(var, Tri::of(value));
            }
            (AnnKind::Assert, ResolvedAtom::Mode { class, mode }) => {
                let set = flow.state.modes.get_mut(&class).unwrap();
                if !set.contains(&mode) {
                    if let Some(model) = record.as_deref_mut() {
                        model.diagnostics.push(Diagnostic::error(
                            "assert-contradiction",
                            ann.span.clone(),
                            format!("Assert contradicts the incoming mode facts for `{class}`"),
                        ));
                    }
                    flow.infeasible = true;
                }
                *set = std::iter::once(mode.clone()).collect();
                flow.pre_event_state
                    .modes
                    .insert(class, std::iter::once(mode).collect());
            }
            (AnnKind::Initial, ResolvedAtom::Bool { var, value, .. }) => {
                flow.state.bools.insert(var.clone(), Tri::of(value));
                flow.pre_event_state.bools.insert(var, Tri::of(value));
            }
            (AnnKind::Initial, ResolvedAtom::Mode { class, mode }) => {
                let set: BTreeSet<String> = std::iter::once(mode).collect();
                flow.state.modes.insert(class.clone(), set.clone());
                flow.pre_event_state.modes.insert(class, set);
            }
            (
                AnnKind::Update,
                ResolvedAtom::Bool {
                    var,
                    value,
                    monitored,
                    ..
                },
            ) => {
                if monitored {
                    flow.pre_event_state = flow.state.clone();
                    flow.event = Some((var.clone(), value));
                    flow.state.bools.insert(var, Tri::of(value));
                } else {
                    // controlled update: record against its table
                    if let Some(model) = record.as_deref_mut() {
                        model.ctrl_updates.push(CtrlUpdate {
                            pre: flow.pre_event_state.clone(),
                            event: flow.event.clone(),
                            var: var.clone(),
                            value,
                            span: ann.span.clone(),
                        });
                    }
                    flow.state.bools.insert(var.clone(), Tri::of(value));
                    flow.pre_event_state.bools.insert(var, Tri::of(value));
                }
            }
            (AnnKind::Update, ResolvedAtom::Mode { class, mode }) => {
                if let Some(model) = record.as_deref_mut() {
                    model.transitions.push(CodeTransition {
                        pre: flow.pre_event_state.clone(),
                        event: flow.event.clone(),
                        class: class.clone(),
                        mode: mode.clone(),
                        span: ann.span.clone(),
                    });
                }
                flow.state
                    .modes
                    .insert(class.clone(), std::iter::once(mode).collect());
                // the event is consumed by the mode change
                flow.event = None;
                flow.pre_event_state = flow.state.clone();
            }
        }
    }
    if ann.kind == AnnKind::Initial {
        if let Some(model) = record {
            if model.initial.is_none() {
                model.initial = Some((flow.state.clone(), ann.span.clone()));
            }
        }
    }
}

fn transfer(node: &NodeKind, ann_span_flow: &mut Flow, spec: &Spec) {
    if let NodeKind::Annot(ann) = node {
        apply_annotation(ann, ann_span_flow, spec, None);
    }
    // branch conditions deliberately do not refine the state; only Assert
    // carries precision, matching the annotation-driven analysis design
}

/// Runs the forward dataflow to fixpoint and extracts the abstract model.
pub fn build_abstraction(program: &AnnotatedProgram, spec: &Spec) -> AbstractModel {
    let cfg = &program.cfg;
    let n = cfg.nodes.len();
    let mut in_flow: Vec<Option<Flow>> = vec![None; n];
    in_flow[cfg.entry] = Some(Flow::top(spec));

    // chaotic iteration; the lattice is finite so this terminates
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            let Some(flow) = in_flow[i].clone() else {
                continue;
            };
            let mut out = flow;
            transfer(&cfg.nodes[i].kind, &mut out, spec);
            for &s in &cfg.succ[i] {
                let merged = match &in_flow[s] {
                    None => out.clone(),
                    Some(prev) => prev.join(&out),
                };
                if in_flow[s].as_ref() != Some(&merged) {
                    in_flow[s] = Some(merged);
                    changed = true;
                }
            }
        }
    }

    let mut model = AbstractModel {
        points: in_flow.clone(),
        transitions: Vec::new(),
        ctrl_updates: Vec::new(),
        initial: None,
        diagnostics: Vec::new(),
    };
    for (node, flow) in cfg.nodes.iter().zip(&in_flow) {
        if let (NodeKind::Annot(ann), Some(flow)) = (&node.kind, flow) {
            let mut f = flow.clone();
            apply_annotation(ann, &mut f, spec, Some(&mut model));
        }
    }
    model
}

// ---------------------------------------------------------------------------
// Conformance

#[derive(Debug, Default)]
pub struct ConformanceReport {
    pub initial: Vec<Diagnostic>,
    /// Missing spec transitions ("all legal transitions"; optimistic).
    pub alt: Vec<Diagnostic>,
    /// Code transitions/updates the spec does not license ("only legal
    /// transitions"; pessimistic).
    pub olt: Vec<Diagnostic>,
}

impl ConformanceReport {
    pub fn is_clean(&self) -> bool {
        self.initial.is_empty() && self.alt.is_empty() && self.olt.is_empty()
    }
}

fn event_matches_trigger(
    event: &Option<(String, bool)>,
    trigger_var: &str,
    rising: bool,
) -> bool {
    match event {
        None => true, // unknown event: compatible with any trigger
        Some((v, val)) => v == trigger_var && *val == rising,
    }
}

fn guard_compatible(pre: &AbsState, guard: &[crate::ast::Literal]) -> bool {
    guard.iter().all(|lit| {
        let fact = pre.bool_fact(&lit.var);
        fact == Tri::Unknown || fact == Tri::of(lit.value)
    })
}

/// Compares the abstraction with the specification: INITIAL, ALT, OLT.
pub fn check_conformance(abs: &AbstractModel, spec: &Spec) -> ConformanceReport {
    let mut report = ConformanceReport::default();

    // INITIAL: the Initial annotation must entail every mode class's
    // initial mode and initial condition.
    match &abs.initial {
        None => {
            if !spec.mode_classes.is_empty() {
                report.initial.push(Diagnostic::error(
                    "initial-missing",
                    SourceSpan::synthetic(),
                    "code has no Initial annotation to compare with the specification",
                ));
            }
        }
        Some((state, span)) => {
            for mc in &spec.mode_classes {
                let set = &state.modes[&mc.name];
                if !(set.len() == 1 && set.contains(&mc.initial_mode)) {
                    report.initial.push(Diagnostic::error(
                        "initial-mismatch",
                        span.clone(),
                        format!(
                            "Initial annotation does not entail {} = {}",
                            mc.name, mc.initial_mode
                        ),
                    ));
                }
                for lit in &mc.initial_condition {
                    if state.bool_fact(&lit.var) != Tri::of(lit.value) {
                        report.initial.push(Diagnostic::error(
                            "initial-mismatch",
                            span.clone(),
                            format!(
                                "Initial annotation does not entail {}{}",
                                if lit.value { "" } else { "~" },
                                lit.var
                            ),
                        ));
                    }
                }
            }
        }
    }

    // ALT: every spec row needs a compatible code transition (optimistic:
    // compatibility is non-contradiction, so a reported row is genuinely
    // absent but an unreported row may still be wrong).
    for mc in &spec.mode_classes {
        for row in &mc.rows {
            let trig = row.trigger();
            let Some(tv) = trig.var() else { continue };
            let matched = abs.transitions.iter().any(|t| {
                t.class == mc.name
                    && t.mode == row.to_mode
                    && event_matches_trigger(&t.event, tv, trig.rising)
                    && t.pre.modes[&mc.name].contains(&row.from_mode)
                    && guard_compatible(&t.pre, &row.guard)
            });
            if !matched {
                report.alt.push(Diagnostic::error(
                    "alt-missing-transition",
                    row.span.clone(),
                    format!(
                        "no code transition implements {} -> {} on @{}({}) [optimistic]",
                        row.from_mode,
                        row.to_mode,
                        if trig.rising { "T" } else { "F" },
                        tv
                    ),
                ));
            }
        }
    }

    // OLT: every code transition needs at least one licensing spec row
    // (pessimistic: Unknown facts are compatible with anything, so a clean
    // transition never shows up, but a reported one may be a false alarm).
    for t in &abs.transitions {
        let Some(mc) = spec.mode_class(&t.class) else {
            continue;
        };
        let licensed = mc.rows.iter().any(|row| {
            let trig = row.trigger();
            let Some(tv) = trig.var() else { return false };
            row.to_mode == t.mode
                && event_matches_trigger(&t.event, tv, trig.rising)
                && t.pre.modes[&mc.name].contains(&row.from_mode)
                && guard_compatible(&t.pre, &row.guard)
        });
        if !licensed {
            report.olt.push(Diagnostic::error(
                "olt-illegal-transition",
                t.span.clone(),
                format!(
                    "transition to {} = {} is not licensed by the specification [pessimistic]",
                    t.class, t.mode
                ),
            ));
        }
    }
    for u in &abs.ctrl_updates {
        let Some(cv) = spec.controlled_var(&u.var) else {
            continue;
        };
        let licensed = cv.rows.iter().any(|row| {
            if row.sets_to != u.value {
                return false;
            }
            let Some(mc) = spec.class_of_mode(&row.mode) else {
                return false;
            };
            let mode_ok = u.pre.modes[&mc.name].contains(&row.mode);
            let trig_ok = match &row.trigger.subject {
                EventSubject::Var(v) => event_matches_trigger(&u.event, v, row.trigger.rising),
                // mode-entry/exit triggers fire on mode changes, which the
                // event attribution cannot see; stay optimistic
                EventSubject::Inmode => true,
            };
            let when_ok = row
                .when
                .as_ref()
                .map(|w| guard_compatible(&u.pre, w))
                .unwrap_or(true);
            mode_ok && trig_ok && when_ok
        });
        if !licensed {
            report.olt.push(Diagnostic::error(
                "olt-illegal-update",
                u.span.clone(),
                format!(
                    "update of `{}` to {} is not licensed by its table [pessimistic]",
                    u.var, u.value
                ),
            ));
        }
    }

    report
}

// ---------------------------------------------------------------------------
// Invariant / reachability / assumption / unreachable-annotation checks

#[derive(Debug, Default)]
pub struct CodeProperties {
    pub invariant_violations: Vec<Diagnostic>,
    /// Per queried condition: its text and whether some program point is
    /// compatible with it (optimistic reachability).
    pub reachability: Vec<(String, bool)>,
    pub assumption_violations: Vec<Diagnostic>,
    pub unreachable_annotations: Vec<Diagnostic>,
}

fn assumption_definitely_violated(state: &AbsState, a: &Assumption) -> bool {
    match a {
        Assumption::Implies {
            antecedent,
            consequent,
            ..
        } => state.bool_fact(antecedent) == Tri::True && state.bool_fact(consequent) == Tri::False,
        Assumption::ExactlyOne { vars, .. } => {
            let trues = vars
                .iter()
                .filter(|v| state.bool_fact(v) == Tri::True)
                .count();
            let falses = vars
                .iter()
                .filter(|v| state.bool_fact(v) == Tri::False)
                .count();
            trues > 1 || falses == vars.len()
        }
        Assumption::AtMostOne { vars, .. } => {
            vars.iter()
                .filter(|v| state.bool_fact(v) == Tri::True)
                .count()
                > 1
        }
    }
}

/// Evaluates invariants, reachability queries and assumption discipline over
/// the program-point states, and lists annotations the dataflow never
/// feasibly reaches.
pub fn check_code_properties(
    abs: &AbstractModel,
    program: &AnnotatedProgram,
    spec: &Spec,
    invariants: &[Ctl],
    reach: &[Ctl],
) -> CodeProperties {
    let mut out = CodeProperties::default();
    let cfg = &program.cfg;

    let reached: Vec<(usize, &Flow)> = abs
        .points
        .iter()
        .enumerate()
        .filter_map(|(i, f)| f.as_ref().map(|f| (i, f)))
        .filter(|(_, f)| !f.infeasible)
        .collect();

    for inv in invariants {
        for (i, flow) in &reached {
            if eval3(&flow.state, inv) == Tri::False {
                out.invariant_violations.push(Diagnostic::error(
                    "invariant-violation",
                    cfg.nodes[*i].span.clone(),
                    format!("facts at this point contradict invariant {inv} [pessimistic]"),
                ));
                break; // one report per invariant
            }
        }
    }

    for r in reach {
        let reachable = reached
            .iter()
            .any(|(_, flow)| eval3(&flow.state, r) != Tri::False);
        out.reachability.push((r.to_string(), reachable));
    }

    for a in &spec.assumptions {
        for (i, flow) in &reached {
            if assumption_definitely_violated(&flow.state, a) {
                out.assumption_violations.push(Diagnostic::error(
                    "assumption-violation",
                    cfg.nodes[*i].span.clone(),
                    "facts at this point violate an environmental assumption",
                ));
                break; // one report per assumption
            }
        }
    }

    for (i, node) in cfg.nodes.iter().enumerate() {
        if let NodeKind::Annot(_) = node.kind {
            let feasible = abs.points[i]
                .as_ref()
                .map(|f| !f.infeasible)
                .unwrap_or(false);
            if !feasible {
                out.unreachable_annotations.push(Diagnostic::warning(
                    "unreachable-annotation",
                    node.span.clone(),
                    "dataflow never feasibly reaches this annotation",
                ));
            }
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annot::{parse_annotated_source, sac_check, parse_correspondences};
    use crate::parse::{parse_goal, parse_spec};

    const FRAGMENT: &str = r#"
int main(void) {
    if (!vIgnition) {
      @@ Assert ~Ignition;
      vIgnition = true;
      @@ Update Ignition;
      vCC = mInactive;
      @@ Update CC=Inactive;
    }
    else {
      @@ Assert Ignition;
      vIgnition = false;
      @@ Update ~Ignition;
      vCC = mOff;
      @@ Update CC=Off;
    }
    return 0;
}
"#;

    fn mini_spec() -> Spec {
        parse_spec(
            "spec mini\nmonitored Ignition\nmodeclass CC {\n  modes Off, Inactive;\n  initial Off when ~Ignition;\n  from Off to Inactive on @T(Ignition);\n  from Inactive to Off on @F(Ignition);\n}\n",
        )
        .unwrap()
    }

    fn abstraction(src: &str, spec: &Spec) -> (AnnotatedProgram, AbstractModel) {
        let prog = parse_annotated_source(src, "t.c").unwrap();
        let abs = build_abstraction(&prog, spec);
        (prog, abs)
    }

    #[test]
    fn fragment_yields_two_transitions_with_old_state_pres() {
        let (_, abs) = abstraction(FRAGMENT, &mini_spec());
        assert!(abs.diagnostics.is_empty(), "{:?}", abs.diagnostics);
        assert_eq!(abs.transitions.len(), 2);
        let to_inactive = abs
            .transitions
            .iter()
            .find(|t| t.mode == "Inactive")
            .unwrap();
        assert_eq!(to_inactive.class, "CC");
        assert_eq!(to_inactive.event, Some(("Ignition".to_string(), true)));
        assert_eq!(to_inactive.pre.bool_fact("Ignition"), Tri::False);
        assert_eq!(to_inactive.pre.modes["CC"].len(), 2, "mode unknown");
        let to_off = abs.transitions.iter().find(|t| t.mode == "Off").unwrap();
        assert_eq!(to_off.event, Some(("Ignition".to_string(), false)));
        assert_eq!(to_off.pre.bool_fact("Ignition"), Tri::True);
    }

    #[test]
    fn initial_only_program_has_no_transitions() {
        let (_, abs) = abstraction(
            "void main() {\n  @@ Initial ~Ignition & CC=Off;\n}\n",
            &mini_spec(),
        );
        assert!(abs.transitions.is_empty());
        let (state, _) = abs.initial.as_ref().unwrap();
        assert_eq!(state.bool_fact("Ignition"), Tri::False);
        assert_eq!(state.modes["CC"].len(), 1);
    }

    #[test]
    fn join_of_opposite_writes_is_unknown() {
        let spec = parse_spec(
            "spec s\nmonitored x\nmonitored c\nmodeclass M {\n  modes A;\n  initial A when true;\n}\n",
        )
        .unwrap();
        let (prog, abs) = abstraction(
            "void main() {\n  if (c) {\n    @@ Update x;\n  } else {\n    @@ Update ~x;\n  }\n  y = 1;\n}\n",
            &spec,
        );
        let after = prog
            .cfg
            .nodes
            .iter()
            .position(|n| matches!(&n.kind, NodeKind::Assign { var, .. } if var == "y"))
            .unwrap();
        let flow = abs.points[after].as_ref().unwrap();
        assert_eq!(flow.state.bool_fact("x"), Tri::Unknown);
    }

    #[test]
    fn assert_contradiction_reports_and_continues() {
        let (prog, abs) = abstraction(
            "void main() {\n  @@ Assert Ignition;\n  @@ Assert ~Ignition;\n  @@ Update CC=Off;\n}\n",
            &mini_spec(),
        );
        assert!(abs
            .diagnostics
            .iter()
            .any(|d| d.code == "assert-contradiction"));
        // analysis continues with the asserted value
        assert_eq!(abs.transitions.len(), 1);
        let props = check_code_properties(&abs, &prog, &mini_spec(), &[], &[]);
        assert!(!props.unreachable_annotations.is_empty());
    }

    #[test]
    fn undeclared_payload_name_is_reported() {
        let (_, abs) = abstraction("void main() {\n  @@ Update Ghost;\n}\n", &mini_spec());
        assert!(abs.diagnostics.iter().any(|d| d.code == "undeclared-name"));
    }

    #[test]
    fn fragment_conforms_except_initial() {
        let spec = mini_spec();
        let (_, abs) = abstraction(FRAGMENT, &spec);
        let report = check_conformance(&abs, &spec);
        assert!(report.alt.is_empty(), "{:?}", report.alt);
        assert!(report.olt.is_empty(), "{:?}", report.olt);
        // the fragment carries no Initial annotation
        assert_eq!(report.initial.len(), 1);
        assert_eq!(report.initial[0].code, "initial-missing");
    }

    #[test]
    fn empty_implementation_reports_every_row_under_alt() {
        let spec = mini_spec();
        let (_, abs) = abstraction("void main() {\n  @@ Initial ~Ignition & CC=Off;\n}\n", &spec);
        let report = check_conformance(&abs, &spec);
        assert!(report.initial.is_empty(), "{:?}", report.initial);
        assert_eq!(report.alt.len(), 2);
        assert!(report.olt.is_empty());
    }

    #[test]
    fn wrong_target_mode_yields_one_olt_and_one_alt() {
        let spec = parse_spec(
            "spec s\nmonitored Ignition\nmonitored Brake\nmodeclass CC {\n  modes Off, Cruise, Override;\n  initial Off when ~Ignition;\n  from Off to Cruise on @T(Ignition);\n  from Cruise to Off on @F(Ignition);\n  from Override to Off on @F(Ignition);\n}\n",
        )
        .unwrap();
        // code goes to Override where the spec row says Cruise
        let src = "void main() {\n  @@ Initial ~Ignition & CC=Off;\n  if (go) {\n    @@ Assert ~Ignition;\n    vIgnition = 1;\n    @@ Update Ignition;\n    @@ Update CC=Override;\n  } else {\n    @@ Assert Ignition;\n    @@ Assert CC=Cruise;\n    vIgnition = 0;\n    @@ Update ~Ignition;\n    @@ Update CC=Off;\n  }\n}\n";
        let (_, abs) = abstraction(src, &spec);
        let report = check_conformance(&abs, &spec);
        let olt: Vec<_> = report
            .olt
            .iter()
            .filter(|d| d.code == "olt-illegal-transition")
            .collect();
        assert_eq!(olt.len(), 1, "{:?}", report.olt);
        let alt: Vec<_> = report
            .alt
            .iter()
            .filter(|d| d.message.contains("Off -> Cruise"))
            .collect();
        assert_eq!(alt.len(), 1, "{:?}", report.alt);
    }

    #[test]
    fn assumption_violation_is_found_from_definite_facts() {
        let spec = parse_spec(
            "spec s\nmonitored Ignition\nmonitored Running\nassumption Running -->> Ignition\nmodeclass M {\n  modes A;\n  initial A when true;\n}\n",
        )
        .unwrap();
        let (prog, abs) = abstraction(
            "void main() {\n  @@ Assert Running;\n  vIgnition = 0;\n  @@ Update ~Ignition;\n}\n",
            &spec,
        );
        let props = check_code_properties(&abs, &prog, &spec, &[], &[]);
        assert_eq!(props.assumption_violations.len(), 1);
    }

    #[test]
    fn invariant_holds_on_fragment() {
        let spec = parse_spec(
            "spec s\nmonitored Ignition\nmonitored Running\nmodeclass CC {\n  modes Off, Inactive;\n  initial Off when ~Ignition;\n  from Off to Inactive on @T(Ignition);\n  from Inactive to Off on @F(Ignition);\n}\n",
        )
        .unwrap();
        let (prog, abs) = abstraction(FRAGMENT, &spec);
        let inv = parse_goal("Ignition | ~Running").unwrap();
        let props = check_code_properties(&abs, &prog, &spec, &[inv], &[]);
        assert!(props.invariant_violations.is_empty());
    }

    #[test]
    fn definite_invariant_violation_is_reported() {
        let spec = mini_spec();
        let (prog, abs) = abstraction(
            "void main() {\n  @@ Assert ~Ignition;\n  @@ Update CC=Inactive;\n}\n",
            &spec,
        );
        let inv = parse_goal("CC=Inactive -> Ignition").unwrap();
        let props = check_code_properties(&abs, &prog, &spec, &[inv], &[]);
        assert_eq!(props.invariant_violations.len(), 1);
    }

    #[test]
    fn reachability_is_optimistic() {
        let spec = mini_spec();
        let (prog, abs) = abstraction(FRAGMENT, &spec);
        let yes = parse_goal("CC=Inactive").unwrap();
        let props = check_code_properties(&abs, &prog, &spec, &[], &[yes]);
        assert_eq!(props.reachability, [("CC=Inactive".to_string(), true)]);
    }

    #[test]
    fn state_count_respects_annotation_bound() {
        let spec = mini_spec();
        let (prog, abs) = abstraction(FRAGMENT, &spec);
        let annotations = prog.annotations().count();
        let structures = prog
            .cfg
            .nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Branch { .. } | NodeKind::Join))
            .count();
        assert!(abs.distinct_states() <= annotations + structures);
    }

    #[test]
    fn fragment_sac_and_cord_agree_it_is_clean() {
        let prog = parse_annotated_source(FRAGMENT, "t.c").unwrap();
        let cor =
            parse_correspondences("{Ignition} -> {vIgnition};\n{CC} -> {vCC};", "t.cor").unwrap();
        assert!(sac_check(&prog, &cor).is_empty());
        let abs = build_abstraction(&prog, &mini_spec());
        assert!(abs.diagnostics.is_empty());
    }
}
