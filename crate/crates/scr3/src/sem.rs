//! Operational semantics: assumption detailing, goal-directed slicing, and
//! explicit construction of the reachable state graph.
//!
//! The step semantics is single-input-change: along every edge exactly one
//! monitored variable flips. The one exception is an exactly-one enumeration
//! group, where the rising member and the previously-true member change as a
//! pair and the pair still counts as one input event. Guards and WHEN
//! conditions read the old state; the trigger spans old to new.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::*;
use crate::ctl::Ctl;
use crate::diag::{Diagnostic, SourceSpan};
use crate::wf::dependency_graph;

/// Default cap on the number of monitored variables a model may have.
pub const DEFAULT_STATE_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum SemError {
    #[error("{0} variables after slicing exceeds the cap of {1}; slice the spec or raise the cap")]
    TooManyVariables(usize, usize),
    #[error("nondeterminism in table `{table}`: rows at {spans:?} enabled simultaneously in a concrete step")]
    Nondeterminism { table: String, spans: Vec<SourceSpan> },
    #[error("state has no outgoing transitions; the checker requires a total transition relation")]
    Deadlock,
    #[error("goal mentions undeclared name `{0}`")]
    UndeclaredInGoal(String),
    #[error("tracked variable `{0}` is neither monitored nor controlled")]
    BadTrackedVar(String),
    #[error("state is not part of the model")]
    UnknownState,
    #[error("detailing contradiction: {0}")]
    Contradiction(Diagnostic),
}

/// One concrete system state: current values plus previous values for the
/// variables tracked on behalf of event operators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SystemState {
    pub monitored: BTreeMap<String, bool>,
    pub modes: BTreeMap<String, String>,
    pub controlled: BTreeMap<String, bool>,
    pub prev: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeTo {
    /// The monitored variable the environment changed (the rising member
    /// for a paired enumeration-group change). Empty for a stutter edge,
    /// which stands for a change to a variable sliced out of the model.
    pub label: String,
    pub new_value: bool,
    pub target: usize,
}

impl EdgeTo {
    pub fn is_stutter(&self) -> bool {
        self.label.is_empty()
    }
}

/// Explicit finite state graph. Immutable once built.
#[derive(Debug, Clone)]
pub struct KripkeModel {
    pub states: Vec<SystemState>,
    pub initial: Vec<usize>,
    pub succs: Vec<Vec<EdgeTo>>,
    pub preds: Vec<Vec<usize>>,
    pub tracked: Vec<String>,
}

impl KripkeModel {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &SystemState) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    /// Outgoing edges of a state, in stable label order.
    pub fn successors(&self, state: &SystemState) -> Result<&[EdgeTo], SemError> {
        let idx = self.index_of(state).ok_or(SemError::UnknownState)?;
        Ok(&self.succs[idx])
    }

    /// Deterministic text listing for oracle diffing.
    pub fn dump(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "states {} initial {:?}",
            self.states.len(),
            self.initial
        );
        for (i, s) in self.states.iter().enumerate() {
            let _ = write!(out, "state {i}:");
            for (k, v) in &s.modes {
                let _ = write!(out, " {k}={v}");
            }
            for (k, v) in &s.monitored {
                let _ = write!(out, " {k}={}", if *v { "t" } else { "f" });
            }
            for (k, v) in &s.controlled {
                let _ = write!(out, " {k}={}", if *v { "t" } else { "f" });
            }
            for (k, v) in &s.prev {
                let _ = write!(out, " P{k}={}", if *v { "t" } else { "f" });
            }
            let _ = writeln!(out);
            for e in &self.succs[i] {
                let _ = writeln!(out, "  -> {} on {}:={}", e.target, e.label, e.new_value);
            }
        }
        out
    }
}

fn assumptions_hold(spec: &Spec, vals: &BTreeMap<String, bool>) -> bool {
    for a in &spec.assumptions {
        match a {
            Assumption::Implies {
                antecedent,
                consequent,
                ..
            } => {
                if vals.get(antecedent).copied().unwrap_or(false)
                    && !vals.get(consequent).copied().unwrap_or(true)
                {
                    return false;
                }
            }
            Assumption::ExactlyOne { vars, .. } => {
                if vars.iter().all(|v| vals.contains_key(v)) {
                    let n = vars.iter().filter(|v| vals[*v]).count();
                    if n != 1 {
                        return false;
                    }
                }
            }
            Assumption::AtMostOne { vars, .. } => {
                let n = vars
                    .iter()
                    .filter(|v| vals.get(*v).copied().unwrap_or(false))
                    .count();
                if n > 1 {
                    return false;
                }
            }
        }
    }
    true
}

/// Closes a set of old-state facts under the assumptions. Returns the forced
/// facts or `None` on contradiction.
fn assumption_closure(
    spec: &Spec,
    mut facts: BTreeMap<String, bool>,
) -> Option<BTreeMap<String, bool>> {
    let set = |facts: &mut BTreeMap<String, bool>, var: &str, val: bool| -> Option<bool> {
        match facts.get(var) {
            Some(&old) if old != val => None,
            Some(_) => Some(false),
            None => {
                facts.insert(var.to_string(), val);
                Some(true)
            }
        }
    };
    loop {
        let mut changed = false;
        for a in &spec.assumptions {
            match a {
                Assumption::Implies {
                    antecedent,
                    consequent,
                    ..
                } => {
                    if facts.get(antecedent) == Some(&true) {
                        changed |= set(&mut facts, consequent, true)?;
                    }
                    if facts.get(consequent) == Some(&false) {
                        changed |= set(&mut facts, antecedent, false)?;
                    }
                }
                Assumption::ExactlyOne { vars, .. } => {
                    if let Some(t) = vars.iter().find(|v| facts.get(*v) == Some(&true)) {
                        for v in vars {
                            if v != t {
                                changed |= set(&mut facts, v, false)?;
                            }
                        }
                    }
                    let unknown: Vec<&String> =
                        vars.iter().filter(|v| !facts.contains_key(*v)).collect();
                    let false_count = vars.iter().filter(|v| facts.get(*v) == Some(&false)).count();
                    if false_count == vars.len() {
                        return None;
                    }
                    if unknown.len() == 1 && false_count == vars.len() - 1 {
                        let only = unknown[0].clone();
                        changed |= set(&mut facts, &only, true)?;
                    }
                }
                Assumption::AtMostOne { vars, .. } => {
                    if let Some(t) = vars.iter().find(|v| facts.get(*v) == Some(&true)) {
                        for v in vars {
                            if v != t {
                                changed |= set(&mut facts, v, false)?;
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            return Some(facts);
        }
    }
}

fn detail_guard(
    spec: &Spec,
    trigger: &EventExpr,
    guard: &Conj,
    span: &SourceSpan,
) -> Result<Conj, SemError> {
    let mut facts: BTreeMap<String, bool> = BTreeMap::new();
    for lit in guard {
        facts.insert(lit.var.clone(), lit.value);
    }
    let trigger_var = trigger.var().map(|s| s.to_string());
    if let Some(v) = &trigger_var {
        // old-state value implied by the trigger direction
        facts.insert(v.clone(), !trigger.rising);
    }
    let closed = assumption_closure(spec, facts).ok_or_else(|| {
        SemError::Contradiction(Diagnostic::error(
            "detail-contradiction",
            span.clone(),
            "assumption detailing makes this row unsatisfiable",
        ))
    })?;
    let mut out = guard.clone();
    let mentioned: Vec<String> = guard.iter().map(|l| l.var.clone()).collect();
    let mut added: Vec<Literal> = closed
        .into_iter()
        .filter(|(v, _)| Some(v) != trigger_var.as_ref() && !mentioned.contains(v))
        .map(|(var, value)| Literal { var, value })
        .collect();
    added.sort();
    out.extend(added);
    Ok(out)
}

/// Strengthens every row's guard with the literals the assumptions force,
/// given the row's trigger and existing guard. Semantics-preserving on
/// assumption-satisfying states.
pub fn detail_with_assumptions(spec: &Spec) -> Result<Spec, SemError> {
    let mut out = spec.clone();
    for mc in &mut out.mode_classes {
        for row in &mut mc.rows {
            if row.triggers.len() == 1 {
                row.guard = detail_guard(spec, &row.triggers[0], &row.guard, &row.span)?;
            }
        }
    }
    for c in &mut out.controlled {
        for row in &mut c.rows {
            let base = row.when.clone().unwrap_or_default();
            let detailed = detail_guard(spec, &row.trigger, &base, &row.span)?;
            row.when = if detailed.is_empty() {
                None
            } else {
                Some(detailed)
            };
        }
    }
    Ok(out)
}

/// Names a goal formula pulls into a slice before closure.
pub fn goal_seeds(spec: &Spec, goals: &[Goal]) -> Result<Vec<String>, SemError> {
    let mut seeds = Vec::new();
    for g in goals {
        for a in g.formula.atoms() {
            if !spec.is_monitored(&a) && !spec.is_controlled(&a) {
                return Err(SemError::UndeclaredInGoal(a));
            }
            seeds.push(a);
        }
        for c in g.formula.mode_classes() {
            if spec.mode_class(&c).is_none() {
                return Err(SemError::UndeclaredInGoal(c));
            }
            seeds.push(c);
        }
    }
    seeds.sort();
    seeds.dedup();
    Ok(seeds)
}

/// Restricts the spec to the dependency closure of the names the goals
/// mention. Assumptions survive when all their operands do.
pub fn slice(spec: &Spec, goals: &[Goal]) -> Result<Spec, SemError> {
    let graph = dependency_graph(spec);
    let keep = graph.reachable(goal_seeds(spec, goals)?);
    let mut out = Spec::empty(spec.name.clone());
    out.monitored = spec
        .monitored
        .iter()
        .filter(|m| keep.contains(&m.name))
        .cloned()
        .collect();
    out.mode_classes = spec
        .mode_classes
        .iter()
        .filter(|mc| keep.contains(&mc.name))
        .cloned()
        .collect();
    out.controlled = spec
        .controlled
        .iter()
        .filter(|c| keep.contains(&c.name))
        .cloned()
        .collect();
    out.assumptions = spec
        .assumptions
        .iter()
        .filter(|a| a.operands().iter().all(|o| keep.contains(*o)))
        .cloned()
        .collect();
    out.goals = goals.to_vec();
    Ok(out)
}

/// The input events available in a state: one per plain monitored-variable
/// flip, one per rising member of an exactly-one group (paired with the
/// falling current member). Sorted by label.
fn input_events(spec: &Spec, monitored: &BTreeMap<String, bool>) -> Vec<(String, BTreeMap<String, bool>)> {
    let mut out = Vec::new();
    for (var, &cur) in monitored {
        let mut new = monitored.clone();
        if let Some(group) = spec.exactly_one_group(var) {
            if cur {
                continue; // falls only as the pair of another member rising
            }
            new.insert(var.clone(), true);
            for g in group {
                if g != var {
                    if let Some(v) = new.get_mut(g) {
                        *v = false;
                    }
                }
            }
        } else {
            new.insert(var.clone(), !cur);
        }
        if assumptions_hold(spec, &new) {
            out.push((var.clone(), new));
        }
    }
    out
}

fn guard_holds(guard: &Conj, old: &BTreeMap<String, bool>) -> bool {
    guard
        .iter()
        .all(|lit| old.get(&lit.var).copied() == Some(lit.value))
}

/// Applies one input event to a state: updates every mode class by its
/// unique enabled row, then every controlled variable by its unique enabled
/// row against the new modes.
fn step(
    spec: &Spec,
    state: &SystemState,
    new_monitored: &BTreeMap<String, bool>,
    tracked: &[String],
) -> Result<SystemState, SemError> {
    let fired = |ev: &EventExpr| -> bool {
        match ev.var() {
            Some(v) => {
                let old = state.monitored.get(v).copied();
                let new = new_monitored.get(v).copied();
                match (old, new) {
                    (Some(o), Some(n)) => {
                        if ev.rising {
                            !o && n
                        } else {
                            o && !n
                        }
                    }
                    _ => false,
                }
            }
            None => false,
        }
    };

    let mut new_modes = state.modes.clone();
    for mc in &spec.mode_classes {
        let cur = &state.modes[&mc.name];
        let enabled: Vec<&TransitionRow> = mc
            .rows
            .iter()
            .filter(|r| {
                r.from_mode == *cur
                    && r.triggers.len() == 1
                    && fired(&r.triggers[0])
                    && guard_holds(&r.guard, &state.monitored)
            })
            .collect();
        match enabled.len() {
            0 => {}
            1 => {
                new_modes.insert(mc.name.clone(), enabled[0].to_mode.clone());
            }
            _ => {
                return Err(SemError::Nondeterminism {
                    table: mc.name.clone(),
                    spans: enabled.iter().map(|r| r.span.clone()).collect(),
                })
            }
        }
    }

    let mut new_controlled = state.controlled.clone();
    for c in &spec.controlled {
        let enabled: Vec<&CtrlRow> = c
            .rows
            .iter()
            .filter(|r| {
                let Some(mc) = spec.class_of_mode(&r.mode) else {
                    return false;
                };
                let old_mode = &state.modes[&mc.name];
                let new_mode = &new_modes[&mc.name];
                let trig_ok = match &r.trigger.subject {
                    EventSubject::Var(_) => *new_mode == r.mode && fired(&r.trigger),
                    EventSubject::Inmode => {
                        if r.trigger.rising {
                            *old_mode != r.mode && *new_mode == r.mode
                        } else {
                            *old_mode == r.mode && *new_mode != r.mode
                        }
                    }
                };
                trig_ok
                    && r.when
                        .as_ref()
                        .map(|w| guard_holds(w, &state.monitored))
                        .unwrap_or(true)
            })
            .collect();
        match enabled.len() {
            0 => {}
            1 => {
                new_controlled.insert(c.name.clone(), enabled[0].sets_to);
            }
            _ => {
                return Err(SemError::Nondeterminism {
                    table: c.name.clone(),
                    spans: enabled.iter().map(|r| r.span.clone()).collect(),
                })
            }
        }
    }

    let mut prev = BTreeMap::new();
    for t in tracked {
        let old = state
            .monitored
            .get(t)
            .or_else(|| state.controlled.get(t))
            .copied()
            .ok_or_else(|| SemError::BadTrackedVar(t.clone()))?;
        prev.insert(t.clone(), old);
    }

    Ok(SystemState {
        monitored: new_monitored.clone(),
        modes: new_modes,
        controlled: new_controlled,
        prev,
    })
}

/// Builds the reachable state graph. `tracked` lists the variables whose
/// previous values the states must carry (the goals' event operands).
pub fn build_model(spec: &Spec, tracked: &[String], cap: usize) -> Result<KripkeModel, SemError> {
    build_model_opts(spec, tracked, cap, false)
}

/// Like [`build_model`], optionally adding a stutter edge to every state.
/// A sliced spec needs stutter edges: in the full system the environment can
/// change a variable the slice dropped, which keeps every kept variable
/// fixed but still advances time (and so clears pending events). The edge
/// target therefore re-snapshots the previous values rather than looping on
/// the exact same state.
pub fn build_model_opts(
    spec: &Spec,
    tracked: &[String],
    cap: usize,
    stutter: bool,
) -> Result<KripkeModel, SemError> {
    for t in tracked {
        if !spec.is_monitored(t) && !spec.is_controlled(t) {
            return Err(SemError::BadTrackedVar(t.clone()));
        }
    }
    let vars: Vec<String> = spec.monitored.iter().map(|m| m.name.clone()).collect();
    if vars.len() > cap {
        return Err(SemError::TooManyVariables(vars.len(), cap));
    }

    // initial states: assumption-satisfying assignments meeting every mode
    // class's initial condition; prev equals current so no event fires at
    // time zero.
    let mut initial_states = Vec::new();
    for bits in 0u64..(1u64 << vars.len()) {
        let monitored: BTreeMap<String, bool> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), bits & (1 << i) != 0))
            .collect();
        if !assumptions_hold(spec, &monitored) {
            continue;
        }
        if !spec
            .mode_classes
            .iter()
            .all(|mc| guard_holds(&mc.initial_condition, &monitored))
        {
            continue;
        }
        let modes: BTreeMap<String, String> = spec
            .mode_classes
            .iter()
            .map(|mc| (mc.name.clone(), mc.initial_mode.clone()))
            .collect();
        let controlled: BTreeMap<String, bool> = spec
            .controlled
            .iter()
            .map(|c| (c.name.clone(), c.initial))
            .collect();
        let mut prev = BTreeMap::new();
        for t in tracked {
            let v = monitored
                .get(t)
                .copied()
                .or_else(|| controlled.get(t).copied())
                .unwrap();
            prev.insert(t.clone(), v);
        }
        initial_states.push(SystemState {
            monitored,
            modes,
            controlled,
            prev,
        });
    }
    initial_states.sort();

    let mut states: Vec<SystemState> = Vec::new();
    let mut index: HashMap<SystemState, usize> = HashMap::new();
    let mut succs: Vec<Vec<EdgeTo>> = Vec::new();
    let mut initial = Vec::new();
    let mut queue = std::collections::VecDeque::new();

    for s in initial_states {
        if !index.contains_key(&s) {
            let id = states.len();
            index.insert(s.clone(), id);
            states.push(s);
            succs.push(Vec::new());
            initial.push(id);
            queue.push_back(id);
        } else {
            initial.push(index[&s]);
        }
    }

    while let Some(id) = queue.pop_front() {
        let state = states[id].clone();
        let mut edges = Vec::new();
        let mut events = Vec::new();
        if stutter {
            events.push((String::new(), state.monitored.clone()));
        }
        events.extend(input_events(spec, &state.monitored));
        for (label, new_monitored) in events {
            let new_value = new_monitored.get(&label).copied().unwrap_or(false);
            let next = step(spec, &state, &new_monitored, tracked)?;
            let target = match index.get(&next) {
                Some(&t) => t,
                None => {
                    let t = states.len();
                    index.insert(next.clone(), t);
                    states.push(next);
                    succs.push(Vec::new());
                    queue.push_back(t);
                    t
                }
            };
            edges.push(EdgeTo {
                label,
                new_value,
                target,
            });
        }
        if edges.is_empty() {
            return Err(SemError::Deadlock);
        }
        succs[id] = edges;
    }

    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for (from, edges) in succs.iter().enumerate() {
        for e in edges {
            preds[e.target].push(from);
        }
    }
    for p in &mut preds {
        p.sort_unstable();
        p.dedup();
    }

    Ok(KripkeModel {
        states,
        initial,
        succs,
        preds,
        tracked: tracked.to_vec(),
    })
}

/// Tracked variables a goal set needs: every @T/@F operand.
pub fn tracked_vars(goals: &[Goal]) -> Vec<String> {
    let mut out: Vec<String> = goals
        .iter()
        .flat_map(|g| g.formula.event_vars())
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Evaluates an event-free propositional-or-state formula piece at a state.
/// Used by the checker for atoms; temporal operators are handled there.
pub fn atom_value(state: &SystemState, f: &Ctl) -> Option<bool> {
    match f {
        Ctl::True => Some(true),
        Ctl::False => Some(false),
        Ctl::Atom(a) => state
            .monitored
            .get(a)
            .or_else(|| state.controlled.get(a))
            .copied(),
        Ctl::Prev(a) => state.prev.get(a).copied(),
        Ctl::ModeEq(class, mode) => state.modes.get(class).map(|m| m == mode),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_spec;

    fn toy() -> Spec {
        parse_spec(
            "spec toy\nmonitored x\nmodeclass M {\n  modes Off, On;\n  initial Off when ~x;\n  from Off to On on @T(x);\n  from On to Off on @F(x);\n}\n",
        )
        .unwrap()
    }

    #[test]
    fn toy_model_has_two_states_two_edges() {
        let model = build_model(&toy(), &[], DEFAULT_STATE_CAP).unwrap();
        assert_eq!(model.states.len(), 2);
        let edge_count: usize = model.succs.iter().map(|e| e.len()).sum();
        assert_eq!(edge_count, 2);
        assert_eq!(model.initial.len(), 1);
    }

    #[test]
    fn detailing_adds_implied_literal() {
        let spec = parse_spec(
            "spec s\nmonitored Ignition\nmonitored Running\nmonitored b_Cruise\nassumption Running -->> Ignition\nmodeclass CC {\n  modes Inactive, Cruise;\n  initial Inactive when true;\n  from Inactive to Cruise on @T(b_Cruise) when Running;\n}\n",
        )
        .unwrap();
        let detailed = detail_with_assumptions(&spec).unwrap();
        let guard = &detailed.mode_classes[0].rows[0].guard;
        assert!(guard.contains(&Literal::new("Ignition", true)), "{guard:?}");
    }

    #[test]
    fn detailing_without_assumptions_is_identity() {
        let spec = toy();
        let detailed = detail_with_assumptions(&spec).unwrap();
        assert_eq!(spec, detailed);
    }

    #[test]
    fn implication_assumption_excludes_states() {
        let spec = parse_spec(
            "spec s\nmonitored Ignition\nmonitored Running\nassumption Running -->> Ignition\nmodeclass M {\n  modes A;\n  initial A when true;\n}\n",
        )
        .unwrap();
        let model = build_model(&spec, &[], DEFAULT_STATE_CAP).unwrap();
        for s in &model.states {
            assert!(!(s.monitored["Running"] && !s.monitored["Ignition"]));
        }
        assert_eq!(model.states.len(), 3);
    }

    #[test]
    fn exactly_one_group_changes_as_a_pair() {
        let spec = parse_spec(
            "spec s\nmonitored a\nmonitored b\nmonitored c\nassumption one-of {a, b, c}\nmodeclass M {\n  modes A;\n  initial A when true;\n}\n",
        )
        .unwrap();
        let model = build_model(&spec, &[], DEFAULT_STATE_CAP).unwrap();
        assert_eq!(model.states.len(), 3);
        for (i, edges) in model.succs.iter().enumerate() {
            assert_eq!(edges.len(), 2, "state {i} should offer two risers");
            for e in edges {
                let src = &model.states[i];
                let dst = &model.states[e.target];
                let changed: Vec<&String> = src
                    .monitored
                    .keys()
                    .filter(|k| src.monitored[*k] != dst.monitored[*k])
                    .collect();
                assert_eq!(changed.len(), 2);
                assert!(dst.monitored[&e.label]);
            }
        }
    }

    #[test]
    fn successors_rejects_foreign_state() {
        let model = build_model(&toy(), &[], DEFAULT_STATE_CAP).unwrap();
        let mut foreign = model.states[0].clone();
        foreign.monitored.insert("ghost".into(), true);
        assert!(matches!(
            model.successors(&foreign),
            Err(SemError::UnknownState)
        ));
    }

    #[test]
    fn successors_are_stable_and_sorted() {
        let spec = parse_spec(
            "spec s\nmonitored b\nmonitored a\nmodeclass M {\n  modes A;\n  initial A when true;\n}\n",
        )
        .unwrap();
        let model = build_model(&spec, &[], DEFAULT_STATE_CAP).unwrap();
        for edges in &model.succs {
            let labels: Vec<&String> = edges.iter().map(|e| &e.label).collect();
            let mut sorted = labels.clone();
            sorted.sort();
            assert_eq!(labels, sorted);
        }
        let again = build_model(&spec, &[], DEFAULT_STATE_CAP).unwrap();
        assert_eq!(model.dump(), again.dump());
    }

    #[test]
    fn cap_is_enforced() {
        let mut text = String::from("spec big\n");
        for i in 0..21 {
            text.push_str(&format!("monitored v{i:02}\n"));
        }
        text.push_str("modeclass M {\n  modes A;\n  initial A when true;\n}\n");
        let spec = parse_spec(&text).unwrap();
        assert!(matches!(
            build_model(&spec, &[], DEFAULT_STATE_CAP),
            Err(SemError::TooManyVariables(21, 20))
        ));
    }

    #[test]
    fn prev_values_track_sources() {
        let spec = toy();
        let tracked = vec!["x".to_string()];
        let model = build_model(&spec, &tracked, DEFAULT_STATE_CAP).unwrap();
        for (i, edges) in model.succs.iter().enumerate() {
            for e in edges {
                assert_eq!(
                    model.states[e.target].prev["x"],
                    model.states[i].monitored["x"]
                );
            }
        }
        for &i in &model.initial {
            assert_eq!(model.states[i].prev["x"], model.states[i].monitored["x"]);
        }
    }
}
