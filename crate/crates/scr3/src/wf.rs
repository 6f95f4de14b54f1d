//! Structural and consistency checks over a specification, plus the
//! variable dependency graph used for slicing.

use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::ctl::Ctl;
use crate::diag::Diagnostic;

/// Runs every static check and returns the combined diagnostics, sorted for
/// stable output. Order of declarations does not affect the result.
pub fn check_well_formed(spec: &Spec) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    check_unique_names(spec, &mut diags);
    check_declared_names(spec, &mut diags);
    check_triggers(spec, &mut diags);
    check_enum_overlap(spec, &mut diags);
    check_unreachable_modes(spec, &mut diags);
    check_nondeterminism(spec, &mut diags);
    check_completeness(spec, &mut diags);
    diags.sort_by(|a, b| {
        (&a.code, &a.span, &a.message).cmp(&(&b.code, &b.span, &b.message))
    });
    diags
}

fn check_unique_names(spec: &Spec, diags: &mut Vec<Diagnostic>) {
    let mut names: Vec<(&str, &crate::diag::SourceSpan)> = Vec::new();
    for m in &spec.monitored {
        names.push((&m.name, &m.span));
    }
    for mc in &spec.mode_classes {
        names.push((&mc.name, &mc.span));
        for mode in &mc.modes {
            names.push((mode, &mc.span));
        }
    }
    for c in &spec.controlled {
        names.push((&c.name, &c.span));
    }
    let mut seen: BTreeMap<&str, u32> = BTreeMap::new();
    for (name, span) in names {
        let count = seen.entry(name).or_insert(0);
        *count += 1;
        if *count == 2 {
            diags.push(Diagnostic::error(
                "duplicate-name",
                span.clone(),
                format!("name `{name}` is declared more than once"),
            ));
        }
    }
}

fn check_declared_names(spec: &Spec, diags: &mut Vec<Diagnostic>) {
    let undeclared = |name: &str, what: &str, span: &crate::diag::SourceSpan| {
        Diagnostic::error(
            "undeclared-name",
            span.clone(),
            format!("{what} `{name}` is not declared"),
        )
    };
    let check_monitored =
        |name: &str, span: &crate::diag::SourceSpan, diags: &mut Vec<Diagnostic>| {
            if !spec.is_monitored(name) {
                diags.push(undeclared(name, "monitored variable", span));
            }
        };
    for mc in &spec.mode_classes {
        if !mc.modes.contains(&mc.initial_mode) {
            diags.push(undeclared(&mc.initial_mode, "mode", &mc.span));
        }
        for lit in &mc.initial_condition {
            check_monitored(&lit.var, &mc.span, diags);
        }
        for row in &mc.rows {
            for m in [&row.from_mode, &row.to_mode] {
                if !mc.modes.contains(m) {
                    diags.push(undeclared(m, "mode", &row.span));
                }
            }
            for t in &row.triggers {
                if let Some(v) = t.var() {
                    check_monitored(v, &row.span, diags);
                }
            }
            for lit in &row.guard {
                check_monitored(&lit.var, &row.span, diags);
            }
        }
    }
    for c in &spec.controlled {
        for row in &c.rows {
            if spec.class_of_mode(&row.mode).is_none() {
                diags.push(undeclared(&row.mode, "mode", &row.span));
            }
            if let Some(v) = row.trigger.var() {
                check_monitored(v, &row.span, diags);
            }
            if let Some(when) = &row.when {
                for lit in when {
                    check_monitored(&lit.var, &row.span, diags);
                }
            }
        }
    }
    for a in &spec.assumptions {
        for op in a.operands() {
            check_monitored(op, a.span(), diags);
        }
    }
    for g in &spec.goals {
        check_goal_names(spec, g, diags);
    }
}

fn check_goal_names(spec: &Spec, goal: &Goal, diags: &mut Vec<Diagnostic>) {
    let mut visit = |f: &Ctl| match f {
        Ctl::Atom(a) | Ctl::BecomesTrue(a) | Ctl::BecomesFalse(a) => {
            if !spec.is_monitored(a) && !spec.is_controlled(a) {
                diags.push(Diagnostic::error(
                    "undeclared-name",
                    goal.span.clone(),
                    format!("variable `{a}` in goal `{}` is not declared", goal.name),
                ));
            }
        }
        Ctl::ModeEq(class, mode) => match spec.mode_class(class) {
            Some(mc) if mc.modes.contains(mode) => {}
            Some(_) => diags.push(Diagnostic::error(
                "undeclared-name",
                goal.span.clone(),
                format!(
                    "mode `{mode}` in goal `{}` is not a mode of class `{class}`",
                    goal.name
                ),
            )),
            None => diags.push(Diagnostic::error(
                "undeclared-name",
                goal.span.clone(),
                format!("mode class `{class}` in goal `{}` is not declared", goal.name),
            )),
        },
        _ => {}
    };
    walk_ctl(&goal.formula, &mut visit);
}

fn walk_ctl(f: &Ctl, visit: &mut impl FnMut(&Ctl)) {
    visit(f);
    match f {
        Ctl::Not(a) | Ctl::Ax(a) | Ctl::Ex(a) | Ctl::Af(a) | Ctl::Ef(a) | Ctl::Ag(a)
        | Ctl::Eg(a) => walk_ctl(a, visit),
        Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::Implies(a, b) | Ctl::Au(a, b) | Ctl::Eu(a, b) => {
            walk_ctl(a, visit);
            walk_ctl(b, visit);
        }
        _ => {}
    }
}

fn check_triggers(spec: &Spec, diags: &mut Vec<Diagnostic>) {
    for mc in &spec.mode_classes {
        for row in &mc.rows {
            if row.triggers.len() != 1 {
                diags.push(Diagnostic::error(
                    "multiple-triggers",
                    row.span.clone(),
                    format!(
                        "row {} -> {} has {} triggers; exactly one is required",
                        row.from_mode,
                        row.to_mode,
                        row.triggers.len()
                    ),
                ));
            }
            for t in &row.triggers {
                if t.var().is_none() {
                    diags.push(Diagnostic::error(
                        "invalid-trigger",
                        row.span.clone(),
                        "mode transition triggers must name a monitored variable, not `inmode`",
                    ));
                }
            }
        }
    }
}

fn check_enum_overlap(spec: &Spec, diags: &mut Vec<Diagnostic>) {
    let groups: Vec<&Assumption> = spec
        .assumptions
        .iter()
        .filter(|a| matches!(a, Assumption::ExactlyOne { .. } | Assumption::AtMostOne { .. }))
        .collect();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let a: BTreeSet<&str> = groups[i].operands().into_iter().collect();
            let b: BTreeSet<&str> = groups[j].operands().into_iter().collect();
            let shared: Vec<&&str> = a.intersection(&b).collect();
            if !shared.is_empty() {
                diags.push(Diagnostic::error(
                    "enum-overlap",
                    groups[j].span().clone(),
                    format!(
                        "enumeration groups share variable(s): {}",
                        shared
                            .iter()
                            .map(|s| s.to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                ));
            }
        }
    }
}

fn check_unreachable_modes(spec: &Spec, diags: &mut Vec<Diagnostic>) {
    for mc in &spec.mode_classes {
        for mode in &mc.modes {
            if *mode == mc.initial_mode {
                continue;
            }
            if !mc.rows.iter().any(|r| r.to_mode == *mode) {
                diags.push(Diagnostic::warning(
                    "unreachable-mode",
                    mc.span.clone(),
                    format!("mode `{mode}` is not initial and no transition targets it"),
                ));
            }
        }
    }
}

fn check_completeness(spec: &Spec, diags: &mut Vec<Diagnostic>) {
    for mc in &spec.mode_classes {
        for mode in &mc.modes {
            if !mc.rows.iter().any(|r| r.from_mode == *mode) {
                diags.push(Diagnostic::info(
                    "mode-without-exits",
                    mc.span.clone(),
                    format!("mode `{mode}` has no outgoing transitions"),
                ));
            }
        }
    }
}

fn check_nondeterminism(spec: &Spec, diags: &mut Vec<Diagnostic>) {
    for mc in &spec.mode_classes {
        for i in 0..mc.rows.len() {
            for j in i + 1..mc.rows.len() {
                let (r1, r2) = (&mc.rows[i], &mc.rows[j]);
                if r1.from_mode != r2.from_mode {
                    continue;
                }
                if rows_overlap(spec, r1, r2) {
                    diags.push(Diagnostic::warning(
                        "nondeterminism",
                        r2.span.clone(),
                        format!(
                            "rows {} and {} of mode class `{}` (from `{}`) can be enabled \
                             simultaneously",
                            i + 1,
                            j + 1,
                            mc.name,
                            r1.from_mode
                        ),
                    ));
                }
            }
        }
    }
}

/// Brute-force satisfiability of two rows firing on the same step: enumerates
/// old-state assignments over the variables both rows mention (closed under
/// the assumptions that touch them) and every single-input event over those
/// variables.
pub fn rows_overlap(spec: &Spec, r1: &TransitionRow, r2: &TransitionRow) -> bool {
    let mut vars: BTreeSet<String> = BTreeSet::new();
    for r in [r1, r2] {
        for t in &r.triggers {
            if let Some(v) = t.var() {
                vars.insert(v.to_string());
            }
        }
        for lit in &r.guard {
            vars.insert(lit.var.clone());
        }
    }
    // assumption closure: pull in every variable related through assumptions
    loop {
        let before = vars.len();
        for a in &spec.assumptions {
            let ops: Vec<&str> = a.operands();
            if ops.iter().any(|o| vars.contains(*o)) {
                for o in ops {
                    vars.insert(o.to_string());
                }
            }
        }
        if vars.len() == before {
            break;
        }
    }
    let vars: Vec<String> = vars.into_iter().filter(|v| spec.is_monitored(v)).collect();
    if vars.is_empty() || vars.len() > 16 {
        return false;
    }

    let assumptions_ok = |vals: &BTreeMap<&str, bool>| -> bool {
        for a in &spec.assumptions {
            match a {
                Assumption::Implies {
                    antecedent,
                    consequent,
                    ..
                } => {
                    if let (Some(&av), Some(&cv)) = (
                        vals.get(antecedent.as_str()),
                        vals.get(consequent.as_str()),
                    ) {
                        if av && !cv {
                            return false;
                        }
                    }
                }
                Assumption::ExactlyOne { vars: group, .. } => {
                    if group.iter().all(|g| vals.contains_key(g.as_str())) {
                        let n = group.iter().filter(|g| vals[g.as_str()]).count();
                        if n != 1 {
                            return false;
                        }
                    }
                }
                Assumption::AtMostOne { vars: group, .. } => {
                    let n = group
                        .iter()
                        .filter(|g| vals.get(g.as_str()).copied().unwrap_or(false))
                        .count();
                    if n > 1 {
                        return false;
                    }
                }
            }
        }
        true
    };

    let row_fires = |row: &TransitionRow,
                     old: &BTreeMap<&str, bool>,
                     new: &BTreeMap<&str, bool>|
     -> bool {
        for t in &row.triggers {
            let Some(v) = t.var() else { return false };
            let (Some(&ov), Some(&nv)) = (old.get(v), new.get(v)) else {
                return false;
            };
            let fired = if t.rising { !ov && nv } else { ov && !nv };
            if !fired {
                return false;
            }
        }
        row.guard.iter().all(|lit| {
            old.get(lit.var.as_str())
                .map(|&v| v == lit.value)
                .unwrap_or(false)
        })
    };

    for bits in 0u32..(1 << vars.len()) {
        let old: BTreeMap<&str, bool> = vars
            .iter()
            .enumerate()
            .map(|(k, v)| (v.as_str(), bits & (1 << k) != 0))
            .collect();
        if !assumptions_ok(&old) {
            continue;
        }
        for flip in &vars {
            let mut new = old.clone();
            let cur = new[flip.as_str()];
            new.insert(flip.as_str(), !cur);
            // paired change inside an exactly-one group
            if let Some(group) = spec.exactly_one_group(flip) {
                if cur {
                    continue; // falls only as the pair of another riser
                }
                for g in group {
                    if g != flip && old.get(g.as_str()).copied().unwrap_or(false) {
                        new.insert(g.as_str(), false);
                    }
                }
            }
            if !assumptions_ok(&new) {
                continue;
            }
            if row_fires(r1, &old, &new) && row_fires(r2, &old, &new) {
                return true;
            }
        }
    }
    false
}

/// Directed dependency graph over variable and mode-class names.
/// `X -> Y` iff the table or assumption defining or constraining `X`
/// mentions `Y`.
#[derive(Debug, Clone, Default)]
pub struct DepGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<String, BTreeSet<String>>,
}

impl DepGraph {
    fn edge(&mut self, from: &str, to: &str) {
        if from != to {
            self.edges
                .entry(from.to_string())
                .or_default()
                .insert(to.to_string());
        }
    }

    pub fn successors(&self, node: &str) -> impl Iterator<Item = &str> {
        self.edges
            .get(node)
            .into_iter()
            .flat_map(|s| s.iter().map(|n| n.as_str()))
    }

    /// Transitive closure of `seeds` along the edges, seeds included.
    pub fn reachable(&self, seeds: impl IntoIterator<Item = String>) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = seeds.into_iter().collect();
        let mut work: Vec<String> = out.iter().cloned().collect();
        while let Some(n) = work.pop() {
            if let Some(next) = self.edges.get(&n) {
                for m in next {
                    if out.insert(m.clone()) {
                        work.push(m.clone());
                    }
                }
            }
        }
        out
    }
}

pub fn dependency_graph(spec: &Spec) -> DepGraph {
    let mut g = DepGraph::default();
    for m in &spec.monitored {
        g.nodes.insert(m.name.clone());
    }
    for mc in &spec.mode_classes {
        g.nodes.insert(mc.name.clone());
        // the initial condition also constrains its variables (at time 0),
        // so this dependency runs both ways: a slice that keeps the
        // variable must keep the class, or initial states would loosen
        for lit in &mc.initial_condition {
            g.edge(&mc.name, &lit.var);
            g.edge(&lit.var, &mc.name);
        }
        for row in &mc.rows {
            for t in &row.triggers {
                if let Some(v) = t.var() {
                    g.edge(&mc.name, v);
                }
            }
            for lit in &row.guard {
                g.edge(&mc.name, &lit.var);
            }
        }
    }
    for c in &spec.controlled {
        g.nodes.insert(c.name.clone());
        for row in &c.rows {
            if let Some(mc) = spec.class_of_mode(&row.mode) {
                g.edge(&c.name, &mc.name);
            }
            if let Some(v) = row.trigger.var() {
                g.edge(&c.name, v);
            }
            if let Some(when) = &row.when {
                for lit in when {
                    g.edge(&c.name, &lit.var);
                }
            }
        }
    }
    // assumptions constrain all their operands jointly
    for a in &spec.assumptions {
        let ops = a.operands();
        for x in &ops {
            for y in &ops {
                g.edge(x, y);
            }
        }
    }
    g
}
