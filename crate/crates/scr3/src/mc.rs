//! Explicit-state CTL checking over the graphs built by [`crate::sem`],
//! with counterexamples rendered back into tabular-requirements terms.
//!
//! The labeling uses EX, EU and EG as primitives and dualizes the A-forms.
//! A goal holds iff every initial state is labeled. Counterexamples follow
//! the refuted formula structurally: prefixes reach the canonical violating
//! state, AX steps pick the canonical bad successor, and refuted AF goals
//! close into a lasso inside the EG region of the negated operand.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Goal, Spec};
use crate::ctl::{compile_events, Ctl};
use crate::diag::Diagnostic;
use crate::sem::{self, KripkeModel, SemError};

#[derive(Debug, Error)]
pub enum McError {
    #[error("formula atom `{0}` is not part of the model")]
    AtomNotInModel(String),
    #[error("mode class `{0}` is not part of the model")]
    ModeClassNotInModel(String),
    #[error("{0}")]
    EventCompile(Diagnostic),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputChange {
    pub var: String,
    pub value: bool,
}

/// One step of a counterexample or witness. Step 0 carries no input change;
/// later steps record the single flipped input, or `None` for a stutter
/// step (an input outside the slice changed). Snapshots are kept in full so
/// traces replay without the model at hand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub changed_input: Option<InputChange>,
    pub monitored: BTreeMap<String, bool>,
    pub modes: BTreeMap<String, String>,
    pub controlled: BTreeMap<String, bool>,
    pub changed_controlled: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// For lasso-shaped counterexamples: after the last step the run
    /// continues from this step index forever.
    pub loop_back_index: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Trace>,
    pub witness: Option<Trace>,
}

/// Labels every state with the truth of `f`. Events must already be
/// compiled away.
fn label(model: &KripkeModel, f: &Ctl) -> Result<Vec<bool>, McError> {
    let n = model.states.len();
    let res = match f {
        Ctl::True | Ctl::False | Ctl::Atom(_) | Ctl::Prev(_) | Ctl::ModeEq(..) => {
            let mut out = Vec::with_capacity(n);
            for s in &model.states {
                out.push(sem::atom_value(s, f).ok_or_else(|| match f {
                    Ctl::ModeEq(c, _) => McError::ModeClassNotInModel(c.clone()),
                    Ctl::Prev(a) => McError::AtomNotInModel(a.clone()),
                    Ctl::Atom(a) => McError::AtomNotInModel(a.clone()),
                    _ => unreachable!(),
                })?);
            }
            out
        }
        Ctl::BecomesTrue(a) | Ctl::BecomesFalse(a) => {
            // check() compiles events before labeling; reaching one here
            // means the operand was untracked.
            return Err(McError::AtomNotInModel(a.clone()));
        }
        Ctl::Not(a) => {
            let mut l = label(model, a)?;
            l.iter_mut().for_each(|b| *b = !*b);
            l
        }
        Ctl::And(a, b) => zip(label(model, a)?, label(model, b)?, |x, y| x && y),
        Ctl::Or(a, b) => zip(label(model, a)?, label(model, b)?, |x, y| x || y),
        Ctl::Implies(a, b) => zip(label(model, a)?, label(model, b)?, |x, y| !x || y),
        Ctl::Ex(a) => ex(model, &label(model, a)?),
        Ctl::Ax(a) => {
            let not_a: Vec<bool> = label(model, a)?.iter().map(|b| !b).collect();
            ex(model, &not_a).iter().map(|b| !b).collect()
        }
        Ctl::Eu(a, b) => eu(model, &label(model, a)?, &label(model, b)?),
        Ctl::Ef(a) => eu(model, &vec![true; n], &label(model, a)?),
        Ctl::Af(a) => {
            let not_a: Vec<bool> = label(model, a)?.iter().map(|b| !b).collect();
            eg(model, &not_a).iter().map(|b| !b).collect()
        }
        Ctl::Eg(a) => eg(model, &label(model, a)?),
        Ctl::Ag(a) => {
            let not_a: Vec<bool> = label(model, a)?.iter().map(|b| !b).collect();
            eu(model, &vec![true; n], &not_a).iter().map(|b| !b).collect()
        }
        Ctl::Au(a, b) => {
            // A[a U b] = ~(E[~b U ~a & ~b] | EG ~b)
            let la = label(model, a)?;
            let lb = label(model, b)?;
            let not_b: Vec<bool> = lb.iter().map(|x| !x).collect();
            let not_ab: Vec<bool> = la
                .iter()
                .zip(&lb)
                .map(|(x, y)| !*x && !*y)
                .collect();
            let bad1 = eu(model, &not_b, &not_ab);
            let bad2 = eg(model, &not_b);
            zip(bad1, bad2, |x, y| !(x || y))
        }
    };
    Ok(res)
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

fn ex(model: &KripkeModel, inner: &[bool]) -> Vec<bool> {
    model
        .succs
        .iter()
        .map(|edges| edges.iter().any(|e| inner[e.target]))
        .collect()
}

fn eu(model: &KripkeModel, hold: &[bool], until: &[bool]) -> Vec<bool> {
    let mut out = until.to_vec();
    let mut work: Vec<usize> = (0..out.len()).filter(|&i| out[i]).collect();
    while let Some(i) = work.pop() {
        for &p in &model.preds[i] {
            if !out[p] && hold[p] {
                out[p] = true;
                work.push(p);
            }
        }
    }
    out
}

fn eg(model: &KripkeModel, inner: &[bool]) -> Vec<bool> {
    let mut out = inner.to_vec();
    loop {
        let mut changed = false;
        for i in 0..out.len() {
            if out[i] && !model.succs[i].iter().any(|e| out[e.target]) {
                out[i] = false;
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Breadth-first search from `sources` to any state satisfying `target`,
/// canonical: waves are explored in state order and the chosen target is the
/// least state at the least depth, so the result does not depend on internal
/// enumeration order.
fn bfs_path(
    model: &KripkeModel,
    sources: &[usize],
    target: &[bool],
    restrict: Option<&[bool]>,
) -> Option<Vec<usize>> {
    let n = model.states.len();
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut wave: Vec<usize> = sources.to_vec();
    wave.sort_by(|&a, &b| model.states[a].cmp(&model.states[b]));
    wave.dedup();
    for &s in &wave {
        seen[s] = true;
    }
    loop {
        if let Some(hit) = wave
            .iter()
            .copied()
            .filter(|&i| target[i])
            .min_by(|&a, &b| model.states[a].cmp(&model.states[b]))
        {
            let mut path = vec![hit];
            while let Some(p) = parent[*path.last().unwrap()] {
                path.push(p);
            }
            path.reverse();
            return Some(path);
        }
        let mut next = Vec::new();
        for &i in &wave {
            for e in &model.succs[i] {
                let t = e.target;
                if seen[t] || restrict.map(|r| !r[t]).unwrap_or(false) {
                    continue;
                }
                seen[t] = true;
                parent[t] = Some(i);
                next.push(t);
            }
        }
        if next.is_empty() {
            return None;
        }
        next.sort_by(|&a, &b| model.states[a].cmp(&model.states[b]));
        wave = next;
    }
}

/// Canonical successor inside a region: the least target state.
fn canonical_succ(model: &KripkeModel, from: usize, region: &[bool]) -> Option<usize> {
    model.succs[from]
        .iter()
        .map(|e| e.target)
        .filter(|&t| region[t])
        .min_by(|&a, &b| model.states[a].cmp(&model.states[b]))
}

enum Extend {
    Done(Option<usize>),
    Unsupported,
}

fn has_temporal(f: &Ctl) -> bool {
    match f {
        Ctl::Ax(_) | Ctl::Ex(_) | Ctl::Af(_) | Ctl::Ef(_) | Ctl::Ag(_) | Ctl::Eg(_)
        | Ctl::Au(..) | Ctl::Eu(..) => true,
        Ctl::Not(a) => has_temporal(a),
        Ctl::And(a, b) | Ctl::Or(a, b) | Ctl::Implies(a, b) => has_temporal(a) || has_temporal(b),
        _ => false,
    }
}

/// Extends `path` with evidence that `f` fails at its last state.
fn extend_violation(
    model: &KripkeModel,
    f: &Ctl,
    path: &mut Vec<usize>,
) -> Result<Extend, McError> {
    let cur = *path.last().unwrap();
    if !has_temporal(f) {
        return Ok(Extend::Done(None));
    }
    match f {
        Ctl::Ag(g) => {
            let lg = label(model, g)?;
            let not_g: Vec<bool> = lg.iter().map(|b| !b).collect();
            let prefix = bfs_path(model, &[cur], &not_g, None)
                .expect("refuted AG must reach a violating state");
            path.extend(prefix.into_iter().skip(1));
            extend_violation(model, g, path)
        }
        Ctl::Ax(g) => {
            let lg = label(model, g)?;
            let not_g: Vec<bool> = lg.iter().map(|b| !b).collect();
            let succ = canonical_succ(model, cur, &not_g)
                .expect("refuted AX must have a violating successor");
            path.push(succ);
            extend_violation(model, g, path)
        }
        Ctl::Af(g) => {
            // cur satisfies EG ~g: walk canonically inside that region until
            // a state repeats, forming the lasso.
            let lg = label(model, g)?;
            let not_g: Vec<bool> = lg.iter().map(|b| !b).collect();
            let region = eg(model, &not_g);
            debug_assert!(region[cur]);
            let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
            pos.insert(cur, path.len() - 1);
            loop {
                let next = canonical_succ(model, *path.last().unwrap(), &region)
                    .expect("EG region states keep a successor in the region");
                if let Some(&at) = pos.get(&next) {
                    return Ok(Extend::Done(Some(at)));
                }
                path.push(next);
                pos.insert(next, path.len() - 1);
            }
        }
        Ctl::Implies(a, b) => {
            // antecedent holds at cur, so the violation is the consequent's
            let la = label(model, a)?;
            if la[cur] {
                extend_violation(model, b, path)
            } else {
                Ok(Extend::Unsupported)
            }
        }
        Ctl::And(a, b) => {
            let la = label(model, a)?;
            if !la[cur] {
                extend_violation(model, a, path)
            } else {
                extend_violation(model, b, path)
            }
        }
        _ => Ok(Extend::Unsupported),
    }
}

fn trace_from_path(model: &KripkeModel, path: &[usize], loop_back: Option<usize>) -> Trace {
    let mut steps = Vec::with_capacity(path.len());
    for (i, &idx) in path.iter().enumerate() {
        let s = &model.states[idx];
        let changed_input = if i == 0 {
            None
        } else {
            let prev_idx = path[i - 1];
            let edge = model.succs[prev_idx]
                .iter()
                .find(|e| e.target == idx)
                .expect("trace steps are connected by model edges");
            if edge.is_stutter() {
                None
            } else {
                Some(InputChange {
                    var: edge.label.clone(),
                    value: edge.new_value,
                })
            }
        };
        let changed_controlled = if i == 0 {
            BTreeMap::new()
        } else {
            let prev = &model.states[path[i - 1]];
            s.controlled
                .iter()
                .filter(|(k, v)| prev.controlled.get(*k) != Some(v))
                .map(|(k, v)| (k.clone(), *v))
                .collect()
        };
        steps.push(TraceStep {
            changed_input,
            monitored: s.monitored.clone(),
            modes: s.modes.clone(),
            controlled: s.controlled.clone(),
            changed_controlled,
        });
    }
    Trace {
        steps,
        loop_back_index: loop_back,
    }
}

/// Checks a goal formula against a model. Event connectives are compiled
/// against the model's tracked variables first.
pub fn check(model: &KripkeModel, formula: &Ctl) -> Result<Verdict, McError> {
    let compiled = compile_events(formula, &model.tracked).map_err(McError::EventCompile)?;
    let labels = label(model, &compiled)?;
    let holds = model.initial.iter().all(|&i| labels[i]);

    if holds {
        // witness for reachability-shaped goals: shortest path into the
        // target region from the canonical initial state.
        let witness = match &compiled {
            Ctl::Ef(g) => {
                let lg = label(model, g)?;
                bfs_path(model, &model.initial, &lg, None)
                    .map(|p| trace_from_path(model, &p, None))
            }
            Ctl::Eu(_, g) => {
                let lg = label(model, g)?;
                let hold = label(model, &compiled)?;
                bfs_path(model, &model.initial, &lg, Some(&hold))
                    .map(|p| trace_from_path(model, &p, None))
            }
            _ => None,
        };
        return Ok(Verdict {
            holds: true,
            counterexample: None,
            witness,
        });
    }

    let start = model
        .initial
        .iter()
        .copied()
        .filter(|&i| !labels[i])
        .min_by(|&a, &b| model.states[a].cmp(&model.states[b]))
        .unwrap();
    let mut path = vec![start];
    let counterexample = match extend_violation(model, &compiled, &mut path)? {
        Extend::Done(loop_back) => Some(trace_from_path(model, &path, loop_back)),
        Extend::Unsupported => None,
    };
    Ok(Verdict {
        holds: false,
        counterexample,
        witness: None,
    })
}

#[derive(Debug, Error)]
pub enum GoalError {
    #[error("goal `{name}`: {source}")]
    Sem { name: String, source: SemError },
    #[error("goal `{name}`: {source}")]
    Mc { name: String, source: McError },
}

#[derive(Debug, Clone, Serialize)]
pub struct GoalResult {
    pub name: String,
    pub formula: String,
    pub holds: bool,
    pub expected: Option<bool>,
    /// False when the verdict disagrees with the goal's recorded `expect`.
    pub matches_expected: Option<bool>,
    pub model_states: usize,
    pub millis: u128,
    pub counterexample: Option<Trace>,
    pub witness: Option<Trace>,
}

/// Checks every goal of the spec: per goal, slice, detail, build, check.
/// Results come back in declaration order.
pub fn check_all_goals(
    spec: &Spec,
    use_slice: bool,
    cap: usize,
) -> Result<Vec<GoalResult>, GoalError> {
    let mut out = Vec::new();
    for goal in &spec.goals {
        out.push(check_one_goal(spec, goal, use_slice, cap)?);
    }
    Ok(out)
}

pub fn check_one_goal(
    spec: &Spec,
    goal: &Goal,
    use_slice: bool,
    cap: usize,
) -> Result<GoalResult, GoalError> {
    let wrap_sem = |e: SemError| GoalError::Sem {
        name: goal.name.clone(),
        source: e,
    };
    let started = Instant::now();
    let goals = std::slice::from_ref(goal);
    let working = if use_slice {
        sem::slice(spec, goals).map_err(wrap_sem)?
    } else {
        let mut s = spec.clone();
        s.goals = goals.to_vec();
        s
    };
    // a slice that dropped monitored variables needs stutter edges to keep
    // the verdict equal to the whole-model one
    let stutter = working.monitored.len() < spec.monitored.len();
    let working = sem::detail_with_assumptions(&working).map_err(wrap_sem)?;
    let tracked = sem::tracked_vars(goals);
    let model = sem::build_model_opts(&working, &tracked, cap, stutter).map_err(wrap_sem)?;
    let verdict = check(&model, &goal.formula).map_err(|e| GoalError::Mc {
        name: goal.name.clone(),
        source: e,
    })?;
    Ok(GoalResult {
        name: goal.name.clone(),
        formula: goal.formula.to_string(),
        holds: verdict.holds,
        expected: goal.expected,
        matches_expected: goal.expected.map(|e| e == verdict.holds),
        model_states: model.states.len(),
        millis: started.elapsed().as_millis(),
        counterexample: verdict.counterexample,
        witness: verdict.witness,
    })
}

/// Renders a trace in tabular-requirements terms: step 0 is the full
/// initial state; later steps list the flipped input and the mode and
/// controlled-variable changes it caused. Previous-value bookkeeping never
/// appears. Variables print in declaration order.
pub fn render_counterexample(trace: &Trace, spec: &Spec) -> String {
    use std::fmt::Write as _;
    let mon_order: Vec<&str> = spec.monitored.iter().map(|m| m.name.as_str()).collect();
    let ctl_order: Vec<&str> = spec.controlled.iter().map(|c| c.name.as_str()).collect();
    let class_order: Vec<&str> = spec.mode_classes.iter().map(|m| m.name.as_str()).collect();
    let ordered = |keys: &[&str], map: &BTreeMap<String, bool>| -> String {
        keys.iter()
            .filter_map(|k| map.get(*k).map(|v| format!("{k}={v}")))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = String::new();
    for (i, step) in trace.steps.iter().enumerate() {
        match &step.changed_input {
            None if i > 0 => {
                // stutter step: an input outside the slice changed
                let _ = writeln!(out, "step {i}: (no change in the slice)");
            }
            None => {
                let _ = writeln!(out, "step {i} (initial):");
                let modes = class_order
                    .iter()
                    .filter_map(|c| step.modes.get(*c).map(|m| format!("{c}={m}")))
                    .collect::<Vec<_>>()
                    .join(", ");
                if !modes.is_empty() {
                    let _ = writeln!(out, "  modes: {modes}");
                }
                let _ = writeln!(out, "  monitored: {}", ordered(&mon_order, &step.monitored));
                if !step.controlled.is_empty() {
                    let _ = writeln!(
                        out,
                        "  controlled: {}",
                        ordered(&ctl_order, &step.controlled)
                    );
                }
            }
            Some(change) => {
                let _ = writeln!(out, "step {i}: {} := {}", change.var, change.value);
                let prev = &trace.steps[i - 1];
                let mode_changes = class_order
                    .iter()
                    .filter_map(|c| {
                        let now = step.modes.get(*c)?;
                        if prev.modes.get(*c) != Some(now) {
                            Some(format!("{c}={now}"))
                        } else {
                            None
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(", ");
                let ctrl_changes = ordered(&ctl_order, &step.changed_controlled);
                if mode_changes.is_empty() && ctrl_changes.is_empty() {
                    let _ = writeln!(out, "  (no dependent changes)");
                } else {
                    if !mode_changes.is_empty() {
                        let _ = writeln!(out, "  modes: {mode_changes}");
                    }
                    if !ctrl_changes.is_empty() {
                        let _ = writeln!(out, "  controlled: {ctrl_changes}");
                    }
                }
            }
        }
    }
    if let Some(back) = trace.loop_back_index {
        let _ = writeln!(out, "loop back to step {back}");
    }
    out
}

/// Replays a trace against a model: every consecutive pair must be a model
/// edge with the listed input change, and the snapshots must match the model
/// states. Test oracle, exposed for the acceptance suite.
pub fn replay(trace: &Trace, model: &KripkeModel) -> Result<(), String> {
    if trace.steps.is_empty() {
        return Err("empty trace".into());
    }
    let find = |step: &TraceStep| -> Result<usize, String> {
        model
            .states
            .iter()
            .position(|s| {
                s.monitored == step.monitored
                    && s.modes == step.modes
                    && s.controlled == step.controlled
            })
            .ok_or_else(|| "trace snapshot not found in model".to_string())
    };
    let mut cur = find(&trace.steps[0])?;
    if !model.initial.contains(&cur) {
        return Err("trace does not start in an initial state".into());
    }
    for (i, step) in trace.steps.iter().enumerate().skip(1) {
        let next = find(step)?;
        let edge_ok = match &step.changed_input {
            Some(change) => model.succs[cur].iter().any(|e| {
                e.target == next && e.label == change.var && e.new_value == change.value
            }),
            // stutter step
            None => model.succs[cur]
                .iter()
                .any(|e| e.target == next && e.is_stutter()),
        };
        if !edge_ok {
            return Err(format!("step {i} is not a model edge"));
        }
        cur = next;
    }
    if let Some(back) = trace.loop_back_index {
        if back >= trace.steps.len() {
            return Err("loop_back_index out of range".into());
        }
        let loop_target = find(&trace.steps[back])?;
        if !model.succs[cur].iter().any(|e| e.target == loop_target) {
            return Err("lasso does not close".into());
        }
    }
    Ok(())
}
