//! Shared oracles and generators for the integration suites. Everything here
//! is deliberately implemented differently from the library: graph searches
//! instead of labeling, a per-path interpreter instead of a fixpoint, a
//! reimplementation of the step function instead of calling it.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use scr3::annot::{AnnAtom, AnnKind, AnnotatedProgram, NodeKind};
use scr3::ast::{Assumption, Conj, EventSubject, Goal, Spec};
use scr3::cord::{AbstractModel, Tri};
use scr3::ctl::{self, Ctl};
use scr3::diag::SourceSpan;
use scr3::sem::{self, KripkeModel, SystemState};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// CTL oracle: per-state graph searches over the explicit model.

/// Truth of `formula` in every initial state, by explicit path search.
pub fn oracle_check(model: &KripkeModel, formula: &Ctl) -> Result<bool, String> {
    let compiled = ctl::compile_events(formula, &model.tracked).map_err(|d| d.to_string())?;
    let s = sat(model, &compiled)?;
    Ok(model.initial.iter().all(|&i| s[i]))
}

fn sat(model: &KripkeModel, f: &Ctl) -> Result<Vec<bool>, String> {
    let n = model.states.len();
    let neg = |v: Vec<bool>| -> Vec<bool> { v.into_iter().map(|b| !b).collect() };
    Ok(match f {
        Ctl::True | Ctl::False | Ctl::Atom(_) | Ctl::Prev(_) | Ctl::ModeEq(..) => model
            .states
            .iter()
            .map(|s| sem::atom_value(s, f).ok_or_else(|| format!("atom `{f}` not in model")))
            .collect::<Result<_, _>>()?,
        Ctl::BecomesTrue(_) | Ctl::BecomesFalse(_) => {
            return Err("oracle expects events to be compiled away".into())
        }
        Ctl::Not(a) => neg(sat(model, a)?),
        Ctl::And(a, b) => zip(sat(model, a)?, sat(model, b)?, |x, y| x && y),
        Ctl::Or(a, b) => zip(sat(model, a)?, sat(model, b)?, |x, y| x || y),
        Ctl::Implies(a, b) => zip(sat(model, a)?, sat(model, b)?, |x, y| !x || y),
        Ctl::Ex(a) => {
            let sa = sat(model, a)?;
            (0..n)
                .map(|i| model.succs[i].iter().any(|e| sa[e.target]))
                .collect()
        }
        Ctl::Ax(a) => {
            let sa = sat(model, a)?;
            (0..n)
                .map(|i| model.succs[i].iter().all(|e| sa[e.target]))
                .collect()
        }
        Ctl::Ef(a) => eu_search(model, &vec![true; n], &sat(model, a)?),
        Ctl::Eu(a, b) => eu_search(model, &sat(model, a)?, &sat(model, b)?),
        Ctl::Eg(a) => eg_search(model, &sat(model, a)?),
        Ctl::Af(a) => neg(eg_search(model, &neg(sat(model, a)?))),
        Ctl::Ag(a) => neg(eu_search(model, &vec![true; n], &neg(sat(model, a)?))),
        Ctl::Au(a, b) => {
            // A[a U b] = ~(E[~b U (~a & ~b)] | EG ~b)
            let sa = sat(model, a)?;
            let sb = sat(model, b)?;
            let nb = neg(sb.clone());
            let nanb = zip(neg(sa), nb.clone(), |x, y| x && y);
            let left = eu_search(model, &nb, &nanb);
            let right = eg_search(model, &nb);
            zip(left, right, |x, y| !(x || y))
        }
    })
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// E[a U b] by forward depth-first search from each state.
fn eu_search(model: &KripkeModel, a: &[bool], b: &[bool]) -> Vec<bool> {
    let n = a.len();
    (0..n)
        .map(|start| {
            if b[start] {
                return true;
            }
            if !a[start] {
                return false;
            }
            let mut seen = vec![false; n];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for e in &model.succs[u] {
                    let v = e.target;
                    if seen[v] {
                        continue;
                    }
                    if b[v] {
                        return true;
                    }
                    if a[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            false
        })
        .collect()
}

/// EG a: an a-path to a cycle that stays inside the a-subgraph.
fn eg_search(model: &KripkeModel, a: &[bool]) -> Vec<bool> {
    let n = a.len();
    let on_cycle: Vec<bool> = (0..n)
        .map(|u| {
            if !a[u] {
                return false;
            }
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = model.succs[u]
                .iter()
                .filter(|e| a[e.target])
                .map(|e| e.target)
                .collect();
            while let Some(v) = stack.pop() {
                if v == u {
                    return true;
                }
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                for e in &model.succs[v] {
                    if a[e.target] && !seen[e.target] {
                        stack.push(e.target);
                    }
                }
            }
            false
        })
        .collect();
    eu_search(model, a, &on_cycle)
}

// ---------------------------------------------------------------------------
// Step oracle and Kripke invariants.

pub fn assumptions_ok(spec: &Spec, vals: &BTreeMap<String, bool>) -> bool {
    spec.assumptions.iter().all(|a| match a {
        Assumption::Implies {
            antecedent,
            consequent,
            ..
        } => !vals.get(antecedent).copied().unwrap_or(false)
            || vals.get(consequent).copied().unwrap_or(true),
        Assumption::ExactlyOne { vars, .. } => {
            vars.iter().filter(|v| vals.get(*v).copied().unwrap_or(false)).count() == 1
        }
        Assumption::AtMostOne { vars, .. } => {
            vars.iter().filter(|v| vals.get(*v).copied().unwrap_or(false)).count() <= 1
        }
    })
}

pub type StepTargets = (BTreeMap<String, String>, BTreeMap<String, bool>);

/// Recomputes the modes and controlled values a step must produce, from the
/// table semantics alone. Errors on runtime nondeterminism.
pub fn oracle_step_targets(
    spec: &Spec,
    state: &SystemState,
    new_monitored: &BTreeMap<String, bool>,
) -> Result<StepTargets, String> {
    let changed: Vec<(&String, bool)> = new_monitored
        .iter()
        .filter(|(k, v)| state.monitored.get(*k) != Some(v))
        .map(|(k, v)| (k, *v))
        .collect();
    let occurred =
        |var: &str, rising: bool| changed.iter().any(|(v, val)| *v == var && *val == rising);
    // guards and WHEN conditions read the old monitored state
    let guard_holds = |conj: &Conj| {
        conj.iter()
            .all(|l| state.monitored.get(&l.var).copied() == Some(l.value))
    };

    let mut new_modes = BTreeMap::new();
    for mc in &spec.mode_classes {
        let cur = state
            .modes
            .get(&mc.name)
            .ok_or_else(|| format!("state lacks mode class {}", mc.name))?;
        let fired: Vec<_> = mc
            .rows
            .iter()
            .filter(|r| {
                &r.from_mode == cur
                    && r.triggers.len() == 1
                    && r.trigger()
                        .var()
                        .map(|v| occurred(v, r.trigger().rising))
                        .unwrap_or(false)
                    && guard_holds(&r.guard)
            })
            .collect();
        let next = match fired.len() {
            0 => cur.clone(),
            1 => fired[0].to_mode.clone(),
            _ => return Err(format!("nondeterministic step in {}", mc.name)),
        };
        new_modes.insert(mc.name.clone(), next);
    }

    let mut new_controlled = BTreeMap::new();
    for cv in &spec.controlled {
        let fired: Vec<_> = cv
            .rows
            .iter()
            .filter(|r| {
                let Some(mc) = spec.class_of_mode(&r.mode) else {
                    return false;
                };
                let old_m = &state.modes[&mc.name];
                let new_m = &new_modes[&mc.name];
                let trig = match &r.trigger.subject {
                    EventSubject::Var(v) => new_m == &r.mode && occurred(v, r.trigger.rising),
                    EventSubject::Inmode => {
                        if r.trigger.rising {
                            old_m != &r.mode && new_m == &r.mode
                        } else {
                            old_m == &r.mode && new_m != &r.mode
                        }
                    }
                };
                trig && r.when.as_ref().map(&guard_holds).unwrap_or(true)
            })
            .collect();
        let old = state.controlled[&cv.name];
        let next = match fired.len() {
            0 => old,
            1 => fired[0].sets_to,
            _ => return Err(format!("nondeterministic update of {}", cv.name)),
        };
        new_controlled.insert(cv.name.clone(), next);
    }
    Ok((new_modes, new_controlled))
}

fn old_value(state: &SystemState, var: &str) -> Option<bool> {
    state
        .monitored
        .get(var)
        .or_else(|| state.controlled.get(var))
        .copied()
}

/// Structural invariants of a built model: assumption safety, mode totality,
/// single-input-change edges, table conformance of every edge (frame
/// property included), previous-value tracking, deadlock freedom.
pub fn check_kripke_invariants(spec: &Spec, model: &KripkeModel) -> Result<(), String> {
    for (i, s) in model.states.iter().enumerate() {
        if !assumptions_ok(spec, &s.monitored) {
            return Err(format!("state {i} violates an assumption"));
        }
        for mc in &spec.mode_classes {
            let m = s
                .modes
                .get(&mc.name)
                .ok_or_else(|| format!("state {i} lacks mode class {}", mc.name))?;
            if !mc.modes.iter().any(|x| x == m) {
                return Err(format!("state {i} has undeclared mode {m}"));
            }
        }
        for cv in &spec.controlled {
            if !s.controlled.contains_key(&cv.name) {
                return Err(format!("state {i} lacks controlled {}", cv.name));
            }
        }
        let prev_keys: Vec<&String> = s.prev.keys().collect();
        let mut want: Vec<&String> = model.tracked.iter().collect();
        want.sort();
        if prev_keys != want {
            return Err(format!("state {i} tracks the wrong prev set"));
        }
        if model.succs[i].is_empty() {
            return Err(format!("state {i} is a deadlock"));
        }
        for e in &model.succs[i] {
            let t = &model.states[e.target];
            if e.is_stutter() {
                if t.monitored != s.monitored
                    || t.modes != s.modes
                    || t.controlled != s.controlled
                {
                    return Err(format!("stutter edge from state {i} changes the slice"));
                }
                for v in &model.tracked {
                    if Some(t.prev[v]) != old_value(s, v) {
                        return Err(format!("stutter edge from {i} mis-snapshots prev {v}"));
                    }
                }
                continue;
            }
            let diff: Vec<&String> = s
                .monitored
                .keys()
                .filter(|k| s.monitored[*k] != t.monitored[*k])
                .collect();
            if !diff.iter().any(|v| **v == e.label) {
                return Err(format!("edge label {} did not change (state {i})", e.label));
            }
            if t.monitored[&e.label] != e.new_value {
                return Err(format!("edge value disagrees with target (state {i})"));
            }
            match diff.len() {
                1 => {}
                2 => {
                    let other = diff.iter().find(|v| ***v != e.label).unwrap();
                    let group = spec
                        .exactly_one_group(&e.label)
                        .ok_or_else(|| format!("paired flip outside a group (state {i})"))?;
                    if !group.iter().any(|g| g.as_str() == other.as_str()) {
                        return Err(format!("paired flip crosses groups (state {i})"));
                    }
                    if !t.monitored[&e.label] || t.monitored[other.as_str()] {
                        return Err(format!("paired flip is not rise+fall (state {i})"));
                    }
                }
                _ => return Err(format!("edge flips {} inputs (state {i})", diff.len())),
            }
            let (want_modes, want_ctl) = oracle_step_targets(spec, s, &t.monitored)?;
            if t.modes != want_modes {
                return Err(format!("edge from {i} on {} picks wrong modes", e.label));
            }
            if t.controlled != want_ctl {
                return Err(format!(
                    "edge from {i} on {} picks wrong controlled values",
                    e.label
                ));
            }
            for v in &model.tracked {
                if Some(t.prev[v]) != old_value(s, v) {
                    return Err(format!("edge from {i} mis-snapshots prev {v}"));
                }
            }
        }
    }
    for &i in &model.initial {
        let s = &model.states[i];
        for mc in &spec.mode_classes {
            if s.modes[&mc.name] != mc.initial_mode {
                return Err(format!("initial state {i} not in the initial mode"));
            }
            for lit in &mc.initial_condition {
                if s.monitored.get(&lit.var).copied() != Some(lit.value) {
                    return Err(format!("initial state {i} violates the initial condition"));
                }
            }
        }
        for v in &model.tracked {
            if Some(s.prev[v]) != old_value(s, v) {
                return Err(format!("initial state {i} has prev != current for {v}"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Random specification and goal generation.

/// A random well-formed spec. `m0` never appears in an assumption, so a flip
/// of it is always available and the model is deadlock-free; implications go
/// from lower to higher index only (acyclic); enumeration-group variables
/// never appear as triggers, so steps stay deterministic.
pub fn random_spec_text(rng: &mut ChaCha8Rng) -> String {
    let n_mon = rng.gen_range(3..=4);
    let n_modes = rng.gen_range(2..=3);
    let with_group = rng.gen_bool(0.3);
    let n_ctl = rng.gen_range(0..=1);

    let base: Vec<String> = (0..n_mon).map(|i| format!("m{i}")).collect();
    let modes: Vec<String> = (0..n_modes).map(|i| format!("M{i}")).collect();
    let mut s = String::from("spec gen\n");
    for v in &base {
        s += &format!("monitored {v}\n");
    }
    let mut group: Vec<String> = Vec::new();
    if with_group {
        group = (0..3).map(|i| format!("g{i}")).collect();
        for v in &group {
            s += &format!("monitored {v}\n");
        }
        s += "assumption one-of {g0, g1, g2}\n";
    }
    for i in 1..n_mon {
        for j in (i + 1)..n_mon {
            if rng.gen_bool(0.25) {
                s += &format!("assumption m{i} -->> m{j}\n");
            }
        }
    }
    s += &format!("modeclass M {{\n  modes {};\n", modes.join(", "));
    s += match rng.gen_range(0..3) {
        0 => "  initial M0 when true;\n",
        1 => "  initial M0 when ~m0;\n",
        _ => "  initial M0 when m0;\n",
    };
    let mut used = BTreeSet::new();
    for _ in 0..rng.gen_range(2..=5) {
        let from = modes[rng.gen_range(0..n_modes)].clone();
        let to = loop {
            let t = modes[rng.gen_range(0..n_modes)].clone();
            if t != from {
                break t;
            }
        };
        let var = base[rng.gen_range(0..n_mon)].clone();
        let rising = rng.gen_bool(0.5);
        if !used.insert((from.clone(), var.clone(), rising)) {
            continue;
        }
        s += &format!(
            "  from {from} to {to} on @{}({var})",
            if rising { "T" } else { "F" }
        );
        if rng.gen_bool(0.35) {
            let pool: Vec<&String> = base.iter().chain(group.iter()).collect();
            let g = pool[rng.gen_range(0..pool.len())];
            s += &format!(" when {}{g}", if rng.gen_bool(0.5) { "" } else { "~" });
        }
        s += ";\n";
    }
    s += "}\n";
    for c in 0..n_ctl {
        s += &format!("controlled c{c} {{\n  initial {};\n", rng.gen_bool(0.5));
        if rng.gen_bool(0.5) {
            let m = &modes[rng.gen_range(0..n_modes)];
            s += &format!("  in {m}: true on @T(inmode);\n  in {m}: false on @F(inmode);\n");
        } else {
            let mut cused = BTreeSet::new();
            for _ in 0..rng.gen_range(1..=2) {
                let m = modes[rng.gen_range(0..n_modes)].clone();
                let var = base[rng.gen_range(0..n_mon)].clone();
                let rising = rng.gen_bool(0.5);
                if !cused.insert((m.clone(), var.clone(), rising)) {
                    continue;
                }
                s += &format!(
                    "  in {m}: {} on @{}({var});\n",
                    rng.gen_bool(0.5),
                    if rising { "T" } else { "F" }
                );
            }
        }
        s += "}\n";
    }
    s
}

/// Like [`random_spec_text`], but resamples until the spec survives
/// assumption detailing (a contradictory row is a static error the tool
/// rejects up front, which the model-level suites are not about).
pub fn random_checkable_spec(rng: &mut ChaCha8Rng) -> (String, Spec) {
    loop {
        let text = random_spec_text(rng);
        let spec = scr3::parse::parse_spec(&text).expect("generated spec parses");
        if sem::detail_with_assumptions(&spec).is_ok() {
            return (text, spec);
        }
    }
}

/// Random goal over the spec's vocabulary, events included.
pub fn random_goal(rng: &mut ChaCha8Rng, spec: &Spec) -> Goal {
    let mut pool: Vec<Ctl> = Vec::new();
    for m in &spec.monitored {
        pool.push(Ctl::Atom(m.name.clone()));
    }
    for c in &spec.controlled {
        pool.push(Ctl::Atom(c.name.clone()));
    }
    for mc in &spec.mode_classes {
        for m in &mc.modes {
            pool.push(Ctl::ModeEq(mc.name.clone(), m.clone()));
        }
    }
    // at most one event operand keeps the prev-tracking blowup bounded
    let ev = &spec.monitored[rng.gen_range(0..spec.monitored.len())].name;
    pool.push(if rng.gen_bool(0.5) {
        Ctl::BecomesTrue(ev.clone())
    } else {
        Ctl::BecomesFalse(ev.clone())
    });
    let depth = rng.gen_range(1..=2);
    let formula = random_formula(rng, &pool, depth);
    Goal {
        name: "g".to_string(),
        formula,
        expected: None,
        span: SourceSpan::synthetic(),
    }
}

fn random_formula(rng: &mut ChaCha8Rng, pool: &[Ctl], depth: usize) -> Ctl {
    if depth == 0 {
        return pool[rng.gen_range(0..pool.len())].clone();
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, pool, depth - 1);
    match rng.gen_range(0..12) {
        0 => sub(rng).not(),
        1 => sub(rng).and(sub(rng)),
        2 => sub(rng).or(sub(rng)),
        3 => sub(rng).implies(sub(rng)),
        4 => sub(rng).ag(),
        5 => sub(rng).af(),
        6 => sub(rng).ef(),
        7 => Ctl::Eg(Box::new(sub(rng))),
        8 => sub(rng).ax(),
        9 => Ctl::Ex(Box::new(sub(rng))),
        10 => Ctl::Au(Box::new(sub(rng)), Box::new(sub(rng))),
        _ => Ctl::Eu(Box::new(sub(rng)), Box::new(sub(rng))),
    }
}

// ---------------------------------------------------------------------------
// Random annotated programs and the per-path conformance oracle.

pub struct CordCase {
    pub spec: Spec,
    pub program: AnnotatedProgram,
}

/// Random spec + loop-free annotated event handler for it. Mode-dispatch
/// arms always assert their mode; transitions may or may not be legal.
pub fn random_cord_case(rng: &mut ChaCha8Rng) -> CordCase {
    let vars = ["x", "y", "z"];
    let modes = ["A", "B", "C"];

    let mut spec_text = String::from(
        "spec gen\nmonitored x\nmonitored y\nmonitored z\nmodeclass M {\n  modes A, B, C;\n  initial A when true;\n",
    );
    let mut used = BTreeSet::new();
    for _ in 0..rng.gen_range(2..=5) {
        let from = modes[rng.gen_range(0..3)];
        let to = loop {
            let t = modes[rng.gen_range(0..3)];
            if t != from {
                break t;
            }
        };
        let var = vars[rng.gen_range(0..3)];
        let rising = rng.gen_bool(0.5);
        if !used.insert((from, var, rising)) {
            continue;
        }
        spec_text += &format!(
            "  from {from} to {to} on @{}({var})",
            if rising { "T" } else { "F" }
        );
        if rng.gen_bool(0.4) {
            let g = vars[rng.gen_range(0..3)];
            spec_text += &format!(" when {}{g}", if rng.gen_bool(0.5) { "" } else { "~" });
        }
        spec_text += ";\n";
    }
    spec_text += "}\n";
    let spec = scr3::parse::parse_spec(&spec_text).expect("generated spec parses");

    let mut c = String::from("int main(void) {\n    int vM = 0;\n    int vx = 0;\n    int vy = 0;\n    int vz = 0;\n    @@ Initial M=A & ~x & ~y & ~z;\n");
    let n_handlers = rng.gen_range(2..=4);
    for h in 0..n_handlers {
        let kw = if h == 0 { "if" } else { "else if" };
        let var = vars[rng.gen_range(0..3)];
        let value = rng.gen_bool(0.5);
        c += &format!("    {kw} (ev == {h}) {{\n");
        c += &format!("        v{var} = {};\n", value as i32);
        c += &format!(
            "        @@ Update {}{var};\n",
            if value { "" } else { "~" }
        );
        let n_arms = rng.gen_range(0..=2);
        let mut arm_modes = BTreeSet::new();
        for a in 0..n_arms {
            let from = loop {
                let m = modes[rng.gen_range(0..3)];
                if arm_modes.insert(m) {
                    break m;
                }
            };
            let to = modes[rng.gen_range(0..3)];
            let kw2 = if a == 0 { "if" } else { "else if" };
            c += &format!("        {kw2} (vM == m{from}) {{\n");
            c += &format!("            @@ Assert M={from};\n");
            let guarded = rng.gen_bool(0.5);
            if guarded {
                let g = vars[rng.gen_range(0..3)];
                let want = rng.gen_bool(0.5);
                c += &format!("            if ({}v{g}) {{\n", if want { "" } else { "!" });
                c += &format!(
                    "                @@ Assert {}{g};\n",
                    if want { "" } else { "~" }
                );
                c += &format!("                vM = m{to};\n");
                c += &format!("                @@ Update M={to};\n");
                c += "            }\n";
            } else {
                c += &format!("            vM = m{to};\n");
                c += &format!("            @@ Update M={to};\n");
            }
            c += "        }\n";
        }
        c += "    }\n";
    }
    c += "    return 0;\n}\n";
    let program = scr3::annot::parse_annotated_source(&c, "gen.c").expect("generated source parses");
    CordCase { spec, program }
}

/// Exact per-path analogue of the dataflow state.
#[derive(Clone)]
pub struct PathState {
    pub bools: BTreeMap<String, Option<bool>>,
    pub modes: BTreeMap<String, Option<String>>,
}

pub struct PathTransition {
    pub site: SourceSpan,
    pub class: String,
    pub mode: String,
    pub pre: PathState,
    pub event: Option<(String, bool)>,
}

pub struct PathRun {
    /// State on entry to each node of the path, parallel to `nodes`.
    pub nodes: Vec<usize>,
    pub entry_states: Vec<PathState>,
    pub transitions: Vec<PathTransition>,
}

/// Runs the annotation semantics along every acyclic path, no joins.
pub fn enumerate_path_runs(case: &CordCase, limit: usize) -> Option<Vec<PathRun>> {
    let paths = scr3::annot::enumerate_paths(&case.program.cfg, limit)?;
    let spec = &case.spec;
    let blank = PathState {
        bools: spec
            .monitored
            .iter()
            .map(|m| (m.name.clone(), None))
            .chain(spec.controlled.iter().map(|c| (c.name.clone(), None)))
            .collect(),
        modes: spec
            .mode_classes
            .iter()
            .map(|mc| (mc.name.clone(), None))
            .collect(),
    };
    let mut runs = Vec::new();
    for nodes in paths {
        let mut state = blank.clone();
        let mut pre_event = blank.clone();
        let mut event: Option<(String, bool)> = None;
        let mut entry_states = Vec::with_capacity(nodes.len());
        let mut transitions = Vec::new();
        for &i in &nodes {
            entry_states.push(state.clone());
            let NodeKind::Annot(ann) = &case.program.cfg.nodes[i].kind else {
                continue;
            };
            for atom in &ann.atoms {
                match (&ann.kind, atom) {
                    (AnnKind::Initial, AnnAtom::Bool { var, value })
                    | (AnnKind::Assert, AnnAtom::Bool { var, value }) => {
                        // contradictions overwrite, mirroring the dataflow
                        state.bools.insert(var.clone(), Some(*value));
                        pre_event.bools.insert(var.clone(), Some(*value));
                    }
                    (AnnKind::Initial, AnnAtom::ModeEq { class, mode })
                    | (AnnKind::Assert, AnnAtom::ModeEq { class, mode }) => {
                        state.modes.insert(class.clone(), Some(mode.clone()));
                        pre_event.modes.insert(class.clone(), Some(mode.clone()));
                    }
                    (AnnKind::Update, AnnAtom::Bool { var, value }) => {
                        if spec.is_monitored(var) {
                            pre_event = state.clone();
                            event = Some((var.clone(), *value));
                            state.bools.insert(var.clone(), Some(*value));
                        } else {
                            state.bools.insert(var.clone(), Some(*value));
                            pre_event.bools.insert(var.clone(), Some(*value));
                        }
                    }
                    (AnnKind::Update, AnnAtom::ModeEq { class, mode }) => {
                        transitions.push(PathTransition {
                            site: ann.span.clone(),
                            class: class.clone(),
                            mode: mode.clone(),
                            pre: pre_event.clone(),
                            event: event.clone(),
                        });
                        state.modes.insert(class.clone(), Some(mode.clone()));
                        event = None;
                        pre_event = state.clone();
                    }
                }
            }
        }
        runs.push(PathRun {
            nodes,
            entry_states,
            transitions,
        });
    }
    Some(runs)
}

/// A spec row licenses a path transition (exact compatibility: unknown
/// facts are compatible).
pub fn path_transition_licensed(spec: &Spec, t: &PathTransition) -> bool {
    let Some(mc) = spec.mode_class(&t.class) else {
        return false;
    };
    mc.rows.iter().any(|row| {
        let trig = row.trigger();
        let Some(tv) = trig.var() else {
            return false;
        };
        let ev_ok = match &t.event {
            None => true,
            Some((v, val)) => v == tv && *val == trig.rising,
        };
        let mode_ok = match &t.pre.modes[&mc.name] {
            None => true,
            Some(m) => m == &row.from_mode,
        };
        let guard_ok = row.guard.iter().all(|lit| {
            match t.pre.bools.get(&lit.var).copied().flatten() {
                None => true,
                Some(b) => b == lit.value,
            }
        });
        row.to_mode == t.mode && ev_ok && mode_ok && guard_ok
    })
}

/// Rows left uncovered by every path transition (the exact ALT findings),
/// identified by row span.
pub fn oracle_alt(spec: &Spec, runs: &[PathRun]) -> BTreeSet<SourceSpan> {
    let all: Vec<&PathTransition> = runs.iter().flat_map(|r| r.transitions.iter()).collect();
    let mut out = BTreeSet::new();
    for mc in &spec.mode_classes {
        for row in &mc.rows {
            let trig = row.trigger();
            let Some(tv) = trig.var() else { continue };
            let covered = all.iter().any(|t| {
                let ev_ok = match &t.event {
                    None => true,
                    Some((v, val)) => v == tv && *val == trig.rising,
                };
                let mode_ok = match &t.pre.modes[&mc.name] {
                    None => true,
                    Some(m) => m == &row.from_mode,
                };
                let guard_ok = row.guard.iter().all(|lit| {
                    match t.pre.bools.get(&lit.var).copied().flatten() {
                        None => true,
                        Some(b) => b == lit.value,
                    }
                });
                t.class == mc.name && t.mode == row.to_mode && ev_ok && mode_ok && guard_ok
            });
            if !covered {
                out.insert(row.span.clone());
            }
        }
    }
    out
}

/// Update sites whose transition is unlicensed on every path (definite OLT
/// violations) and on at least one path (possible violations).
pub fn oracle_olt(spec: &Spec, runs: &[PathRun]) -> (BTreeSet<SourceSpan>, BTreeSet<SourceSpan>) {
    let mut per_site: BTreeMap<SourceSpan, (usize, usize)> = BTreeMap::new();
    for t in runs.iter().flat_map(|r| r.transitions.iter()) {
        let e = per_site.entry(t.site.clone()).or_insert((0, 0));
        e.0 += 1;
        if !path_transition_licensed(spec, t) {
            e.1 += 1;
        }
    }
    let every: BTreeSet<SourceSpan> = per_site
        .iter()
        .filter(|(_, (n, bad))| n == bad && *n > 0)
        .map(|(s, _)| s.clone())
        .collect();
    let some: BTreeSet<SourceSpan> = per_site
        .iter()
        .filter(|(_, (_, bad))| *bad > 0)
        .map(|(s, _)| s.clone())
        .collect();
    (every, some)
}

/// Checks that the fixpoint in-flows over-approximate every path state:
/// definite folded facts agree with the path value, and the path's known
/// mode is inside the folded mode set.
pub fn folded_covers_paths(abs: &AbstractModel, runs: &[PathRun]) -> Result<(), String> {
    for run in runs {
        for (pos, &node) in run.nodes.iter().enumerate() {
            let Some(flow) = &abs.points[node] else {
                return Err(format!("node {node} on a path but never reached"));
            };
            let exact = &run.entry_states[pos];
            for (var, tri) in &flow.state.bools {
                let definite = match tri {
                    Tri::True => Some(true),
                    Tri::False => Some(false),
                    Tri::Unknown => None,
                };
                if let Some(want) = definite {
                    if exact.bools.get(var).copied().flatten() != Some(want) {
                        return Err(format!(
                            "node {node}: folded claims {var}={want} but a path disagrees"
                        ));
                    }
                }
            }
            for (class, set) in &flow.state.modes {
                if let Some(Some(m)) = exact.modes.get(class) {
                    if !set.contains(m) {
                        return Err(format!(
                            "node {node}: path mode {m} outside the folded mode set"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}
