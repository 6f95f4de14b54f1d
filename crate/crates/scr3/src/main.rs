//! Command-line front end. Exit codes: 0 = clean, 1 = findings or refuted
//! goals, 2 = usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use scr3::ast::Spec;
use scr3::diag::Diagnostic;
use scr3::parse;
use scr3::{annot, cord, mc, sem, smv, wf};

#[derive(Parser)]
#[command(name = "scr3", version, about = "Tabular requirements toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TraceFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a specification and run the static well-formedness checks.
    Check { spec: PathBuf },
    /// Model-check the specification's goals.
    Verify {
        spec: PathBuf,
        /// Check only the named goal.
        #[arg(long)]
        goal: Option<String>,
        /// Build the whole model instead of a per-goal slice.
        #[arg(long)]
        no_slice: bool,
        /// Print the state graph of each checked goal's model.
        #[arg(long)]
        dump_model: bool,
        #[arg(long, value_enum, default_value = "text")]
        trace_format: TraceFormat,
    },
    /// Translate the specification to SMV.
    EmitSmv {
        spec: PathBuf,
        /// Output file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check annotation discipline of an annotated C source.
    Sac {
        src: PathBuf,
        /// Correspondence file mapping spec names to code variables.
        #[arg(long)]
        cor: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Abstract an annotated C source and compare it with the specification.
    Cord {
        src: PathBuf,
        /// Correspondence file mapping spec names to code variables.
        #[arg(long)]
        cor: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Exit nonzero when the report has findings.
        #[arg(long)]
        strict: bool,
        /// Condition that must hold at every feasible program point (repeatable).
        #[arg(long)]
        invariant: Vec<String>,
        /// Condition to test for compatibility with some program point (repeatable).
        #[arg(long)]
        reach: Vec<String>,
    },
    /// Reprint a specification in canonical form.
    Fmt { spec: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_spec(path: &Path) -> Result<Spec, String> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    parse::parse_spec_named(&text, &name).map_err(|diags| {
        diags
            .iter()
            .map(Diagnostic::to_string)
            .collect::<Vec<_>>()
            .join("\n")
    })
}

fn state_cap() -> Result<usize, String> {
    match std::env::var("SCR3_STATE_CAP") {
        Ok(v) => v
            .parse()
            .map_err(|_| format!("SCR3_STATE_CAP must be a number, got `{v}`")),
        Err(_) => Ok(sem::DEFAULT_STATE_CAP),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check { spec } => {
            let spec = load_spec(&spec)?;
            let diags = wf::check_well_formed(&spec);
            for d in &diags {
                println!("{d}");
            }
            if diags.iter().any(Diagnostic::is_error) {
                Ok(ExitCode::from(1))
            } else {
                if diags.is_empty() {
                    println!("no issues found");
                }
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Verify {
            spec,
            goal,
            no_slice,
            dump_model,
            trace_format,
        } => {
            let spec = load_spec(&spec)?;
            let cap = state_cap()?;
            verify(&spec, goal.as_deref(), !no_slice, dump_model, trace_format, cap)
        }
        Command::EmitSmv { spec, output } => {
            let spec = load_spec(&spec)?;
            let text = smv::emit_smv(&spec, &spec.goals).map_err(|e| e.to_string())?;
            fs::write(&output, text)
                .map_err(|e| format!("cannot write {}: {e}", output.display()))?;
            println!("wrote {}", output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sac { src, cor, spec } => {
            let spec = load_spec(&spec)?;
            let program = annot::parse_annotated_source(&read_file(&src)?, &src.display().to_string())
                .map_err(|d| d.to_string())?;
            let cor = annot::parse_correspondences(&read_file(&cor)?, &cor.display().to_string())
                .map_err(|d| d.to_string())?;
            check_cor_names(&cor, &spec)?;
            let diags = annot::sac_check(&program, &cor);
            for d in &diags {
                println!("{d}");
            }
            if diags.is_empty() {
                println!("annotation discipline: clean");
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Cord {
            src,
            cor,
            spec,
            strict,
            invariant,
            reach,
        } => {
            let spec = load_spec(&spec)?;
            let program = annot::parse_annotated_source(&read_file(&src)?, &src.display().to_string())
                .map_err(|d| d.to_string())?;
            let cor = annot::parse_correspondences(&read_file(&cor)?, &cor.display().to_string())
                .map_err(|d| d.to_string())?;
            check_cor_names(&cor, &spec)?;
            let invariants = parse_conditions(&invariant)?;
            let reaches = parse_conditions(&reach)?;
            run_cord(&program, &spec, &invariants, &reaches, strict)
        }
        Command::Fmt { spec } => {
            let spec = load_spec(&spec)?;
            print!("{}", parse::format_spec(&spec));
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Every spec-side name in a correspondence file must exist in the spec;
/// a typo here would silently exempt the variable from both analyses.
fn check_cor_names(cor: &annot::Correspondences, spec: &Spec) -> Result<(), String> {
    for entry in &cor.entries {
        for name in &entry.spec_vars {
            let known = spec.monitored.iter().any(|m| &m.name == name)
                || spec.controlled.iter().any(|c| &c.name == name)
                || spec.mode_classes.iter().any(|m| &m.name == name);
            if !known {
                return Err(format!(
                    "correspondence names `{name}`, which the specification does not declare"
                ));
            }
        }
    }
    Ok(())
}

fn parse_conditions(texts: &[String]) -> Result<Vec<scr3::ctl::Ctl>, String> {
    texts
        .iter()
        .map(|t| parse::parse_goal(t).map_err(|d| d.to_string()))
        .collect()
}

fn verify(
    spec: &Spec,
    only: Option<&str>,
    use_slice: bool,
    dump_model: bool,
    trace_format: TraceFormat,
    cap: usize,
) -> Result<ExitCode, String> {
    let goals: Vec<_> = match only {
        Some(name) => {
            let goal = spec
                .goals
                .iter()
                .find(|g| g.name == name)
                .ok_or_else(|| format!("no goal named `{name}`"))?;
            vec![goal.clone()]
        }
        None => spec.goals.clone(),
    };
    if goals.is_empty() {
        println!("specification declares no goals");
        return Ok(ExitCode::SUCCESS);
    }

    // Goals have independent slices, so they check in parallel; results
    // print in declaration order.
    let results: Vec<Result<mc::GoalResult, mc::GoalError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = goals
            .iter()
            .map(|goal| scope.spawn(move || mc::check_one_goal(spec, goal, use_slice, cap)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut failures = 0usize;
    for result in results {
        let r = result.map_err(|e| e.to_string())?;
        let verdict = if r.holds { "HOLDS" } else { "FAILS" };
        let expectation = match r.expected {
            Some(true) => " (expected HOLDS)",
            Some(false) => " (expected FAILS)",
            None => "",
        };
        let mismatch = match r.matches_expected {
            Some(false) => "  <-- MISMATCH",
            _ => "",
        };
        println!(
            "goal {}: {verdict}{expectation} [{} states]{mismatch}",
            r.name, r.model_states
        );
        let bad = match r.matches_expected {
            Some(m) => !m,
            None => !r.holds,
        };
        if bad {
            failures += 1;
        }
        if let Some(trace) = &r.counterexample {
            match trace_format {
                TraceFormat::Text => {
                    println!("counterexample:");
                    print!("{}", mc::render_counterexample(trace, spec));
                }
                TraceFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(trace).unwrap());
                }
            }
        }
        if dump_model {
            let goal = goals.iter().find(|g| g.name == r.name).unwrap();
            let working = if use_slice {
                sem::slice(spec, std::slice::from_ref(goal)).map_err(|e| e.to_string())?
            } else {
                spec.clone()
            };
            let stutter = working.monitored.len() < spec.monitored.len();
            let working = sem::detail_with_assumptions(&working).map_err(|e| e.to_string())?;
            let tracked = sem::tracked_vars(std::slice::from_ref(goal));
            let model = sem::build_model_opts(&working, &tracked, cap, stutter)
                .map_err(|e| e.to_string())?;
            print!("{}", model.dump());
        }
    }
    if failures == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn run_cord(
    program: &annot::AnnotatedProgram,
    spec: &Spec,
    invariants: &[scr3::ctl::Ctl],
    reaches: &[scr3::ctl::Ctl],
    strict: bool,
) -> Result<ExitCode, String> {
    let abs = cord::build_abstraction(program, spec);
    for d in &abs.diagnostics {
        println!("{d}");
    }
    let report = cord::check_conformance(&abs, spec);
    for d in report.initial.iter().chain(&report.alt).chain(&report.olt) {
        println!("{d}");
    }
    println!(
        "conformance: {} INITIAL, {} ALT, {} OLT finding(s)",
        report.initial.len(),
        report.alt.len(),
        report.olt.len()
    );
    let props = cord::check_code_properties(&abs, program, spec, invariants, reaches);
    for d in props
        .invariant_violations
        .iter()
        .chain(&props.assumption_violations)
        .chain(&props.unreachable_annotations)
    {
        println!("{d}");
    }
    for (cond, reachable) in &props.reachability {
        println!(
            "reach {cond}: {}",
            if *reachable { "possible" } else { "excluded" }
        );
    }
    let findings = !report.is_clean()
        || !props.invariant_violations.is_empty()
        || !props.assumption_violations.is_empty();
    if strict && findings {
        Ok(ExitCode::from(1))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
