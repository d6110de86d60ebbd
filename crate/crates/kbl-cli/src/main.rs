//! Command line front end for the kbl model checker.
//!
//! Subcommands cover both semantics and the bridges between them: `check`
//! evaluates a formula on a network model and reports the cost bounds,
//! `derive` asks a knowledge base (or a pooled group) for a derivation,
//! `kripke-sat` evaluates on an explicit Kripke model, `translate` and
//! `invert` move between the two model classes, `bench` generates a seeded
//! suite and compares the bounds row by row, and `validate` audits a model
//! file.
//!
//! Exit codes: 0 satisfied/success, 1 not satisfied, 2 error, 3 bound
//! exhausted (common knowledge ran out of depth). All subcommands accept
//! `--json`; the prover step budget is taken from `KBL_STEP_BUDGET`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use kbl::checker::{self, CheckConfig, CostReport, Verdict};
use kbl::corpus::{self, GenConfig};
use kbl::deduction::{self, ProverConfig};
use kbl::kripke::{kripke_sat, DEFAULT_SIZE_GUARD};
use kbl::logic::{AgentId, Formula};
use kbl::snm::Snm;
use kbl::text::{
    parse_formula, parse_formula_free, parse_group, parse_kripke, parse_snm, print_kripke,
    print_snm, KripkeDocument,
};
use kbl::translate::{kt, mark_formula, reconstruct, KtModel};

#[derive(Parser)]
#[command(name = "kbl", version, about = "Model checker for knowledge-base logic over social networks")]
struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a formula on a network model and report cost bounds.
    Check {
        /// Network model file (.snm).
        model: PathBuf,
        /// Formula in the surface syntax, e.g. `K[Alice] loc(Bob, pub, 1)`.
        formula: String,
        /// Highest everyone-knows depth scanned for common knowledge.
        #[arg(long, default_value_t = CheckConfig::default().common_bound)]
        common_bound: u32,
    },
    /// Ask whether an agent's base (or a group's pooled bases) derives a formula.
    Derive {
        /// Network model file (.snm).
        model: PathBuf,
        /// Agent name, or a comma-separated group like `Alice,Bob`.
        who: String,
        /// Goal formula.
        formula: String,
        /// Print the tableau trace and, on failure, the countermodel.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate a formula at a state of an explicit Kripke model.
    KripkeSat {
        /// Kripke model file (.kripke).
        model: PathBuf,
        /// State name.
        state: String,
        /// Formula; atoms are free-form, e.g. `K[a] p(a)`.
        formula: String,
    },
    /// Translate a network model into its canonical Kripke model.
    Translate {
        /// Network model file (.snm).
        model: PathBuf,
        /// Mark connection/action atoms (`co_`/`ac_` prefixes) so the
        /// translation is invertible.
        #[arg(long)]
        marked: bool,
        #[command(flatten)]
        guard: GuardArg,
        /// Write the Kripke document here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rebuild a network model from a marked Kripke document.
    Invert {
        /// Kripke model file with a `characteristic` section.
        model: PathBuf,
        /// Write the network model here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a seeded suite and compare the cost bounds row by row.
    Bench {
        /// Seed for the instance generator.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of generated rows.
        #[arg(long, default_value_t = 20)]
        rows: usize,
        /// Extra row: check this model file...
        #[arg(long, requires = "formula")]
        model: Option<PathBuf>,
        /// ...against this formula.
        #[arg(long, requires = "model")]
        formula: Option<String>,
        #[command(flatten)]
        guard: GuardArg,
    },
    /// Parse a network model file and report structural diagnostics.
    Validate {
        /// Network model file (.snm).
        model: PathBuf,
    },
}

#[derive(Args)]
struct GuardArg {
    /// Largest subformula closure the canonical construction accepts.
    #[arg(long, default_value_t = DEFAULT_SIZE_GUARD)]
    guard: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prover = ProverConfig::from_env();
    let result = match cli.command {
        Command::Check {
            model,
            formula,
            common_bound,
        } => run_check(&model, &formula, common_bound, prover, cli.json),
        Command::Derive {
            model,
            who,
            formula,
            trace,
        } => run_derive(&model, &who, &formula, trace, prover, cli.json),
        Command::KripkeSat {
            model,
            state,
            formula,
        } => run_kripke_sat(&model, &state, &formula, cli.json),
        Command::Translate {
            model,
            marked,
            guard,
            output,
        } => run_translate(&model, marked, guard.guard, output.as_deref(), prover, cli.json),
        Command::Invert { model, output } => run_invert(&model, output.as_deref(), cli.json),
        Command::Bench {
            seed,
            rows,
            model,
            formula,
            guard,
        } => run_bench(seed, rows, model.as_deref(), formula.as_deref(), guard.guard, prover, cli.json),
        Command::Validate { model } => run_validate(&model, prover, cli.json),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// Verdict to exit code: satisfied 0, refuted 1, out of depth 3.
fn verdict_exit(verdict: Verdict) -> ExitCode {
    match verdict {
        Verdict::True => ExitCode::SUCCESS,
        Verdict::False => ExitCode::from(1),
        Verdict::BoundExhausted => ExitCode::from(3),
    }
}

fn verdict_str(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::True => "true",
        Verdict::False => "false",
        Verdict::BoundExhausted => "bound-exhausted",
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_snm(path: &Path, prover: &ProverConfig) -> Result<Snm, String> {
    let text = read_file(path)?;
    parse_snm(&text, prover).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_kripke(path: &Path) -> Result<KripkeDocument, String> {
    let text = read_file(path)?;
    parse_kripke(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Large bounds are reported as decimal strings: they reach `u128::MAX`
/// under saturation, past what JSON numbers carry faithfully.
fn report_json(report: &CostReport) -> Value {
    json!({
        "verdict": verdict_str(report.verdict),
        "formula": report.formula.to_string(),
        "formula_size": report.formula_size,
        "outer": report.outer.iter().map(|o| json!({
            "member": o.member.to_string(),
            "agent": o.agent.as_str(),
            "verdict": verdict_str(o.verdict),
            "body_size": o.body_size,
            "kb_size": o.kb_size,
            "term": o.term.to_string(),
        })).collect::<Vec<_>>(),
        "snm_bound": report.snm_bound.to_string(),
        "characteristic_size": report.characteristic_size,
        "kripke_bound": report.kripke_bound.to_string(),
        "strict": checker::snm_strictly_cheaper(report),
        "elapsed_us": report.elapsed.as_micros() as u64,
    })
}

fn run_check(
    model: &Path,
    formula: &str,
    common_bound: u32,
    prover: ProverConfig,
    as_json: bool,
) -> Result<ExitCode, String> {
    let snm = load_snm(model, &prover)?;
    let phi = parse_formula(formula, &snm.vocab).map_err(|e| e.to_string())?;
    let cfg = CheckConfig { common_bound, prover };
    let report = checker::cost_report(&snm, &phi, &cfg).map_err(|e| e.to_string())?;
    if as_json {
        println!("{}", report_json(&report));
    } else {
        println!("verdict: {}", verdict_str(report.verdict));
        println!("formula: {}  (size {})", report.formula, report.formula_size);
        for o in &report.outer {
            println!(
                "outer {}: {}, body size {}, base size {}, term {}",
                o.member,
                verdict_str(o.verdict),
                o.body_size,
                o.kb_size,
                o.term
            );
        }
        println!("snm bound: {}", report.snm_bound);
        println!(
            "kripke bound: {}  (characteristic size {})",
            report.kripke_bound, report.characteristic_size
        );
        match checker::snm_strictly_cheaper(&report) {
            Some(strict) => println!("strictly cheaper on the network side: {strict}"),
            None => println!("strictly cheaper on the network side: n/a (no outer knowledge)"),
        }
    }
    Ok(verdict_exit(report.verdict))
}

fn run_derive(
    model: &Path,
    who: &str,
    formula: &str,
    trace: bool,
    prover: ProverConfig,
    as_json: bool,
) -> Result<ExitCode, String> {
    let snm = load_snm(model, &prover)?;
    let group = parse_group(who).map_err(|e| e.to_string())?;
    for agent in &group {
        if !snm.agents.contains(agent) {
            return Err(format!("agent {agent} is not part of the model"));
        }
    }
    let phi = parse_formula(formula, &snm.vocab).map_err(|e| e.to_string())?;
    let goal = phi.ground(&snm.vocab).map_err(|e| e.to_string())?;

    let parts: Vec<(AgentId, Vec<Formula>)> = group
        .iter()
        .map(|agent| {
            let premises = snm.kb(agent).map_err(|e| e.to_string())?.ground_formulas();
            Ok((agent.clone(), premises))
        })
        .collect::<Result<_, String>>()?;
    let (derivable, rendered) = if trace {
        let (ok, text) = deduction::derive_group_trace(&parts, &goal, &prover)
            .map_err(|e| e.to_string())?;
        (ok, Some(text))
    } else {
        let ok = deduction::derive_group(&parts, &goal, &prover).map_err(|e| e.to_string())?;
        (ok, None)
    };

    if as_json {
        println!(
            "{}",
            json!({
                "derivable": derivable,
                "who": group.iter().map(AgentId::as_str).collect::<Vec<_>>(),
                "formula": goal.to_string(),
                "trace": rendered,
            })
        );
    } else {
        if let Some(text) = &rendered {
            print!("{text}");
        }
        println!("{}", if derivable { "derivable" } else { "not derivable" });
    }
    Ok(if derivable { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_kripke_sat(model: &Path, state: &str, formula: &str, as_json: bool) -> Result<ExitCode, String> {
    let doc = load_kripke(model)?;
    let phi = parse_formula_free(formula).map_err(|e| e.to_string())?;
    let satisfied = kripke_sat(&doc.model, state, &phi).map_err(|e| e.to_string())?;
    if as_json {
        println!(
            "{}",
            json!({
                "satisfied": satisfied,
                "state": state,
                "formula": phi.to_string(),
            })
        );
    } else {
        println!("{}", if satisfied { "satisfied" } else { "not satisfied" });
    }
    Ok(if satisfied { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn kt_document(kt: &KtModel) -> KripkeDocument {
    KripkeDocument {
        model: kt.canonical.model.clone(),
        characteristic: kt.characteristic.formulas.clone(),
        distinguished: Some(kt.distinguished.clone()),
    }
}

fn run_translate(
    model: &Path,
    marked: bool,
    guard: usize,
    output: Option<&Path>,
    prover: ProverConfig,
    as_json: bool,
) -> Result<ExitCode, String> {
    let snm = load_snm(model, &prover)?;
    let translated = kt(&snm, marked, guard, &prover).map_err(|e| e.to_string())?;
    let doc = kt_document(&translated);
    let text = print_kripke(&doc);
    if as_json {
        println!(
            "{}",
            json!({
                "marked": marked,
                "guard": guard,
                "states": translated.canonical.model.states.len(),
                "distinguished": translated.distinguished,
                "characteristic_members": translated.characteristic.formulas.len(),
                "document": text,
                "output": output.map(|p| p.display().to_string()),
            })
        );
        if let Some(p) = output {
            std::fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display()))?;
        }
    } else {
        emit(output, &text)?;
        if output.is_some() {
            println!(
                "wrote {} states, distinguished {}",
                translated.canonical.model.states.len(),
                translated.distinguished
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run_invert(model: &Path, output: Option<&Path>, as_json: bool) -> Result<ExitCode, String> {
    let doc = load_kripke(model)?;
    if doc.characteristic.is_empty() {
        return Err("the Kripke document has no characteristic section to invert".to_string());
    }
    let snm = reconstruct(&doc.characteristic).map_err(|e| e.to_string())?;
    let text = print_snm(&snm);
    if as_json {
        println!(
            "{}",
            json!({
                "agents": snm.agents.iter().map(AgentId::as_str).collect::<Vec<_>>(),
                "document": text,
                "output": output.map(|p| p.display().to_string()),
            })
        );
        if let Some(p) = output {
            std::fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display()))?;
        }
    } else {
        emit(output, &text)?;
    }
    Ok(ExitCode::SUCCESS)
}

struct BenchRow {
    label: String,
    agents: usize,
    report: CostReport,
    kripke_us: Option<u64>,
    kripke_skipped: Option<String>,
}

fn bench_row(
    label: String,
    snm: &Snm,
    phi: &Formula,
    guard: usize,
    cfg: &CheckConfig,
) -> Result<BenchRow, String> {
    let report = checker::cost_report(snm, phi, cfg).map_err(|e| e.to_string())?;
    let (kripke_us, kripke_skipped) = match kt(snm, true, guard, &cfg.prover) {
        Ok(translated) => {
            let marked = mark_formula(&report.formula);
            let started = Instant::now();
            kripke_sat(&translated.canonical.model, &translated.distinguished, &marked)
                .map_err(|e| e.to_string())?;
            (Some(started.elapsed().as_micros() as u64), None)
        }
        // Oversized models keep their bound columns; only the measured
        // Kripke time is missing.
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(BenchRow {
        label,
        agents: snm.agents.len(),
        report,
        kripke_us,
        kripke_skipped,
    })
}

fn run_bench(
    seed: u64,
    rows: usize,
    model: Option<&Path>,
    formula: Option<&str>,
    guard: usize,
    prover: ProverConfig,
    as_json: bool,
) -> Result<ExitCode, String> {
    let cfg = CheckConfig {
        prover: prover.clone(),
        ..CheckConfig::default()
    };
    let mut out: Vec<BenchRow> = Vec::new();

    let example = corpus::example_network();
    let example_phi =
        parse_formula("K[Charlie] loc(Bob, pub, 1)", &example.vocab).map_err(|e| e.to_string())?;
    out.push(bench_row("example".to_string(), &example, &example_phi, guard, &cfg)?);

    if let (Some(path), Some(text)) = (model, formula) {
        let snm = load_snm(path, &prover)?;
        let phi = parse_formula(text, &snm.vocab).map_err(|e| e.to_string())?;
        out.push(bench_row(path.display().to_string(), &snm, &phi, guard, &cfg)?);
    }

    let gen = GenConfig::default();
    let mut rng = corpus::rng(seed);
    for i in 0..rows {
        let snm = corpus::gen_snm(&mut rng, &gen, &prover);
        let phi = if i % 2 == 0 {
            corpus::gen_true_query(&mut rng, &snm)
        } else {
            corpus::gen_query(&mut rng, &snm, 2)
        };
        out.push(bench_row(format!("seed{seed}/{i}"), &snm, &phi, guard, &cfg)?);
    }

    let all_strict = out
        .iter()
        .all(|r| checker::snm_strictly_cheaper(&r.report) != Some(false));

    if as_json {
        println!(
            "{}",
            json!({
                "seed": seed,
                "guard": guard,
                "all_strict": all_strict,
                "rows": out.iter().enumerate().map(|(i, r)| json!({
                    "row": i,
                    "label": r.label,
                    "agents": r.agents,
                    "formula": r.report.formula.to_string(),
                    "formula_size": r.report.formula_size,
                    "outer_members": r.report.outer.len(),
                    "snm_bound": r.report.snm_bound.to_string(),
                    "kripke_bound": r.report.kripke_bound.to_string(),
                    "strict": checker::snm_strictly_cheaper(&r.report),
                    "verdict": verdict_str(r.report.verdict),
                    "snm_us": r.report.elapsed.as_micros() as u64,
                    "kripke_us": r.kripke_us,
                    "kripke_skipped": r.kripke_skipped,
                })).collect::<Vec<_>>(),
            })
        );
    } else {
        println!(
            "{:<12} {:>6} {:>8} {:>6} {:>22} {:>22} {:>7} {:>9} {:>10} {:>10}",
            "row", "agents", "|phi|", "outerK", "snm_bound", "kripke_bound", "strict", "verdict", "snm_us", "kripke_us"
        );
        for r in &out {
            let strict = match checker::snm_strictly_cheaper(&r.report) {
                Some(true) => "yes",
                Some(false) => "NO",
                None => "n/a",
            };
            let kripke_us = match (r.kripke_us, &r.kripke_skipped) {
                (Some(us), _) => us.to_string(),
                (None, Some(_)) => "guard".to_string(),
                (None, None) => "-".to_string(),
            };
            println!(
                "{:<12} {:>6} {:>8} {:>6} {:>22} {:>22} {:>7} {:>9} {:>10} {:>10}",
                r.label,
                r.agents,
                r.report.formula_size,
                r.report.outer.len(),
                r.report.snm_bound,
                r.report.kripke_bound,
                strict,
                verdict_str(r.report.verdict),
                r.report.elapsed.as_micros(),
                kripke_us
            );
        }
        println!("strict inequality on all applicable rows: {all_strict}");
    }
    Ok(if all_strict { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run_validate(model: &Path, prover: ProverConfig, as_json: bool) -> Result<ExitCode, String> {
    let text = read_file(model)?;
    // Parse failures are validation findings here, not tool errors: this
    // subcommand's job is to report what is wrong with the file.
    let diagnostics: Vec<String> = match parse_snm(&text, &prover) {
        Ok(snm) => snm.validate(&prover),
        Err(e) => vec![e.to_string()],
    };
    if as_json {
        println!(
            "{}",
            json!({
                "ok": diagnostics.is_empty(),
                "diagnostics": diagnostics,
            })
        );
    } else if diagnostics.is_empty() {
        println!("ok");
    } else {
        for d in &diagnostics {
            println!("{d}");
        }
    }
    Ok(if diagnostics.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
