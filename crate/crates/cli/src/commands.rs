use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lemmata::bench::{bench as run_bench, BenchConfig, BenchRow};
use lemmata::env::{Env, Lemma, Statement, TacticKind};
use lemmata::hierarchy::{check_acyclic, diamond_ladder, diamond_report, generate, stats as hierarchy_stats, CycleReport, Shape};
use lemmata::lint::{lint as run_lint, LintFinding, Severity};
use lemmata::prooftrace::{verify as verify_trace, ProofTrace, Verdict};
use lemmata::resolver::Strategy;
use lemmata::linarith::{linarith_goal, LinarithOutcome};
use lemmata::rewriter::{norm_cast, simp, SimpConfig};
use lemmata::scalar::format_rational;
use lemmata::syntax::{format_term, lex, parse_into, parse_term, ParseError, Sort, Term, TermCtx, Tok};
use lemmata::tactic::{run_goal, GoalReport, TacticOptions};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::{OutputArgs, SearchArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

fn emit_json(v: &impl Serialize) {
    let text = serde_json::to_string_pretty(v).expect("report serializes");
    let _ = writeln!(std::io::stdout(), "{text}");
}

/// Reports an error that prevents the command from running at all.
fn usage_error(out: &OutputArgs, msg: &str) -> u8 {
    if out.json {
        emit_json(&json!({ "ok": false, "error": { "kind": "usage", "message": msg } }));
    } else {
        eprintln!("error: {msg}");
    }
    EXIT_USAGE
}

fn parse_error(out: &OutputArgs, file: &Path, e: &ParseError) -> u8 {
    let pos = e.pos();
    if out.json {
        emit_json(&json!({
            "file": file.display().to_string(),
            "ok": false,
            "error": {
                "kind": e.kind(),
                "message": e.to_string(),
                "line": pos.map(|p| p.line),
                "col": pos.map(|p| p.col),
            }
        }));
    } else {
        eprintln!("{}:{e}", file.display());
    }
    EXIT_USAGE
}

/// Reads and parses a declaration file; the error is the exit code.
fn load(file: &Path, out: &OutputArgs) -> Result<Env, u8> {
    let src = fs::read_to_string(file).map_err(|e| usage_error(out, &format!("{}: {e}", file.display())))?;
    Env::parse(&src).map_err(|e| parse_error(out, file, &e))
}

fn search_options(search: &SearchArgs) -> Result<TacticOptions> {
    let strategy = match &search.strategy {
        None => None,
        Some(s) => Some(Strategy::parse(s).with_context(|| format!("unknown strategy `{s}`"))?),
    };
    Ok(TacticOptions {
        strategy,
        max_depth: search.max_depth,
        fuel: search.fuel,
    })
}

fn print_findings(file: &Path, findings: &[LintFinding]) {
    for f in findings {
        let sev = match f.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        println!(
            "{}:{}: {sev}[{}] {}: {}",
            file.display(),
            f.pos,
            f.check.id(),
            f.decl,
            f.message
        );
    }
}

fn print_goal(r: &GoalReport) {
    if r.proved {
        println!("ok    {} ({})", r.name, r.tactic);
    } else {
        println!("FAIL  {} ({}): {}", r.name, r.tactic, r.message);
    }
}

#[derive(Serialize)]
struct CheckReport<'a> {
    file: String,
    ok: bool,
    cycles: &'a CycleReport,
    lint: &'a [LintFinding],
    goals: &'a [GoalReport],
}

pub fn check(file: &Path, search: &SearchArgs, out: &OutputArgs) -> u8 {
    let opts = match search_options(search) {
        Ok(o) => o,
        Err(e) => return usage_error(out, &e.to_string()),
    };
    let env = match load(file, out) {
        Ok(env) => env,
        Err(code) => return code,
    };
    let cycles = check_acyclic(&env);
    let findings = run_lint(&env, out.strict);
    // Goals are independent; collect keeps declaration order.
    let goals: Vec<GoalReport> = if cycles.is_acyclic() {
        env.goals.par_iter().map(|g| run_goal(g, &env, &opts)).collect()
    } else {
        Vec::new()
    };
    let ok = cycles.is_acyclic()
        && goals.iter().all(|g| g.proved)
        && findings.iter().all(|f| f.severity != Severity::Error);
    if out.json {
        emit_json(&CheckReport {
            file: file.display().to_string(),
            ok,
            cycles: &cycles,
            lint: &findings,
            goals: &goals,
        });
    } else {
        if let CycleReport::Cycles { cycles } = &cycles {
            for c in cycles {
                println!("{}: error[cycle] instance cycle: {} -> {}", file.display(), c.join(" -> "), c[0]);
            }
        }
        print_findings(file, &findings);
        goals.iter().for_each(print_goal);
        let proved = goals.iter().filter(|g| g.proved).count();
        println!("{proved}/{} goals proved, {} lint findings", goals.len(), findings.len());
    }
    if ok {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub struct ProveArgs {
    pub tactic: String,
    pub hyps: Vec<String>,
    pub sort: String,
    pub simpset: String,
    pub trace: Option<PathBuf>,
    pub goal: String,
    pub file: Option<PathBuf>,
    pub stats: Option<String>,
}

const RESERVED: &[&str] = &["forall", "exists", "not", "true", "false", "Prop"];

/// Identifiers of the goal and hypotheses that the environment does not
/// declare, in order of first appearance. Names bound by a quantifier and
/// names in function position are skipped.
fn free_names(srcs: &[&str], env: &Env) -> Result<Vec<String>> {
    let mut seen = BTreeSet::new();
    let mut names = Vec::new();
    for src in srcs {
        let toks: Vec<Tok> = lex(src)?.into_iter().map(|t| t.tok).collect();
        let mut bound = BTreeSet::new();
        for (i, t) in toks.iter().enumerate() {
            let Tok::Ident(name) = t else { continue };
            let prev = i.checked_sub(1).map(|j| &toks[j]);
            let binder = matches!(prev, Some(Tok::Sym("∀"))) || matches!(prev, Some(Tok::Ident(p)) if p == "forall");
            if binder {
                bound.insert(name.clone());
                continue;
            }
            let applied = matches!(toks.get(i + 1), Some(Tok::Sym("(")));
            if RESERVED.contains(&name.as_str())
                || bound.contains(name)
                || applied
                || env.is_declared(name)
                || env.has_sort(name)
            {
                continue;
            }
            if seen.insert(name.clone()) {
                names.push(name.clone());
            }
        }
    }
    Ok(names)
}

fn goal_source(args: &ProveArgs, env: &Env) -> Result<String> {
    if TacticKind::from_name(&args.tactic).is_none() {
        bail!("unknown tactic `{}`", args.tactic);
    }
    if args.simpset != "default" {
        bail!("unknown simp set `{}` (only `default` exists)", args.simpset);
    }
    let mut srcs: Vec<&str> = vec![&args.goal];
    srcs.extend(args.hyps.iter().map(String::as_str));
    let vars = free_names(&srcs, env)?;
    let mut s = format!("goal cli_goal {{{}}}", args.sort);
    if !vars.is_empty() {
        s.push_str(&format!(" ({} : {})", vars.join(" "), args.sort));
    }
    for (i, h) in args.hyps.iter().enumerate() {
        s.push_str(&format!(" (h{i} : {h})"));
    }
    s.push_str(&format!(" : {} by {}\n", args.goal, args.tactic));
    Ok(s)
}

#[derive(Serialize)]
struct CertificateReport {
    multipliers: Vec<String>,
    combined: String,
}

#[derive(Serialize)]
struct ProveReport {
    #[serde(flatten)]
    goal: GoalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificates: Option<Vec<CertificateReport>>,
}

/// Certificates of the refuted cases, with the combination written over
/// the atom names.
fn certificates(goal: &Lemma, int_mode: bool) -> Option<Vec<CertificateReport>> {
    let Statement::Term(t) = &goal.stmt else { return None };
    let hyps: Vec<Term> = goal.hyps.iter().map(|h| h.stmt.clone()).collect();
    let LinarithOutcome::Proved { refutations, .. } = linarith_goal(&hyps, t, int_mode).ok()? else {
        return None;
    };
    let reports = refutations
        .iter()
        .map(|(sys, cert)| {
            let combined = cert
                .combined(sys)
                .map(|c| {
                    let mut text = c.to_string();
                    for (i, v) in sys.vars.iter().enumerate().rev() {
                        text = text.replace(&format!("x{i}"), v);
                    }
                    text
                })
                .unwrap_or_default();
            CertificateReport {
                multipliers: cert.multipliers.iter().map(format_rational).collect(),
                combined,
            }
        })
        .collect();
    Some(reports)
}

/// `simp`, `dsimp` and `norm_cast` on a term that is not a proposition:
/// report its normal form.
fn normalize_term(args: &ProveArgs, t: &Term, env: &Env, opts: &TacticOptions, out: &OutputArgs) -> u8 {
    let kind = TacticKind::from_name(&args.tactic).expect("checked by goal_source");
    let cfg = SimpConfig {
        fuel: opts.fuel,
        ..SimpConfig::default()
    };
    let result = match kind {
        TacticKind::Simp => simp(t, &env.simp_rules(), env, &cfg),
        TacticKind::Dsimp => simp(t, &env.def_rules(), env, &cfg),
        _ => norm_cast(t, env),
    };
    let (normal, rw) = match result {
        Ok(r) => r,
        Err(e) => {
            if out.json {
                emit_json(&json!({ "ok": false, "error": { "kind": "tactic", "message": e.to_string() } }));
            } else {
                println!("FAIL  {}: {e}", args.tactic);
            }
            return EXIT_FAIL;
        }
    };
    let trace = rw.to_proof(kind.name(), t, &normal);
    let verdict = verify_trace(&trace, env);
    if let Some(path) = &args.trace {
        if let Err(e) = fs::write(path, trace.to_json()) {
            return usage_error(out, &format!("{}: {e}", path.display()));
        }
    }
    if out.json {
        emit_json(&json!({
            "tactic": kind.name(),
            "normal_form": format_term(&normal),
            "rules_used": rw.rules_used(),
            "verdict": verdict,
            "trace": trace,
        }));
    } else {
        println!("{}", format_term(&normal));
    }
    if verdict.is_accepted() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub fn prove(args: &ProveArgs, search: &SearchArgs, out: &OutputArgs) -> u8 {
    let opts = match search_options(search) {
        Ok(o) => o,
        Err(e) => return usage_error(out, &e.to_string()),
    };
    let (mut env, label) = match &args.file {
        Some(f) => match load(f, out) {
            Ok(env) => (env, f.clone()),
            Err(code) => return code,
        },
        None => (Env::new(), PathBuf::from("<goal>")),
    };
    let src = match goal_source(args, &env) {
        Ok(s) => s,
        Err(e) => return usage_error(out, &e.to_string()),
    };
    let kind = TacticKind::from_name(&args.tactic).expect("checked by goal_source");
    if matches!(kind, TacticKind::Simp | TacticKind::Dsimp | TacticKind::NormCast) && args.hyps.is_empty() {
        let ctx = TermCtx::with_default(Sort::named(&args.sort));
        if let Ok(t) = parse_term(&args.goal, &env, &ctx) {
            if t.sort() != Sort::Prop {
                return normalize_term(args, &t, &env, &opts, out);
            }
        }
    }
    if let Err(e) = parse_into(&mut env, &src) {
        return parse_error(out, &label, &e);
    }
    let goal = env.goals.last().expect("goal was just added").clone();
    let report = run_goal(&goal, &env, &opts);
    if let (Some(path), Some(tr)) = (&args.trace, &report.trace) {
        if let Err(e) = fs::write(path, tr.to_json()) {
            return usage_error(out, &format!("{}: {e}", path.display()));
        }
    }
    let proved = report.proved;
    if let Some(format) = &args.stats {
        let Some(m) = &report.metrics else {
            return usage_error(out, "--stats applies to class goals only");
        };
        if format == "json" || out.json {
            emit_json(m);
        } else {
            println!(
                "outcome {} nodes_expanded {} cache_hits {} max_depth_reached {} elapsed_ns {}",
                m.outcome.name(),
                m.nodes_expanded,
                m.cache_hits,
                m.max_depth_reached,
                m.elapsed_ns
            );
        }
    } else if out.json {
        let certificates = match kind {
            TacticKind::Linarith | TacticKind::Omega if proved => certificates(&goal, kind == TacticKind::Omega),
            _ => None,
        };
        emit_json(&ProveReport {
            goal: report,
            certificates,
        });
    } else {
        print_goal(&report);
    }
    if proved {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub fn verify(trace: &Path, file: Option<&Path>, out: &OutputArgs) -> u8 {
    let env = match file {
        Some(f) => match load(f, out) {
            Ok(env) => env,
            Err(code) => return code,
        },
        None => Env::new(),
    };
    let tr: ProofTrace = match fs::read_to_string(trace)
        .map_err(anyhow::Error::from)
        .and_then(|s| serde_json::from_str(&s).map_err(anyhow::Error::from))
    {
        Ok(t) => t,
        Err(e) => return usage_error(out, &format!("{}: {e}", trace.display())),
    };
    let verdict = verify_trace(&tr, &env);
    if out.json {
        emit_json(&verdict);
    } else {
        match &verdict {
            Verdict::Accepted => println!("accepted"),
            Verdict::Rejected { step: Some(i), reason } => println!("rejected at step {i}: {reason}"),
            Verdict::Rejected { step: None, reason } => println!("rejected: {reason}"),
        }
    }
    if verdict.is_accepted() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub fn lint(file: &Path, out: &OutputArgs) -> u8 {
    let env = match load(file, out) {
        Ok(env) => env,
        Err(code) => return code,
    };
    let findings = run_lint(&env, out.strict);
    if out.json {
        emit_json(&findings);
    } else {
        print_findings(file, &findings);
    }
    if findings.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn parse_shape(s: &str) -> Result<Shape> {
    Shape::parse(s).with_context(|| format!("unknown shape `{s}` (chain or diamond-ladder)"))
}

pub fn gen(shape: &str, n: usize, with_fact: bool, out: &OutputArgs) -> u8 {
    let shape = match parse_shape(shape) {
        Ok(s) => s,
        Err(e) => return usage_error(out, &e.to_string()),
    };
    let g = match shape {
        Shape::DiamondLadder => diamond_ladder(n, with_fact),
        _ => generate(shape, n),
    };
    if out.json {
        emit_json(&json!({
            "shape": shape.name(),
            "n": n,
            "seed": out.seed,
            "classes": g.class_count,
            "rules": g.rule_count,
            "query": g.query,
            "source": g.source,
        }));
    } else {
        print!("{}", g.source);
        println!("goal query : {} by infer_instance", g.query);
    }
    EXIT_OK
}

fn parse_range(s: &str) -> Result<Vec<usize>> {
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse::<usize>()?, b.trim().parse::<usize>()?),
        None => {
            let k = s.trim().parse::<usize>()?;
            (k, k)
        }
    };
    Ok((a..=b).collect())
}

fn parse_strategies(s: &str) -> Result<Vec<Strategy>> {
    s.split(',')
        .map(|x| Strategy::parse(x.trim()).with_context(|| format!("unknown strategy `{x}`")))
        .collect()
}

fn write_csv(rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn bench(shape: &str, n: &str, strategy: &str, max_depth: usize, cache: bool, format: &str, out: &OutputArgs) -> u8 {
    let parsed = parse_shape(shape).and_then(|sh| {
        let ns = parse_range(n).with_context(|| format!("bad range `{n}`"))?;
        let strategies = parse_strategies(strategy)?;
        Ok((sh, ns, strategies))
    });
    let (shape, ns, strategies) = match parsed {
        Ok(p) => p,
        Err(e) => return usage_error(out, &e.to_string()),
    };
    let rows = run_bench(shape, &ns, &strategies, &BenchConfig { max_depth, cache });
    let format = if out.json { "json" } else { format };
    match format {
        "json" => emit_json(&rows),
        "csv" => {
            if let Err(e) = write_csv(&rows) {
                return usage_error(out, &e.to_string());
            }
        }
        other => return usage_error(out, &format!("unknown format `{other}` (csv or json)")),
    }
    EXIT_OK
}

pub fn stats(file: &Path, out: &OutputArgs) -> u8 {
    let env = match load(file, out) {
        Ok(env) => env,
        Err(code) => return code,
    };
    let s = hierarchy_stats(&env);
    let diamonds = diamond_report(&env);
    let cycles = check_acyclic(&env);
    if out.json {
        emit_json(&json!({
            "stats": s,
            "cycles": cycles,
            "diamonds": diamonds,
        }));
    } else {
        println!("classes              {}", s.class_count);
        println!("instances            {}", s.instance_count);
        println!("unary classes        {}", s.unary_count);
        println!("class-to-class rules {}", s.class_to_class_count);
        println!("max out-degree       {}", s.max_out_degree);
        println!("diamonds             {}", diamonds.len());
        println!("acyclic              {}", cycles.is_acyclic());
    }
    EXIT_OK
}
