//! Runs a goal declaration with its tactic and checks the resulting trace.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::arith::abel::abel_prove;
use crate::arith::norm_num::prove_rel;
use crate::arith::ring::{ring_prove, EqOutcome};
use crate::decide::decide;
use crate::env::{Env, Lemma, Statement, TacticKind};
use crate::linarith::{linarith_goal, LinarithOutcome};
use crate::prooftrace::{verify, ProofTrace, Terminal, TraceGoal, Verdict};
use crate::resolver::{resolve, Config, Query, SearchMetrics, Strategy, DEFAULT_MAX_DEPTH};
use crate::rewriter::{norm_cast, simp, RewriteTrace, SimpConfig, DEFAULT_FUEL};
use crate::syntax::{format_term, RelOp, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticOptions {
    /// Overrides the strategy of `infer`; `infer_bidir` always uses bidir.
    pub strategy: Option<Strategy>,
    pub max_depth: usize,
    pub fuel: usize,
}

impl Default for TacticOptions {
    fn default() -> Self {
        TacticOptions {
            strategy: None,
            max_depth: DEFAULT_MAX_DEPTH,
            fuel: DEFAULT_FUEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalReport {
    pub name: String,
    pub tactic: String,
    /// A trace was produced and the verifier accepted it.
    pub proved: bool,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<ProofTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<SearchMetrics>,
    pub elapsed_us: u64,
}

/// A proof attempt before verification.
struct Attempt {
    trace: Option<ProofTrace>,
    message: String,
    metrics: Option<SearchMetrics>,
}

impl Attempt {
    fn fail(message: impl Into<String>) -> Self {
        Attempt {
            trace: None,
            message: message.into(),
            metrics: None,
        }
    }

    fn proved(trace: ProofTrace) -> Self {
        Attempt {
            trace: Some(trace),
            message: String::new(),
            metrics: None,
        }
    }
}

/// How a rewritten statement is closed: identical sides, or a true literal
/// relation.
fn close(t: &Term) -> Option<Terminal> {
    let Term::Rel { op, lhs, rhs } = t else {
        return None;
    };
    if *op == RelOp::Eq && lhs == rhs {
        return Some(Terminal::Reflexivity);
    }
    if lhs.is_literal_expr() && rhs.is_literal_expr() {
        let p = prove_rel(t).ok()?;
        return p.holds.then_some(Terminal::LiteralTruth {
            lhs: p.lhs,
            rhs: p.rhs,
            trace: p.trace,
        });
    }
    None
}

fn rewritten(tactic: &str, stmt: &Term, out: Term, tr: RewriteTrace) -> Attempt {
    match close(&out) {
        Some(terminal) => Attempt::proved(ProofTrace::new(
            tactic,
            TraceGoal::Term { term: stmt.clone() },
            tr.steps,
            terminal,
        )),
        None => Attempt::fail(format!("{tactic} left `{}`", format_term(&out))),
    }
}

fn eq_outcome(tactic: &str, r: Result<EqOutcome, impl std::fmt::Display>) -> Attempt {
    match r {
        Ok(EqOutcome::Proved(trace)) => Attempt::proved(trace),
        Ok(EqOutcome::NotEqual { lhs, rhs }) => Attempt::fail(format!(
            "{tactic} normal forms differ: `{}` vs `{}`",
            format_term(&lhs),
            format_term(&rhs)
        )),
        Err(e) => Attempt::fail(e.to_string()),
    }
}

fn attempt(goal: &Lemma, kind: TacticKind, env: &Env, opts: &TacticOptions) -> Attempt {
    let name = kind.name();
    match (&goal.stmt, kind) {
        (Statement::Class(atom), TacticKind::Infer | TacticKind::InferBidir) => {
            let strategy = if kind == TacticKind::InferBidir {
                Strategy::Bidir
            } else {
                opts.strategy.unwrap_or(Strategy::Backward)
            };
            let q = Query::new(atom.clone()).with(Config {
                max_depth: opts.max_depth,
                strategy,
                cache: true,
            });
            let (d, m) = resolve(&q, env);
            let mut a = match d {
                Some(derivation) => Attempt::proved(ProofTrace::new(
                    name,
                    TraceGoal::Class { atom: atom.clone() },
                    vec![],
                    Terminal::Derivation { derivation },
                )),
                None => Attempt::fail(format!("{}: {}", atom, m.outcome.name())),
            };
            a.metrics = Some(m);
            a
        }
        (Statement::Decidable(p), TacticKind::DecTrivial) => match decide(p) {
            Ok(d) if d.value => Attempt::proved(ProofTrace::new(
                name,
                TraceGoal::Decidable { prop: p.clone() },
                vec![],
                Terminal::Decision { evidence: d.evidence },
            )),
            Ok(_) => Attempt::fail("proposition evaluates to false"),
            Err(e) => Attempt::fail(e.to_string()),
        },
        (Statement::Term(t), TacticKind::Ring) => eq_outcome(name, ring_prove(t)),
        (Statement::Term(t), TacticKind::Abel) => eq_outcome(name, abel_prove(t)),
        (Statement::Term(t), TacticKind::NormNum) => match prove_rel(t) {
            Ok(p) if p.holds => Attempt::proved(ProofTrace::new(
                name,
                TraceGoal::Term { term: t.clone() },
                vec![],
                Terminal::LiteralTruth {
                    lhs: p.lhs,
                    rhs: p.rhs,
                    trace: p.trace,
                },
            )),
            Ok(_) => Attempt::fail("the relation is false"),
            Err(e) => Attempt::fail(e.to_string()),
        },
        (Statement::Term(t), TacticKind::Simp | TacticKind::Dsimp) => {
            let rules = if kind == TacticKind::Simp {
                env.simp_rules()
            } else {
                env.def_rules()
            };
            let cfg = SimpConfig {
                fuel: opts.fuel,
                ..SimpConfig::default()
            };
            match simp(t, &rules, env, &cfg) {
                Ok((out, tr)) => rewritten(name, t, out, tr),
                Err(e) => Attempt::fail(e.to_string()),
            }
        }
        (Statement::Term(t), TacticKind::NormCast) => match norm_cast(t, env) {
            Ok((out, tr)) => rewritten(name, t, out, tr),
            Err(e) => Attempt::fail(e.to_string()),
        },
        (Statement::Term(t), TacticKind::Linarith | TacticKind::Omega) => {
            let hyps: Vec<Term> = goal
                .hyps
                .iter()
                .filter(|h| goal.tactic.as_ref().and_then(|t| t.using.as_ref()).map_or(true, |u| u.contains(&h.name)))
                .map(|h| h.stmt.clone())
                .collect();
            match linarith_goal(&hyps, t, kind == TacticKind::Omega) {
                Ok(LinarithOutcome::Proved { trace, .. }) => Attempt::proved(trace),
                Ok(LinarithOutcome::Unknown { witness }) => {
                    let w: Vec<String> = witness
                        .iter()
                        .map(|(k, v)| format!("{k} = {}", crate::scalar::format_rational(v)))
                        .collect();
                    Attempt::fail(format!("not entailed; counterexample {}", w.join(", ")))
                }
                Err(e) => Attempt::fail(e.to_string()),
            }
        }
        _ => Attempt::fail(format!("{name} does not apply to this statement")),
    }
}

/// Runs the goal's tactic and verifies the trace it produces.
pub fn run_goal(goal: &Lemma, env: &Env, opts: &TacticOptions) -> GoalReport {
    let start = Instant::now();
    let Some(tactic) = &goal.tactic else {
        return GoalReport {
            name: goal.name.clone(),
            tactic: String::new(),
            proved: false,
            message: "no tactic".into(),
            trace: None,
            verdict: None,
            metrics: None,
            elapsed_us: 0,
        };
    };
    let a = attempt(goal, tactic.kind, env, opts);
    let verdict = a.trace.as_ref().map(|tr| verify(tr, env));
    let proved = verdict.as_ref().is_some_and(Verdict::is_accepted);
    let message = match &verdict {
        Some(Verdict::Rejected { step, reason }) => match step {
            Some(i) => format!("trace rejected at step {i}: {reason}"),
            None => format!("trace rejected: {reason}"),
        },
        _ => a.message,
    };
    GoalReport {
        name: goal.name.clone(),
        tactic: tactic.kind.name().into(),
        proved,
        message,
        trace: a.trace,
        verdict,
        metrics: a.metrics,
        elapsed_us: start.elapsed().as_micros() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> Vec<GoalReport> {
        let env = Env::parse(src).unwrap();
        env.goals.iter().map(|g| run_goal(g, &env, &TacticOptions::default())).collect()
    }

    #[test]
    fn every_tactic_closes_a_goal() {
        let src = "sort Z\nclass ring (a)\nclass monoid (a)\ninstance ring_z : ring Z\ninstance m : monoid a <- ring a\n\
                   coe nat int\n\
                   [norm_cast_move] simp lemma nat_cast_add (a b : nat) : ↑(a + b) = ↑a + ↑b\n\
                   [norm_cast_elim] simp lemma nat_cast_gt (a b : nat) : ((↑a : int) > ↑b) ↔ a > b\n\
                   simp lemma mul_one (x : a) : x * 1 = x\n\
                   goal g1 : monoid Z by infer_instance\n\
                   goal g2 : monoid Z by infer_bidir\n\
                   goal g3 : 1 + 2 < 4 by norm_num\n\
                   goal g4 {int} (x y : int) : (x + y) * (x - y) = x ^ 2 - y ^ 2 by ring\n\
                   goal g5 {int} (a b : int) : a + b - a = b by abel\n\
                   goal g6 {int} (x : int) : x * 1 * 1 = x by simp\n\
                   goal g7 {int} (m n : nat) : (↑m + ↑n > 5) ↔ (m + n > 5) by norm_cast\n\
                   goal g8 {int} (a b c : int) (h1 : a ≤ b) (h2 : b ≤ c) : a ≤ c by linarith\n\
                   goal g9 {int} (x : int) (h : 2 * x ≥ 1) : x ≥ 1 by omega\n\
                   goal g10 : forall x < 3, x * x < 9 by dec_trivial\n";
        for r in run(src) {
            assert!(r.proved, "{}: {}", r.name, r.message);
        }
    }

    #[test]
    fn failures_are_reported() {
        let src = "sort Z\nclass ring (a)\n\
                   goal f1 : ring Z by infer_instance\n\
                   goal f2 : 3 < 2 by norm_num\n\
                   goal f3 {int} (x : int) : x + 1 = x by ring\n\
                   goal f4 {int} (x : int) (h : 2 * x ≥ 1) : x ≥ 1 by linarith\n";
        let reports = run(src);
        assert!(reports.iter().all(|r| !r.proved));
        assert!(reports[3].message.contains("counterexample"));
    }
}
