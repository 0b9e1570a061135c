//! Directional rewriting: `simp` with conditional rules, `dsimp` with
//! definitional rules only, and coercion normalization by `norm_cast`.

mod norm_cast;
mod simp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::RewriteRule;
use crate::prooftrace::{ProofTrace, Step};
use crate::syntax::{RelOp, Term};

pub use norm_cast::norm_cast;
pub use simp::{dsimp, simp, simp_default, SimpConfig, CONDITION_DEPTH, DEFAULT_FUEL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("fuel exhausted after {} steps; likely looping rules: {}", trace.steps.len(), candidates.join(", "))]
    FuelExhausted {
        trace: RewriteTrace,
        candidates: Vec<String>,
    },
    #[error("rule `{rule}` is not oriented: {reason}")]
    Unoriented { rule: String, reason: String },
    #[error("rule `{rule}` has kind {kind} and cannot be used here")]
    WrongKind { rule: String, kind: String },
}

/// The rewrite steps taken from an initial term, positions relative to it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteTrace {
    pub steps: Vec<Step>,
}

impl RewriteTrace {
    /// Applies the recorded replacements to `start` without checking them.
    pub fn replay(&self, start: &Term) -> Option<Term> {
        let mut cur = start.clone();
        for s in &self.steps {
            if cur.at(&s.position) != Some(&s.before) || !cur.replace_at(&s.position, s.after.clone()) {
                return None;
            }
        }
        Some(cur)
    }

    pub fn rules_used(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.steps {
            if !out.contains(&s.rule.as_str()) {
                out.push(&s.rule);
            }
        }
        out
    }

    /// A checkable trace of `start = end`, rewriting the left side.
    pub fn to_proof(&self, tactic: &str, start: &Term, end: &Term) -> ProofTrace {
        let steps = self
            .steps
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.position.insert(0, 0);
                s
            })
            .collect();
        ProofTrace::equation(tactic, start.clone(), end.clone(), steps)
    }
}

/// Rejects rules that would match everything or invent variables.
pub fn orient_check(r: &RewriteRule) -> Result<(), String> {
    match &r.lhs {
        Term::Var { .. } => return Err("left-hand side is a bare variable".into()),
        Term::Op { sym, args, .. } if sym == crate::syntax::sym::APP && args.first().is_some_and(Term::is_var) => {
            return Err("left-hand side has a variable head".into())
        }
        _ => {}
    }
    let lhs_vars = r.lhs.var_names();
    if let Some(v) = r.rhs.var_names().into_iter().find(|v| !lhs_vars.contains(v)) {
        return Err(format!("fresh variable on RHS: {v}"));
    }
    let lhs_sorts = r.lhs.sort_vars();
    for c in &r.conditions {
        if let Some(v) = c.sort_vars().into_iter().find(|v| !lhs_sorts.contains(v)) {
            return Err(format!("condition {c} mentions {v}, which the left-hand side does not bind"));
        }
    }
    Ok(())
}

/// `lhs ↔ rhs` as the equation between propositions used by traces.
pub fn iff(lhs: Term, rhs: Term) -> Term {
    Term::rel(RelOp::Eq, lhs, rhs)
}
