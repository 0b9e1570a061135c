//! Declaration linter: unused hypotheses, naming, documentation and
//! self-reproducing simp rules.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::env::{DeclKind, Declaration, Env, Lemma, RuleKind};
use crate::syntax::{Pos, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LintCheck {
    UnusedHypothesis,
    MalformedName,
    MissingDoc,
    SimpLoopRisk,
}

impl LintCheck {
    pub fn id(self) -> &'static str {
        match self {
            LintCheck::UnusedHypothesis => "unused_hypothesis",
            LintCheck::MalformedName => "malformed_name",
            LintCheck::MissingDoc => "missing_doc",
            LintCheck::SimpLoopRisk => "simp_loop_risk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub decl: String,
    pub check: LintCheck,
    pub message: String,
    pub pos: Pos,
    pub severity: Severity,
}

fn snake_case() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[a-z][a-z0-9]*(_[a-z0-9]+)*'*$").expect("valid pattern"))
}

fn lemma_of(d: &Declaration) -> Option<&Lemma> {
    match &d.kind {
        DeclKind::Lemma(l) | DeclKind::Goal(l) => Some(l),
        _ => None,
    }
}

fn stmt_vars(l: &Lemma) -> Vec<String> {
    match &l.stmt {
        crate::env::Statement::Term(t) => t.var_names(),
        _ => Vec::new(),
    }
}

/// Hypotheses excluded by a `using` clause, or sharing no variable with the
/// statement even through other hypotheses.
fn unused_hypotheses(l: &Lemma) -> Vec<(String, &'static str)> {
    let using = l.tactic.as_ref().and_then(|t| t.using.as_ref());
    let mut reached = stmt_vars(l);
    let mut linked = vec![false; l.hyps.len()];
    loop {
        let mut grew = false;
        for (i, h) in l.hyps.iter().enumerate() {
            if linked[i] {
                continue;
            }
            let vs = h.stmt.var_names();
            if vs.iter().any(|v| reached.contains(v)) {
                linked[i] = true;
                reached.extend(vs);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    l.hyps
        .iter()
        .zip(linked)
        .filter_map(|(h, linked)| {
            if using.is_some_and(|u| !u.contains(&h.name)) {
                Some((h.name.clone(), "is not passed to the tactic"))
            } else if !linked {
                Some((h.name.clone(), "shares no variable with the statement"))
            } else {
                None
            }
        })
        .collect()
}

fn contains_instance(pattern: &Term, t: &Term) -> bool {
    pattern.matches(t).is_some() || t.children().into_iter().any(|c| contains_instance(pattern, c))
}

/// Runs every check over the declarations, in declaration order.
pub fn lint(env: &Env, strict: bool) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for d in &env.decls {
        let mut push = |check: LintCheck, message: String| {
            let severity = if strict && check == LintCheck::SimpLoopRisk {
                Severity::Error
            } else {
                Severity::Warning
            };
            out.push(LintFinding {
                decl: d.name.clone(),
                check,
                message,
                pos: d.pos,
                severity,
            });
        };
        if let Some(l) = lemma_of(d) {
            for (h, why) in unused_hypotheses(l) {
                push(LintCheck::UnusedHypothesis, format!("hypothesis `{h}` {why}"));
            }
        }
        let named = !matches!(d.kind, DeclKind::Sort | DeclKind::Coe(_) | DeclKind::Op(_));
        if named {
            if d.name.contains("__") {
                push(LintCheck::MalformedName, format!("`{}` contains a doubled underscore", d.name));
            } else if !snake_case().is_match(&d.name) {
                push(LintCheck::MalformedName, format!("`{}` is not snake_case", d.name));
            }
        }
        let public = matches!(
            d.kind,
            DeclKind::Class(_) | DeclKind::Instance(_) | DeclKind::Rewrite(_) | DeclKind::Lemma(_)
        );
        if public && d.doc.as_deref().map_or(true, |s| s.trim().is_empty()) {
            push(
                LintCheck::MissingDoc,
                format!("{} `{}` has no doc string (only presence is checked)", d.keyword(), d.name),
            );
        }
        if let DeclKind::Rewrite(r) = &d.kind {
            if r.kind == RuleKind::Simp && contains_instance(&r.lhs, &r.rhs) {
                push(
                    LintCheck::SimpLoopRisk,
                    format!("the right-hand side of `{}` contains an instance of its left-hand side", r.name),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checks(src: &str) -> Vec<(String, LintCheck)> {
        lint(&Env::parse(src).unwrap(), false)
            .into_iter()
            .map(|f| (f.decl, f.check))
            .collect()
    }

    #[test]
    fn unreferenced_hypothesis() {
        let f = checks("/-- d -/\nlemma t (x y z : int) (h : z ≤ 0) : x ≤ x + y * 0 by linarith\n");
        assert_eq!(f, vec![("t".to_string(), LintCheck::UnusedHypothesis)]);
        let f = checks("/-- d -/\nlemma t (x y z : int) (h1 : x ≤ y) (h2 : y ≤ z) : x ≤ z by linarith [h1]\n");
        assert_eq!(f, vec![("t".to_string(), LintCheck::UnusedHypothesis)]);
        assert!(checks("/-- d -/\nlemma t (x y z : int) (h1 : x ≤ y) (h2 : y ≤ z) : x ≤ z by linarith\n").is_empty());
    }

    #[test]
    fn loop_risk_and_names() {
        let f = checks("/-- d -/\nsimp lemma add_zero_rev (x : a) : x + 0 = (x + 0) + 0\n/-- d -/\nclass BadName (a)\n/-- d -/\nclass bad__name (a)\nclass undocumented (a)\n");
        assert_eq!(
            f,
            vec![
                ("add_zero_rev".to_string(), LintCheck::SimpLoopRisk),
                ("BadName".to_string(), LintCheck::MalformedName),
                ("bad__name".to_string(), LintCheck::MalformedName),
                ("undocumented".to_string(), LintCheck::MissingDoc),
            ]
        );
    }

    #[test]
    fn strict_raises_loop_risk() {
        let env = Env::parse("/-- d -/\nsimp lemma r (x : a) : x * 1 = x * 1 * 1\n").unwrap();
        assert_eq!(lint(&env, true)[0].severity, Severity::Error);
        assert_eq!(lint(&env, false)[0].severity, Severity::Warning);
    }
}
