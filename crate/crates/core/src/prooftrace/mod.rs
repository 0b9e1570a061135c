//! The shared trace format and its independent verifier.
//!
//! A trace starts from a goal and records every rewrite step: the rule
//! cited, the position, the instantiating substitution and the subterm
//! before and after. The verifier trusts only the rules declared in the
//! environment, the axiom prelude, and two primitive step kinds checked
//! by exact integer evaluation.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::axioms::{prelude, CAST_NUMERAL, NUM_FOLD, RING_ONLY};
use crate::arith::norm_num::{verify_rel, NumTrace, SignedNum};
use crate::decide::{replay_evidence, DecProp, Evidence};
use crate::env::{ClassAtom, Env, RewriteRule};
use crate::resolver::{check_derivation, Derivation};
use crate::syntax::{sym, Path, RelOp, Sort, Subst, Term};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceGoal {
    Term { term: Term },
    Class { atom: ClassAtom },
    Decidable { prop: DecProp },
    Linear { hyps: Vec<Term>, goal: Term, int_mode: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub rule: String,
    /// The rule was used right to left.
    #[serde(default)]
    pub symm: bool,
    pub position: Path,
    #[serde(default)]
    pub subst: Subst,
    pub before: Term,
    pub after: Term,
    /// Resolutions of the rule's class conditions, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub side: Vec<Derivation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    /// The final term is an equation between identical sides.
    Reflexivity,
    /// The final term is a true literal relation.
    LiteralTruth {
        lhs: SignedNum,
        rhs: SignedNum,
        trace: NumTrace,
    },
    /// Multipliers (as `n` or `n/d`) refuting the hypotheses with the
    /// negated goal, one list per case of the case split.
    Certificate { cases: Vec<Vec<String>> },
    Derivation { derivation: Derivation },
    Decision { evidence: Evidence },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub schema: u32,
    pub tactic: String,
    pub goal: TraceGoal,
    pub steps: Vec<Step>,
    pub terminal: Terminal,
}

impl ProofTrace {
    pub fn new(tactic: &str, goal: TraceGoal, steps: Vec<Step>, terminal: Terminal) -> Self {
        ProofTrace {
            schema: SCHEMA_VERSION,
            tactic: tactic.to_string(),
            goal,
            steps,
            terminal,
        }
    }

    /// A trace proving `lhs = rhs` from steps on both sides.
    pub fn equation(tactic: &str, lhs: Term, rhs: Term, steps: Vec<Step>) -> Self {
        Self::new(
            tactic,
            TraceGoal::Term {
                term: Term::rel(RelOp::Eq, lhs, rhs),
            },
            steps,
            Terminal::Reflexivity,
        )
    }

    /// Term reached by replaying the steps without checking them.
    pub fn final_term(&self) -> Option<Term> {
        let TraceGoal::Term { term } = &self.goal else {
            return None;
        };
        let mut cur = term.clone();
        for s in &self.steps {
            if !cur.replace_at(&s.position, s.after.clone()) {
                return None;
            }
        }
        Some(cur)
    }

    /// Names of the rules cited, in first-use order.
    pub fn rules_used(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.steps {
            if !out.contains(&s.rule.as_str()) {
                out.push(&s.rule);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    /// `step` is `None` when the goal or terminal condition is at fault.
    Rejected { step: Option<usize>, reason: String },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

/// Exact value of a literal expression; `None` if it is not one or it is
/// invalid in its sort.
pub fn literal_value(t: &Term) -> Option<BigInt> {
    let nat = t.sort() == Sort::nat();
    match t {
        Term::Num { value, .. } => Some(BigInt::from(value.to_biguint())),
        Term::Op { sym: s, args, .. } => {
            let vals: Option<Vec<BigInt>> = args.iter().map(literal_value).collect();
            let vals = vals?;
            match (s.as_str(), vals.as_slice()) {
                (sym::ADD, [a, b]) => Some(a + b),
                (sym::MUL | sym::SMUL, [a, b]) => Some(a * b),
                (sym::SUB, [a, b]) => {
                    let d = a - b;
                    Some(if nat && d.is_negative() { BigInt::zero() } else { d })
                }
                (sym::NEG, [a]) if !nat => Some(-a),
                (sym::POW, [a, e]) => {
                    let e = u32::try_from(e).ok().filter(|&e| e as u64 <= crate::arith::norm_num::MAX_EXPONENT)?;
                    Some(num_traits::pow::Pow::pow(a, e))
                }
                _ => None,
            }
        }
        _ => None,
    }
}

fn lookup<'a>(env: &'a Env, name: &str) -> Option<&'a RewriteRule> {
    prelude().rule(name).or_else(|| env.rule(name))
}

fn check_step(env: &Env, cur: &Term, s: &Step) -> Result<(), String> {
    let at = cur
        .at(&s.position)
        .ok_or_else(|| format!("no subterm at position {:?}", s.position))?;
    if *at != s.before {
        return Err(format!("subterm at {:?} is `{at}`, step claims `{}`", s.position, s.before));
    }
    if s.before.sort() != s.after.sort() {
        return Err("step changes the sort".into());
    }
    match s.rule.as_str() {
        NUM_FOLD => {
            let a = literal_value(&s.before).ok_or("num_fold source is not a literal expression")?;
            let b = literal_value(&s.after).ok_or("num_fold result is not a literal expression")?;
            if a != b {
                return Err(format!("num_fold: {a} ≠ {b}"));
            }
            Ok(())
        }
        CAST_NUMERAL => {
            let (cast, num) = if s.symm { (&s.after, &s.before) } else { (&s.before, &s.after) };
            match (cast, num) {
                (Term::Coerce { from, to, arg }, Term::Num { value, sort }) if sort == to => {
                    if env.coercion(from, to).is_none() {
                        return Err(format!("no coercion from {from} to {to}"));
                    }
                    match &**arg {
                        Term::Num { value: v, .. } if v == value => Ok(()),
                        _ => Err("cast_numeral: numerals differ".into()),
                    }
                }
                _ => Err("cast_numeral: expected `↑n` and `n`".into()),
            }
        }
        name => {
            let rule = lookup(env, name).ok_or_else(|| format!("unknown rule `{name}`"))?;
            if RING_ONLY.contains(&name) && s.before.sort() == Sort::nat() {
                return Err(format!("`{name}` does not hold in nat"));
            }
            let (l, r) = if s.symm { (&rule.rhs, &rule.lhs) } else { (&rule.lhs, &rule.rhs) };
            let lhs = l.subst(&s.subst);
            if lhs != s.before {
                return Err(format!("`{name}` instantiates to `{lhs}`, not `{}`", s.before));
            }
            let rhs = r.subst(&s.subst);
            if rhs != s.after {
                return Err(format!("`{name}` rewrites to `{rhs}`, not `{}`", s.after));
            }
            if s.side.len() != rule.conditions.len() {
                return Err(format!(
                    "`{name}` has {} condition(s), step discharges {}",
                    rule.conditions.len(),
                    s.side.len()
                ));
            }
            for (c, d) in rule.conditions.iter().zip(&s.side) {
                let atom = c.subst(&s.subst.sorts);
                let chk = check_derivation(d, &atom, env);
                if !chk.ok {
                    return Err(format!("condition {atom}: {}", chk.reasons.join("; ")));
                }
            }
            Ok(())
        }
    }
}

fn reject(step: Option<usize>, reason: impl Into<String>) -> Verdict {
    Verdict::Rejected {
        step,
        reason: reason.into(),
    }
}

/// Replays a trace against `env`, checking every step and the terminal.
pub fn verify(tr: &ProofTrace, env: &Env) -> Verdict {
    if tr.schema != SCHEMA_VERSION {
        return reject(None, format!("unsupported schema {}", tr.schema));
    }
    let mut cur = match &tr.goal {
        TraceGoal::Term { term } => term.clone(),
        _ if !tr.steps.is_empty() => return reject(Some(0), "only term goals take rewrite steps"),
        _ => Term::num(0, Sort::nat()),
    };
    for (i, s) in tr.steps.iter().enumerate() {
        if let Err(e) = check_step(env, &cur, s) {
            return reject(Some(i), e);
        }
        cur.replace_at(&s.position, s.after.clone());
    }
    let terminal = match (&tr.goal, &tr.terminal) {
        (TraceGoal::Term { .. }, Terminal::Reflexivity) => match &cur {
            Term::Rel {
                op: RelOp::Eq,
                lhs,
                rhs,
            } if lhs == rhs => Ok(()),
            _ => Err(format!("`{cur}` is not a reflexive equation")),
        },
        (TraceGoal::Term { .. }, Terminal::LiteralTruth { lhs, rhs, trace }) => {
            verify_rel(&cur, lhs, rhs, true, trace)
        }
        (TraceGoal::Class { atom }, Terminal::Derivation { derivation }) => {
            let c = check_derivation(derivation, atom, env);
            if c.ok {
                Ok(())
            } else {
                Err(c.reasons.join("; "))
            }
        }
        (TraceGoal::Decidable { prop }, Terminal::Decision { evidence }) => match replay_evidence(prop, evidence) {
            Ok(true) => Ok(()),
            Ok(false) => Err("evidence evaluates to false".into()),
            Err(e) => Err(e),
        },
        (TraceGoal::Linear { hyps, goal, int_mode }, Terminal::Certificate { cases }) => {
            crate::linarith::verify_refutation(hyps, goal, *int_mode, cases)
        }
        _ => Err("terminal does not fit the goal".into()),
    };
    match terminal {
        Ok(()) => Verdict::Accepted,
        Err(e) => reject(None, e),
    }
}

/// Incremental construction of a trace by applying rules at positions.
#[derive(Debug, Clone)]
pub struct Tracer {
    cur: Term,
    steps: Vec<Step>,
}

impl Tracer {
    pub fn new(start: Term) -> Self {
        Tracer {
            cur: start,
            steps: Vec::new(),
        }
    }

    pub fn term(&self) -> &Term {
        &self.cur
    }

    pub fn at(&self, path: &[usize]) -> &Term {
        self.cur.at(path).expect("tracer path exists")
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn into_parts(self) -> (Term, Vec<Step>) {
        (self.cur, self.steps)
    }

    /// Applies a prelude axiom at `path`. Panics if it does not match: the
    /// callers only cite an axiom for a shape they have just established.
    pub fn axiom(&mut self, path: &[usize], name: &str, symm: bool) {
        let rule = prelude().rule(name).expect("prelude axiom");
        let applied = self.rewrite(path, rule, symm, Vec::new());
        assert!(applied, "axiom `{name}` does not apply to `{}`", self.at(path));
    }

    /// Applies `rule` at `path` if its pattern matches; returns whether it did.
    pub fn rewrite(&mut self, path: &[usize], rule: &RewriteRule, symm: bool, side: Vec<Derivation>) -> bool {
        let (l, r) = if symm { (&rule.rhs, &rule.lhs) } else { (&rule.lhs, &rule.rhs) };
        let before = self.at(path).clone();
        let Some(subst) = l.matches(&before) else {
            return false;
        };
        let after = r.subst(&subst);
        self.push(Step {
            rule: rule.name.clone(),
            symm,
            position: path.to_vec(),
            subst,
            before,
            after,
            side,
        });
        true
    }

    /// Replaces a literal expression by another of equal value.
    pub fn fold(&mut self, path: &[usize], after: Term) {
        let before = self.at(path).clone();
        if before == after {
            return;
        }
        self.push(Step {
            rule: NUM_FOLD.into(),
            symm: false,
            position: path.to_vec(),
            subst: Subst::new(),
            before,
            after,
            side: Vec::new(),
        });
    }

    pub fn push(&mut self, step: Step) {
        self.cur.replace_at(&step.position, step.after.clone());
        self.steps.push(step);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, TermCtx};

    fn t(src: &str) -> Term {
        parse_term(src, &Env::new(), &TermCtx::with_default(Sort::int())).unwrap()
    }

    #[test]
    fn tracer_steps_verify() {
        let goal = t("x * y = y * x");
        let mut tr = Tracer::new(goal.clone());
        tr.axiom(&[0], "mul_comm", false);
        let (_, steps) = tr.into_parts();
        let trace = ProofTrace::new("ring", TraceGoal::Term { term: goal }, steps, Terminal::Reflexivity);
        assert_eq!(verify(&trace, &Env::new()), Verdict::Accepted);

        let mut bad = trace.clone();
        bad.steps[0]
            .subst
            .terms
            .insert("x".into(), Term::var("z", Sort::int()));
        assert!(matches!(verify(&bad, &Env::new()), Verdict::Rejected { step: Some(0), .. }));
    }

    #[test]
    fn num_fold_checks_values() {
        let goal = t("2 + 3 = 5");
        let mut tr = Tracer::new(goal.clone());
        tr.fold(&[0], t("5"));
        let (_, steps) = tr.into_parts();
        let ok = ProofTrace::new("norm_num", TraceGoal::Term { term: goal.clone() }, steps, Terminal::Reflexivity);
        assert!(verify(&ok, &Env::new()).is_accepted());
        let mut tr = Tracer::new(goal.clone());
        tr.fold(&[0], t("6"));
        let (_, steps) = tr.into_parts();
        let bad = ProofTrace::new("norm_num", TraceGoal::Term { term: goal }, steps, Terminal::Reflexivity);
        assert!(!verify(&bad, &Env::new()).is_accepted());
    }

    #[test]
    fn ring_only_axiom_rejected_in_nat() {
        let nat = parse_term("-x = -1 * x", &Env::new(), &TermCtx::with_default(Sort::int())).unwrap();
        let rule = prelude().rule("neg_eq_neg_one_mul").unwrap();
        let mut tr = Tracer::new(nat.clone());
        assert!(tr.rewrite(&[0], rule, false, vec![]));
        let (_, steps) = tr.into_parts();
        let ok = ProofTrace::new("ring", TraceGoal::Term { term: nat }, steps.clone(), Terminal::Reflexivity);
        assert!(verify(&ok, &Env::new()).is_accepted());
        let literal = literal_value(&t("2 - 5")).unwrap();
        assert_eq!(literal, BigInt::from(-3));
        let nat_sub = parse_term("2 - 5", &Env::new(), &TermCtx::with_default(Sort::nat())).unwrap();
        assert_eq!(literal_value(&nat_sub), Some(BigInt::zero()));
    }
}
