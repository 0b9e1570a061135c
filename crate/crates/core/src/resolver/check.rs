use serde::{Deserialize, Serialize};

use super::Derivation;
use crate::env::{ClassAtom, Env};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationCheck {
    pub ok: bool,
    pub reasons: Vec<String>,
}

fn check_node(d: &Derivation, goal: &ClassAtom, env: &Env, path: &str, reasons: &mut Vec<String>) {
    let Some(rule) = env.instance(&d.rule) else {
        reasons.push(format!("{path}: unknown rule `{}`", d.rule));
        return;
    };
    for v in rule.head.sort_vars() {
        if !d.subst.contains_key(&v) {
            reasons.push(format!("{path}: `{}` leaves `{v}` unassigned", d.rule));
        }
    }
    if d.subst.values().any(|s| !s.is_ground()) {
        reasons.push(format!("{path}: substitution is not ground"));
    }
    let head = rule.head.subst(&d.subst);
    if head != *goal {
        reasons.push(format!("{path}: `{}` proves {head}, expected {goal}", d.rule));
    }
    if d.children.len() != rule.body.len() {
        reasons.push(format!(
            "{path}: arity mismatch: `{}` has {} premise(s), derivation gives {}",
            d.rule,
            rule.body.len(),
            d.children.len()
        ));
        return;
    }
    for (i, (child, b)) in d.children.iter().zip(&rule.body).enumerate() {
        check_node(child, &b.subst(&d.subst), env, &format!("{path}.{i}"), reasons);
    }
}

/// Re-checks a derivation against the declared rules only: every node must
/// instantiate its rule so that the head is the goal it claims and the
/// children prove the instantiated body atoms.
pub fn check_derivation(d: &Derivation, goal: &ClassAtom, env: &Env) -> DerivationCheck {
    let mut reasons = Vec::new();
    if !goal.is_ground() {
        reasons.push(format!("goal {goal} is not ground"));
    }
    check_node(d, goal, env, "root", &mut reasons);
    DerivationCheck {
        ok: reasons.is_empty(),
        reasons,
    }
}
