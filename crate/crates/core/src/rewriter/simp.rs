use std::collections::BTreeMap;

use super::{orient_check, RewriteError, RewriteTrace};
use crate::env::{Env, RewriteRule, RuleKind};
use crate::prooftrace::Step;
use crate::resolver::{resolve_backward, Config, Derivation, Query, Strategy};
use crate::syntax::{Path, Term};

pub const DEFAULT_FUEL: usize = 10_000;
/// Depth bound for resolving the class conditions of a rule.
pub const CONDITION_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimpConfig {
    /// Maximum number of rewrite steps.
    pub fuel: usize,
    pub condition_depth: usize,
}

impl Default for SimpConfig {
    fn default() -> Self {
        SimpConfig {
            fuel: DEFAULT_FUEL,
            condition_depth: CONDITION_DEPTH,
        }
    }
}

struct Rewriter<'a> {
    rules: &'a [&'a RewriteRule],
    env: &'a Env,
    cfg: &'a SimpConfig,
    steps: Vec<Step>,
}

enum Halt {
    OutOfFuel,
}

impl Rewriter<'_> {
    fn discharge(&self, rule: &RewriteRule, sorts: &crate::syntax::SortSubst) -> Option<Vec<Derivation>> {
        rule.conditions
            .iter()
            .map(|c| {
                let atom = c.subst(sorts);
                if !atom.is_ground() {
                    return None;
                }
                let q = Query::new(atom).with(Config {
                    max_depth: self.cfg.condition_depth,
                    strategy: Strategy::Backward,
                    cache: true,
                });
                resolve_backward(&q, self.env).0
            })
            .collect()
    }

    /// First rule, in set order, that matches `t` with its conditions met.
    fn step_at(&self, t: &Term) -> Option<(&RewriteRule, crate::syntax::Subst, Vec<Derivation>)> {
        self.rules.iter().find_map(|r| {
            let s = r.lhs.matches(t)?;
            let side = self.discharge(r, &s.sorts)?;
            Some((*r, s, side))
        })
    }

    /// Normalizes the subterm of `t` at `path`, children first, left to right.
    fn normalize(&mut self, t: &mut Term, path: &mut Path) -> Result<(), Halt> {
        loop {
            let n = t.at(path).expect("path exists").children().len();
            for i in 0..n {
                path.push(i);
                self.normalize(t, path)?;
                path.pop();
            }
            let here = t.at(path).expect("path exists");
            let Some((rule, subst, side)) = self.step_at(here) else {
                return Ok(());
            };
            if self.steps.len() >= self.cfg.fuel {
                return Err(Halt::OutOfFuel);
            }
            let before = here.clone();
            let after = rule.rhs.subst(&subst);
            t.replace_at(path, after.clone());
            self.steps.push(Step {
                rule: rule.name.clone(),
                symm: false,
                position: path.clone(),
                subst,
                before,
                after,
                side,
            });
        }
    }
}

/// Rules cited most often in the last steps of a run that ran out of fuel.
fn loop_candidates(steps: &[Step]) -> Vec<String> {
    let tail = &steps[steps.len().saturating_sub(64)..];
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in tail {
        *counts.entry(&s.rule).or_default() += 1;
    }
    let max = counts.values().copied().max().unwrap_or(0);
    let mut out: Vec<String> = counts
        .into_iter()
        .filter(|(_, c)| *c * 4 >= max)
        .map(|(r, _)| r.to_string())
        .collect();
    out.sort();
    out
}

/// Innermost-leftmost exhaustive rewriting with the given rules, tried in
/// order at each position. Matching is syntactic. A rule with class
/// conditions fires only when backward resolution discharges all of them.
pub fn simp(
    t: &Term,
    rules: &[&RewriteRule],
    env: &Env,
    cfg: &SimpConfig,
) -> Result<(Term, RewriteTrace), RewriteError> {
    for r in rules {
        if !matches!(r.kind, RuleKind::Simp | RuleKind::Def) {
            return Err(RewriteError::WrongKind {
                rule: r.name.clone(),
                kind: format!("{:?}", r.kind).to_lowercase(),
            });
        }
    }
    rewrite_with(t, rules, env, cfg)
}

pub(super) fn rewrite_with(
    t: &Term,
    rules: &[&RewriteRule],
    env: &Env,
    cfg: &SimpConfig,
) -> Result<(Term, RewriteTrace), RewriteError> {
    for r in rules {
        orient_check(r).map_err(|reason| RewriteError::Unoriented {
            rule: r.name.clone(),
            reason,
        })?;
    }
    let mut rw = Rewriter {
        rules,
        env,
        cfg,
        steps: Vec::new(),
    };
    let mut cur = t.clone();
    match rw.normalize(&mut cur, &mut Vec::new()) {
        Ok(()) => Ok((cur, RewriteTrace { steps: rw.steps })),
        Err(Halt::OutOfFuel) => Err(RewriteError::FuelExhausted {
            candidates: loop_candidates(&rw.steps),
            trace: RewriteTrace { steps: rw.steps },
        }),
    }
}

/// `simp` with every simp-kind rule of the environment.
pub fn simp_default(t: &Term, env: &Env, cfg: &SimpConfig) -> Result<(Term, RewriteTrace), RewriteError> {
    simp(t, &env.simp_rules(), env, cfg)
}

/// Normal form under the definitional rules of the environment.
pub fn dsimp(t: &Term, env: &Env) -> Result<Term, RewriteError> {
    simp(t, &env.def_rules(), env, &SimpConfig::default()).map(|(t, _)| t)
}
