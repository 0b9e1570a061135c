use std::collections::BTreeSet;

use super::simp::{rewrite_with, SimpConfig};
use super::{RewriteError, RewriteTrace};
use crate::arith::axioms::CAST_NUMERAL;
use crate::env::{Env, RewriteRule};
use crate::prooftrace::Step;
use crate::syntax::{Path, Sort, Subst, Term};

fn count_casts(t: &Term) -> usize {
    let own = usize::from(matches!(t, Term::Coerce { .. }));
    own + t.children().into_iter().map(count_casts).sum::<usize>()
}

fn cast_sources(t: &Term, out: &mut BTreeSet<(Sort, Sort)>) {
    if let Term::Coerce { from, to, .. } = t {
        out.insert((from.clone(), to.clone()));
    }
    for c in t.children() {
        cast_sources(c, out);
    }
}

/// Positions of numerals that can be written as a cast of a numeral of the
/// unique sort coerced into theirs.
fn liftable(t: &Term, sources: &BTreeSet<(Sort, Sort)>, path: &mut Path, out: &mut Vec<(Path, Sort)>) {
    match t {
        Term::Num { sort, .. } => {
            let mut from = sources.iter().filter(|(_, to)| to == sort).map(|(f, _)| f);
            if let (Some(f), None) = (from.next(), from.next()) {
                out.push((path.clone(), f.clone()));
            }
        }
        Term::Coerce { .. } => {}
        _ => {
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i);
                liftable(c, sources, path, out);
                path.pop();
            }
        }
    }
}

fn cast_numerals(t: &Term, path: &mut Path, out: &mut Vec<Path>) {
    if let Term::Coerce { arg, .. } = t {
        if matches!(**arg, Term::Num { .. }) {
            out.push(path.clone());
            return;
        }
    }
    for (i, c) in t.children().into_iter().enumerate() {
        path.push(i);
        cast_numerals(c, path, out);
        path.pop();
    }
}

fn cast_step(t: &mut Term, path: &Path, lift: Option<&Sort>) -> Step {
    let before = t.at(path).expect("path exists").clone();
    let after = match (&before, lift) {
        (Term::Num { value, sort }, Some(from)) => {
            Term::coerce(from.clone(), sort.clone(), Term::numeral(value.clone(), from.clone()))
        }
        (Term::Coerce { to, arg, .. }, None) => match &**arg {
            Term::Num { value, .. } => Term::numeral(value.clone(), to.clone()),
            _ => unreachable!("only cast numerals are collected"),
        },
        _ => unreachable!("only numerals are collected"),
    };
    t.replace_at(path, after.clone());
    Step {
        rule: CAST_NUMERAL.into(),
        symm: lift.is_some(),
        position: path.clone(),
        subst: Subst::new(),
        before,
        after,
        side: Vec::new(),
    }
}

/// Moves coercions toward the root and removes them from relations whose
/// sides both become casts.
///
/// Numerals next to casts are first written as casts of numerals. Each
/// cast rule is then used in the direction that lowers the number of casts,
/// so the rewriting terminates; numerals still under a cast at the end are
/// folded back. Without any applicable cast rule the term is returned
/// unchanged with an empty trace.
pub fn norm_cast(f: &Term, env: &Env) -> Result<(Term, RewriteTrace), RewriteError> {
    let mut oriented: Vec<RewriteRule> = Vec::new();
    let mut reversed: BTreeSet<String> = BTreeSet::new();
    for r in env.cast_rules() {
        let (l, rr) = (count_casts(&r.lhs), count_casts(&r.rhs));
        if rr > l {
            reversed.insert(r.name.clone());
            oriented.push(RewriteRule {
                lhs: r.rhs.clone(),
                rhs: r.lhs.clone(),
                ..r.clone()
            });
        } else if l > rr {
            oriented.push(r.clone());
        }
    }

    let mut cur = f.clone();
    let mut steps = Vec::new();
    let mut sources = BTreeSet::new();
    cast_sources(&cur, &mut sources);
    let mut lifts = Vec::new();
    liftable(&cur, &sources, &mut Vec::new(), &mut lifts);
    for (p, from) in &lifts {
        if env.coercion(from, &cur.at(p).expect("path exists").sort()).is_some() {
            steps.push(cast_step(&mut cur, p, Some(from)));
        }
    }

    let refs: Vec<&RewriteRule> = oriented.iter().collect();
    let (moved, tr) = rewrite_with(&cur, &refs, env, &SimpConfig::default())?;
    if tr.steps.is_empty() {
        return Ok((f.clone(), RewriteTrace::default()));
    }
    steps.extend(tr.steps.into_iter().map(|mut s| {
        s.symm = reversed.contains(&s.rule);
        s
    }));
    cur = moved;

    let mut leftovers = Vec::new();
    cast_numerals(&cur, &mut Vec::new(), &mut leftovers);
    for p in &leftovers {
        steps.push(cast_step(&mut cur, p, None));
    }
    Ok((cur, RewriteTrace { steps }))
}
