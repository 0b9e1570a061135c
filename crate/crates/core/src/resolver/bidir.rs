use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use super::{elapsed, ordered_rules, Derivation, Outcome, Query, SearchMetrics};
use crate::env::{ClassAtom, Env, InstanceRule};
use crate::hierarchy::check_acyclic;
use crate::syntax::{Sort, SortSubst};

/// Why an atom holds: the rule, its instantiation, and the body atoms used.
#[derive(Debug, Clone)]
struct Justification {
    rule: usize,
    subst: SortSubst,
    body: Vec<ClassAtom>,
}

/// All ground atoms derivable over a finite universe of carrier sorts.
#[derive(Debug, Clone, Default)]
pub struct Saturation {
    known: HashMap<ClassAtom, Justification>,
    by_class: HashMap<String, Vec<ClassAtom>>,
    /// Derived atoms in the order they were processed.
    pub order: Vec<ClassAtom>,
    pub pops: u64,
}

impl Saturation {
    pub fn contains(&self, a: &ClassAtom) -> bool {
        self.known.contains_key(a)
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }

    fn derivation(&self, a: &ClassAtom, rules: &[&InstanceRule], memo: &mut HashMap<ClassAtom, Derivation>) -> Derivation {
        if let Some(d) = memo.get(a) {
            return d.clone();
        }
        let j = &self.known[a];
        let children = j
            .body
            .iter()
            .map(|b| self.derivation(b, rules, memo))
            .collect();
        let d = Derivation {
            rule: rules[j.rule].name.clone(),
            subst: j.subst.clone(),
            children,
        };
        memo.insert(a.clone(), d.clone());
        d
    }
}

fn in_universe(a: &ClassAtom, universe: &[Sort]) -> bool {
    a.args.iter().all(|s| universe.contains(s))
}

/// Extends `s` with every assignment of the unbound variables of `vars` to
/// universe sorts.
fn assignments(vars: &[String], s: &SortSubst, universe: &[Sort]) -> Vec<SortSubst> {
    let free: Vec<&String> = vars.iter().filter(|v| !s.contains_key(*v)).collect();
    let mut out = vec![s.clone()];
    for v in free {
        let mut next = Vec::with_capacity(out.len() * universe.len());
        for base in &out {
            for u in universe {
                let mut e = base.clone();
                e.insert(v.clone(), u.clone());
                next.push(e);
            }
        }
        out = next;
    }
    out
}

struct Saturator<'a> {
    rules: &'a [&'a InstanceRule],
    universe: &'a [Sort],
    sat: Saturation,
    agenda: VecDeque<ClassAtom>,
}

impl Saturator<'_> {
    fn add(&mut self, atom: ClassAtom, rule: usize, subst: SortSubst, body: Vec<ClassAtom>) {
        if !in_universe(&atom, self.universe) || self.sat.known.contains_key(&atom) {
            return;
        }
        self.sat
            .by_class
            .entry(atom.class.clone())
            .or_default()
            .push(atom.clone());
        self.sat.known.insert(atom.clone(), Justification { rule, subst, body });
        self.agenda.push_back(atom);
    }

    /// Matches body atoms `rest` against known atoms, extending `s`.
    fn join(&self, rest: &[&ClassAtom], s: SortSubst, out: &mut Vec<SortSubst>) {
        let Some((first, tail)) = rest.split_first() else {
            out.push(s);
            return;
        };
        let pat = first.subst(&s);
        if pat.is_ground() {
            if self.sat.known.contains_key(&pat) {
                self.join(tail, s, out);
            }
            return;
        }
        if let Some(cands) = self.sat.by_class.get(&pat.class) {
            for c in cands {
                let mut e = s.clone();
                if pat.match_into(c, &mut e) {
                    self.join(tail, e, out);
                }
            }
        }
    }

    fn fire(&mut self, ri: usize, s: SortSubst) {
        let rule = self.rules[ri];
        for full in assignments(&rule.head.sort_vars(), &s, self.universe) {
            let head = rule.head.subst(&full);
            let body = rule.body.iter().map(|b| b.subst(&full)).collect();
            self.add(head, ri, full, body);
        }
    }

    fn run(mut self) -> Saturation {
        for ri in 0..self.rules.len() {
            if self.rules[ri].body.is_empty() {
                self.fire(ri, SortSubst::new());
            }
        }
        while let Some(atom) = self.agenda.pop_front() {
            self.sat.pops += 1;
            self.sat.order.push(atom.clone());
            for ri in 0..self.rules.len() {
                let rule = self.rules[ri];
                for (i, b) in rule.body.iter().enumerate() {
                    let mut s = SortSubst::new();
                    if !b.match_into(&atom, &mut s) {
                        continue;
                    }
                    let rest: Vec<&ClassAtom> = rule
                        .body
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, a)| a)
                        .collect();
                    let mut found = Vec::new();
                    self.join(&rest, s, &mut found);
                    for f in found {
                        self.fire(ri, f);
                    }
                }
            }
        }
        self.sat
    }
}

/// Forward saturation from the facts, restricted to atoms whose carriers lie
/// in `universe`.
pub fn saturate(env: &Env, universe: &[Sort]) -> Saturation {
    let rules = ordered_rules(env);
    Saturator {
        rules: &rules,
        universe,
        sat: Saturation::default(),
        agenda: VecDeque::new(),
    }
    .run()
}

/// Saturates forward over the carriers occurring in the query, then looks
/// the query up and rebuilds its derivation. `nodes_expanded` counts the
/// derived atoms processed. Environments whose class graph has a cycle are
/// refused with `cycle_detected`.
pub fn resolve_bidir(q: &Query, env: &Env) -> (Option<Derivation>, SearchMetrics) {
    let start = Instant::now();
    let mut metrics = SearchMetrics::new();
    if !check_acyclic(env).is_acyclic() {
        metrics.outcome = Outcome::CycleDetected;
        metrics.elapsed_ns = elapsed(start);
        return (None, metrics);
    }
    if !q.atom.is_ground() {
        metrics.elapsed_ns = elapsed(start);
        return (None, metrics);
    }
    let mut universe = Vec::new();
    for a in &q.atom.args {
        a.subsorts(&mut universe);
    }
    let rules = ordered_rules(env);
    let sat = Saturator {
        rules: &rules,
        universe: &universe,
        sat: Saturation::default(),
        agenda: VecDeque::new(),
    }
    .run();
    metrics.nodes_expanded = sat.pops;
    let found = sat
        .contains(&q.atom)
        .then(|| sat.derivation(&q.atom, &rules, &mut HashMap::new()));
    if let Some(d) = &found {
        metrics.outcome = Outcome::Success;
        metrics.max_depth_reached = d.height();
    }
    metrics.elapsed_ns = elapsed(start);
    (found, metrics)
}
