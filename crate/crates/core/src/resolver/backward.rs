use std::collections::HashMap;
use std::time::Instant;

use super::{elapsed, ordered_rules, Derivation, Outcome, Query, SearchMetrics};
use crate::env::{ClassAtom, Env, InstanceRule};
use crate::syntax::SortSubst;

enum Cached {
    /// A derivation and its height.
    Proved(Derivation, usize),
    /// Failed without any pruning or truncation below it.
    Refuted,
}

struct Search<'e> {
    rules: Vec<&'e InstanceRule>,
    max_depth: usize,
    use_cache: bool,
    cache: HashMap<ClassAtom, Cached>,
    metrics: SearchMetrics,
    truncated: bool,
    pruned_cycle: bool,
    path: Vec<ClassAtom>,
}

/// Result of one goal: a derivation, or failure plus whether the failure
/// depended on pruning (cycles or the depth limit) somewhere below.
struct Attempt {
    found: Option<Derivation>,
    tainted: bool,
}

impl<'e> Search<'e> {
    fn solve(&mut self, goal: &ClassAtom, depth: usize) -> Attempt {
        if self.path.contains(goal) {
            self.pruned_cycle = true;
            return Attempt {
                found: None,
                tainted: true,
            };
        }
        if self.use_cache {
            match self.cache.get(goal) {
                Some(Cached::Proved(d, h)) if depth + h - 1 <= self.max_depth => {
                    self.metrics.cache_hits += 1;
                    return Attempt {
                        found: Some(d.clone()),
                        tainted: false,
                    };
                }
                Some(Cached::Refuted) => {
                    self.metrics.cache_hits += 1;
                    return Attempt {
                        found: None,
                        tainted: false,
                    };
                }
                _ => {}
            }
        }
        if depth > self.max_depth {
            self.truncated = true;
            return Attempt {
                found: None,
                tainted: true,
            };
        }
        self.metrics.nodes_expanded += 1;
        self.metrics.max_depth_reached = self.metrics.max_depth_reached.max(depth);
        self.path.push(goal.clone());
        let mut tainted = false;
        let mut found = None;
        for i in 0..self.rules.len() {
            let rule = self.rules[i];
            let mut subst = SortSubst::new();
            if !rule.head.match_into(goal, &mut subst) {
                continue;
            }
            let mut children = Vec::with_capacity(rule.body.len());
            let mut ok = true;
            for b in &rule.body {
                let sub = b.subst(&subst);
                let a = self.solve(&sub, depth + 1);
                tainted |= a.tainted;
                match a.found {
                    Some(d) => children.push(d),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                found = Some(Derivation {
                    rule: rule.name.clone(),
                    subst,
                    children,
                });
                break;
            }
        }
        self.path.pop();
        if self.use_cache {
            match &found {
                Some(d) => {
                    let h = d.height();
                    self.cache.insert(goal.clone(), Cached::Proved(d.clone(), h));
                }
                None if !tainted => {
                    self.cache.insert(goal.clone(), Cached::Refuted);
                }
                None => {}
            }
        }
        let tainted = tainted && found.is_none();
        Attempt { found, tainted }
    }
}

/// Depth-first backward chaining in priority order (the elaborator's strategy).
///
/// A goal that repeats an ancestor on the current path is pruned. The
/// outcome of a failed search is `depth_exceeded` when the depth limit cut
/// off some branch, otherwise `cycle_detected` when a repeated goal was
/// pruned, otherwise `failure`.
pub fn resolve_backward(q: &Query, env: &Env) -> (Option<Derivation>, SearchMetrics) {
    let start = Instant::now();
    let mut s = Search {
        rules: ordered_rules(env),
        max_depth: q.config.max_depth,
        use_cache: q.config.cache,
        cache: HashMap::new(),
        metrics: SearchMetrics::new(),
        truncated: false,
        pruned_cycle: false,
        path: Vec::new(),
    };
    let a = if q.atom.is_ground() && q.config.max_depth > 0 {
        s.solve(&q.atom, 1)
    } else {
        if q.config.max_depth == 0 {
            s.truncated = true;
        }
        Attempt {
            found: None,
            tainted: false,
        }
    };
    let mut metrics = s.metrics;
    metrics.outcome = if a.found.is_some() {
        Outcome::Success
    } else if s.truncated {
        Outcome::DepthExceeded
    } else if s.pruned_cycle {
        Outcome::CycleDetected
    } else {
        Outcome::Failure
    };
    metrics.elapsed_ns = elapsed(start);
    (a.found, metrics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolver::{check_derivation, Config, Strategy};
    use crate::syntax::parse_atom;

    fn query(env: &Env, atom: &str, cache: bool, max_depth: usize) -> (Option<Derivation>, SearchMetrics) {
        let q = Query::new(parse_atom(atom, env).unwrap()).with(Config {
            max_depth,
            strategy: Strategy::Backward,
            cache,
        });
        resolve_backward(&q, env)
    }

    #[test]
    fn direct_fact_is_one_node() {
        let env = Env::parse("sort Z\nclass c (a)\ninstance f : c Z").unwrap();
        let (d, m) = query(&env, "c Z", false, 32);
        assert_eq!(d.unwrap().height(), 1);
        assert_eq!(m.nodes_expanded, 1);
        assert_eq!(m.outcome, Outcome::Success);
    }

    #[test]
    fn self_loop_is_cycle_detected() {
        let env = Env::parse("sort Z\nclass c (a)\ninstance loop : c a <- c a").unwrap();
        let (d, m) = query(&env, "c Z", false, 32);
        assert!(d.is_none());
        assert_eq!(m.outcome, Outcome::CycleDetected);
        assert_eq!(m.nodes_expanded, 1);
    }

    #[test]
    fn depth_limit() {
        let env = Env::parse(
            "sort Z\nclass a (x)\nclass b (x)\nclass c (x)\ninstance f : a Z\ninstance ab : b x <- a x\ninstance bc : c x <- b x",
        )
        .unwrap();
        assert_eq!(query(&env, "c Z", false, 2).1.outcome, Outcome::DepthExceeded);
        let (d, m) = query(&env, "c Z", false, 3);
        assert_eq!(m.outcome, Outcome::Success);
        let d = d.unwrap();
        assert_eq!(d.spine(), vec!["bc", "ab", "f"]);
        assert!(check_derivation(&d, &parse_atom("c Z", &env).unwrap(), &env).ok);
    }

    #[test]
    fn priority_then_newest_first() {
        let env = Env::parse(
            "sort Z\nclass c (x)\n[priority 5] instance low : c Z\ninstance old : c Z\ninstance new : c Z",
        )
        .unwrap();
        assert_eq!(query(&env, "c Z", false, 32).0.unwrap().rule, "low");
        let env = Env::parse("sort Z\nclass c (x)\ninstance old : c Z\ninstance new : c Z").unwrap();
        assert_eq!(query(&env, "c Z", false, 32).0.unwrap().rule, "new");
    }

    #[test]
    fn cached_failures_are_reused() {
        let env = Env::parse(&crate::hierarchy::diamond_ladder(6, false).source).unwrap();
        let (_, off) = query(&env, "j_6 Z", false, 32);
        let (_, on) = query(&env, "j_6 Z", true, 32);
        assert_eq!(off.outcome, Outcome::Failure);
        assert_eq!(on.outcome, Outcome::Failure);
        assert_eq!(off.nodes_expanded, (1 << 8) - 2);
        assert!(on.nodes_expanded < off.nodes_expanded);
        assert!(on.cache_hits > 0);
    }
}
