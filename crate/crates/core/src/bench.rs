//! Resolution metrics over generated hierarchies.

use serde::{Deserialize, Serialize};

use crate::env::Env;
use crate::hierarchy::{generate, Shape};
use crate::resolver::{resolve, Config, Query, Strategy, DEFAULT_MAX_DEPTH};
use crate::syntax::parse_atom;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRow {
    pub shape: String,
    pub n: usize,
    pub strategy: String,
    pub classes: usize,
    pub rules: usize,
    pub outcome: String,
    pub nodes_expanded: u64,
    pub cache_hits: u64,
    pub max_depth_reached: usize,
    pub elapsed_ns: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub max_depth: usize,
    /// Cache results in backward search. Off by default, so the uncached
    /// search cost is measured.
    pub cache: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            max_depth: DEFAULT_MAX_DEPTH,
            cache: false,
        }
    }
}

/// One row per `(n, strategy)`, in the order given.
pub fn bench(shape: Shape, ns: &[usize], strategies: &[Strategy], cfg: &BenchConfig) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &n in ns {
        let g = generate(shape, n);
        let env = Env::parse(&g.source).expect("generated hierarchies parse");
        let atom = parse_atom(&g.query, &env).expect("generated query parses");
        for &strategy in strategies {
            let q = Query::new(atom.clone()).with(Config {
                max_depth: cfg.max_depth,
                strategy,
                cache: cfg.cache,
            });
            let (_, m) = resolve(&q, &env);
            rows.push(BenchRow {
                shape: shape.name().into(),
                n,
                strategy: strategy.name().into(),
                classes: g.class_count,
                rules: g.rule_count,
                outcome: m.outcome.name().into(),
                nodes_expanded: m.nodes_expanded,
                cache_hits: m.cache_hits,
                max_depth_reached: m.max_depth_reached,
                elapsed_ns: m.elapsed_ns,
            });
        }
    }
    rows
}
