//! Type-class resolution over Horn-clause instance rules.

mod backward;
mod bidir;
mod check;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::env::{ClassAtom, Env, InstanceRule};
use crate::syntax::SortSubst;

pub use backward::resolve_backward;
pub use bidir::{resolve_bidir, saturate};
pub use check::{check_derivation, DerivationCheck};

pub const DEFAULT_MAX_DEPTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Backward,
    Bidir,
}

impl Strategy {
    pub fn parse(s: &str) -> Option<Strategy> {
        match s {
            "backward" => Some(Strategy::Backward),
            "bidir" | "bidirectional" => Some(Strategy::Bidir),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Backward => "backward",
            Strategy::Bidir => "bidir",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub max_depth: usize,
    pub strategy: Strategy,
    pub cache: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_depth: DEFAULT_MAX_DEPTH,
            strategy: Strategy::Backward,
            cache: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub atom: ClassAtom,
    pub config: Config,
}

impl Query {
    pub fn new(atom: ClassAtom) -> Self {
        Query {
            atom,
            config: Config::default(),
        }
    }

    pub fn with(mut self, config: Config) -> Self {
        self.config = config;
        self
    }
}

/// A resolution proof: the rule applied, the sort substitution instantiating
/// it, and one subderivation per body atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Derivation {
    pub rule: String,
    pub subst: SortSubst,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn height(&self) -> usize {
        1 + self.children.iter().map(Derivation::height).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Derivation::size).sum::<usize>()
    }

    /// Rule names along the leftmost branch, root first.
    pub fn spine(&self) -> Vec<&str> {
        let mut out = vec![self.rule.as_str()];
        let mut cur = self;
        while let Some(c) = cur.children.first() {
            out.push(c.rule.as_str());
            cur = c;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
    DepthExceeded,
    CycleDetected,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
            Outcome::DepthExceeded => "depth_exceeded",
            Outcome::CycleDetected => "cycle_detected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchMetrics {
    pub outcome: Outcome,
    pub nodes_expanded: u64,
    pub cache_hits: u64,
    pub max_depth_reached: usize,
    pub elapsed_ns: u64,
}

impl SearchMetrics {
    fn new() -> Self {
        SearchMetrics {
            outcome: Outcome::Failure,
            nodes_expanded: 0,
            cache_hits: 0,
            max_depth_reached: 0,
            elapsed_ns: 0,
        }
    }

    /// Metrics without the wall-clock field, for determinism comparisons.
    pub fn counts(&self) -> (Outcome, u64, u64, usize) {
        (
            self.outcome,
            self.nodes_expanded,
            self.cache_hits,
            self.max_depth_reached,
        )
    }
}

/// Runs the strategy selected in the query's config.
pub fn resolve(q: &Query, env: &Env) -> (Option<Derivation>, SearchMetrics) {
    match q.config.strategy {
        Strategy::Backward => resolve_backward(q, env),
        Strategy::Bidir => resolve_bidir(q, env),
    }
}

/// Rules in search order: ascending priority, newest first among equals.
pub(crate) fn ordered_rules(env: &Env) -> Vec<&InstanceRule> {
    let mut idx: Vec<usize> = (0..env.instances.len()).collect();
    idx.sort_by_key(|&i| (env.instances[i].priority, std::cmp::Reverse(i)));
    idx.into_iter().map(|i| &env.instances[i]).collect()
}

pub(crate) fn elapsed(start: Instant) -> u64 {
    start.elapsed().as_nanos().min(u64::MAX as u128) as u64
}
