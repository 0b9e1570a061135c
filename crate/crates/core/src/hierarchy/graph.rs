use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::env::Env;

/// The class-to-class graph: an edge `S → T` for every instance `T a ← S a`
/// whose head and body atom are unary over the same carrier pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGraph {
    pub nodes: Vec<String>,
    /// Deduplicated, sorted successor lists, indexed like `nodes`.
    pub succ: Vec<Vec<usize>>,
}

impl ClassGraph {
    pub fn from_env(env: &Env) -> ClassGraph {
        let nodes: Vec<String> = env.classes.iter().map(|c| c.name.clone()).collect();
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
        for r in &env.instances {
            if r.head.args.len() != 1 {
                continue;
            }
            let Some(h) = env.class_idx(&r.head.class) else { continue };
            for b in &r.body {
                if b.args.len() == 1 && b.args[0] == r.head.args[0] {
                    if let Some(s) = env.class_idx(&b.class) {
                        succ[s].insert(h);
                    }
                }
            }
        }
        ClassGraph {
            nodes,
            succ: succ.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// A topological order, or `None` when the graph has a cycle.
    pub fn topo_order(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for s in &self.succ {
            for &t in s {
                indeg[t] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &t in &self.succ[v] {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    ready.insert(t);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CycleReport {
    Acyclic,
    Cycles { cycles: Vec<Vec<String>> },
}

impl CycleReport {
    pub fn is_acyclic(&self) -> bool {
        matches!(self, CycleReport::Acyclic)
    }
}

/// Enumerates every elementary cycle of the class graph. Each cycle starts
/// at its lowest-indexed class (declaration order) and cycles are listed in
/// lexicographic order of their index sequences.
pub fn elementary_cycles(g: &ClassGraph) -> Vec<Vec<usize>> {
    let n = g.nodes.len();
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; n];
    for start in 0..n {
        // Only explore nodes that can reach back to `start` through nodes >= start.
        let reach = back_reachable(g, start);
        path.push(start);
        on_path[start] = true;
        extend(g, start, start, &reach, &mut path, &mut on_path, &mut out);
        on_path[start] = false;
        path.pop();
    }
    out.sort();
    out
}

fn back_reachable(g: &ClassGraph, start: usize) -> Vec<bool> {
    let n = g.nodes.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, ts) in g.succ.iter().enumerate() {
        for &t in ts {
            pred[t].push(s);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &p in &pred[v] {
            if p >= start && !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    seen
}

fn extend(
    g: &ClassGraph,
    start: usize,
    v: usize,
    reach: &[bool],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    for &w in &g.succ[v] {
        if w == start {
            out.push(path.clone());
        } else if w > start && reach[w] && !on_path[w] {
            path.push(w);
            on_path[w] = true;
            extend(g, start, w, reach, path, on_path, out);
            on_path[w] = false;
            path.pop();
        }
    }
}

pub fn check_acyclic(env: &Env) -> CycleReport {
    let g = ClassGraph::from_env(env);
    if g.topo_order().is_some() {
        return CycleReport::Acyclic;
    }
    let cycles = elementary_cycles(&g)
        .into_iter()
        .map(|c| c.into_iter().map(|i| g.nodes[i].clone()).collect())
        .collect();
    CycleReport::Cycles { cycles }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diamond {
    pub source: String,
    pub target: String,
    pub paths: u128,
}

/// Counts directed paths between every ordered pair of classes by dynamic
/// programming over a topological order (counts saturate at `u128::MAX`).
pub fn path_counts(g: &ClassGraph) -> Option<Vec<Vec<u128>>> {
    let order = g.topo_order()?;
    let n = g.nodes.len();
    let mut counts = vec![vec![0u128; n]; n];
    for &s in &order {
        counts[s][s] = 1;
    }
    // Process sources in reverse topological order so successors are done first.
    for &s in order.iter().rev() {
        for &t in &g.succ[s] {
            for x in 0..n {
                let add = counts[t][x];
                if add > 0 && x != s {
                    counts[s][x] = counts[s][x].saturating_add(add);
                }
            }
        }
    }
    for (s, row) in counts.iter_mut().enumerate() {
        row[s] = 0;
    }
    Some(counts)
}

/// All pairs `(S, T)` joined by at least two distinct directed paths.
/// Cyclic graphs have no meaningful path counts and yield an empty list.
pub fn diamond_report(env: &Env) -> Vec<Diamond> {
    let g = ClassGraph::from_env(env);
    let Some(counts) = path_counts(&g) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (s, row) in counts.iter().enumerate() {
        for (t, &c) in row.iter().enumerate() {
            if c >= 2 {
                out.push(Diamond {
                    source: g.nodes[s].clone(),
                    target: g.nodes[t].clone(),
                    paths: c,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub class_count: usize,
    pub instance_count: usize,
    pub unary_count: usize,
    /// Instances of the shape `D a ← C a`.
    pub class_to_class_count: usize,
    pub max_out_degree: usize,
}

pub fn stats(env: &Env) -> Stats {
    let g = ClassGraph::from_env(env);
    let class_to_class_count = env
        .instances
        .iter()
        .filter(|r| {
            r.body.len() == 1
                && r.head.args.len() == 1
                && r.body[0].args.len() == 1
                && r.head.args[0] == r.body[0].args[0]
                && !r.head.args[0].is_ground()
        })
        .count();
    Stats {
        class_count: env.classes.len(),
        instance_count: env.instances.len(),
        unary_count: env.classes.iter().filter(|c| c.arity() == 1).count(),
        class_to_class_count,
        max_out_degree: g.succ.iter().map(Vec::len).max().unwrap_or(0),
    }
}

/// Class names grouped by their depth in the graph (longest path from a source).
pub fn layers(g: &ClassGraph) -> Option<BTreeMap<usize, Vec<String>>> {
    let order = g.topo_order()?;
    let mut depth = vec![0usize; g.nodes.len()];
    for &v in &order {
        for &w in &g.succ[v] {
            depth[w] = depth[w].max(depth[v] + 1);
        }
    }
    let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (v, d) in depth.into_iter().enumerate() {
        out.entry(d).or_default().push(g.nodes[v].clone());
    }
    Some(out)
}
