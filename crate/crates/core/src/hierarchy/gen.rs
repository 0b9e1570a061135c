//! Synthetic hierarchies for benchmarks and pathology tests.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Chain,
    DiamondLadder,
}

impl Shape {
    pub fn parse(s: &str) -> Option<Shape> {
        match s {
            "chain" => Some(Shape::Chain),
            "diamond-ladder" | "diamond_ladder" | "ladder" => Some(Shape::DiamondLadder),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Chain => "chain",
            Shape::DiamondLadder => "diamond-ladder",
        }
    }
}

/// A generated source file together with the query it is built around.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub source: String,
    /// Ground query atom such as `j_4 Z`.
    pub query: String,
    pub class_count: usize,
    pub rule_count: usize,
}

/// `c_0 ← … ← c_n` with the fact `c_0 Z`; the query `c_n Z` succeeds.
pub fn chain(n: usize) -> Generated {
    let mut s = String::from("/-- Carrier of the generated chain. -/\nsort Z\n");
    for i in 0..=n {
        let _ = writeln!(s, "/-- Chain level {i}. -/\nclass c_{i} (a)");
    }
    let _ = writeln!(s, "/-- Base fact. -/\ninstance c_0_z : c_0 Z");
    for i in 1..=n {
        let _ = writeln!(s, "/-- Chain step {i}. -/\ninstance c_{i}_of_c_{} : c_{i} a <- c_{} a", i - 1, i - 1);
    }
    Generated {
        source: s,
        query: format!("c_{n} Z"),
        class_count: n + 1,
        rule_count: n + 1,
    }
}

/// A ladder of `n` diamonds whose bottom rung needs an underivable class.
///
/// Classes: `missing`, `j_0 … j_n`, `s_1 … s_n` (2n + 2 in total). Rules:
/// `j_0 ← missing`, and for each rung `s_i ← j_{i-1}`, `j_i ← j_{i-1}`,
/// `j_i ← s_i`. Every path from `j_n` ends at `missing`, which has no
/// instance, so a backward search without failure caching visits each of the
/// `2^n` paths. With `with_fact` the bottom is supplied and `j_n Z` succeeds.
pub fn diamond_ladder(n: usize, with_fact: bool) -> Generated {
    let mut s = String::from("/-- Carrier of the generated ladder. -/\nsort Z\n");
    let _ = writeln!(s, "/-- Bottom of the ladder. -/\nclass missing (a)");
    for i in 0..=n {
        let _ = writeln!(s, "/-- Join point {i}. -/\nclass j_{i} (a)");
    }
    for i in 1..=n {
        let _ = writeln!(s, "/-- Side class of rung {i}. -/\nclass s_{i} (a)");
    }
    let _ = writeln!(s, "/-- Entry to the ladder. -/\ninstance j_0_of_missing : j_0 a <- missing a");
    for i in 1..=n {
        let p = i - 1;
        let _ = writeln!(s, "/-- Side step of rung {i}. -/\ninstance s_{i}_of_j_{p} : s_{i} a <- j_{p} a");
        let _ = writeln!(s, "/-- Direct step of rung {i}. -/\ninstance j_{i}_of_j_{p} : j_{i} a <- j_{p} a");
        let _ = writeln!(s, "/-- Closing step of rung {i}. -/\ninstance j_{i}_of_s_{i} : j_{i} a <- s_{i} a");
    }
    let mut rule_count = 3 * n + 1;
    if with_fact {
        let _ = writeln!(s, "/-- Supplies the bottom. -/\ninstance missing_z : missing Z");
        rule_count += 1;
    }
    Generated {
        source: s,
        query: format!("j_{n} Z"),
        class_count: 2 * n + 2,
        rule_count,
    }
}

pub fn generate(shape: Shape, n: usize) -> Generated {
    match shape {
        Shape::Chain => chain(n),
        Shape::DiamondLadder => diamond_ladder(n, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Env;
    use crate::hierarchy::{check_acyclic, diamond_report, stats};

    #[test]
    fn ladder_class_count_closed_form() {
        for n in 0..8 {
            let g = diamond_ladder(n, false);
            let env = Env::parse(&g.source).unwrap();
            let s = stats(&env);
            assert_eq!(s.class_count, 2 * n + 2);
            assert_eq!(s.instance_count, g.rule_count);
            assert!(check_acyclic(&env).is_acyclic());
        }
    }

    #[test]
    fn ladder_diamonds_double() {
        let env = Env::parse(&diamond_ladder(4, false).source).unwrap();
        let d = diamond_report(&env);
        let top = d
            .iter()
            .find(|d| d.source == "j_0" && d.target == "j_4")
            .unwrap();
        assert_eq!(top.paths, 16);
    }

    #[test]
    fn chain_parses() {
        let g = chain(5);
        let env = Env::parse(&g.source).unwrap();
        assert_eq!(env.classes.len(), 6);
        assert!(diamond_report(&env).is_empty());
    }
}
