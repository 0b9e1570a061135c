//! Class hierarchy analysis: the instance graph, its cycles and diamonds,
//! synthetic hierarchies, and derived instances.

mod derive;
mod gen;
mod graph;

pub use derive::{pi_instance, reassoc, DeriveError, PiInstance};
pub use gen::{chain, diamond_ladder, generate, Generated, Shape};
pub use graph::{
    check_acyclic, diamond_report, elementary_cycles, layers, path_counts, stats, ClassGraph,
    CycleReport, Diamond, Stats,
};
