//! Subshifts: presentations, follower automata, edge graphs and cycles.

mod alphabet;
mod automaton;
mod cycle;
mod graph;
mod presentation;

pub use alphabet::{Alphabet, Symbol, Word};
pub use automaton::FollowerAutomaton;
pub use cycle::{enumerate_cycles, for_each_simple_cycle, Cycle};
pub use graph::{Edge, EdgeGraph, Vertex};
pub use presentation::{parse_shift, LabeledGraph, ShiftKind, ShiftPresentation};

/// Builds the follower-set automaton of `p`.
pub fn follower_automaton(p: &ShiftPresentation) -> FollowerAutomaton {
    FollowerAutomaton::new(p)
}

/// Order-`order` edge graph of `p`.
pub fn edge_graph(p: &ShiftPresentation, order: usize) -> crate::Result<EdgeGraph> {
    EdgeGraph::new(p, order)
}
