//! The nine-vertex counterexample graph and the trees reported for it.

use crate::graph::Graph;
use crate::tree::MDTree;

/// `.mdg` text of the counterexample graph, vertex order `a..i`.
pub const SAMPLE_GRAPH_MDG: &str = include_str!("../fixtures/g.mdg");

/// Canonical decomposition tree of the counterexample graph.
pub const SAMPLE_TREE: &str = include_str!("../fixtures/g_decomposition.tree");

/// The faulty tree produced by the reference implementation.
pub const FAULTY_TREE: &str = include_str!("../fixtures/g_faulty.tree");

/// The reference implementation's (correct) tree for the complement.
pub const REFERENCE_COMPLEMENT_TREE: &str = include_str!("../fixtures/g_complement_reference.tree");

/// Pivot used in the refinement walk-through.
pub const SAMPLE_PIVOT: &str = "i";

/// The vertex whose step exposes the marked prime children.
pub const SAMPLE_FIRST_VERTEX: &str = "f";

/// Strong module that ends up with marked children.
pub const SAMPLE_VIOLATION: [&str; 5] = ["b", "c", "e", "g", "h"];

pub fn sample_graph() -> Graph {
    Graph::parse(SAMPLE_GRAPH_MDG).expect("bundled fixture parses")
}

pub fn sample_tree() -> MDTree {
    MDTree::parse(SAMPLE_TREE).expect("bundled fixture parses")
}

pub fn faulty_tree() -> MDTree {
    MDTree::parse(FAULTY_TREE).expect("bundled fixture parses")
}

pub fn reference_complement_tree() -> MDTree {
    MDTree::parse(REFERENCE_COMPLEMENT_TREE).expect("bundled fixture parses")
}

/// The same graph assembled as a join: `({f} + triangle a-i-d)` joined with
/// the 4-cycle `b-g-c-h` plus the edge `b-e`.
pub fn sample_graph_as_join() -> Graph {
    let left = Graph::new(&["f"])
        .unwrap()
        .disjoint_union(&Graph::cycle(&["a", "i", "d"]).unwrap())
        .unwrap();
    let mut right = Graph::cycle(&["b", "g", "c", "h"])
        .unwrap()
        .disjoint_union(&Graph::new(&["e"]).unwrap())
        .unwrap();
    right.add_edge_by_label("b", "e").unwrap();
    left.join(&right).unwrap()
}
