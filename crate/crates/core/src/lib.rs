//! Modular decomposition toolkit: a brute-force decomposition oracle, a
//! reconstruction of the pivot-based refinement step, and a harness that
//! searches for graphs on which refinement disturbs a strong module.
//!
//! The oracle ([`oracle`]) enumerates vertex subsets and is only meant for
//! small graphs (16 vertices by default). [`refine`] builds the ordered forest
//! around a pivot, runs the refinement loop and compares the result with the
//! oracle's strong modules. [`falsify`] sweeps graphs, pivots and processing
//! orders through that comparison and shrinks what it finds.
//!
//! ```
//! use mdtool::{fixtures, Oracle};
//!
//! let g = fixtures::sample_graph();
//! let tree = Oracle::default().build_md_tree(&g).unwrap();
//! assert_eq!(
//!     tree.to_string(),
//!     "(series (parallel (series a d i) f) (prime b c e (parallel g h)))"
//! );
//! ```

pub mod cli;
pub mod error;
pub mod falsify;
pub mod fixtures;
pub mod graph;
pub mod oracle;
pub mod refine;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
pub use oracle::{validate_tree, Oracle, Violation, ViolationCode};
pub use refine::{lemma4_check, refine_all, Lemma4Report, OrderedForest, RefineEvent, Side};
pub use tree::{MDTree, NodeKind};
