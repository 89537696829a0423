//! Proof-labeling certification of bounded locally verifiable treewidth and
//! MSO-definable properties, with a one-round LOCAL simulator.
//!
//! A centralized prover assigns every vertex a bit-string label; each vertex
//! then decides YES/NO from the labels in its closed neighborhood alone. The
//! graph is accepted iff every vertex says YES.

pub mod corpus;
pub mod elimination;
pub mod evaltree;
pub mod graph;
pub mod label;
pub mod mso;
pub mod pathsys;
pub mod pls_mso;
pub mod pls_tw;
pub mod sim;

pub use elimination::{EliminationTree, SearchMode};
pub use graph::{load_graph, Graph, GraphError, VertexId};
pub use pls_tw::{Decision, LocalInstance, Verdict};
