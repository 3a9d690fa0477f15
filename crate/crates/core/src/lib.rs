//! Workbench for matrix-language graph analysis.
//!
//! The crate bundles the pieces needed to study what linear-algebra
//! expression languages and the models built on them can see in a graph:
//!
//! * [`graph`] — dense 0/1 graphs, builtin test graphs, graph6 I/O,
//!   seeded random generation;
//! * [`matlang`] — a matrix expression language with a shape system,
//!   S-expression syntax and a memoizing evaluator;
//! * [`cfg`] — context-free grammars over matrix expressions, preset
//!   grammars, depth-bounded sentence enumeration and sentence-based
//!   graph fingerprints;
//! * [`wl`] — 1-WL color refinement, the folklore 2-FWL pair refinement
//!   and an exact max-clique oracle;
//! * [`counting`] — closed-form substructure counting (paths, cycles,
//!   chordal cycles) at edge/node/graph level, cross-checked against
//!   brute-force enumeration;
//! * [`spectral`] — Laplacians, a Jacobi eigensolver, spectral responses
//!   and polynomial filter fitting;
//! * [`g2n2`] — a tensor GNN forward pass with random weights and a
//!   pair-distinguishing harness.

pub mod cfg;
pub mod counting;
pub mod g2n2;
pub mod graph;
pub mod graph6;
pub mod matlang;
pub mod spectral;
pub mod wl;

pub use graph::Graph;
