//! Constructive embedding of maximum-degree-2 graphs (disjoint unions of
//! cycles) into dense-enough random host graphs.
//!
//! The crate is organised around the stages of the construction:
//!
//! - [`graph`]: host graphs and digraphs, seeded binomial random models with
//!   per-pair coupling, and edge-list I/O.
//! - [`cycles`]: cycle-length multisets (`CycleSpec`), the tunable constants
//!   profile, family enumeration, and the integer partition helpers used to
//!   cut long cycles into short segments.
//! - [`expansion`]: expansion verification, expansion-preserving partitions,
//!   and star matchings.
//! - [`connect`]: vertex-disjoint routing of exact-length paths between
//!   prescribed endpoint pairs inside a workspace.
//! - [`absorb`]: absorber gadgets, the flexible bipartite template, robust
//!   sets, and the spanning connector that covers a workspace exactly.
//! - [`embed`]: exposure layers, cycle factors, the bounded-family embedder,
//!   the two large-girth pipelines, and the embedding verifier.
//! - [`oracle`]: exhaustive brute-force embedding for small instances.

pub mod absorb;
pub mod connect;
pub mod cycles;
pub mod embed;
pub mod expansion;
pub mod graph;
pub mod matching;
pub mod oracle;

pub use cycles::{ConstantsProfile, CycleSpec};
pub use embed::{Embedding, ExposureLayers};
pub use graph::{HostDigraph, HostGraph, RandomSeed};
