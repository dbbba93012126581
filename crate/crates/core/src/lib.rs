//! A deterministic simulator for synchronous bandwidth-limited message
//! passing, with a library of distributed algorithms for all-pairs shortest
//! paths and betweenness centrality on unweighted directed graphs and
//! weighted dags, sequential oracles to verify every output, and round and
//! message metering checked against the algorithms' exact bounds.

pub mod accum;
pub mod dag;
pub mod engine;
pub mod graph;
pub mod naive;
pub mod numeric;
pub mod oracle;
pub mod tree;
pub mod unweighted;

pub use engine::{Bandwidth, EngineOptions, EvalOrder, Payload, RunMetrics};
pub use graph::{classify, fixture, generate, parse_edge_list, Digraph, GeneratorKind};
pub use numeric::{Sigma, SigmaMode};

// The exact-arithmetic crates are part of the public API surface.
pub use num_bigint;
pub use num_rational;
