//! Canonical hierarchical hub labels (2-hop distance labels) built three ways:
//! sequential pruned landmark labeling ([`pll`]), its all-sources-at-once
//! vertex-centric formulation ([`vcpll`]), and the rank-batched vertex-centric
//! algorithm ([`bvc`]). Every construction is instrumented with the same
//! [`metrics::CounterReport`] so cost claims can be asserted, and
//! [`oracle`] provides brute-force ground truth for desk-scale inputs.
//!
//! Vertices are identified by *rank* everywhere past the I/O boundary:
//! rank 0 is the highest-priority vertex of the [`graph::VertexOrder`].

pub mod bvc;
pub mod candidates;
pub mod check;
pub mod engine;
pub mod gen;
pub mod graph;
pub mod labels;
pub mod metrics;
pub mod oracle;
pub mod pll;
pub mod vcpll;

/// Position of a vertex in the total order. Smaller is higher priority.
pub type Rank = u32;

/// Shortest-path length (hop count or summed weights).
pub type Distance = u32;

/// "No path" sentinel. Never stored in a label entry.
pub const INF: Distance = Distance::MAX;

/// Largest distance a label entry may carry.
pub const MAX_DISTANCE: Distance = INF - 1;

/// Which of a vertex's label lists an entry lives in.
///
/// Undirected stores keep a single list per vertex under [`Side::Out`].
/// Directed stores use `Out` for hubs reachable *from* the vertex and `In`
/// for hubs that reach it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Out = 0,
    In = 1,
}

impl Side {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Out => Side::In,
            Side::In => Side::Out,
        }
    }
}

/// Error raised when an algorithm is handed a graph kind it does not handle.
#[derive(Debug, thiserror::Error)]
pub enum AlgoError {
    #[error("{algorithm} does not accept {what} graphs")]
    UnsupportedGraph {
        algorithm: &'static str,
        what: &'static str,
    },
    #[error("batch size must be at least 1")]
    ZeroBatchSize,
    #[error("thread count must be at least 1")]
    ZeroThreads,
    #[error("distance overflow while relaxing edge into rank {0}")]
    DistanceOverflow(Rank),
    #[error(transparent)]
    Engine(#[from] engine::EngineError),
    #[error(transparent)]
    Label(#[from] labels::LabelError),
}

pub use graph::{Graph, RawGraph, VertexOrder};
pub use labels::{HubEntry, LabelStore};
pub use metrics::CounterReport;
