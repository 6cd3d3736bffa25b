//! Deciding and constructing long cycles in dense regular graphs.
//!
//! The pipeline splits a graph into robust expander components with spectral
//! sweeps, searches for a small connecting path system over those components,
//! and stitches a long cycle together with rotation-extension. Exhaustive
//! oracles in [`oracles`] cover every predicate at desk scale.

pub mod cycle;
pub mod error;
pub mod generators;
pub mod graph;
pub mod oracles;
pub mod param;
pub mod partition;
pub mod paths;
pub mod spectral;

pub use cycle::{decide_long_cycle, verify_cycle, Cycle, DecideOptions, DecisionReport, Verdict};
pub use error::{Error, Result};
pub use graph::{parse_graph, Bipartition, CutStats, Graph, VertexSet};
pub use param::Param;
pub use partition::{decompose, HierarchyConfig, HierarchyOptions, RobustPartition};
pub use paths::PathSystem;
