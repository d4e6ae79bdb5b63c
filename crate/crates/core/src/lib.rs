//! Multi-scale community detection through linear synchronization dynamics.
//!
//! The pipeline: build an interaction operator on a graph, evolve node phases
//! under `d theta / dt = omega - c Op theta`, measure pairwise phase
//! similarity across an ensemble of runs, and extract communities by edge
//! thresholding (with multi-resolution "onion" peeling) or average-link
//! hierarchical clustering, evaluated by NMI and activity-based metrics.

pub mod dynamics;
pub mod error;
pub mod evaluation;
pub mod generate;
pub mod graph;
pub mod multiscale;
pub mod operators;
pub mod pipeline;
pub mod similarity;
pub mod spectral;
pub mod union_find;

pub use dynamics::{MethodKind, SimulationConfig, SimulationEnsemble};
pub use error::{Error, ErrorCategory, Result};
pub use graph::{Graph, LoadReport, NodeLabeling, Partition};
pub use operators::{InteractionOperator, OperatorKind};
pub use pipeline::{run_pipeline, ResultBundle, RunConfig, TauGrid};
