//! Error type shared by the whole crate.
//!
//! Every error maps to one of three [`ErrorCategory`] values, which the CLI
//! turns into process exit codes (usage = 1, data = 2, numerical = 3) and the
//! FFI layer turns into status codes.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used for exit/status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad configuration or invalid arguments.
    Usage,
    /// Unreadable, malformed, or inconsistent input data.
    Data,
    /// Numerical failure: divergence, non-convergence, singular operator.
    Numerical,
}

impl ErrorCategory {
    /// Process exit code for the CLI: usage = 1, data = 2, numerical = 3.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Usage => 1,
            ErrorCategory::Data => 2,
            ErrorCategory::Numerical => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line} of {path}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("empty graph: {0}")]
    EmptyGraph(String),
    #[error("unknown node id {0:?}")]
    UnknownNode(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("node {node} has zero degree; {kind} is undefined")]
    DegenerateDegree { kind: String, node: String },
    #[error("operator has no left null vector: alpha = {alpha} exceeds lambda_max = {lambda_max}")]
    NoNullVector { alpha: f64, lambda_max: f64 },
    #[error("{kind} operator admits no steady state")]
    NoSteadyState { kind: String },
    #[error("operator is singular; the omega != 0 closed form requires an invertible operator")]
    SingularOperator,
    #[error("graph has {nodes} nodes, above the dense cap {cap}")]
    DenseCap { nodes: usize, cap: usize },
    #[error("euler integration diverged at step size {step}: |theta| grew beyond 1e6 x initial")]
    Divergence { step: f64 },
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        solver: String,
        iterations: usize,
        residual: f64,
    },
    #[error("time {t} is not on the simulation grid")]
    GridTime { t: f64 },
    #[error("degenerate equilibrium: node {node} has zero steady-state entry")]
    DegenerateEquilibrium { node: String },
    #[error("degenerate ordering: theta is constant, no sweep cut exists")]
    DegenerateOrdering,
    #[error("graph is disconnected ({components} components); per-component values required")]
    Disconnected { components: usize },
    #[error("partitions cover different node sets ({left} vs {right} nodes)")]
    NodeSetMismatch { left: usize, right: usize },
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("infeasible degree demands: {0}")]
    InfeasibleDegree(String),
    #[error("pipeline stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Category of this error; `Stage` delegates to its cause.
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            Config(_) | InfeasibleDegree(_) => ErrorCategory::Usage,
            Io { .. } | Parse { .. } | EmptyGraph(_) | UnknownNode(_) | NodeSetMismatch { .. }
            | UnknownFeature(_) | GridTime { .. } => ErrorCategory::Data,
            DegenerateDegree { .. } | NoNullVector { .. } | NoSteadyState { .. }
            | SingularOperator | DenseCap { .. } | Divergence { .. } | NonConvergence { .. }
            | DegenerateEquilibrium { .. } | DegenerateOrdering | Disconnected { .. } => {
                ErrorCategory::Numerical
            }
            Stage { source, .. } => source.category(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
