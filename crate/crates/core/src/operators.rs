//! The six interaction operators as implicit sparse linear maps.
//!
//! All operators act on vectors indexed by dense node id and cost O(|E| + n)
//! per application; Modularity adds a rank-one term d (d^T x) / 2m instead of
//! materializing the dense degree-product matrix. No dense form is ever built
//! here; dense constructions live in the spectral module (capped) and in test
//! oracles.

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral;

/// Relative tolerance for deciding alpha == lambda_max in null-vector logic.
const ALPHA_MATCH_RTOL: f64 = 1e-8;

/// Row-parallel apply threshold; below it the sequential loop wins.
const PAR_ROWS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    /// L = D - A
    Laplacian,
    /// I - A D^{-1}
    #[serde(rename = "rw-norm")]
    RandomWalkNorm,
    /// I - D^{-1/2} A D^{-1/2}
    SymNorm,
    /// R = alpha I - A
    Replicator,
    /// I - alpha^{-1} A
    #[serde(rename = "scaled-adj")]
    ScaledAdjacency,
    /// DD - A with DD[i][j] = d_i d_j / 2m
    Modularity,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 6] = [
        OperatorKind::Laplacian,
        OperatorKind::RandomWalkNorm,
        OperatorKind::SymNorm,
        OperatorKind::Replicator,
        OperatorKind::ScaledAdjacency,
        OperatorKind::Modularity,
    ];

    pub fn requires_alpha(&self) -> bool {
        matches!(self, OperatorKind::Replicator | OperatorKind::ScaledAdjacency)
    }

    /// All kinds except RandomWalkNorm are symmetric matrices.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, OperatorKind::RandomWalkNorm)
    }

    pub fn cli_name(&self) -> &'static str {
        match self {
            OperatorKind::Laplacian => "laplacian",
            OperatorKind::RandomWalkNorm => "rw-norm",
            OperatorKind::SymNorm => "sym-norm",
            OperatorKind::Replicator => "replicator",
            OperatorKind::ScaledAdjacency => "scaled-adj",
            OperatorKind::Modularity => "modularity",
        }
    }
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .iter()
            .find(|k| k.cli_name() == s)
            .copied()
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown operator {s:?}; expected one of laplacian, rw-norm, sym-norm, \
                     replicator, scaled-adj, modularity"
                ))
            })
    }
}

/// An interaction operator bound to a graph, applied matrix-free.
#[derive(Debug, Clone)]
pub struct InteractionOperator {
    graph: Arc<Graph>,
    kind: OperatorKind,
    /// Present iff the kind requires it; always > 0.
    alpha: Option<f64>,
    /// True when alpha was filled in with the computed lambda_max(A).
    alpha_defaulted: bool,
    /// Kind-specific per-node factor: 1/d (RandomWalkNorm), 1/sqrt(d)
    /// (SymNorm), d as f64 (Modularity); empty otherwise.
    scale: Vec<f64>,
    /// 2|E| as f64 (Modularity only).
    two_m: f64,
}

impl InteractionOperator {
    /// Build an operator; `alpha = None` defaults to lambda_max(A) for the
    /// kinds that carry alpha.
    pub fn build(graph: Arc<Graph>, kind: OperatorKind, alpha: Option<f64>) -> Result<Self> {
        let n = graph.node_count();
        if n == 0 {
            return Err(Error::EmptyGraph("operator on empty graph".into()));
        }
        if matches!(kind, OperatorKind::RandomWalkNorm | OperatorKind::SymNorm) {
            if let Some(i) = graph.degrees().iter().position(|&d| d == 0) {
                return Err(Error::DegenerateDegree {
                    kind: kind.to_string(),
                    node: graph.labels().name(i as u32).to_string(),
                });
            }
        }
        if kind == OperatorKind::Modularity && graph.edge_count() == 0 {
            return Err(Error::Config(
                "modularity operator requires at least one edge".into(),
            ));
        }
        let mut alpha_defaulted = false;
        let alpha = match (kind.requires_alpha(), alpha) {
            (false, None) => None,
            (false, Some(_)) => {
                return Err(Error::Config(format!(
                    "operator {kind} does not accept alpha"
                )))
            }
            (true, Some(a)) if a.is_finite() && a > 0.0 => Some(a),
            (true, Some(a)) => {
                return Err(Error::Config(format!("alpha must be finite and > 0, got {a}")))
            }
            (true, None) => {
                alpha_defaulted = true;
                let (lmax, _) = spectral::lambda_max_adjacency(&graph)?;
                if lmax <= 0.0 {
                    return Err(Error::Config(
                        "alpha default lambda_max(A) is not positive (graph has no edges)".into(),
                    ));
                }
                Some(lmax)
            }
        };
        let scale = match kind {
            OperatorKind::RandomWalkNorm => {
                graph.degrees().iter().map(|&d| 1.0 / d as f64).collect()
            }
            OperatorKind::SymNorm => graph
                .degrees()
                .iter()
                .map(|&d| 1.0 / (d as f64).sqrt())
                .collect(),
            OperatorKind::Modularity => graph.degrees().iter().map(|&d| d as f64).collect(),
            _ => Vec::new(),
        };
        Ok(InteractionOperator {
            two_m: 2.0 * graph.edge_count() as f64,
            graph,
            kind,
            alpha,
            alpha_defaulted,
            scale,
        })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// True when alpha came from the lambda_max default rather than the user.
    pub fn alpha_defaulted(&self) -> bool {
        self.alpha_defaulted
    }

    /// Short human-readable descriptor, e.g. `replicator(alpha=6.7257)`.
    pub fn descriptor(&self) -> String {
        match self.alpha {
            Some(a) => format!("{}(alpha={a:.6})", self.kind),
            None => self.kind.to_string(),
        }
    }

    /// y = Op x. Dimension-checked once; O(|E| + n).
    pub fn apply(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.graph.node_count();
        if x.len() != n || out.len() != n {
            return Err(Error::Config(format!(
                "apply: vector length {} does not match node count {n}",
                x.len()
            )));
        }
        let g = &self.graph;
        let row = |i: usize, out_i: &mut f64| {
            let neigh = g.neighbors(i as u32);
            match self.kind {
                OperatorKind::Laplacian => {
                    let mut s = 0.0;
                    for &j in neigh {
                        s += x[j as usize];
                    }
                    *out_i = g.degree(i as u32) as f64 * x[i] - s;
                }
                OperatorKind::RandomWalkNorm => {
                    let mut s = 0.0;
                    for &j in neigh {
                        s += x[j as usize] * self.scale[j as usize];
                    }
                    *out_i = x[i] - s;
                }
                OperatorKind::SymNorm => {
                    let mut s = 0.0;
                    for &j in neigh {
                        s += x[j as usize] * self.scale[j as usize];
                    }
                    *out_i = x[i] - self.scale[i] * s;
                }
                OperatorKind::Replicator => {
                    let mut s = 0.0;
                    for &j in neigh {
                        s += x[j as usize];
                    }
                    *out_i = self.alpha.unwrap() * x[i] - s;
                }
                OperatorKind::ScaledAdjacency => {
                    let mut s = 0.0;
                    for &j in neigh {
                        s += x[j as usize];
                    }
                    *out_i = x[i] - s / self.alpha.unwrap();
                }
                OperatorKind::Modularity => unreachable!("handled below"),
            }
        };
        if self.kind == OperatorKind::Modularity {
            // (DD - A) x = d (d^T x) / 2m - A x.
            let dx: f64 = self
                .scale
                .iter()
                .zip(x)
                .map(|(d, xi)| d * xi)
                .sum::<f64>()
                / self.two_m;
            let modular_row = |i: usize, out_i: &mut f64| {
                let mut s = 0.0;
                for &j in g.neighbors(i as u32) {
                    s += x[j as usize];
                }
                *out_i = self.scale[i] * dx - s;
            };
            if n >= PAR_ROWS {
                use rayon::prelude::*;
                out.par_iter_mut().enumerate().for_each(|(i, o)| modular_row(i, o));
            } else {
                for (i, o) in out.iter_mut().enumerate() {
                    modular_row(i, o);
                }
            }
            return Ok(());
        }
        if n >= PAR_ROWS {
            use rayon::prelude::*;
            out.par_iter_mut().enumerate().for_each(|(i, o)| row(i, o));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                row(i, o);
            }
        }
        Ok(())
    }

    /// Allocating convenience wrapper around [`InteractionOperator::apply`].
    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; x.len()];
        self.apply(x, &mut out)?;
        Ok(out)
    }

    /// Vector w with w^T Op = 0, normalized to unit sum. Requires a connected
    /// graph; for Replicator/ScaledAdjacency, requires alpha = lambda_max(A).
    pub fn left_null_vector(&self) -> Result<Vec<f64>> {
        let comps = self.graph.connected_components().community_count();
        if comps != 1 {
            return Err(Error::Disconnected { components: comps });
        }
        let n = self.graph.node_count();
        match self.kind {
            // 1^T (D - A) = 0, 1^T (I - A D^{-1}) = 0, 1^T (DD - A) = d - d = 0.
            OperatorKind::Laplacian | OperatorKind::RandomWalkNorm | OperatorKind::Modularity => {
                Ok(vec![1.0 / n as f64; n])
            }
            OperatorKind::SymNorm => {
                let mut w: Vec<f64> = self
                    .graph
                    .degrees()
                    .iter()
                    .map(|&d| (d as f64).sqrt())
                    .collect();
                let sum: f64 = w.iter().sum();
                w.iter_mut().for_each(|v| *v /= sum);
                Ok(w)
            }
            OperatorKind::Replicator | OperatorKind::ScaledAdjacency => {
                let alpha = self.alpha.unwrap();
                let (lmax, v) = spectral::lambda_max_adjacency_with_tol(&self.graph, 1e-12)?;
                if (alpha - lmax).abs() > ALPHA_MATCH_RTOL * lmax.max(1.0) {
                    return Err(Error::NoNullVector {
                        alpha,
                        lambda_max: lmax,
                    });
                }
                let sum: f64 = v.iter().sum();
                Ok(v.iter().map(|x| x / sum).collect())
            }
        }
    }

    /// Upper bound on the operator spectrum, used for Euler stability steps
    /// and scale-relative zero tolerances.
    pub fn lambda_upper(&self) -> f64 {
        let dmax = self.graph.max_degree() as f64;
        match self.kind {
            OperatorKind::Laplacian => 2.0 * dmax,
            OperatorKind::RandomWalkNorm | OperatorKind::SymNorm => 2.0,
            // |A| eigenvalues are within [-d_max, d_max].
            OperatorKind::Replicator => self.alpha.unwrap() + dmax,
            OperatorKind::ScaledAdjacency => 1.0 + dmax / self.alpha.unwrap(),
            // lambda_max(DD) = d^T d / 2m; -A adds at most d_max.
            OperatorKind::Modularity => {
                let dd: f64 = self
                    .graph
                    .degrees()
                    .iter()
                    .map(|&d| (d as f64) * (d as f64))
                    .sum();
                dd / self.two_m + dmax
            }
        }
    }
}
