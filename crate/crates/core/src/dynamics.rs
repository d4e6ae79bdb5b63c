//! Phase evolution under `d theta / dt = omega - c Op theta`.
//!
//! Closed form (dense eigendecomposition, graphs up to [`DENSE_CAP`] nodes):
//! `theta(t) = q + sum_k x_k e^{-c lambda_k t} (y_k^T (theta_0 - q))` with
//! `q = (c Op)^{-1} omega` (zero when omega = 0). Forward Euler otherwise,
//! with the spectral stability default `h = 0.5 / (c lambda_upper)`.
//!
//! Simulation runs independently per connected component for the
//! block-diagonal kinds, with Replicator/ScaledAdjacency alpha re-defaulted
//! to the per-component lambda_max so every component has a meaningful steady
//! state. Modularity couples all nodes through the degree-product term and is
//! always evolved globally; it has no steady state (indefinite spectrum).

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{InteractionOperator, OperatorKind};
use crate::spectral::{self, DenseEig, DENSE_CAP};

/// Default Euler step is DEFAULT_EULER_X / (c lambda_upper).
pub const DEFAULT_EULER_X: f64 = 0.5;

/// Euler diverged when |theta| exceeds this multiple of its initial norm.
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    /// Closed form when the graph fits the dense cap, Euler otherwise.
    #[default]
    Auto,
    ClosedForm,
    Euler,
}

impl std::str::FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodKind::Auto),
            "closed" | "closed-form" => Ok(MethodKind::ClosedForm),
            "euler" => Ok(MethodKind::Euler),
            _ => Err(Error::Config(format!(
                "unknown method {s:?}; expected auto, closed, or euler"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationConfig {
    /// Uniform coupling constant; times are dimensionless as tau = c t.
    pub c: f64,
    /// Per-node drive; `None` means all zeros (the reproduced experiments).
    pub omega: Option<Vec<f64>>,
    /// Number of independent runs K.
    pub runs: usize,
    /// Sample times; strictly ascending, starting at 0.
    pub time_grid: Vec<f64>,
    pub seed: u64,
    pub method: MethodKind,
    /// Euler step override; defaults to the stability bound.
    pub euler_step: Option<f64>,
}

impl SimulationConfig {
    pub fn new(time_grid: Vec<f64>, seed: u64) -> Self {
        SimulationConfig {
            c: 1.0,
            omega: None,
            runs: 100,
            time_grid,
            seed,
            method: MethodKind::Auto,
            euler_step: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("coupling c must be > 0, got {}", self.c)));
        }
        if self.runs == 0 {
            return Err(Error::Config("run count K must be >= 1".into()));
        }
        if self.time_grid.is_empty() || self.time_grid[0] != 0.0 {
            return Err(Error::Config("time grid must start at 0".into()));
        }
        if self.time_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("time grid must be strictly ascending".into()));
        }
        if self.time_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("time grid entries must be finite".into()));
        }
        if let Some(h) = self.euler_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!("euler step must be > 0, got {h}")));
            }
        }
        Ok(())
    }
}

/// K independent trajectories sampled on a shared time grid.
#[derive(Debug, Clone)]
pub struct SimulationEnsemble {
    pub config: SimulationConfig,
    pub operator: String,
    pub kind: OperatorKind,
    /// Per run: a (time grid x node) matrix of theta values.
    runs: Vec<Vec<Vec<f64>>>,
    /// Per-run steady state; `None` when undefined (Modularity or omega != 0).
    pub equilibrium: Option<Vec<Vec<f64>>>,
    /// Run-independent steady-state direction: strictly positive on
    /// components with a steady state, exactly zero on components whose
    /// trajectories decay to zero (alpha > lambda_max). `None` when no steady
    /// state exists at all (Modularity, or omega != 0). Similarity ratios
    /// require strictly positive entries.
    pub steady_direction: Option<Vec<f64>>,
}

impl SimulationEnsemble {
    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn node_count(&self) -> usize {
        self.runs[0][0].len()
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.config.time_grid
    }

    /// Theta for one run at one grid index (time-major).
    pub fn theta(&self, run: usize, time_index: usize) -> &[f64] {
        &self.runs[run][time_index]
    }

    /// Assemble an ensemble from raw parts; test-only, shapes unchecked.
    #[cfg(test)]
    pub(crate) fn from_raw_parts(
        config: SimulationConfig,
        operator: String,
        kind: OperatorKind,
        runs: Vec<Vec<Vec<f64>>>,
        equilibrium: Option<Vec<Vec<f64>>>,
        steady_direction: Option<Vec<f64>>,
    ) -> Self {
        SimulationEnsemble {
            config,
            operator,
            kind,
            runs,
            equilibrium,
            steady_direction,
        }
    }

    /// Grid index for time `t`, tolerating 1e-9 relative fuzz.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.config
            .time_grid
            .iter()
            .position(|&g| (g - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or(Error::GridTime { t })
    }
}

/// Per-component context shared by the closed-form and Euler drivers.
struct CompCtx {
    /// Dense ids of this component's nodes in the parent graph.
    nodes: Vec<u32>,
    op: InteractionOperator,
    eig: Option<DenseEig>,
    /// Steady-state direction (positive), or None when states decay to zero.
    direction: Option<Vec<f64>>,
    /// Left null vector (unit sum), when one exists.
    left_null: Option<Vec<f64>>,
}

/// Split into evolution contexts. Modularity gets one global context because
/// the rank-one degree term couples components.
fn build_contexts(op: &InteractionOperator) -> Result<Vec<CompCtx>> {
    let g = op.graph();
    let kind = op.kind();
    let groups = if kind == OperatorKind::Modularity {
        vec![(0..g.node_count() as u32).collect::<Vec<u32>>()]
    } else {
        g.connected_components().groups()
    };
    let mut ctxs = Vec::with_capacity(groups.len());
    for nodes in groups {
        let (sub, back) = if nodes.len() == g.node_count() {
            ((**g).clone(), nodes.clone())
        } else {
            g.induced(&nodes)
        };
        let sub = Arc::new(sub);
        let alpha = if kind.requires_alpha() {
            if op.alpha_defaulted() && sub.edge_count() > 0 {
                None // Re-default to this component's lambda_max.
            } else {
                // Explicit alpha applies globally; edgeless components keep
                // the global default since their own lambda_max is 0.
                op.alpha()
            }
        } else {
            None
        };
        let sub_op = InteractionOperator::build(sub, kind, alpha)?;
        let direction = steady_direction_connected(&sub_op)?;
        let left_null = match kind {
            OperatorKind::Modularity => None,
            _ => match sub_op.left_null_vector() {
                Ok(w) => Some(w),
                Err(Error::NoNullVector { .. }) => None,
                Err(e) => return Err(e),
            },
        };
        ctxs.push(CompCtx {
            nodes: back,
            op: sub_op,
            eig: None,
            direction,
            left_null,
        });
    }
    Ok(ctxs)
}

/// Steady-state direction of a connected component: uniform (Laplacian),
/// degrees (RandomWalkNorm), sqrt degrees (SymNorm), dominant adjacency
/// eigenvector (Replicator/ScaledAdjacency at alpha = lambda_max). `None`
/// when trajectories decay to zero (alpha > lambda_max) or no steady state
/// exists (Modularity).
fn steady_direction_connected(op: &InteractionOperator) -> Result<Option<Vec<f64>>> {
    let g = op.graph();
    let n = g.node_count();
    Ok(match op.kind() {
        OperatorKind::Laplacian => Some(vec![1.0; n]),
        OperatorKind::RandomWalkNorm => Some(g.degrees().iter().map(|&d| d as f64).collect()),
        OperatorKind::SymNorm => Some(g.degrees().iter().map(|&d| (d as f64).sqrt()).collect()),
        OperatorKind::Replicator | OperatorKind::ScaledAdjacency => {
            if g.edge_count() == 0 {
                return Ok(None); // alpha I alone: everything decays.
            }
            let alpha = op.alpha().unwrap();
            let (lmax, v) = spectral::lambda_max_adjacency_with_tol(g, 1e-12)?;
            if (alpha - lmax).abs() <= 1e-8 * lmax.max(1.0) {
                Some(v)
            } else {
                None // alpha > lambda_max: zero steady state.
            }
        }
        OperatorKind::Modularity => None,
    })
}

/// Scatter a component-local vector into a full-graph vector.
fn scatter(full: &mut [f64], nodes: &[u32], local: &[f64]) {
    for (i, &v) in nodes.iter().enumerate() {
        full[v as usize] = local[i];
    }
}

/// Gather a full-graph vector down to component-local order.
fn gather(full: &[f64], nodes: &[u32]) -> Vec<f64> {
    nodes.iter().map(|&v| full[v as usize]).collect()
}

/// Closed-form evaluation at every grid time for one component.
fn evolve_closed(
    eig: &DenseEig,
    theta0: &[f64],
    omega: Option<&[f64]>,
    c: f64,
    grid: &[f64],
    zero_tol: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = theta0.len();
    // q = (c Op)^{-1} omega, or zero when omega = 0.
    let q = match omega {
        None => vec![0.0; n],
        Some(om) => {
            if eig.values.iter().any(|l| l.abs() <= zero_tol) {
                return Err(Error::SingularOperator);
            }
            let mut q = vec![0.0; n];
            for k in 0..n {
                let yk_om: f64 = eig.left(k).iter().zip(om).map(|(a, b)| a * b).sum();
                let coef = yk_om / (c * eig.values[k]);
                for i in 0..n {
                    q[i] += coef * eig.right[k][i];
                }
            }
            q
        }
    };
    let coeffs: Vec<f64> = (0..n)
        .map(|k| {
            eig.left(k)
                .iter()
                .zip(theta0.iter().zip(&q))
                .map(|(y, (t, qi))| y * (t - qi))
                .sum()
        })
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut th = q.clone();
        for k in 0..n {
            let w = coeffs[k] * (-c * eig.values[k] * t).exp();
            if w != 0.0 {
                for i in 0..n {
                    th[i] += w * eig.right[k][i];
                }
            }
        }
        out.push(th);
    }
    Ok(out)
}

/// Forward Euler sampled at every grid time for one component.
fn evolve_euler(
    op: &InteractionOperator,
    theta0: &[f64],
    omega: Option<&[f64]>,
    c: f64,
    grid: &[f64],
    step: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = theta0.len();
    let init_norm = theta0.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-12);
    let mut th = theta0.to_vec();
    let mut buf = vec![0.0; n];
    let mut out = Vec::with_capacity(grid.len());
    let mut t_prev = 0.0;
    for (gi, &t) in grid.iter().enumerate() {
        if gi > 0 {
            let dt = t - t_prev;
            let nsteps = (dt / step).ceil().max(1.0) as usize;
            let h = dt / nsteps as f64;
            for _ in 0..nsteps {
                op.apply(&th, &mut buf)?;
                match omega {
                    Some(om) => {
                        for i in 0..n {
                            th[i] += h * (om[i] - c * buf[i]);
                        }
                    }
                    None => {
                        for i in 0..n {
                            th[i] -= h * c * buf[i];
                        }
                    }
                }
            }
            t_prev = t;
        }
        let norm = th.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if !norm.is_finite() || norm > DIVERGENCE_FACTOR * init_norm {
            return Err(Error::Divergence { step });
        }
        out.push(th.clone());
    }
    Ok(out)
}

/// Exact solution at a single time via dense eigendecomposition (capped).
/// `omega != 0` requires an invertible operator.
pub fn closed_form(
    op: &InteractionOperator,
    theta0: &[f64],
    omega: Option<&[f64]>,
    c: f64,
    t: f64,
) -> Result<Vec<f64>> {
    if theta0.len() != op.graph().node_count() {
        return Err(Error::Config("theta0 length mismatch".into()));
    }
    let eig = spectral::dense_eig(op)?;
    let grid = [t];
    let mut traj = evolve_closed(
        &eig,
        theta0,
        omega,
        c,
        &grid,
        spectral::zero_tolerance(op),
    )?;
    Ok(traj.pop().unwrap())
}

/// Forward Euler over an explicit grid (starting at 0) with explicit step.
pub fn euler(
    op: &InteractionOperator,
    theta0: &[f64],
    omega: Option<&[f64]>,
    c: f64,
    grid: &[f64],
    step: Option<f64>,
) -> Result<Vec<Vec<f64>>> {
    if theta0.len() != op.graph().node_count() {
        return Err(Error::Config("theta0 length mismatch".into()));
    }
    let h = step.unwrap_or_else(|| default_euler_step(op, c));
    evolve_euler(op, theta0, omega, c, grid, h)
}

/// Stability default `0.5 / (c lambda_upper)`; edgeless graphs are static so
/// any step works (1.0 is returned).
pub fn default_euler_step(op: &InteractionOperator, c: f64) -> f64 {
    let lu = op.lambda_upper();
    if lu > 0.0 {
        DEFAULT_EULER_X / (c * lu)
    } else {
        1.0
    }
}

/// Steady state reached from `theta0` with omega = 0, per operator kind:
/// uniform at mean(theta0) (Laplacian), proportional to degree
/// (RandomWalkNorm), to sqrt degree (SymNorm), to the dominant adjacency
/// eigenvector (Replicator/ScaledAdjacency at alpha = lambda_max; zero vector
/// above), each scaled so the conserved functional matches theta0. Applied
/// per connected component. Modularity has no steady state.
pub fn steady_state(op: &InteractionOperator, theta0: &[f64]) -> Result<Vec<f64>> {
    let n = op.graph().node_count();
    if theta0.len() != n {
        return Err(Error::Config("theta0 length mismatch".into()));
    }
    if op.kind() == OperatorKind::Modularity {
        return Err(Error::NoSteadyState {
            kind: op.kind().to_string(),
        });
    }
    let ctxs = build_contexts(op)?;
    let mut out = vec![0.0; n];
    for ctx in &ctxs {
        let th0 = gather(theta0, &ctx.nodes);
        let eq = match (&ctx.direction, &ctx.left_null) {
            (Some(dir), Some(w)) => {
                // Scale the direction so w^T theta stays conserved.
                let w_th: f64 = w.iter().zip(&th0).map(|(a, b)| a * b).sum();
                let w_dir: f64 = w.iter().zip(dir).map(|(a, b)| a * b).sum();
                let r = w_th / w_dir;
                dir.iter().map(|d| d * r).collect()
            }
            // alpha > lambda_max: every mode decays, theta -> 0.
            _ => vec![0.0; th0.len()],
        };
        scatter(&mut out, &ctx.nodes, &eq);
    }
    Ok(out)
}

/// Evolve K runs from uniform [-pi, pi) initial phases.
///
/// Determinism: per-run seeds are drawn in run order from a ChaCha stream
/// seeded by `cfg.seed`, so results are independent of scheduling.
pub fn simulate(op: &InteractionOperator, cfg: &SimulationConfig) -> Result<SimulationEnsemble> {
    cfg.validate()?;
    let g = op.graph();
    let n = g.node_count();
    if let Some(om) = &cfg.omega {
        if om.len() != n {
            return Err(Error::Config(format!(
                "omega length {} does not match node count {n}",
                om.len()
            )));
        }
    }
    let omega_zero = cfg
        .omega
        .as_ref()
        .map(|om| om.iter().all(|&x| x == 0.0))
        .unwrap_or(true);

    let mut ctxs = build_contexts(op)?;
    let use_closed = match cfg.method {
        MethodKind::ClosedForm => true,
        MethodKind::Euler => false,
        MethodKind::Auto => n <= DENSE_CAP,
    };
    if use_closed {
        for ctx in &mut ctxs {
            ctx.eig = Some(spectral::dense_eig(&ctx.op)?);
        }
    }

    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    let run_seeds: Vec<u64> = (0..cfg.runs).map(|_| master.random()).collect();

    let results: Result<Vec<(Vec<Vec<f64>>, Option<Vec<f64>>)>> = run_seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta0: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let mut traj = vec![vec![0.0; n]; cfg.time_grid.len()];
            for ctx in &ctxs {
                let th0 = gather(&theta0, &ctx.nodes);
                let om = cfg.omega.as_ref().map(|om| gather(om, &ctx.nodes));
                let local = if let Some(eig) = &ctx.eig {
                    evolve_closed(
                        eig,
                        &th0,
                        om.as_deref(),
                        cfg.c,
                        &cfg.time_grid,
                        spectral::zero_tolerance(&ctx.op),
                    )?
                } else {
                    let h = cfg
                        .euler_step
                        .unwrap_or_else(|| default_euler_step(&ctx.op, cfg.c));
                    evolve_euler(&ctx.op, &th0, om.as_deref(), cfg.c, &cfg.time_grid, h)?
                };
                for (ti, loc) in local.iter().enumerate() {
                    scatter(&mut traj[ti], &ctx.nodes, loc);
                }
            }
            let eq = if omega_zero && op.kind() != OperatorKind::Modularity {
                let mut eq = vec![0.0; n];
                for ctx in &ctxs {
                    let th0 = gather(&theta0, &ctx.nodes);
                    let local = match (&ctx.direction, &ctx.left_null) {
                        (Some(dir), Some(w)) => {
                            let w_th: f64 = w.iter().zip(&th0).map(|(a, b)| a * b).sum();
                            let w_dir: f64 = w.iter().zip(dir).map(|(a, b)| a * b).sum();
                            let r = w_th / w_dir;
                            dir.iter().map(|d| d * r).collect()
                        }
                        _ => vec![0.0; th0.len()],
                    };
                    scatter(&mut eq, &ctx.nodes, &local);
                }
                Some(eq)
            } else {
                None
            };
            Ok((traj, eq))
        })
        .collect();
    let results = results?;

    let steady_direction = if omega_zero && op.kind() != OperatorKind::Modularity {
        let mut dir = vec![0.0; n];
        for ctx in &ctxs {
            if let Some(d) = &ctx.direction {
                scatter(&mut dir, &ctx.nodes, d);
            }
        }
        Some(dir)
    } else {
        None
    };

    let mut runs = Vec::with_capacity(cfg.runs);
    let mut equilibrium = Some(Vec::with_capacity(cfg.runs));
    for (traj, eq) in results {
        runs.push(traj);
        match (eq, &mut equilibrium) {
            (Some(e), Some(list)) => list.push(e),
            _ => equilibrium = None,
        }
    }

    Ok(SimulationEnsemble {
        config: cfg.clone(),
        operator: op.descriptor(),
        kind: op.kind(),
        runs,
        equilibrium,
        steady_direction,
    })
}
