//! Synchronization similarity and community extraction.
//!
//! `sim(i,j,t)` is the ensemble mean of `cos(theta_i - (eq_i/eq_j) theta_j)`,
//! symmetrized over the two orientations so the table is symmetric (the
//! orientations coincide for uniform steady states, and both saturate to 1 at
//! equilibrium). The equilibrium ratio is run-independent: every run's steady
//! state is parallel to the same per-component direction, so the ratio is
//! computed once from it.
//!
//! Communities come out two ways: union-find over edges with
//! `sim >= 1 - mu` (threshold communities; edge-order independent), or an
//! average-link dendrogram over the full pairwise similarity matrix.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::SimulationEnsemble;
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::operators::OperatorKind;
use crate::union_find::UnionFind;

/// Pairwise similarity (and dendrograms) hold an O(n^2) matrix; capped.
pub const PAIRWISE_CAP: usize = 4096;

/// Minimum pairwise similarity marking declared synchronization (t_eq).
pub const SATURATION_TOL: f64 = 1e-9;

/// Similarity per graph edge at a fixed evaluation time.
#[derive(Debug, Clone)]
pub struct EdgeSimilarityTable {
    graph: Arc<Graph>,
    /// Aligned with `graph.edges()` order.
    sims: Vec<f64>,
    pub t: f64,
    pub runs: usize,
    /// Descriptor of the model that produced the phases.
    pub model: String,
}

impl EdgeSimilarityTable {
    /// Wrap externally computed per-edge similarities (aligned with
    /// `g.edges()`). Values must lie in [-1, 1] up to rounding.
    pub fn from_values(g: Arc<Graph>, t: f64, runs: usize, sims: Vec<f64>) -> Result<Self> {
        if sims.len() != g.edge_count() {
            return Err(Error::Config(format!(
                "{} similarities for {} edges",
                sims.len(),
                g.edge_count()
            )));
        }
        if let Some(s) = sims.iter().find(|s| !(s.abs() <= 1.0 + 1e-12)) {
            return Err(Error::Config(format!("similarity {s} outside [-1, 1]")));
        }
        Ok(EdgeSimilarityTable {
            graph: g,
            sims,
            t,
            runs,
            model: "external".into(),
        })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn values(&self) -> &[f64] {
        &self.sims
    }

    /// Iterate `((u, v), sim)` in stored edge order.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        self.graph.edges().iter().copied().zip(self.sims.iter().copied())
    }

    pub fn min(&self) -> f64 {
        self.sims.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Equilibrium ratios require a strictly positive steady direction.
fn steady_direction_of(ens: &SimulationEnsemble, g: &Graph) -> Result<Vec<f64>> {
    let dir = match &ens.steady_direction {
        Some(d) => d,
        None => {
            return Err(match ens.kind {
                OperatorKind::Modularity => Error::NoSteadyState {
                    kind: ens.kind.to_string(),
                },
                _ => Error::Config(
                    "similarity requires omega = 0 dynamics (no steady state otherwise)".into(),
                ),
            })
        }
    };
    if let Some(i) = dir.iter().position(|&x| x == 0.0) {
        return Err(Error::DegenerateEquilibrium {
            node: g.labels().name(i as u32).to_string(),
        });
    }
    Ok(dir.clone())
}

/// Symmetrized per-run similarity of the pair (i, j) at grid index `ti`.
fn pair_sim(ens: &SimulationEnsemble, ti: usize, i: usize, j: usize, dir: &[f64]) -> f64 {
    let r_ij = dir[i] / dir[j];
    let r_ji = dir[j] / dir[i];
    let k = ens.run_count();
    let mut acc = 0.0;
    for y in 0..k {
        let th = ens.theta(y, ti);
        if r_ij == 1.0 && r_ji == 1.0 {
            acc += (th[i] - th[j]).cos();
        } else {
            acc += 0.5 * ((th[i] - r_ij * th[j]).cos() + (th[j] - r_ji * th[i]).cos());
        }
    }
    acc / k as f64
}

/// Per-edge similarity at grid time `t`.
pub fn edge_similarity(
    ens: &SimulationEnsemble,
    t: f64,
    g: &Arc<Graph>,
) -> Result<EdgeSimilarityTable> {
    if g.node_count() != ens.node_count() {
        return Err(Error::NodeSetMismatch {
            left: g.node_count(),
            right: ens.node_count(),
        });
    }
    let ti = ens.time_index(t)?;
    let dir = steady_direction_of(ens, g)?;
    let sims: Vec<f64> = g
        .edges()
        .par_iter()
        .map(|&(u, v)| pair_sim(ens, ti, u as usize, v as usize, &dir).clamp(-1.0, 1.0))
        .collect();
    Ok(EdgeSimilarityTable {
        graph: g.clone(),
        sims,
        t,
        runs: ens.run_count(),
        model: ens.operator.clone(),
    })
}

/// Full pairwise similarity matrix at grid time `t` (diagonal = 1).
/// O(K n^2); capped at [`PAIRWISE_CAP`] nodes.
pub fn pair_similarity(ens: &SimulationEnsemble, t: f64, g: &Graph) -> Result<Vec<Vec<f64>>> {
    let n = ens.node_count();
    if g.node_count() != n {
        return Err(Error::NodeSetMismatch {
            left: g.node_count(),
            right: n,
        });
    }
    if n > PAIRWISE_CAP {
        return Err(Error::DenseCap {
            nodes: n,
            cap: PAIRWISE_CAP,
        });
    }
    let ti = ens.time_index(t)?;
    let dir = steady_direction_of(ens, g)?;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            for j in 0..i {
                row[j] = pair_sim(ens, ti, i, j, &dir).clamp(-1.0, 1.0);
            }
            row
        })
        .collect();
    // Mirror the strict lower triangle.
    let mut m = rows;
    for i in 0..n {
        for j in i + 1..n {
            m[i][j] = m[j][i];
        }
    }
    Ok(m)
}

/// First grid time at which the minimum pairwise similarity reaches
/// `1 - SATURATION_TOL`; `None` if the grid never saturates.
pub fn equilibration_time(ens: &SimulationEnsemble, g: &Graph) -> Result<Option<f64>> {
    let grid = ens.time_grid().to_vec();
    for &t in &grid {
        let m = pair_similarity(ens, t, g)?;
        let n = m.len();
        let mut min = f64::INFINITY;
        for (i, row) in m.iter().enumerate() {
            for &s in row.iter().take(i) {
                min = min.min(s);
            }
        }
        if n < 2 || min >= 1.0 - SATURATION_TOL {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Algorithm-2 communities: connected components of the subgraph of edges
/// with `sim >= 1 - mu`. Edge order cannot affect the result (union-find
/// components are order-independent).
pub fn threshold_communities(
    g: &Graph,
    sims: &EdgeSimilarityTable,
    mu: f64,
) -> Result<Partition> {
    if !(mu > 0.0 && mu <= 2.0) {
        return Err(Error::Config(format!(
            "threshold mu must lie in (0, 2], got {mu}"
        )));
    }
    if g.node_count() != sims.graph.node_count() || g.edge_count() != sims.graph.edge_count() {
        return Err(Error::NodeSetMismatch {
            left: g.node_count(),
            right: sims.graph.node_count(),
        });
    }
    let mut uf = UnionFind::new(g.node_count());
    for ((u, v), s) in sims.iter() {
        if s >= 1.0 - mu {
            uf.union(u, v);
        }
    }
    Ok(Partition::from_assignment(uf.labels()))
}

/// One agglomerative merge: `left` and `right` are cluster indices (leaves
/// are `0..n`, the merge itself creates cluster `n + position`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub similarity: f64,
}

/// Average-link merge tree. Merge similarities are non-increasing.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Partition into `k` clusters by undoing the last `k - 1` merges.
    pub fn cut(&self, k: usize) -> Result<Partition> {
        let n = self.n_leaves;
        if k == 0 || k > n {
            return Err(Error::Config(format!(
                "cut size {k} outside 1..={n}"
            )));
        }
        let mut uf = UnionFind::new(n);
        for m in &self.merges[..n - k] {
            uf.union(self.any_leaf(m.left) as u32, self.any_leaf(m.right) as u32);
        }
        Ok(Partition::from_assignment(uf.labels()))
    }

    /// A representative leaf inside cluster `c` (leaves map to themselves).
    fn any_leaf(&self, mut c: usize) -> usize {
        while c >= self.n_leaves {
            c = self.merges[c - self.n_leaves].left;
        }
        c
    }

    /// Newick serialization; internal nodes are annotated with their merge
    /// similarity. Labels with Newick metacharacters get single-quoted.
    pub fn to_newick(&self, labels: &crate::graph::NodeLabeling) -> String {
        let quote = |s: &str| -> String {
            if s.contains(|c: char| "(),:;'= \t".contains(c)) {
                format!("'{}'", s.replace('\'', "''"))
            } else {
                s.to_string()
            }
        };
        let mut rendered: Vec<String> = (0..self.n_leaves)
            .map(|i| quote(labels.name(i as u32)))
            .collect();
        for m in &self.merges {
            let s = format!("({},{}){}", rendered[m.left], rendered[m.right], m.similarity);
            rendered.push(s);
        }
        format!("{};", rendered.last().expect("at least one cluster"))
    }
}

/// Average-link (UPGMA) hierarchical clustering on the full pairwise
/// similarity matrix at grid time `t`. Ties are broken toward the pair of
/// clusters with the smallest contained node ids, making the tree unique.
pub fn hierarchical_cluster(
    ens: &SimulationEnsemble,
    t: f64,
    g: &Graph,
) -> Result<Dendrogram> {
    let sim = pair_similarity(ens, t, g)?;
    Ok(dendrogram_from_matrix(sim))
}

/// UPGMA on an explicit symmetric similarity matrix.
pub fn dendrogram_from_matrix(mut sim: Vec<Vec<f64>>) -> Dendrogram {
    let n = sim.len();
    if n == 0 {
        return Dendrogram { n_leaves: 0, merges: Vec::new() };
    }
    // Per-cluster state; merged clusters reuse the row of their left member.
    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<usize> = vec![1; n];
    let mut min_node: Vec<usize> = (0..n).collect();
    // cluster_of[row] = current cluster index occupying that matrix row.
    let mut cluster_of: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        // Global best pair among active rows; ties toward smallest
        // (min-node, min-node) with the smaller one first.
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if !active[j] {
                    continue;
                }
                let s = sim[i][j];
                let (a, b) = if min_node[i] <= min_node[j] {
                    (min_node[i], min_node[j])
                } else {
                    (min_node[j], min_node[i])
                };
                let better = match best {
                    None => true,
                    Some((bs, ba, bb, _, _)) => s > bs || (s == bs && (a, b) < (ba, bb)),
                };
                if better {
                    best = Some((s, a, b, i, j));
                }
            }
        }
        let (s, _, _, ri, rj) = best.expect("at least two active clusters");
        // Record the merge with left = cluster containing the smaller id.
        let (ci, cj) = (cluster_of[ri], cluster_of[rj]);
        let (left, right) = if min_node[ri] <= min_node[rj] {
            (ci, cj)
        } else {
            (cj, ci)
        };
        merges.push(Merge { left, right, similarity: s });
        // Lance-Williams average-link update into row ri.
        let (wi, wj) = (size[ri] as f64, size[rj] as f64);
        for k in 0..n {
            if active[k] && k != ri && k != rj {
                let v = (wi * sim[ri][k] + wj * sim[rj][k]) / (wi + wj);
                sim[ri][k] = v;
                sim[k][ri] = v;
            }
        }
        active[rj] = false;
        size[ri] += size[rj];
        min_node[ri] = min_node[ri].min(min_node[rj]);
        cluster_of[ri] = n + step;
    }
    Dendrogram { n_leaves: n, merges }
}

/// Result of a conductance sweep over a phase ordering.
#[derive(Debug, Clone)]
pub struct SweepCut {
    /// Nodes of the best prefix (dense ids, in scan order).
    pub nodes: Vec<u32>,
    /// E(S, S-bar) / vol(S) when degree-normalized, else
    /// E(S, S-bar) / min(|S|, |S-bar|).
    pub score: f64,
    /// The full scan ordering (dense ids).
    pub ordering: Vec<u32>,
}

/// Scan prefixes of the nodes ordered by descending `theta_t` (or
/// `theta_t / degree` when `by_degree`) and return the best cut. Ordering
/// ties fall back to node index, so the sweep is deterministic.
pub fn sweep_cut(g: &Graph, theta_t: &[f64], by_degree: bool) -> Result<SweepCut> {
    let n = g.node_count();
    if theta_t.len() != n {
        return Err(Error::Config("theta length mismatch".into()));
    }
    if n < 2 {
        return Err(Error::DegenerateOrdering);
    }
    let comps = g.connected_components();
    if comps.community_count() > 1 {
        return Err(Error::Disconnected {
            components: comps.community_count(),
        });
    }
    let key = |i: usize| -> f64 {
        if by_degree {
            theta_t[i] / g.degree(i as u32) as f64
        } else {
            theta_t[i]
        }
    };
    if (1..n).all(|i| key(i) == key(0)) {
        return Err(Error::DegenerateOrdering);
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        key(b as usize)
            .partial_cmp(&key(a as usize))
            .expect("phases are finite")
            .then(a.cmp(&b))
    });
    // Incremental scan: adding u changes the cut by deg(u) - 2 |N(u) in S|.
    let mut in_s = vec![false; n];
    let mut cut = 0i64;
    let mut vol = 0u64;
    let mut best: Option<(f64, usize)> = None;
    for (idx, &u) in order.iter().enumerate().take(n - 1) {
        let d = g.degree(u) as i64;
        let inside = g
            .neighbors(u)
            .iter()
            .filter(|&&v| in_s[v as usize])
            .count() as i64;
        cut += d - 2 * inside;
        vol += d as u64;
        in_s[u as usize] = true;
        let prefix_len = idx + 1;
        let denom = if by_degree {
            vol as f64
        } else {
            prefix_len.min(n - prefix_len) as f64
        };
        let score = cut as f64 / denom;
        if best.map_or(true, |(bs, _)| score < bs) {
            best = Some((score, prefix_len));
        }
    }
    let (score, len) = best.expect("n >= 2 scans at least one prefix");
    Ok(SweepCut {
        nodes: order[..len].to_vec(),
        score,
        ordering: order,
    })
}
