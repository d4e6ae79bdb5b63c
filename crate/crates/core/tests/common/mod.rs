//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here is deliberately naive: dense matrices built straight from
//! the defining formulas, a cyclic Jacobi eigensolver, Taylor-series matrix
//! exponentials, and O(n^2)-or-worse metric evaluations. The library must
//! agree with these, not the other way around.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use synclust::evaluation::{ActivityLog, AttributeTable};
use synclust::graph::{Graph, Partition};
use synclust::OperatorKind;

pub const ALL_KINDS: [OperatorKind; 6] = [
    OperatorKind::Laplacian,
    OperatorKind::RandomWalkNorm,
    OperatorKind::SymNorm,
    OperatorKind::Replicator,
    OperatorKind::ScaledAdjacency,
    OperatorKind::Modularity,
];

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

pub fn graph_from(n: usize, edges: &[(u32, u32)]) -> Arc<Graph> {
    Arc::new(Graph::from_index_edges(n, edges).expect("fixture graph"))
}

/// Two triangles joined by a single bridge (2-3); 6 nodes, 7 edges.
pub fn two_triangles() -> Arc<Graph> {
    graph_from(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
}

/// Two complete graphs K_m joined by a single bridge edge.
pub fn barbell(m: usize) -> Arc<Graph> {
    let mut edges = Vec::new();
    for block in 0..2u32 {
        let base = block * m as u32;
        for i in 0..m as u32 {
            for j in (i + 1)..m as u32 {
                edges.push((base + i, base + j));
            }
        }
    }
    edges.push((m as u32 - 1, m as u32));
    graph_from(2 * m, &edges)
}

pub fn path_graph(n: usize) -> Arc<Graph> {
    let edges: Vec<(u32, u32)> = (0..n as u32 - 1).map(|i| (i, i + 1)).collect();
    graph_from(n, &edges)
}

pub fn complete_graph(n: usize) -> Arc<Graph> {
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            edges.push((i, j));
        }
    }
    graph_from(n, &edges)
}

pub fn karate_path() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data/karate.edges"))
}

pub fn karate_truth_path() -> PathBuf {
    PathBuf::from(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/data/karate_factions.csv"
    ))
}

pub fn karate() -> Arc<Graph> {
    let (g, _) = Graph::load_edge_list(&karate_path()).expect("bundled karate fixture");
    Arc::new(g)
}

/// Erdos-Renyi G(n, p); guaranteed at least one edge.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Arc<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1.min(n as u32 - 1)));
    }
    graph_from(n, &edges)
}

/// Random spanning tree plus `extra` random chords: connected by construction.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Arc<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..n as u32 {
        edges.push((rng.random_range(0..i), i));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n as u32);
        let v = rng.random_range(0..n as u32);
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    graph_from(n, &edges)
}

// ---------------------------------------------------------------------------
// Dense linear algebra
// ---------------------------------------------------------------------------

pub fn identity(n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn matvec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in g.edges() {
        a[u as usize][v as usize] = 1.0;
        a[v as usize][u as usize] = 1.0;
    }
    a
}

/// Build the dense operator matrix straight from its defining formula.
/// `alpha` defaults to the adjacency's largest eigenvalue (via Jacobi).
pub fn dense_operator(g: &Graph, kind: OperatorKind, alpha: Option<f64>) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let a = dense_adjacency(g);
    let d: Vec<f64> = (0..n as u32).map(|i| g.degree(i) as f64).collect();
    let alpha = alpha.unwrap_or_else(|| {
        *jacobi(&a)
            .0
            .last()
            .expect("adjacency has at least one eigenvalue")
    });
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            m[i][j] = match kind {
                OperatorKind::Laplacian => delta * d[i] - a[i][j],
                OperatorKind::RandomWalkNorm => delta - a[i][j] / d[j],
                OperatorKind::SymNorm => delta - a[i][j] / (d[i] * d[j]).sqrt(),
                OperatorKind::Replicator => alpha * delta - a[i][j],
                OperatorKind::ScaledAdjacency => delta - a[i][j] / alpha,
                OperatorKind::Modularity => {
                    let two_m = 2.0 * g.edge_count() as f64;
                    d[i] * d[j] / two_m - a[i][j]
                }
            };
        }
    }
    m
}

/// Cyclic Jacobi eigensolver for symmetric matrices. Returns eigenvalues
/// ascending and matching unit eigenvectors (one per row of the result).
pub fn jacobi(mat: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = mat.len();
    let mut a = mat.to_vec();
    let mut v = identity(n);
    let frob: f64 = mat
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + frob) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| (a[j][j], (0..n).map(|i| v[i][j]).collect()))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values = pairs.iter().map(|p| p.0).collect();
    let vectors = pairs.into_iter().map(|p| p.1).collect();
    (values, vectors)
}

/// Dense matrix exponential by scaling-and-squaring with a Taylor core.
pub fn expm(mat: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = mat.len();
    let norm: f64 = mat
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let k = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 1.0 / f64::powi(2.0, k as i32);
    let scaled: Vec<Vec<f64>> = mat
        .iter()
        .map(|r| r.iter().map(|x| x * scale).collect())
        .collect();
    // Taylor: sum_{j<=24} M^j / j!  (|M| <= 0.5 so the tail is ~1e-26).
    let mut result = identity(n);
    let mut term = identity(n);
    for j in 1..=24 {
        term = matmul(&term, &scaled);
        let inv = 1.0 / (1..=j).map(|x| x as f64).product::<f64>();
        for i in 0..n {
            for l in 0..n {
                result[i][l] += term[i][l] * inv;
            }
        }
    }
    for _ in 0..k {
        result = matmul(&result, &result);
    }
    result
}

/// `e^{scale * M} v`.
pub fn expm_apply(mat: &[Vec<f64>], scale: f64, v: &[f64]) -> Vec<f64> {
    let scaled: Vec<Vec<f64>> = mat
        .iter()
        .map(|r| r.iter().map(|x| x * scale).collect())
        .collect();
    matvec(&expm(&scaled), v)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Angle between two vectors, insensitive to sign and scale.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot.abs() / (na * nb)).min(1.0).acos()
}

// ---------------------------------------------------------------------------
// Graph oracles
// ---------------------------------------------------------------------------

/// Connected-component assignment by plain BFS over an adjacency list.
pub fn bfs_assignment(g: &Graph) -> Vec<u32> {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in g.edges() {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    let mut label = vec![u32::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if label[start] != u32::MAX {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        label[start] = next;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if label[w] == u32::MAX {
                    label[w] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    label
}

pub fn bfs_component_count(g: &Graph) -> usize {
    bfs_assignment(g).iter().copied().max().map_or(0, |m| m as usize + 1)
}

// ---------------------------------------------------------------------------
// Metric oracles
// ---------------------------------------------------------------------------

/// Textbook NMI straight from the contingency table, natural log, no
/// summation-order tricks.
pub fn nmi_brute(x: &Partition, y: &Partition) -> f64 {
    let n = x.assignment().len() as f64;
    let mut joint: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let mut mx: BTreeMap<u32, f64> = BTreeMap::new();
    let mut my: BTreeMap<u32, f64> = BTreeMap::new();
    for (&a, &b) in x.assignment().iter().zip(y.assignment()) {
        *joint.entry((a, b)).or_default() += 1.0;
        *mx.entry(a).or_default() += 1.0;
        *my.entry(b).or_default() += 1.0;
    }
    let hx: f64 = mx.values().map(|&c| -(c / n) * (c / n).ln()).sum();
    let hy: f64 = my.values().map(|&c| -(c / n) * (c / n).ln()).sum();
    if hx == 0.0 && hy == 0.0 {
        return 1.0;
    }
    if hx == 0.0 || hy == 0.0 {
        return 0.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(a, b), &c)| (c / n) * ((c * n) / (mx[&a] * my[&b])).ln())
        .sum();
    (2.0 * mi / (hx + hy)).clamp(0.0, 1.0)
}

/// Mean pairwise co-votes per community by explicit pair enumeration.
/// Returns (per-community (id, size, mean), unweighted mean, weighted mean,
/// users missing from the log).
pub fn covote_brute(
    g: &Graph,
    p: &Partition,
    log: &ActivityLog,
    min_size: usize,
) -> (Vec<(u32, usize, f64)>, f64, f64, usize) {
    let empty = BTreeSet::new();
    let mut per = Vec::new();
    let mut missing = 0usize;
    for (cid, members) in p.groups().into_iter().enumerate() {
        if members.len() < min_size {
            continue;
        }
        for &m in &members {
            if log.items_of(g.labels().name(m)).is_none() {
                missing += 1;
            }
        }
        let mut total = 0.0;
        let mut pairs = 0.0;
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                let a = log.items_of(g.labels().name(members[i])).unwrap_or(&empty);
                let b = log.items_of(g.labels().name(members[j])).unwrap_or(&empty);
                total += a.intersection(b).count() as f64;
                pairs += 1.0;
            }
        }
        per.push((cid as u32, members.len(), total / pairs));
    }
    let unweighted = per.iter().map(|x| x.2).sum::<f64>() / per.len().max(1) as f64;
    let wsum: f64 = per.iter().map(|x| x.1 as f64).sum();
    let weighted = per.iter().map(|x| x.1 as f64 * x.2).sum::<f64>() / wsum.max(1.0);
    (per, unweighted, weighted, missing)
}

/// Largest same-value fraction per community by explicit counting.
/// Returns (per-community (id, size, purity), unweighted, weighted,
/// all-missing communities excluded).
pub fn purity_brute(
    g: &Graph,
    p: &Partition,
    attrs: &AttributeTable,
    feature_index: usize,
    min_size: usize,
) -> (Vec<(u32, usize, f64)>, f64, f64, usize) {
    let mut per = Vec::new();
    let mut excluded = 0usize;
    for (cid, members) in p.groups().into_iter().enumerate() {
        if members.len() < min_size {
            continue;
        }
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut present = 0usize;
        for &m in &members {
            if let Some(v) = attrs.value_of(g.labels().name(m), feature_index) {
                *counts.entry(v.to_string()).or_default() += 1;
                present += 1;
            }
        }
        if present == 0 {
            excluded += 1;
            continue;
        }
        let best = counts.values().copied().max().unwrap_or(0);
        per.push((cid as u32, members.len(), best as f64 / present as f64));
    }
    let unweighted = per.iter().map(|x| x.2).sum::<f64>() / per.len().max(1) as f64;
    let wsum: f64 = per.iter().map(|x| x.1 as f64).sum();
    let weighted = per.iter().map(|x| x.1 as f64 * x.2).sum::<f64>() / wsum.max(1.0);
    (per, unweighted, weighted, excluded)
}

// ---------------------------------------------------------------------------
// Sweep-cut oracle
// ---------------------------------------------------------------------------

/// Brute-force best prefix cut: re-sorts independently, scores every prefix
/// from scratch. Returns (best prefix as a sorted node set, best score).
pub fn sweep_brute(g: &Graph, theta: &[f64], by_degree: bool) -> (Vec<u32>, f64) {
    let n = g.node_count();
    let mut order: Vec<u32> = (0..n as u32).collect();
    let key = |i: u32| {
        if by_degree {
            theta[i as usize] / g.degree(i) as f64
        } else {
            theta[i as usize]
        }
    };
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    let total_vol: f64 = (0..n as u32).map(|i| g.degree(i) as f64).sum();
    let mut best: Option<(Vec<u32>, f64)> = None;
    for k in 1..n {
        let set: BTreeSet<u32> = order[..k].iter().copied().collect();
        let mut cut = 0.0;
        for &(u, v) in g.edges() {
            if set.contains(&u) != set.contains(&v) {
                cut += 1.0;
            }
        }
        let score = if by_degree {
            let vol: f64 = set.iter().map(|&i| g.degree(i) as f64).sum();
            let _ = total_vol;
            cut / vol
        } else {
            cut / (k.min(n - k) as f64)
        };
        if best.as_ref().is_none_or(|(_, s)| score < *s) {
            best = Some((set.into_iter().collect(), score));
        }
    }
    best.expect("n >= 2")
}

// ---------------------------------------------------------------------------
// Misc
// ---------------------------------------------------------------------------

/// Partition equality as unordered family of node sets (label-independent).
pub fn same_partition(a: &Partition, b: &Partition) -> bool {
    let family = |p: &Partition| -> BTreeSet<Vec<u32>> {
        p.groups().into_iter().map(|mut g| {
            g.sort_unstable();
            g
        }).collect()
    };
    family(a) == family(b)
}

/// Deterministic uniform initial phases for oracle-side simulations.
pub fn random_phases(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}
