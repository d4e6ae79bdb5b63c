//! Onion decomposition: peel a graph across a descending threshold schedule.
//!
//! Each layer applies the similarity threshold to the previous layer's core.
//! The largest resulting community becomes the next core; other communities
//! of size >= [`WHISKER_MIN_SIZE`] are whiskers; nodes stranded in size-1/2
//! communities are counted as fragments. Peeling stops early when no
//! community reaches whisker size (the core has dissolved).

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::similarity::EdgeSimilarityTable;
use crate::union_find::UnionFind;

/// Communities below this size are fragments, not whiskers.
pub const WHISKER_MIN_SIZE: usize = 3;

/// Core-fraction targets used by [`suggest_mu_schedule`] by default.
pub const DEFAULT_CORE_FRACTIONS: [f64; 6] = [0.9, 0.75, 0.6, 0.45, 0.3, 0.15];

#[derive(Debug, Clone)]
pub struct OnionLayer {
    pub mu: f64,
    /// Core node ids (dense), sorted ascending.
    pub core: Vec<u32>,
    /// Non-core communities of size >= 3, largest first (then smallest id).
    pub whiskers: Vec<Vec<u32>>,
    /// Number of nodes stranded in size-1 or size-2 communities.
    pub fragments: usize,
}

#[derive(Debug, Clone)]
pub struct OnionDecomposition {
    pub layers: Vec<OnionLayer>,
    /// Evaluation time of the similarity table.
    pub t: f64,
    /// Descriptor of the model that produced the similarities.
    pub model: String,
    /// Threshold at which the core dissolved (largest community < 3),
    /// if peeling stopped before exhausting the schedule.
    pub terminated_at: Option<f64>,
}

impl OnionDecomposition {
    pub fn core_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.core.len()).collect()
    }
}

/// Communities of the threshold subgraph restricted to `in_core` nodes,
/// sorted largest first with ties toward the smallest contained id.
fn core_communities(
    g: &Graph,
    sims: &EdgeSimilarityTable,
    mu: f64,
    in_core: &[bool],
) -> Vec<Vec<u32>> {
    let mut uf = UnionFind::new(g.node_count());
    for ((u, v), s) in sims.iter() {
        if in_core[u as usize] && in_core[v as usize] && s >= 1.0 - mu {
            uf.union(u, v);
        }
    }
    let mut by_root: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    for v in 0..g.node_count() as u32 {
        if in_core[v as usize] {
            by_root.entry(uf.find(v)).or_default().push(v);
        }
    }
    let mut communities: Vec<Vec<u32>> = by_root.into_values().collect();
    for c in &mut communities {
        c.sort_unstable();
    }
    communities.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    communities
}

/// Peel cores along a strictly descending threshold schedule.
pub fn onion_decompose(
    g: &Graph,
    sims: &EdgeSimilarityTable,
    mu_schedule: &[f64],
) -> Result<OnionDecomposition> {
    if g.node_count() != sims.graph().node_count()
        || g.edge_count() != sims.graph().edge_count()
    {
        return Err(Error::NodeSetMismatch {
            left: g.node_count(),
            right: sims.graph().node_count(),
        });
    }
    if mu_schedule.is_empty() {
        return Err(Error::Config("mu schedule is empty".into()));
    }
    if mu_schedule.iter().any(|&m| !(m > 0.0 && m <= 2.0)) {
        return Err(Error::Config(
            "mu schedule entries must lie in (0, 2]".into(),
        ));
    }
    if mu_schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config("mu schedule must be strictly descending".into()));
    }
    let mut in_core = vec![true; g.node_count()];
    let mut layers = Vec::new();
    let mut terminated_at = None;
    for &mu in mu_schedule {
        let communities = core_communities(g, sims, mu, &in_core);
        let largest = communities.first().map_or(0, |c| c.len());
        if largest < WHISKER_MIN_SIZE {
            terminated_at = Some(mu);
            break;
        }
        let mut iter = communities.into_iter();
        let core = iter.next().expect("largest community exists");
        let mut whiskers = Vec::new();
        let mut fragments = 0;
        for c in iter {
            if c.len() >= WHISKER_MIN_SIZE {
                whiskers.push(c);
            } else {
                fragments += c.len();
            }
        }
        in_core.fill(false);
        for &v in &core {
            in_core[v as usize] = true;
        }
        layers.push(OnionLayer {
            mu,
            core,
            whiskers,
            fragments,
        });
    }
    Ok(OnionDecomposition {
        layers,
        t: sims.t,
        model: sims.model.clone(),
        terminated_at,
    })
}

/// Log-binned whisker sizes for one layer: bin k covers
/// `[3 * 2^k, 3 * 2^(k+1))`. Interior empty bins are kept so the histogram
/// is contiguous; no whiskers means no bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiskerHistogram {
    /// Lower edges 3, 6, 12, ... up to the largest whisker.
    pub lower_edges: Vec<usize>,
    pub counts: Vec<usize>,
    /// Raw whisker sizes, as stored in the layer (largest first).
    pub sizes: Vec<usize>,
}

pub fn whisker_size_distribution(
    dec: &OnionDecomposition,
    layer: usize,
) -> Result<WhiskerHistogram> {
    let layer = dec
        .layers
        .get(layer)
        .ok_or_else(|| Error::Config(format!("layer {layer} out of range")))?;
    let sizes: Vec<usize> = layer.whiskers.iter().map(|w| w.len()).collect();
    let mut lower_edges = Vec::new();
    let mut counts = Vec::new();
    if let Some(&max) = sizes.iter().max() {
        let mut lo = WHISKER_MIN_SIZE;
        while lo <= max {
            lower_edges.push(lo);
            counts.push(sizes.iter().filter(|&&s| s >= lo && s < 2 * lo).count());
            lo *= 2;
        }
    }
    Ok(WhiskerHistogram {
        lower_edges,
        counts,
        sizes,
    })
}

/// One cross-decomposition comparison: layer `a` of the first decomposition
/// against its closest-sized layer `b` of the second.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreOverlap {
    pub layer_a: usize,
    pub layer_b: usize,
    pub size_a: usize,
    pub size_b: usize,
    /// |core_a intersect core_b| / min(|core_a|, |core_b|).
    pub overlap: f64,
}

/// Pair each layer of `a` with the layer of `b` whose core size is closest
/// (ties toward the earlier layer) and measure node overlap.
pub fn core_overlap(a: &OnionDecomposition, b: &OnionDecomposition) -> Vec<CoreOverlap> {
    let mut out = Vec::new();
    if b.layers.is_empty() {
        return out;
    }
    for (ia, la) in a.layers.iter().enumerate() {
        let ib = (0..b.layers.len())
            .min_by_key(|&i| {
                (b.layers[i].core.len() as i64 - la.core.len() as i64).abs()
            })
            .expect("b has layers");
        let lb = &b.layers[ib];
        let set: std::collections::HashSet<u32> = la.core.iter().copied().collect();
        let inter = lb.core.iter().filter(|v| set.contains(v)).count();
        out.push(CoreOverlap {
            layer_a: ia,
            layer_b: ib,
            size_a: la.core.len(),
            size_b: lb.core.len(),
            overlap: inter as f64 / la.core.len().min(lb.core.len()) as f64,
        });
    }
    out
}

/// Size of the largest threshold community at `mu` over the whole graph.
fn largest_fraction(g: &Graph, sims: &EdgeSimilarityTable, mu: f64) -> f64 {
    let all = vec![true; g.node_count()];
    let communities = core_communities(g, sims, mu, &all);
    communities.first().map_or(0, |c| c.len()) as f64 / g.node_count() as f64
}

/// Suggest a descending schedule by bisecting mu so the largest community
/// crosses each target core fraction. Unreachable targets are skipped;
/// near-duplicate thresholds are collapsed.
pub fn suggest_mu_schedule(
    g: &Graph,
    sims: &EdgeSimilarityTable,
    fractions: &[f64],
) -> Result<Vec<f64>> {
    if fractions.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config(
            "core fractions must be strictly descending".into(),
        ));
    }
    if fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::Config("core fractions must lie in (0, 1]".into()));
    }
    let mut schedule: Vec<f64> = Vec::new();
    for &target in fractions {
        if largest_fraction(g, sims, 2.0) < target {
            continue; // Even the full graph's components never reach it.
        }
        // Largest-community fraction is non-decreasing in mu: bisect for the
        // smallest mu whose fraction reaches the target.
        let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if largest_fraction(g, sims, mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if schedule.last().map_or(true, |&prev| hi < prev - 1e-9) {
            schedule.push(hi);
        }
    }
    Ok(schedule)
}
