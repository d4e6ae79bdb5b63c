//! Community quality metrics: NMI against ground truth, co-vote activity
//! quality, attribute purity, and the per-model NMI(tau) time course.
//!
//! NMI uses `2 I(X,Y) / (H(X) + H(Y))` with plug-in probabilities
//! `P(x,y) = N_xy / n`. Degenerate conventions: both partitions trivial -> 1,
//! exactly one trivial -> 0.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::{self, SimulationConfig};
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};
use crate::operators::{InteractionOperator, OperatorKind};
use crate::similarity::{self, SATURATION_TOL};

/// Community label per external node id.
#[derive(Debug, Clone, Default)]
pub struct GroundTruth {
    labels: BTreeMap<String, String>,
}

impl GroundTruth {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        GroundTruth {
            labels: pairs.into_iter().collect(),
        }
    }

    /// Load a headerless CSV of (node id, label) rows.
    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        let mut labels = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
            // Real file line (comment lines shift the record index).
            let line = rec.position().map_or(i + 1, |p| p.line() as usize);
            if rec.len() != 2 {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line,
                    msg: format!("expected 2 fields, got {}", rec.len()),
                });
            }
            if labels.insert(rec[0].to_string(), rec[1].to_string()).is_some() {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line,
                    msg: format!("duplicate node id {:?}", &rec[0]),
                });
            }
        }
        Ok(GroundTruth { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label_of(&self, node: &str) -> Option<&str> {
        self.labels.get(node).map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.labels.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Dense-id partition over `g`; every graph node must be labeled and
    /// every labeled node must exist. Also returns the label of each
    /// community id, in id order.
    pub fn partition_for(&self, g: &Graph) -> Result<(Partition, Vec<String>)> {
        for name in self.labels.keys() {
            if g.labels().index_of(name).is_none() {
                return Err(Error::UnknownNode(name.clone()));
            }
        }
        if self.labels.len() != g.node_count() {
            return Err(Error::NodeSetMismatch {
                left: g.node_count(),
                right: self.labels.len(),
            });
        }
        let mut label_ids: BTreeMap<&str, u32> = BTreeMap::new();
        let mut names = Vec::new();
        let mut assignment = vec![0u32; g.node_count()];
        for v in 0..g.node_count() as u32 {
            let label = &self.labels[g.labels().name(v)];
            let next = label_ids.len() as u32;
            let id = *label_ids.entry(label).or_insert_with(|| {
                names.push(label.clone());
                next
            });
            assignment[v as usize] = id;
        }
        Ok((Partition::from_assignment(assignment), names))
    }
}

/// Unique (user, item) pairs.
#[derive(Debug, Clone, Default)]
pub struct ActivityLog {
    items_by_user: BTreeMap<String, BTreeSet<String>>,
}

impl ActivityLog {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut items_by_user: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (u, it) in pairs {
            items_by_user.entry(u).or_default().insert(it);
        }
        ActivityLog { items_by_user }
    }

    /// Load a headerless CSV of (user id, item id) rows; duplicates collapse.
    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        let mut pairs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: rec.position().map_or(i + 1, |p| p.line() as usize),
                    msg: format!("expected 2 fields, got {}", rec.len()),
                });
            }
            pairs.push((rec[0].to_string(), rec[1].to_string()));
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn items_of(&self, user: &str) -> Option<&BTreeSet<String>> {
        self.items_by_user.get(user)
    }

    pub fn user_count(&self) -> usize {
        self.items_by_user.len()
    }
}

/// Per-node categorical features; `None` marks a missing value.
#[derive(Debug, Clone, Default)]
pub struct AttributeTable {
    features: Vec<String>,
    rows: BTreeMap<String, Vec<Option<String>>>,
}

impl AttributeTable {
    /// Load a CSV whose header is `node,<feature>...`; empty cells are
    /// missing values.
    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: 1,
                msg: e.to_string(),
            })?
            .clone();
        if headers.len() < 2 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 1,
                msg: "need a node column and at least one feature".into(),
            });
        }
        let features: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut rows = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: i + 2,
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(i + 2, |p| p.line() as usize);
            if rec.len() != headers.len() {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line,
                    msg: format!("expected {} fields, got {}", headers.len(), rec.len()),
                });
            }
            let values: Vec<Option<String>> = rec
                .iter()
                .skip(1)
                .map(|v| if v.is_empty() { None } else { Some(v.to_string()) })
                .collect();
            if rows.insert(rec[0].to_string(), values).is_some() {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line,
                    msg: format!("duplicate node id {:?}", &rec[0]),
                });
            }
        }
        Ok(AttributeTable { features, rows })
    }

    pub fn from_rows(
        features: Vec<String>,
        rows: impl IntoIterator<Item = (String, Vec<Option<String>>)>,
    ) -> Self {
        AttributeTable {
            features,
            rows: rows.into_iter().collect(),
        }
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn value_of(&self, node: &str, feature_index: usize) -> Option<&str> {
        self.rows
            .get(node)
            .and_then(|vals| vals.get(feature_index))
            .and_then(|v| v.as_deref())
    }
}

/// Normalized mutual information between two partitions of the same nodes.
pub fn nmi(x: &Partition, y: &Partition) -> Result<f64> {
    let n = x.assignment().len();
    if n != y.assignment().len() {
        return Err(Error::NodeSetMismatch {
            left: n,
            right: y.assignment().len(),
        });
    }
    if n == 0 {
        return Err(Error::Config("NMI of empty partitions".into()));
    }
    let nf = n as f64;
    // Identical up to relabeling (a label bijection) is exactly 1.
    let mut xy: HashMap<u32, u32> = HashMap::new();
    let mut yx: HashMap<u32, u32> = HashMap::new();
    let bijective = x.assignment().iter().zip(y.assignment()).all(|(&a, &b)| {
        *xy.entry(a).or_insert(b) == b && *yx.entry(b).or_insert(a) == a
    });
    if bijective {
        return Ok(1.0);
    }
    // Sum terms in a label-independent canonical order so relabeling either
    // partition cannot perturb rounding.
    let sorted_sum = |mut terms: Vec<f64>| -> f64 {
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    };
    let entropy = |p: &Partition| -> f64 {
        sorted_sum(
            p.sizes()
                .iter()
                .map(|&c| {
                    let q = c as f64 / nf;
                    -q * q.ln()
                })
                .collect(),
        )
    };
    let hx = entropy(x);
    let hy = entropy(y);
    if hx == 0.0 || hy == 0.0 {
        return Ok(0.0); // A trivial partition carries no information.
    }
    let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
    for (&a, &b) in x.assignment().iter().zip(y.assignment()) {
        *joint.entry((a, b)).or_insert(0) += 1;
    }
    let mi = sorted_sum(
        joint
            .iter()
            .map(|(&(a, b), &cnt)| {
                let pxy = cnt as f64 / nf;
                let px = x.sizes()[a as usize] as f64 / nf;
                let py = y.sizes()[b as usize] as f64 / nf;
                pxy * (pxy / (px * py)).ln()
            })
            .collect(),
    );
    Ok((2.0 * mi / (hx + hy)).clamp(0.0, 1.0))
}

/// Per-community co-vote quality plus scale averages.
#[derive(Debug, Clone)]
pub struct CovoteReport {
    /// (community id, size, mean pairwise co-votes), for communities of
    /// size >= min_size, in community-id order.
    pub per_community: Vec<(u32, usize, f64)>,
    /// Plain mean over evaluated communities (headline number).
    pub unweighted_mean: f64,
    /// Community-size-weighted mean.
    pub weighted_mean: f64,
    /// Members that never appear in the log (counted as zero votes).
    pub users_missing_from_log: usize,
}

/// Mean over unordered member pairs of shared voted items, per community of
/// size >= `min_size`. Computed as sum over items of C(voters-in-community,
/// 2) divided by C(size, 2): exactly the pair-enumeration value.
pub fn covote_quality(
    g: &Graph,
    communities: &Partition,
    log: &ActivityLog,
    min_size: usize,
) -> Result<CovoteReport> {
    if communities.assignment().len() != g.node_count() {
        return Err(Error::NodeSetMismatch {
            left: g.node_count(),
            right: communities.assignment().len(),
        });
    }
    if min_size < 2 {
        return Err(Error::Config(format!(
            "min community size for co-votes must be >= 2, got {min_size}"
        )));
    }
    let mut per_community = Vec::new();
    let mut users_missing_from_log = 0;
    for (cid, members) in communities.groups().into_iter().enumerate() {
        let size = members.len();
        let mut item_voters: HashMap<&str, u64> = HashMap::new();
        let mut missing_here = 0;
        for &v in &members {
            match log.items_of(g.labels().name(v)) {
                Some(items) => {
                    for it in items {
                        *item_voters.entry(it.as_str()).or_insert(0) += 1;
                    }
                }
                None => missing_here += 1,
            }
        }
        if size < min_size {
            continue;
        }
        users_missing_from_log += missing_here;
        let shared_pairs: u64 = item_voters.values().map(|&c| c * (c - 1) / 2).sum();
        let total_pairs = (size as u64) * (size as u64 - 1) / 2;
        per_community.push((cid as u32, size, shared_pairs as f64 / total_pairs as f64));
    }
    let k = per_community.len();
    let unweighted_mean = if k == 0 {
        0.0
    } else {
        per_community.iter().map(|&(_, _, q)| q).sum::<f64>() / k as f64
    };
    let total_size: usize = per_community.iter().map(|&(_, s, _)| s).sum();
    let weighted_mean = if total_size == 0 {
        0.0
    } else {
        per_community
            .iter()
            .map(|&(_, s, q)| s as f64 * q)
            .sum::<f64>()
            / total_size as f64
    };
    Ok(CovoteReport {
        per_community,
        unweighted_mean,
        weighted_mean,
        users_missing_from_log,
    })
}

/// Per-community attribute purity plus scale averages.
#[derive(Debug, Clone)]
pub struct PurityReport {
    /// (community id, size, purity) for evaluated communities.
    pub per_community: Vec<(u32, usize, f64)>,
    pub unweighted_mean: f64,
    pub weighted_mean: f64,
    /// Communities of qualifying size whose members all lack the feature.
    pub all_missing_excluded: usize,
}

/// Largest fraction of same-valued members among those with a non-missing
/// value, per community of size >= `min_size`.
pub fn feature_purity(
    g: &Graph,
    communities: &Partition,
    attrs: &AttributeTable,
    feature: &str,
    min_size: usize,
) -> Result<PurityReport> {
    if communities.assignment().len() != g.node_count() {
        return Err(Error::NodeSetMismatch {
            left: g.node_count(),
            right: communities.assignment().len(),
        });
    }
    let fidx = attrs
        .features()
        .iter()
        .position(|f| f == feature)
        .ok_or_else(|| Error::UnknownFeature(feature.to_string()))?;
    let mut per_community = Vec::new();
    let mut all_missing_excluded = 0;
    for (cid, members) in communities.groups().into_iter().enumerate() {
        if members.len() < min_size {
            continue;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &v in &members {
            if let Some(val) = attrs.value_of(g.labels().name(v), fidx) {
                *counts.entry(val).or_insert(0) += 1;
            }
        }
        let present: usize = counts.values().sum();
        if present == 0 {
            all_missing_excluded += 1;
            continue;
        }
        let top = *counts.values().max().expect("non-empty counts");
        per_community.push((cid as u32, members.len(), top as f64 / present as f64));
    }
    let k = per_community.len();
    let unweighted_mean = if k == 0 {
        0.0
    } else {
        per_community.iter().map(|&(_, _, q)| q).sum::<f64>() / k as f64
    };
    let total_size: usize = per_community.iter().map(|&(_, s, _)| s).sum();
    let weighted_mean = if total_size == 0 {
        0.0
    } else {
        per_community
            .iter()
            .map(|&(_, s, q)| s as f64 * q)
            .sum::<f64>()
            / total_size as f64
    };
    Ok(PurityReport {
        per_community,
        unweighted_mean,
        weighted_mean,
        all_missing_excluded,
    })
}

/// NMI-versus-time series for one operator kind.
#[derive(Debug, Clone)]
pub struct NmiCourse {
    pub kind: OperatorKind,
    pub descriptor: String,
    pub taus: Vec<f64>,
    pub nmi: Vec<f64>,
    /// Whether the minimum pairwise similarity had saturated at each tau
    /// (every node effectively in one cluster; the forced cut is arbitrary).
    pub saturated: Vec<bool>,
    /// Index of the best tau (max NMI, earliest on ties).
    pub best_index: usize,
    /// External ids of nodes placed outside their ground-truth community's
    /// majority cluster at the best tau.
    pub misassigned_at_best: Vec<String>,
}

impl NmiCourse {
    pub fn best_tau(&self) -> f64 {
        self.taus[self.best_index]
    }

    pub fn best_nmi(&self) -> f64 {
        self.nmi[self.best_index]
    }
}

/// Nodes whose discovered cluster differs from the majority cluster of their
/// ground-truth community (dense ids, ascending).
pub fn misassigned_nodes(truth: &Partition, found: &Partition) -> Vec<u32> {
    let mut majority: Vec<u32> = Vec::with_capacity(truth.community_count());
    for members in truth.groups() {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &v in &members {
            *counts.entry(found.assignment()[v as usize]).or_insert(0) += 1;
        }
        let best = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&id, _)| id)
            .expect("non-empty community");
        majority.push(best);
    }
    (0..truth.assignment().len() as u32)
        .filter(|&v| {
            found.assignment()[v as usize]
                != majority[truth.assignment()[v as usize] as usize]
        })
        .collect()
}

/// NMI(tau) series for one simulated ensemble: per tau, build the
/// average-link dendrogram, cut it to the ground-truth community count, and
/// score NMI. Tau points evaluate concurrently; results are positional.
pub fn nmi_course_for_ensemble(
    g: &Arc<Graph>,
    truth_p: &Partition,
    ens: &crate::dynamics::SimulationEnsemble,
    taus: &[f64],
) -> Result<NmiCourse> {
    if taus.is_empty() {
        return Err(Error::Config("tau grid is empty".into()));
    }
    let k = truth_p.community_count();
    let per_tau: Result<Vec<(f64, bool, Partition)>> = taus
        .par_iter()
        .map(|&tau| {
            let m = similarity::pair_similarity(ens, tau, g)?;
            let mut min = f64::INFINITY;
            for (i, row) in m.iter().enumerate() {
                for &s in row.iter().take(i) {
                    min = min.min(s);
                }
            }
            let saturated = m.len() < 2 || min >= 1.0 - SATURATION_TOL;
            let found = similarity::dendrogram_from_matrix(m).cut(k)?;
            let score = nmi(truth_p, &found)?;
            Ok((score, saturated, found))
        })
        .collect();
    let per_tau = per_tau?;
    let best_index = per_tau
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.0.partial_cmp(&b.0)
                .expect("NMI is finite")
                .then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .expect("tau grid non-empty");
    let misassigned_at_best = misassigned_nodes(truth_p, &per_tau[best_index].2)
        .into_iter()
        .map(|v| g.labels().name(v).to_string())
        .collect();
    Ok(NmiCourse {
        kind: ens.kind,
        descriptor: ens.operator.clone(),
        taus: taus.to_vec(),
        nmi: per_tau.iter().map(|x| x.0).collect(),
        saturated: per_tau.iter().map(|x| x.1).collect(),
        best_index,
        misassigned_at_best,
    })
}

/// For each operator kind: simulate once, then score the NMI(tau) series.
/// All kinds share the seed, so they see identical initial phases.
pub fn nmi_time_course(
    g: &Arc<Graph>,
    truth: &GroundTruth,
    kinds: &[OperatorKind],
    taus: &[f64],
    runs: usize,
    seed: u64,
) -> Result<Vec<NmiCourse>> {
    if taus.is_empty() {
        return Err(Error::Config("tau grid is empty".into()));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) || taus[0] < 0.0 {
        return Err(Error::Config(
            "tau grid must be non-negative and strictly ascending".into(),
        ));
    }
    let (truth_p, _) = truth.partition_for(g)?;
    let mut grid = taus.to_vec();
    if grid[0] > 0.0 {
        grid.insert(0, 0.0); // Simulation grids must start at t = 0.
    }
    let mut out = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let op = InteractionOperator::build(g.clone(), kind, None)?;
        let cfg = SimulationConfig {
            runs,
            ..SimulationConfig::new(grid.clone(), seed)
        };
        let ens = dynamics::simulate(&op, &cfg)?;
        out.push(nmi_course_for_ensemble(g, &truth_p, &ens, taus)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write as IoWrite;

    fn part(assign: &[u32]) -> Partition {
        Partition::from_assignment(assign.to_vec())
    }

    #[test]
    fn nmi_identical_is_exactly_one() {
        let x = part(&[0, 0, 1, 1, 2]);
        assert_eq!(nmi(&x, &x).unwrap(), 1.0);
        // Relabeled copy too.
        let y = part(&[2, 2, 0, 0, 1]);
        assert_eq!(nmi(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn nmi_crossed_pairs_is_exactly_zero() {
        // {ab|cd} vs {ac|bd}: every joint cell is 1/4 = product of marginals.
        let x = part(&[0, 0, 1, 1]);
        let y = part(&[0, 1, 0, 1]);
        assert_eq!(nmi(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn nmi_degenerate_conventions() {
        let trivial = part(&[0, 0, 0]);
        let split = part(&[0, 1, 2]);
        assert_eq!(nmi(&trivial, &trivial).unwrap(), 1.0);
        assert_eq!(nmi(&trivial, &split).unwrap(), 0.0);
        assert_eq!(nmi(&split, &trivial).unwrap(), 0.0);
    }

    #[test]
    fn nmi_symmetric_and_relabel_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..25 {
            let n = rng.random_range(2..40);
            let ka = rng.random_range(1..5u32);
            let kb = rng.random_range(1..5u32);
            let a: Vec<u32> = (0..n).map(|_| rng.random_range(0..ka)).collect();
            let b: Vec<u32> = (0..n).map(|_| rng.random_range(0..kb)).collect();
            let (x, y) = (part(&a), part(&b));
            let xy = nmi(&x, &y).unwrap();
            let yx = nmi(&y, &x).unwrap();
            assert_abs_diff_eq!(xy, yx, epsilon = 1e-12);
            // Permute labels of x: value unchanged exactly.
            let permuted: Vec<u32> = a.iter().map(|&c| (c + 1) % ka.max(1)).collect();
            assert_eq!(nmi(&part(&permuted), &y).unwrap(), xy);
            assert!((-1e-12..=1.0 + 1e-12).contains(&xy));
        }
    }

    #[test]
    fn nmi_node_mismatch_rejected() {
        assert!(matches!(
            nmi(&part(&[0, 1]), &part(&[0, 1, 1])),
            Err(Error::NodeSetMismatch { .. })
        ));
    }

    fn labeled_graph(n: usize) -> Graph {
        // Nodes named "0".."n-1", path edges just to materialize them.
        let edges: Vec<(u32, u32)> = (1..n as u32).map(|i| (i - 1, i)).collect();
        Graph::from_index_edges(n, &edges).unwrap()
    }

    #[test]
    fn covote_pair_example() {
        let g = labeled_graph(2);
        let log = ActivityLog::from_pairs(
            [
                ("0", "1"),
                ("0", "2"),
                ("0", "3"),
                ("1", "1"),
                ("1", "2"),
                ("1", "3"),
            ]
            .map(|(u, i)| (u.to_string(), i.to_string())),
        );
        let report = covote_quality(&g, &part(&[0, 0]), &log, 2).unwrap();
        assert_eq!(report.per_community, vec![(0, 2, 3.0)]);
        assert_eq!(report.unweighted_mean, 3.0);
        assert_eq!(report.users_missing_from_log, 0);
    }

    #[test]
    fn covote_triple_mean() {
        // Pairwise intersections {2, 0, 1} -> mean 1.0.
        let g = labeled_graph(3);
        let log = ActivityLog::from_pairs(
            [
                ("0", "a"),
                ("0", "b"),
                ("0", "x"),
                ("1", "a"),
                ("1", "b"),
                ("1", "y"),
                ("2", "y"),
                ("2", "z"),
            ]
            .map(|(u, i)| (u.to_string(), i.to_string())),
        );
        let report = covote_quality(&g, &part(&[0, 0, 0]), &log, 3).unwrap();
        assert_eq!(report.per_community, vec![(0, 3, 1.0)]);
    }

    #[test]
    fn covote_missing_user_counts_as_zero() {
        let g = labeled_graph(2);
        let log = ActivityLog::from_pairs([("0".to_string(), "a".to_string())]);
        let report = covote_quality(&g, &part(&[0, 0]), &log, 2).unwrap();
        assert_eq!(report.per_community, vec![(0, 2, 0.0)]);
        assert_eq!(report.users_missing_from_log, 1);
    }

    #[test]
    fn covote_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 60;
        let g = labeled_graph(n);
        let mut pairs = Vec::new();
        for u in 0..n {
            for item in 0..30 {
                if rng.random_bool(0.2) {
                    pairs.push((u.to_string(), item.to_string()));
                }
            }
        }
        let log = ActivityLog::from_pairs(pairs);
        let assign: Vec<u32> = (0..n).map(|_| rng.random_range(0..5)).collect();
        let p = part(&assign);
        let report = covote_quality(&g, &p, &log, 3).unwrap();
        for &(cid, size, got) in &report.per_community {
            let members: Vec<u32> = (0..n as u32)
                .filter(|&v| p.assignment()[v as usize] == cid)
                .collect();
            assert_eq!(members.len(), size);
            let mut total = 0u64;
            let mut npairs = 0u64;
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    let a = log.items_of(g.labels().name(members[i]));
                    let b = log.items_of(g.labels().name(members[j]));
                    total += match (a, b) {
                        (Some(a), Some(b)) => a.intersection(b).count() as u64,
                        _ => 0,
                    };
                    npairs += 1;
                }
            }
            // Same integers, same division: exact match.
            assert_eq!(got, total as f64 / npairs as f64);
        }
    }

    fn attrs_for(vals: &[Option<&str>]) -> AttributeTable {
        AttributeTable::from_rows(
            vec!["dorm".into()],
            vals.iter().enumerate().map(|(i, v)| {
                (i.to_string(), vec![v.map(str::to_string)])
            }),
        )
    }

    #[test]
    fn purity_examples() {
        let g = labeled_graph(4);
        let all_same = attrs_for(&[Some("A"), Some("A"), Some("A"), Some("A")]);
        let r = feature_purity(&g, &part(&[0; 4]), &all_same, "dorm", 3).unwrap();
        assert_eq!(r.per_community, vec![(0, 4, 1.0)]);

        let mixed = attrs_for(&[Some("A"), Some("A"), Some("B"), Some("C")]);
        let r = feature_purity(&g, &part(&[0; 4]), &mixed, "dorm", 3).unwrap();
        assert_eq!(r.per_community, vec![(0, 4, 0.5)]);

        // Missing values drop out of the denominator.
        let gaps = attrs_for(&[Some("A"), Some("A"), None, Some("B")]);
        let r = feature_purity(&g, &part(&[0; 4]), &gaps, "dorm", 3).unwrap();
        assert_abs_diff_eq!(r.per_community[0].2, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn purity_all_missing_excluded() {
        let g = labeled_graph(6);
        let attrs = attrs_for(&[Some("A"), Some("A"), Some("A"), None, None, None]);
        let r = feature_purity(&g, &part(&[0, 0, 0, 1, 1, 1]), &attrs, "dorm", 3).unwrap();
        assert_eq!(r.per_community.len(), 1);
        assert_eq!(r.all_missing_excluded, 1);
        assert_eq!(r.unweighted_mean, 1.0);
    }

    #[test]
    fn purity_unknown_feature() {
        let g = labeled_graph(2);
        let attrs = attrs_for(&[Some("A"), Some("B")]);
        assert!(matches!(
            feature_purity(&g, &part(&[0, 0]), &attrs, "major", 2),
            Err(Error::UnknownFeature(_))
        ));
    }

    #[test]
    fn loaders_round_trip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "1,mr_hi\n2,officer\n3,mr_hi").unwrap();
        let truth = GroundTruth::load(f.path()).unwrap();
        assert_eq!(truth.len(), 3);
        assert_eq!(truth.label_of("2"), Some("officer"));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "u1,s1\nu1,s1\nu1,s2\nu2,s1").unwrap();
        let log = ActivityLog::load(f.path()).unwrap();
        assert_eq!(log.user_count(), 2);
        assert_eq!(log.items_of("u1").unwrap().len(), 2); // duplicate collapsed

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "node,dorm,year\n1,A,2004\n2,,2005").unwrap();
        let attrs = AttributeTable::load(f.path()).unwrap();
        assert_eq!(attrs.features(), &["dorm".to_string(), "year".to_string()]);
        assert_eq!(attrs.value_of("1", 0), Some("A"));
        assert_eq!(attrs.value_of("2", 0), None);
        assert_eq!(attrs.value_of("2", 1), Some("2005"));
    }

    #[test]
    fn loaders_skip_comment_lines() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# provenance header\n1,a\n# interleaved\n2,b").unwrap();
        let truth = GroundTruth::load(f.path()).unwrap();
        assert_eq!(truth.len(), 2);

        // Errors report real file lines, not record indices.
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# header\n1,a\n2,a,extra").unwrap();
        let err = GroundTruth::load(f.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# generated\nnode,dorm\n1,A").unwrap();
        let attrs = AttributeTable::load(f.path()).unwrap();
        assert_eq!(attrs.value_of("1", 0), Some("A"));
    }

    #[test]
    fn truth_partition_requires_full_cover() {
        let g = labeled_graph(3);
        let partial = GroundTruth::from_pairs([("0".to_string(), "a".to_string())]);
        assert!(partial.partition_for(&g).is_err());
        let stranger = GroundTruth::from_pairs(
            [("0", "a"), ("1", "a"), ("2", "a"), ("9", "b")]
                .map(|(a, b)| (a.to_string(), b.to_string())),
        );
        assert!(matches!(
            stranger.partition_for(&g),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn misassignment_detection() {
        let truth = part(&[0, 0, 0, 1, 1, 1]);
        let found = part(&[0, 0, 1, 1, 1, 1]);
        assert_eq!(misassigned_nodes(&truth, &found), vec![2]);
        assert!(misassigned_nodes(&truth, &truth).is_empty());
    }

    #[test]
    fn time_course_on_planted_triads() {
        let g = Arc::new(
            Graph::from_index_edges(
                6,
                &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)],
            )
            .unwrap(),
        );
        let truth = GroundTruth::from_pairs((0..6).map(|i| {
            (i.to_string(), if i < 3 { "x".into() } else { "y".into() })
        }));
        let taus = [0.3, 1.0, 60.0];
        let courses = nmi_time_course(
            &g,
            &truth,
            &[OperatorKind::Laplacian, OperatorKind::Replicator],
            &taus,
            20,
            7,
        )
        .unwrap();
        assert_eq!(courses.len(), 2);
        for course in &courses {
            assert_eq!(course.nmi.len(), 3);
            // The triads synchronize internally before the bridge: some tau
            // recovers the planted split.
            assert!(course.best_nmi() >= 0.99, "{:?}", course.nmi);
            assert!(course.misassigned_at_best.is_empty());
            // By tau = 60 everything is synchronized.
            assert!(course.saturated[2]);
            assert!(!course.saturated[0]);
        }
        // Determinism.
        let again = nmi_time_course(
            &g,
            &truth,
            &[OperatorKind::Laplacian, OperatorKind::Replicator],
            &taus,
            20,
            7,
        )
        .unwrap();
        assert_eq!(courses[0].nmi, again[0].nmi);
        assert_eq!(courses[1].nmi, again[1].nmi);
    }
}
