//! End-to-end runs: load a graph, simulate each configured operator, extract
//! communities, score metrics, and write a reproducible result bundle.
//!
//! Every output file embeds the SHA-256 hash of the serialized config, and
//! everything downstream of the seed is deterministic, so re-running the same
//! config reproduces every file byte for byte. Stage failures surface as
//! [`Error::Stage`] with already-written files left in place.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::dynamics::{self, MethodKind, SimulationConfig};
use crate::error::{Error, Result};
use crate::evaluation::{self, ActivityLog, AttributeTable, GroundTruth, NmiCourse};
use crate::graph::Graph;
use crate::multiscale;
use crate::operators::{InteractionOperator, OperatorKind};
use crate::similarity::{self, PAIRWISE_CAP};
use crate::spectral;

/// Tau sampling: an explicit ascending list, or points log-spaced between
/// `min_factor` and `max_factor` times the operator's sync timescale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauGrid {
    Explicit(Vec<f64>),
    Scaled {
        points: usize,
        min_factor: f64,
        max_factor: f64,
    },
}

impl Default for TauGrid {
    fn default() -> Self {
        TauGrid::Scaled {
            points: 30,
            min_factor: 0.01,
            max_factor: 10.0,
        }
    }
}

impl TauGrid {
    /// Materialize the grid; `timescale` is only consulted for `Scaled`.
    pub fn taus(&self, timescale: f64) -> Result<Vec<f64>> {
        match self {
            TauGrid::Explicit(taus) => {
                if taus.is_empty() {
                    return Err(Error::Config("tau grid is empty".into()));
                }
                if taus.windows(2).any(|w| !(w[1] > w[0]))
                    || !(taus[0] > 0.0)
                    || taus.iter().any(|t| !t.is_finite())
                {
                    return Err(Error::Config(
                        "explicit tau grid must be positive, finite, strictly ascending".into(),
                    ));
                }
                Ok(taus.clone())
            }
            TauGrid::Scaled {
                points,
                min_factor,
                max_factor,
            } => {
                if *points < 2 || !(*min_factor > 0.0) || !(*max_factor > *min_factor) {
                    return Err(Error::Config(
                        "scaled tau grid needs points >= 2 and 0 < min_factor < max_factor"
                            .into(),
                    ));
                }
                let (lo, hi) = (min_factor * timescale, max_factor * timescale);
                let ratio = (hi / lo).ln();
                Ok((0..*points)
                    .map(|i| lo * (ratio * i as f64 / (*points - 1) as f64).exp())
                    .collect())
            }
        }
    }

    /// Whether materializing needs the sync timescale.
    pub fn needs_timescale(&self) -> bool {
        matches!(self, TauGrid::Scaled { .. })
    }
}

/// Full description of a pipeline run. Serialized into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Edge-list path.
    pub graph: PathBuf,
    pub operators: Vec<OperatorKind>,
    /// Alpha override for Replicator/ScaledAdjacency; others ignore it.
    pub alpha: Option<f64>,
    pub c: f64,
    /// Ensemble size K.
    pub runs: usize,
    pub seed: u64,
    pub tau_grid: TauGrid,
    /// Strictly descending; empty skips the onion stage.
    pub mu_schedule: Vec<f64>,
    /// Ground-truth CSV (node id, label); enables the NMI time course.
    pub truth: Option<PathBuf>,
    /// Activity CSV (user id, item id); enables co-vote quality.
    pub activity: Option<PathBuf>,
    /// Attribute CSV with header; enables purity.
    pub attributes: Option<PathBuf>,
    /// Features scored for purity; empty means every feature in the table.
    pub features: Vec<String>,
    /// Communities below this size are skipped by co-votes/purity.
    pub min_community_size: usize,
    pub method: MethodKind,
    pub euler_step: Option<f64>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph: PathBuf::new(),
            operators: vec![OperatorKind::Laplacian, OperatorKind::Replicator],
            alpha: None,
            c: 1.0,
            runs: 100,
            seed: 0,
            tau_grid: TauGrid::default(),
            mu_schedule: Vec::new(),
            truth: None,
            activity: None,
            attributes: None,
            features: Vec::new(),
            min_community_size: 3,
            method: MethodKind::Auto,
            euler_step: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.graph.as_os_str().is_empty() {
            return Err(Error::Config("graph path is required".into()));
        }
        if self.operators.is_empty() {
            return Err(Error::Config("at least one operator kind required".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for k in &self.operators {
            if !seen.insert(k.cli_name()) {
                return Err(Error::Config(format!("duplicate operator {k}")));
            }
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("coupling c must be > 0, got {}", self.c)));
        }
        if self.runs == 0 {
            return Err(Error::Config("run count K must be >= 1".into()));
        }
        if !self.mu_schedule.is_empty() {
            if self.mu_schedule.iter().any(|&m| !(m > 0.0 && m <= 2.0)) {
                return Err(Error::Config("mu schedule entries must lie in (0, 2]".into()));
            }
            if self.mu_schedule.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::Config("mu schedule must be strictly descending".into()));
            }
        }
        if self.min_community_size < 2 {
            return Err(Error::Config("min community size must be >= 2".into()));
        }
        if !self.features.is_empty() && self.attributes.is_none() {
            return Err(Error::Config(
                "purity features listed but no attribute table given".into(),
            ));
        }
        Ok(())
    }
}

/// SHA-256 of the canonical (field-ordered) JSON serialization.
pub fn config_hash(cfg: &RunConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// What a pipeline run produced.
#[derive(Debug)]
pub struct ResultBundle {
    pub out_dir: PathBuf,
    pub config_hash: String,
    /// Files written, relative to `out_dir`, in write order.
    pub files: Vec<PathBuf>,
    /// Contents of metrics.json.
    pub metrics: serde_json::Value,
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name.to_string(),
        source: Box::new(e),
    })
}

fn write_file(bundle: &mut ResultBundle, name: &str, contents: &str) -> Result<()> {
    let path = bundle.out_dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    bundle.files.push(PathBuf::from(name));
    Ok(())
}

/// CSV front matter carrying provenance (readable by `#`-comment-aware
/// plotting tools).
pub fn csv_front_matter(hash: &str, extra: &[(&str, &str)]) -> String {
    let mut s = format!("# config_hash={hash}\n# version={}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in extra {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s
}

/// Partition rendered as {community id -> sorted member names}.
pub fn community_map(g: &Graph, p: &crate::graph::Partition) -> BTreeMap<String, Vec<String>> {
    p.groups()
        .into_iter()
        .enumerate()
        .map(|(cid, members)| {
            (
                cid.to_string(),
                members
                    .iter()
                    .map(|&v| g.labels().name(v).to_string())
                    .collect(),
            )
        })
        .collect()
}

/// NMI time course as a plot-ready CSV with provenance front matter.
pub fn nmi_course_csv(hash: &str, course: &NmiCourse) -> String {
    let mut s = csv_front_matter(hash, &[("operator", &course.descriptor)]);
    s.push_str("tau,nmi,saturated\n");
    for i in 0..course.taus.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            course.taus[i],
            course.nmi[i],
            if course.saturated[i] { 1 } else { 0 }
        ));
    }
    s
}

/// Execute the full pipeline described by `cfg`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<ResultBundle> {
    cfg.validate()?;
    let hash = config_hash(cfg);
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let mut bundle = ResultBundle {
        out_dir: cfg.out_dir.clone(),
        config_hash: hash.clone(),
        files: Vec::new(),
        metrics: serde_json::Value::Null,
    };
    let echo = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": hash,
        "config": cfg,
    });
    write_file(
        &mut bundle,
        "config_echo.json",
        &format!("{}\n", serde_json::to_string_pretty(&echo).expect("json")),
    )?;

    // Load stage: graph and optional side tables.
    let (g, _report) = stage("load", Graph::load_edge_list(&cfg.graph))?;
    let g = Arc::new(g);
    let truth = match &cfg.truth {
        Some(p) => Some(stage("load", GroundTruth::load(p))?),
        None => None,
    };
    let activity = match &cfg.activity {
        Some(p) => Some(stage("load", ActivityLog::load(p))?),
        None => None,
    };
    let attributes = match &cfg.attributes {
        Some(p) => Some(stage("load", AttributeTable::load(p))?),
        None => None,
    };
    let truth_p = match &truth {
        Some(t) => Some(stage("load", t.partition_for(&g))?.0),
        None => None,
    };

    let mut metrics_per_kind: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    for &kind in &cfg.operators {
        let kname = kind.cli_name();
        let alpha = cfg.alpha.filter(|_| kind.requires_alpha());
        let op = stage(
            &format!("operator-{kname}"),
            InteractionOperator::build(g.clone(), kind, alpha),
        )?;

        // Spectrum artifact: the smallest eigenvalues, ascending.
        let k_eigs = g.node_count().min(16);
        let spec = stage(
            &format!("spectrum-{kname}"),
            spectral::smallest_eigenvalues(&op, k_eigs),
        )?;
        let mut csv = csv_front_matter(&hash, &[("operator", &op.descriptor())]);
        csv.push_str("rank,eigenvalue\n");
        for (i, ev) in spec.eigenvalues.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", i + 1, ev));
        }
        write_file(&mut bundle, &format!("spectrum_{kname}.csv"), &csv)?;

        // Tau grid, scaled by this operator's own timescale when requested.
        let timescale = if cfg.tau_grid.needs_timescale() {
            Some(stage(
                &format!("spectrum-{kname}"),
                spectral::sync_timescale(&op),
            )?)
        } else {
            None
        };
        let taus = cfg.tau_grid.taus(timescale.unwrap_or(1.0))?;
        let mut grid = taus.clone();
        grid.insert(0, 0.0);

        let sim_cfg = SimulationConfig {
            c: cfg.c,
            omega: None,
            runs: cfg.runs,
            time_grid: grid,
            seed: cfg.seed,
            method: cfg.method,
            euler_step: cfg.euler_step,
        };
        let ens = stage(
            &format!("simulate-{kname}"),
            dynamics::simulate(&op, &sim_cfg),
        )?;

        // NMI course when truth is available and the pair matrix fits.
        let mut notes: Vec<String> = Vec::new();
        let course = match &truth_p {
            Some(tp) if g.node_count() <= PAIRWISE_CAP => {
                let course = stage(
                    &format!("metrics-{kname}"),
                    evaluation::nmi_course_for_ensemble(&g, tp, &ens, &taus),
                )?;
                write_file(
                    &mut bundle,
                    &format!("nmi_course_{kname}.csv"),
                    &nmi_course_csv(&hash, &course),
                )?;
                Some(course)
            }
            Some(_) => {
                notes.push(format!(
                    "nmi course skipped: {} nodes above pairwise cap {PAIRWISE_CAP}",
                    g.node_count()
                ));
                None
            }
            None => None,
        };
        // Evaluation time: the best tau when known, else mid-grid.
        let tau_star = course
            .as_ref()
            .map(|c| c.best_tau())
            .unwrap_or_else(|| taus[taus.len() / 2]);

        let table = stage(
            &format!("similarity-{kname}"),
            similarity::edge_similarity(&ens, tau_star, &g),
        )?;

        // Partitions: dendrogram cut at the truth count, plus one threshold
        // partition per mu.
        let mut partition_doc = json!({
            "config_hash": hash,
            "operator": op.descriptor(),
            "tau": tau_star,
        });
        let mut threshold_parts: Vec<(f64, crate::graph::Partition)> = Vec::new();
        for &mu in &cfg.mu_schedule {
            let p = stage(
                &format!("communities-{kname}"),
                similarity::threshold_communities(&g, &table, mu),
            )?;
            threshold_parts.push((mu, p));
        }
        let obj = partition_doc.as_object_mut().expect("object");
        obj.insert(
            "threshold".into(),
            json!(threshold_parts
                .iter()
                .map(|(mu, p)| (mu.to_string(), community_map(&g, p)))
                .collect::<BTreeMap<String, BTreeMap<String, Vec<String>>>>()),
        );
        if g.node_count() <= PAIRWISE_CAP {
            let dendro = stage(
                &format!("communities-{kname}"),
                similarity::hierarchical_cluster(&ens, tau_star, &g),
            )?;
            if let Some(tp) = &truth_p {
                let cut = stage(
                    &format!("communities-{kname}"),
                    dendro.cut(tp.community_count()),
                )?;
                obj.insert(
                    "dendrogram_cut".into(),
                    json!({
                        "k": tp.community_count(),
                        "communities": community_map(&g, &cut),
                    }),
                );
            }
            // Newick comment block carries provenance.
            let newick = format!(
                "[config_hash={hash}]{}\n",
                dendro.to_newick(g.labels())
            );
            write_file(&mut bundle, &format!("dendrogram_{kname}.nwk"), &newick)?;
        } else {
            notes.push(format!(
                "dendrogram skipped: {} nodes above pairwise cap {PAIRWISE_CAP}",
                g.node_count()
            ));
        }
        write_file(
            &mut bundle,
            &format!("partition_{kname}.json"),
            &format!(
                "{}\n",
                serde_json::to_string_pretty(&partition_doc).expect("json")
            ),
        )?;

        // Onion decomposition over the mu schedule.
        if cfg.mu_schedule.is_empty() {
            notes.push("onion skipped: empty mu schedule".into());
        } else {
            let dec = stage(
                &format!("onion-{kname}"),
                multiscale::onion_decompose(&g, &table, &cfg.mu_schedule),
            )?;
            let layers: Vec<serde_json::Value> = dec
                .layers
                .iter()
                .map(|l| {
                    json!({
                        "mu": l.mu,
                        "core_size": l.core.len(),
                        "core": l.core.iter().map(|&v| g.labels().name(v)).collect::<Vec<_>>(),
                        "whisker_sizes": l.whiskers.iter().map(|w| w.len()).collect::<Vec<_>>(),
                        "fragments": l.fragments,
                    })
                })
                .collect();
            let doc = json!({
                "config_hash": hash,
                "model": dec.model,
                "t": dec.t,
                "terminated_at": dec.terminated_at,
                "layers": layers,
            });
            write_file(
                &mut bundle,
                &format!("onion_{kname}.json"),
                &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")),
            )?;
        }

        // Activity metrics per threshold partition.
        let mut covotes: BTreeMap<String, serde_json::Value> = BTreeMap::new();
        if let Some(log) = &activity {
            for (mu, p) in &threshold_parts {
                let rep = stage(
                    &format!("metrics-{kname}"),
                    evaluation::covote_quality(&g, p, log, cfg.min_community_size),
                )?;
                covotes.insert(
                    mu.to_string(),
                    json!({
                        "unweighted_mean": rep.unweighted_mean,
                        "weighted_mean": rep.weighted_mean,
                        "users_missing_from_log": rep.users_missing_from_log,
                        "per_community": rep.per_community,
                    }),
                );
            }
        }
        let mut purity: BTreeMap<String, serde_json::Value> = BTreeMap::new();
        if let Some(attrs) = &attributes {
            let features: Vec<String> = if cfg.features.is_empty() {
                attrs.features().to_vec()
            } else {
                cfg.features.clone()
            };
            for feature in &features {
                let mut per_mu: BTreeMap<String, serde_json::Value> = BTreeMap::new();
                for (mu, p) in &threshold_parts {
                    let rep = stage(
                        &format!("metrics-{kname}"),
                        evaluation::feature_purity(
                            &g,
                            p,
                            attrs,
                            feature,
                            cfg.min_community_size,
                        ),
                    )?;
                    per_mu.insert(
                        mu.to_string(),
                        json!({
                            "unweighted_mean": rep.unweighted_mean,
                            "weighted_mean": rep.weighted_mean,
                            "all_missing_excluded": rep.all_missing_excluded,
                            "per_community": rep.per_community,
                        }),
                    );
                }
                purity.insert(feature.clone(), json!(per_mu));
            }
        }

        metrics_per_kind.insert(
            kname.to_string(),
            json!({
                "operator": op.descriptor(),
                "sync_timescale": timescale,
                "tau_star": tau_star,
                "best_nmi": course.as_ref().map(|c| c.best_nmi()),
                "best_tau": course.as_ref().map(|c| c.best_tau()),
                "misassigned_at_best": course.as_ref().map(|c| c.misassigned_at_best.clone()),
                "notes": notes,
                "covotes": covotes,
                "purity": purity,
            }),
        );
    }

    let metrics = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config_hash": hash,
        "operators": metrics_per_kind,
    });
    write_file(
        &mut bundle,
        "metrics.json",
        &format!("{}\n", serde_json::to_string_pretty(&metrics).expect("json")),
    )?;
    bundle.metrics = metrics;
    Ok(bundle)
}
