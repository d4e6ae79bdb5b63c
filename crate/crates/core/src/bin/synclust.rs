//! Command-line front end: every subcommand writes plot-ready artifacts
//! (CSV for series, JSON for structure) into the output directory, each
//! embedding a hash of the effective configuration.
//!
//! Flag precedence: command line > `--config` file > built-in defaults.
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use synclust::dynamics::{self, MethodKind, SimulationConfig};
use synclust::error::{Error, Result};
use synclust::evaluation::{self, ActivityLog, AttributeTable, GroundTruth};
use synclust::generate::{generate_hierarchical_benchmark, BenchmarkParams};
use synclust::graph::{Graph, Partition};
use synclust::multiscale;
use synclust::pipeline::{self, RunConfig, TauGrid};
use synclust::similarity;
use synclust::spectral;
use synclust::{InteractionOperator, OperatorKind};

fn parse_operator(s: &str) -> std::result::Result<OperatorKind, String> {
    OperatorKind::from_str(s).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<MethodKind, String> {
    MethodKind::from_str(s).map_err(|e| e.to_string())
}

#[derive(Parser)]
#[command(
    name = "synclust",
    version,
    about = "Multi-scale community detection via linear synchronization dynamics"
)]
struct Cli {
    /// Master RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for all artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// JSON config file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Flags shared by the model-driven subcommands.
#[derive(Args, Clone, Default)]
struct ModelArgs {
    /// Edge-list file (whitespace-separated pairs, # comments).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// laplacian | rw-norm | sym-norm | replicator | scaled-adj | modularity
    #[arg(long, value_parser = parse_operator)]
    operator: Option<OperatorKind>,
    /// Alpha override for replicator / scaled-adj (default: lambda_max).
    #[arg(long)]
    alpha: Option<f64>,
    /// Coupling strength.
    #[arg(long)]
    c: Option<f64>,
    /// Ensemble size K.
    #[arg(long)]
    runs: Option<usize>,
    /// auto | closed | euler
    #[arg(long, value_parser = parse_method)]
    method: Option<MethodKind>,
    /// Forward-Euler step override.
    #[arg(long)]
    euler_step: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the phase dynamics; one trajectory CSV per run.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated sample times; 0 is always the first sample.
        #[arg(long, value_delimiter = ',')]
        times: Vec<f64>,
    },
    /// Smallest eigenvalues of the chosen operator, as (rank, eigenvalue) CSV.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of eigenvalues (clamped to the node count).
        #[arg(long, default_value_t = 16)]
        k: usize,
        /// Rank from the top of the computed set downward.
        #[arg(long)]
        rank_desc: bool,
    },
    /// Threshold communities of the edge-similarity graph at time t.
    Communities {
        #[command(flatten)]
        model: ModelArgs,
        /// Evaluation time.
        #[arg(long)]
        t: f64,
        /// Dissimilarity threshold in (0, 2].
        #[arg(long)]
        mu: f64,
    },
    /// Average-link dendrogram over pairwise similarities, in Newick form.
    Dendrogram {
        #[command(flatten)]
        model: ModelArgs,
        /// Evaluation time.
        #[arg(long)]
        t: f64,
    },
    /// Core/whisker decomposition over a descending mu schedule.
    Onion {
        #[command(flatten)]
        model: ModelArgs,
        /// Evaluation time.
        #[arg(long)]
        t: f64,
        /// Comma-separated strictly descending thresholds in (0, 2].
        #[arg(long, value_delimiter = ',')]
        mu_schedule: Vec<f64>,
        /// Also write per-layer whisker size histograms.
        #[arg(long)]
        emit_histogram: bool,
    },
    /// Score communities against reference data.
    Evaluate {
        #[command(subcommand)]
        what: EvalCmd,
    },
    /// Generate a two-level planted benchmark graph plus both truths.
    Generate {
        /// Node count; must be a multiple of l1*l2.
        #[arg(long)]
        n: usize,
        /// Top-level community count.
        #[arg(long)]
        l1: usize,
        /// Sub-communities per community.
        #[arg(long)]
        l2: usize,
        /// Mean degree inside a sub-community.
        #[arg(long)]
        z_in1: u32,
        /// Mean additional degree inside the community.
        #[arg(long)]
        z_in2: u32,
        /// Mean degree to the rest of the graph.
        #[arg(long)]
        z_out: u32,
        /// Output file stem.
        #[arg(long, default_value = "bench")]
        stem: String,
    },
    /// Run the full configured pipeline (requires --config).
    Pipeline,
}

#[derive(Subcommand)]
enum EvalCmd {
    /// NMI time course of each operator against a ground-truth partition.
    Nmi {
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Ground-truth CSV (node id, label).
        #[arg(long)]
        truth: PathBuf,
        /// Operators to compare (default from config: laplacian,replicator).
        #[arg(long, value_delimiter = ',', value_parser = parse_operator)]
        operators: Vec<OperatorKind>,
        /// Explicit taus; default is a per-operator scaled grid.
        #[arg(long, value_delimiter = ',')]
        taus: Vec<f64>,
        /// Ensemble size K.
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Mean co-votes over member pairs, per community.
    Covotes {
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Activity CSV (user id, item id).
        #[arg(long)]
        activity: PathBuf,
        /// Partition JSON: {id: [names]} or {"communities": {id: [names]}}.
        #[arg(long)]
        communities: PathBuf,
        /// Smallest community size scored.
        #[arg(long, default_value_t = 3)]
        min_size: usize,
    },
    /// Largest same-value fraction of a feature, per community.
    Purity {
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Attribute CSV with a header row (node, feature...).
        #[arg(long)]
        attributes: PathBuf,
        /// Feature column to score.
        #[arg(long)]
        feature: String,
        /// Partition JSON: {id: [names]} or {"communities": {id: [names]}}.
        #[arg(long)]
        communities: PathBuf,
        /// Smallest community size scored.
        #[arg(long, default_value_t = 3)]
        min_size: usize,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.threads {
        // May fail if a pool already exists (e.g. under a test harness).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.category().exit_code());
    }
}

/// File-or-default config with CLI overrides folded in.
fn effective_config(cli: &Cli, model: Option<&ModelArgs>) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(m) = model {
        if let Some(g) = &m.graph {
            cfg.graph = g.clone();
        }
        if let Some(op) = m.operator {
            cfg.operators = vec![op];
        }
        if let Some(a) = m.alpha {
            cfg.alpha = Some(a);
        }
        if let Some(c) = m.c {
            cfg.c = c;
        }
        if let Some(r) = m.runs {
            cfg.runs = r;
        }
        if let Some(me) = m.method {
            cfg.method = me;
        }
        if let Some(h) = m.euler_step {
            cfg.euler_step = Some(h);
        }
    }
    Ok(cfg)
}

/// The one operator this invocation works on.
fn single_kind(cfg: &RunConfig) -> Result<OperatorKind> {
    match cfg.operators.as_slice() {
        [k] => Ok(*k),
        _ => Err(Error::Config(
            "this subcommand needs exactly one operator; pass --operator".into(),
        )),
    }
}

fn load_graph(cfg: &RunConfig) -> Result<Arc<Graph>> {
    if cfg.graph.as_os_str().is_empty() {
        return Err(Error::Config("pass --graph or set it in the config".into()));
    }
    let (g, report) = Graph::load_edge_list(&cfg.graph)?;
    if report.duplicate_edges_dropped > 0 || report.self_loops_dropped > 0 {
        eprintln!(
            "note: dropped {} duplicate edge(s), {} self-loop(s)",
            report.duplicate_edges_dropped, report.self_loops_dropped
        );
    }
    Ok(Arc::new(g))
}

fn build_operator(g: &Arc<Graph>, cfg: &RunConfig, kind: OperatorKind) -> Result<InteractionOperator> {
    InteractionOperator::build(g.clone(), kind, cfg.alpha.filter(|_| kind.requires_alpha()))
}

/// Hash covering the whole invocation: effective config plus per-subcommand
/// extras that are not RunConfig fields.
fn invocation_hash(sub: &str, cfg: &RunConfig, extras: serde_json::Value) -> String {
    let doc = json!({ "subcommand": sub, "config": cfg, "extras": extras });
    let bytes = serde_json::to_vec(&doc).expect("invocation serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_out(cfg: &RunConfig, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Error::Io { path: cfg.out_dir.display().to_string(), source: e })?;
    let path = cfg.out_dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    println!("wrote {}", path.display());
    Ok(path)
}

/// Simulate up to a single evaluation time with the effective config.
fn ensemble_at(
    g: &Arc<Graph>,
    cfg: &RunConfig,
    kind: OperatorKind,
    t: f64,
) -> Result<(InteractionOperator, dynamics::SimulationEnsemble)> {
    let op = build_operator(g, cfg, kind)?;
    let grid = if t == 0.0 { vec![0.0] } else { vec![0.0, t] };
    let sim_cfg = SimulationConfig {
        c: cfg.c,
        omega: None,
        runs: cfg.runs,
        time_grid: grid,
        seed: cfg.seed,
        method: cfg.method,
        euler_step: cfg.euler_step,
    };
    let ens = dynamics::simulate(&op, &sim_cfg)?;
    Ok((op, ens))
}

/// Parse a partition JSON produced by `communities` (or a bare id->members
/// map) against the graph's node set.
fn partition_from_json(g: &Graph, path: &PathBuf) -> Result<Partition> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    let map = value
        .get("communities")
        .unwrap_or(&value)
        .as_object()
        .ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: "expected {id: [node names]} or {\"communities\": {...}}".into(),
        })?;
    let n = g.node_count();
    let mut assign = vec![u32::MAX; n];
    for (cid, (_, members)) in map.iter().enumerate() {
        let members = members.as_array().ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: 1,
            msg: "community members must be an array of node names".into(),
        })?;
        for m in members {
            let name = m.as_str().ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: 1,
                msg: "node names must be strings".into(),
            })?;
            let idx = g
                .labels()
                .index_of(name)
                .ok_or_else(|| Error::UnknownNode(name.to_string()))? as usize;
            if assign[idx] != u32::MAX {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: 1,
                    msg: format!("node {name:?} appears in two communities"),
                });
            }
            assign[idx] = cid as u32;
        }
    }
    let covered = assign.iter().filter(|&&a| a != u32::MAX).count();
    if covered != n {
        return Err(Error::NodeSetMismatch { left: covered, right: n });
    }
    Ok(Partition::from_assignment(assign))
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Simulate { model, times } => {
            let cfg = effective_config(&cli, Some(model))?;
            let kind = single_kind(&cfg)?;
            if times.is_empty() {
                return Err(Error::Config("pass --times t1,t2,...".into()));
            }
            let mut grid = times.clone();
            if grid.first() != Some(&0.0) {
                grid.insert(0, 0.0);
            }
            let g = load_graph(&cfg)?;
            let op = build_operator(&g, &cfg, kind)?;
            let sim_cfg = SimulationConfig {
                c: cfg.c,
                omega: None,
                runs: cfg.runs,
                time_grid: grid,
                seed: cfg.seed,
                method: cfg.method,
                euler_step: cfg.euler_step,
            };
            let ens = dynamics::simulate(&op, &sim_cfg)?;
            let hash = invocation_hash("simulate", &cfg, json!({ "times": times }));
            let width = cfg.runs.to_string().len().max(3);
            for run in 0..ens.run_count() {
                let mut s = pipeline::csv_front_matter(
                    &hash,
                    &[
                        ("operator", &op.descriptor()),
                        ("run", &run.to_string()),
                        ("columns", "t, then one phase column per node in dense index order"),
                    ],
                );
                s.push('t');
                for i in 0..g.node_count() as u32 {
                    s.push(',');
                    s.push_str(g.labels().name(i));
                }
                s.push('\n');
                for (ti, t) in ens.time_grid().iter().enumerate() {
                    s.push_str(&format!("{t}"));
                    for th in ens.theta(run, ti) {
                        s.push_str(&format!(",{th}"));
                    }
                    s.push('\n');
                }
                write_out(&cfg, &format!("run_{run:0width$}.csv"), &s)?;
            }
            println!(
                "simulated {} run(s) of {} on {} nodes",
                ens.run_count(),
                op.descriptor(),
                g.node_count()
            );
        }
        Cmd::Spectrum { model, k, rank_desc } => {
            let cfg = effective_config(&cli, Some(model))?;
            let kind = single_kind(&cfg)?;
            let g = load_graph(&cfg)?;
            let op = build_operator(&g, &cfg, kind)?;
            let k = (*k).min(g.node_count()).max(1);
            let spec = spectral::smallest_eigenvalues(&op, k)?;
            let hash = invocation_hash(
                "spectrum",
                &cfg,
                json!({ "k": k, "rank_desc": rank_desc }),
            );
            let mut s = pipeline::csv_front_matter(&hash, &[("operator", &op.descriptor())]);
            s.push_str("rank,eigenvalue\n");
            let rows: Vec<f64> = if *rank_desc {
                spec.eigenvalues.iter().rev().copied().collect()
            } else {
                spec.eigenvalues.clone()
            };
            for (i, ev) in rows.iter().enumerate() {
                s.push_str(&format!("{},{}\n", i + 1, ev));
            }
            write_out(&cfg, &format!("spectrum_{}.csv", kind.cli_name()), &s)?;
        }
        Cmd::Communities { model, t, mu } => {
            let cfg = effective_config(&cli, Some(model))?;
            let kind = single_kind(&cfg)?;
            let g = load_graph(&cfg)?;
            let (op, ens) = ensemble_at(&g, &cfg, kind, *t)?;
            let table = similarity::edge_similarity(&ens, *t, &g)?;
            let part = similarity::threshold_communities(&g, &table, *mu)?;
            let hash = invocation_hash("communities", &cfg, json!({ "t": t, "mu": mu }));
            let doc = json!({
                "config_hash": hash,
                "operator": op.descriptor(),
                "t": t,
                "mu": mu,
                "communities": pipeline::community_map(&g, &part),
            });
            write_out(
                &cfg,
                &format!("communities_{}.json", kind.cli_name()),
                &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")),
            )?;
            println!(
                "{} communities at t={t}, mu={mu} (min edge similarity {:.6})",
                part.community_count(),
                table.min()
            );
        }
        Cmd::Dendrogram { model, t } => {
            let cfg = effective_config(&cli, Some(model))?;
            let kind = single_kind(&cfg)?;
            let g = load_graph(&cfg)?;
            let (_op, ens) = ensemble_at(&g, &cfg, kind, *t)?;
            let dendro = similarity::hierarchical_cluster(&ens, *t, &g)?;
            let hash = invocation_hash("dendrogram", &cfg, json!({ "t": t }));
            let newick = format!("[config_hash={hash}]{}\n", dendro.to_newick(g.labels()));
            write_out(&cfg, &format!("dendrogram_{}.nwk", kind.cli_name()), &newick)?;
            println!("{} leaves, {} merges", dendro.leaf_count(), dendro.merges().len());
        }
        Cmd::Onion { model, t, mu_schedule, emit_histogram } => {
            let cfg = effective_config(&cli, Some(model))?;
            let kind = single_kind(&cfg)?;
            let sched = if mu_schedule.is_empty() {
                cfg.mu_schedule.clone()
            } else {
                mu_schedule.clone()
            };
            if sched.is_empty() {
                return Err(Error::Config("pass --mu-schedule a,b,c".into()));
            }
            let g = load_graph(&cfg)?;
            let (_op, ens) = ensemble_at(&g, &cfg, kind, *t)?;
            let table = similarity::edge_similarity(&ens, *t, &g)?;
            let dec = multiscale::onion_decompose(&g, &table, &sched)?;
            let hash = invocation_hash(
                "onion",
                &cfg,
                json!({ "t": t, "mu_schedule": sched, "emit_histogram": emit_histogram }),
            );
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
            write_out(
                &cfg,
                &format!("onion_{}.json", kind.cli_name()),
                &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")),
            )?;
            if *emit_histogram {
                for li in 0..dec.layers.len() {
                    let hist = multiscale::whisker_size_distribution(&dec, li)?;
                    let mut s = pipeline::csv_front_matter(
                        &hash,
                        &[("layer", &li.to_string()), ("mu", &dec.layers[li].mu.to_string())],
                    );
                    s.push_str("lower_edge,count\n");
                    for (edge, count) in hist.lower_edges.iter().zip(&hist.counts) {
                        s.push_str(&format!("{edge},{count}\n"));
                    }
                    write_out(
                        &cfg,
                        &format!("onion_hist_{}_layer{li}.csv", kind.cli_name()),
                        &s,
                    )?;
                }
            }
            println!(
                "{} layer(s); core sizes {:?}",
                dec.layers.len(),
                dec.core_sizes()
            );
        }
        Cmd::Evaluate { what } => run_evaluate(&cli, what)?,
        Cmd::Generate { n, l1, l2, z_in1, z_in2, z_out, stem } => {
            let cfg = effective_config(&cli, None)?;
            let params = BenchmarkParams {
                n: *n,
                l1: *l1,
                l2: *l2,
                z_in1: *z_in1,
                z_in2: *z_in2,
                z_out: *z_out,
                seed: cfg.seed,
            };
            let bench = generate_hierarchical_benchmark(params)?;
            let hash = invocation_hash(
                "generate",
                &cfg,
                json!({
                    "n": n, "l1": l1, "l2": l2,
                    "z_in1": z_in1, "z_in2": z_in2, "z_out": z_out,
                }),
            );
            let g = &bench.graph;
            let mut edges = format!(
                "# config_hash={hash}\n# version={}\n",
                env!("CARGO_PKG_VERSION")
            );
            for &(u, v) in g.edges() {
                edges.push_str(&format!(
                    "{} {}\n",
                    g.labels().name(u),
                    g.labels().name(v)
                ));
            }
            write_out(&cfg, &format!("{stem}.edges"), &edges)?;
            for (level, truth) in [(1, &bench.level1), (2, &bench.level2)] {
                let mut s = format!("# config_hash={hash}\n");
                for (node, label) in truth.iter() {
                    s.push_str(&format!("{node},{label}\n"));
                }
                write_out(&cfg, &format!("{stem}_level{level}.csv"), &s)?;
            }
            println!(
                "generated {} nodes, {} edges ({} sub-communities in {} communities)",
                g.node_count(),
                g.edge_count(),
                l1 * l2,
                l1
            );
        }
        Cmd::Pipeline => {
            let cfg = effective_config(&cli, None)?;
            let bundle = pipeline::run_pipeline(&cfg)?;
            for f in &bundle.files {
                println!("wrote {}", bundle.out_dir.join(f).display());
            }
            println!("config hash {}", bundle.config_hash);
        }
    }
    Ok(())
}

fn run_evaluate(cli: &Cli, what: &EvalCmd) -> Result<()> {
    match what {
        EvalCmd::Nmi { graph, truth, operators, taus, runs } => {
            let model = ModelArgs {
                graph: graph.clone(),
                runs: *runs,
                ..ModelArgs::default()
            };
            let mut cfg = effective_config(cli, Some(&model))?;
            if !operators.is_empty() {
                cfg.operators = operators.clone();
            }
            if !taus.is_empty() {
                cfg.tau_grid = TauGrid::Explicit(taus.clone());
            }
            let g = load_graph(&cfg)?;
            let truth_table = GroundTruth::load(truth)?;
            let hash = invocation_hash("evaluate-nmi", &cfg, json!({ "truth": truth }));
            for &kind in &cfg.operators.clone() {
                let taus_k = if cfg.tau_grid.needs_timescale() {
                    let op = build_operator(&g, &cfg, kind)?;
                    cfg.tau_grid.taus(spectral::sync_timescale(&op)?)?
                } else {
                    cfg.tau_grid.taus(1.0)?
                };
                let courses = evaluation::nmi_time_course(
                    &g,
                    &truth_table,
                    &[kind],
                    &taus_k,
                    cfg.runs,
                    cfg.seed,
                )?;
                let course = &courses[0];
                write_out(
                    &cfg,
                    &format!("nmi_course_{}.csv", kind.cli_name()),
                    &pipeline::nmi_course_csv(&hash, course),
                )?;
                println!(
                    "{}: best NMI {:.4} at tau={:.6}",
                    kind.cli_name(),
                    course.best_nmi(),
                    course.best_tau()
                );
            }
        }
        EvalCmd::Covotes { graph, activity, communities, min_size } => {
            let model = ModelArgs { graph: graph.clone(), ..ModelArgs::default() };
            let cfg = effective_config(cli, Some(&model))?;
            let g = load_graph(&cfg)?;
            let log = ActivityLog::load(activity)?;
            let part = partition_from_json(&g, communities)?;
            let rep = evaluation::covote_quality(&g, &part, &log, *min_size)?;
            let hash = invocation_hash(
                "evaluate-covotes",
                &cfg,
                json!({ "activity": activity, "communities": communities, "min_size": min_size }),
            );
            let doc = json!({
                "config_hash": hash,
                "min_size": min_size,
                "unweighted_mean": rep.unweighted_mean,
                "weighted_mean": rep.weighted_mean,
                "users_missing_from_log": rep.users_missing_from_log,
                "per_community": rep.per_community,
            });
            write_out(
                &cfg,
                "covotes.json",
                &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")),
            )?;
            println!(
                "mean co-votes: {:.4} unweighted, {:.4} size-weighted over {} community(ies)",
                rep.unweighted_mean,
                rep.weighted_mean,
                rep.per_community.len()
            );
        }
        EvalCmd::Purity { graph, attributes, feature, communities, min_size } => {
            let model = ModelArgs { graph: graph.clone(), ..ModelArgs::default() };
            let cfg = effective_config(cli, Some(&model))?;
            let g = load_graph(&cfg)?;
            let attrs = AttributeTable::load(attributes)?;
            let part = partition_from_json(&g, communities)?;
            let rep = evaluation::feature_purity(&g, &part, &attrs, feature, *min_size)?;
            let hash = invocation_hash(
                "evaluate-purity",
                &cfg,
                json!({
                    "attributes": attributes,
                    "feature": feature,
                    "communities": communities,
                    "min_size": min_size,
                }),
            );
            let doc = json!({
                "config_hash": hash,
                "feature": feature,
                "min_size": min_size,
                "unweighted_mean": rep.unweighted_mean,
                "weighted_mean": rep.weighted_mean,
                "all_missing_excluded": rep.all_missing_excluded,
                "per_community": rep.per_community,
            });
            write_out(
                &cfg,
                &format!("purity_{feature}.json"),
                &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")),
            )?;
            println!(
                "purity of {feature:?}: {:.4} unweighted, {:.4} size-weighted",
                rep.unweighted_mean, rep.weighted_mean
            );
        }
    }
    Ok(())
}
