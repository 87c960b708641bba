use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use digcl::eval::{evaluate_link, link_split, probe_embeddings, LinkTask};
use digcl::graph::{load_edge_list, load_features, load_labels, write_labels};
use digcl::magnetic::{entropy_at, verify_bounded_variation, verify_monotonic_response, DEFAULT_BETA};
use digcl::sbm::{gaussian_features, generate_directed_sbm, identity_features};
use digcl::split::EdgeSplit;
use digcl::train::{embed, train as run_training, Checkpoint, TrainConfig, ViewContext};
use digcl::walk::{sample_paths, WalkMode, WalkParams};
use digcl::{Digraph, Error, FeatureMatrix, Result};

const CHECKPOINT_FILE: &str = "checkpoint.json";
const GRAPH_FILE: &str = "graph.tsv";
const FEATURES_FILE: &str = "features.csv";
const TRACE_FILE: &str = "trace.csv";
const CONFIG_FILE: &str = "config.cfg";
const SPLIT_DIR: &str = "split";

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Edge list, one `src<TAB>dst` per line.
    #[arg(long)]
    edges: PathBuf,
    /// Headerless CSV with one row per node.
    #[arg(long)]
    features: PathBuf,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the checkpoint, trace and inputs.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured epoch count.
    #[arg(long)]
    epochs: Option<usize>,
    /// Hold out validation/test edges and train on the rest (needed for link tasks).
    #[arg(long)]
    holdout_links: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Task {
    Node,
    LinkExist,
    LinkDir,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    task: Task,
    /// Checkpoint directory written by `digcl train`.
    #[arg(long)]
    ckpt: PathBuf,
    /// Headerless CSV of integer labels (node task).
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    edges: PathBuf,
    /// Uniform charge.
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    /// Also run the monotonic-response and bounded-variation checks.
    #[arg(long)]
    verify_theorems: bool,
    /// Charge increment for the bounded-variation check.
    #[arg(long, default_value_t = 0.05)]
    dq: f64,
    /// Grid size for the bounded-variation supremum.
    #[arg(long, default_value_t = 16)]
    grid: usize,
    /// Central-difference step for the monotonic-response check.
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Directory for `spectrum.csv` and `summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Bfs,
    Dfs,
}

#[derive(Debug, Args)]
pub struct WalksArgs {
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 4)]
    length: usize,
    /// Return parameter; defaults to the mode's regime.
    #[arg(long)]
    p: Option<f64>,
    /// In-out parameter; defaults to the mode's regime.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FeatureKind {
    Identity,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct SbmArgs {
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    p_fwd: f64,
    #[arg(long, default_value_t = 0.02)]
    p_back: f64,
    #[arg(long, default_value_t = 0.02)]
    p_cross: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FeatureKind::Identity)]
    features: FeatureKind,
    /// Width of Gaussian features.
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Directory for `edges.tsv`, `labels.csv` and `features.csv`.
    #[arg(long)]
    out: PathBuf,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_graph(path: &Path) -> Result<Digraph> {
    let loaded = load_edge_list(open(path)?)?;
    if loaded.dropped_self_loops + loaded.dropped_duplicates > 0 {
        log::warn!(
            "{}: dropped {} self-loops and {} duplicate edges",
            path.display(),
            loaded.dropped_self_loops,
            loaded.dropped_duplicates
        );
    }
    Ok(loaded.graph)
}

fn write_graph(g: &Digraph, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    g.write_edge_list(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_features(x: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    x.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<()> {
    let graph = read_graph(&args.edges)?;
    let features = load_features(open(&args.features)?, graph.node_count())?;
    let mut cfg = match &args.config {
        Some(path) => TrainConfig::parse(&fs::read_to_string(path)?)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        cfg.epochs = epochs;
    }
    cfg.validate()?;
    fs::create_dir_all(&args.out)?;

    let train_graph = if args.holdout_links {
        let split = link_split(&graph, &cfg)?;
        split.save(&args.out.join(SPLIT_DIR))?;
        graph.with_edges(&split.train)?
    } else {
        graph
    };
    let outcome = run_training(&train_graph, features.matrix(), &cfg)?;

    let mut w = create(&args.out.join(CHECKPOINT_FILE))?;
    Checkpoint::new(&outcome.model, &cfg, train_graph.node_count()).write_json(&mut w)?;
    w.flush()?;
    let mut w = create(&args.out.join(TRACE_FILE))?;
    outcome.trace.write_csv(&mut w)?;
    w.flush()?;
    fs::write(args.out.join(CONFIG_FILE), cfg.to_config_string())?;
    write_graph(&train_graph, &args.out.join(GRAPH_FILE))?;
    write_features(&features, &args.out.join(FEATURES_FILE))?;

    match outcome.trace.rows().last() {
        Some(last) => println!(
            "trained epochs={} L_inter={} L_intra={} L_total={}",
            last.epoch, last.inter, last.intra, last.total
        ),
        None => println!("trained epochs=0"),
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let checkpoint = Checkpoint::read_json(open(&args.ckpt.join(CHECKPOINT_FILE))?)?;
    let cfg = &checkpoint.config;
    let model = checkpoint.model()?;
    let graph = read_graph(&args.ckpt.join(GRAPH_FILE))?;
    if graph.node_count() != checkpoint.nodes {
        return Err(Error::Checkpoint(format!(
            "checkpoint was trained on {} nodes but {} has {}",
            checkpoint.nodes,
            GRAPH_FILE,
            graph.node_count()
        )));
    }
    let features = load_features(open(&args.ckpt.join(FEATURES_FILE))?, graph.node_count())?;
    let ctx = ViewContext::new(&graph, features.matrix(), cfg)?;
    let embeddings = embed(&model, &ctx, cfg)?;

    match args.task {
        Task::Node => {
            let path = args
                .labels
                .ok_or_else(|| Error::InvalidArgument("--labels is required for --task node".into()))?;
            let labels = load_labels(open(&path)?)?;
            if labels.len() != graph.node_count() {
                return Err(Error::Shape(format!("{} labels for {} nodes", labels.len(), graph.node_count())));
            }
            let r = probe_embeddings(&embeddings, &labels, cfg)?;
            println!(
                "task=node accuracy={} train={} test={} seed={}",
                r.accuracy, r.train_size, r.test_size, r.seed
            );
        }
        Task::LinkExist | Task::LinkDir => {
            let dir = args.ckpt.join(SPLIT_DIR);
            if !dir.is_dir() {
                return Err(Error::InvalidArgument(
                    "link tasks need a checkpoint trained with --holdout-links".into(),
                ));
            }
            let split = EdgeSplit::load(&dir)?;
            let (task, name) = match args.task {
                Task::LinkExist => (LinkTask::Existence, "link-exist"),
                _ => (LinkTask::Direction, "link-dir"),
            };
            let r = evaluate_link(&embeddings, &split, task, cfg)?;
            println!(
                "task={name} accuracy={} train={} test={} l2={}",
                r.accuracy(),
                r.test.train_size,
                r.test.test_size,
                r.l2
            );
        }
    }
    Ok(())
}

pub fn entropy(args: EntropyArgs) -> Result<()> {
    let graph = read_graph(&args.edges)?;
    let report = entropy_at(&graph, args.q, args.beta)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        let mut w = create(&dir.join("spectrum.csv"))?;
        report.write_csv(&mut w)?;
        w.flush()?;
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&report.summary_json())?)?;
    }
    println!("{}", report.summary_json());
    if args.verify_theorems {
        println!("{}", verify_monotonic_response(&graph, args.q, args.beta, args.eps)?);
        println!("{}", verify_bounded_variation(&graph, args.q, args.dq, args.beta, args.grid)?);
    }
    Ok(())
}

pub fn walks(args: WalksArgs) -> Result<()> {
    let graph = read_graph(&args.edges)?;
    let (mode, defaults) = match args.mode {
        Mode::Bfs => (WalkMode::Bfs, WalkParams::bfs(args.length, args.seed)),
        Mode::Dfs => (WalkMode::Dfs, WalkParams::dfs(args.length, args.seed)),
    };
    let wp = WalkParams {
        p_return: args.p.unwrap_or(defaults.p_return),
        q_inout: args.q.unwrap_or(defaults.q_inout),
        ..defaults
    };
    wp.validate()?;
    let paths = sample_paths(&graph, mode, &wp);
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            paths.write_text(&mut w)?;
            w.flush()?;
        }
        None => paths.write_text(io::stdout().lock())?,
    }
    Ok(())
}

pub fn sbm(args: SbmArgs) -> Result<()> {
    for (name, p) in [("p-fwd", args.p_fwd), ("p-back", args.p_back), ("p-cross", args.p_cross)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("--{name} = {p} outside [0, 1]")));
        }
    }
    if args.n < 2 {
        return Err(Error::InvalidArgument("--n must be at least 2".into()));
    }
    let (graph, labels) = generate_directed_sbm(args.n, args.p_fwd, args.p_back, args.p_cross, args.seed);
    let features = match args.features {
        FeatureKind::Identity => identity_features(args.n),
        FeatureKind::Gaussian => gaussian_features(args.n, args.dim, args.seed),
    };
    fs::create_dir_all(&args.out)?;
    write_graph(&graph, &args.out.join("edges.tsv"))?;
    write_features(&features, &args.out.join("features.csv"))?;
    let mut w = create(&args.out.join("labels.csv"))?;
    write_labels(&labels, &mut w)?;
    w.flush()?;
    println!("nodes={} edges={}", graph.node_count(), graph.edge_count());
    Ok(())
}
