//! The `lesc` command-line tool.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 unimplemented method,
//! 5 algorithmic degeneracy.

pub mod benchmark;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lesc::{
    ari, baseline_cluster, lesc_bipartition, lesc_k, misclustering_error, sample_dsbm2, sample_dsbm_meta,
    shuffle_vertices, theory, BaselineConfig, BaselineMethod, DirectedGraph, DsbmParams, EigenConfig, KmeansConfig,
    Labeling, LescConfig, LescInit, MetaGraph,
};
use serde::Serialize;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "LESC_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Unimplemented(String),
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
            Self::Unimplemented(_) => 4,
            Self::Degenerate(_) => 5,
        }
    }
}

impl From<lesc::Error> for CliError {
    fn from(err: lesc::Error) -> Self {
        use lesc::Error as E;
        let msg = err.to_string();
        match err {
            E::Io(_) | E::Parse { .. } => Self::Io(msg),
            E::UnsplittableCluster(_) | E::DegenerateCore | E::EmptyCluster(_) => Self::Degenerate(msg),
            _ => Self::Usage(msg),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        Self::Io(err.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "lesc", version, about = "Spectral clustering of directed graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph from a directed block model.
    Generate(GenerateArgs),
    /// Cluster a graph file.
    Cluster(ClusterArgs),
    /// Score a predicted labeling against the truth.
    Evaluate(EvaluateArgs),
    /// Run a parameter sweep described by a JSON config.
    Benchmark(BenchmarkArgs),
    /// Tabulate the population diagnostics over an eta grid.
    Theory(TheoryArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub model: Model,
}

#[derive(Debug, Args)]
pub struct SampleOutput {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge-list path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Planted-label path.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Randomly relabel the vertices after sampling.
    #[arg(long)]
    pub shuffle: bool,
}

#[derive(Debug, Subcommand)]
pub enum Model {
    /// Two communities; community 0 is the source.
    Dsbm2 {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[command(flatten)]
        sample: SampleOutput,
    },
    /// Several communities with a meta-graph of oriented pairs.
    Meta {
        /// Comma-separated community sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Meta-graph JSON file `{"k": .., "oriented_pairs": [[a, b], ..]}`.
        #[arg(long, conflicts_with = "shape")]
        meta: Option<PathBuf>,
        /// Built-in meta-graph over all communities.
        #[arg(long, value_enum)]
        shape: Option<MetaShape>,
        #[command(flatten)]
        sample: SampleOutput,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetaShape {
    /// `0 -> 1 -> ... -> k-1`
    Path,
    /// `0 -> 1 -> ... -> k-1 -> 0`
    Cycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    RandomParams,
    FlowMatrix,
    TotalFlow,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// One of lesc, sym, bibsym, herm.
    #[arg(long, default_value = "lesc")]
    pub method: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output label file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Ground-truth labels for an ARI in the report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Symmetric degree normalization before clustering.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = InitArg::FlowMatrix)]
    pub init: InitArg,
    /// Warm-start labels for the first split (overrides --init).
    #[arg(long)]
    pub warm_labels: Option<PathBuf>,
    /// Per-round CSV trace (lesc with k = 2).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub max_outer_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub eigen_tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub eigen_max_iter: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// JSON benchmark config.
    pub config: PathBuf,
    /// Overrides the config's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long, default_value_t = 1000)]
    pub n1: usize,
    #[arg(long, default_value_t = 1000)]
    pub n2: usize,
    #[arg(long, default_value_t = 0.01)]
    pub p: f64,
    #[arg(long, default_value_t = 0.01)]
    pub q: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 51)]
    pub points: usize,
    /// k-means approximation factor in the bound.
    #[arg(long, default_value_t = theory::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Method names the tool knows but does not implement.
pub const UNIMPLEMENTED_METHODS: [(&str, &str); 6] = [
    ("disim", "DI-SIM"),
    ("disim-l", "DI-SIM (left)"),
    ("disim-r", "DI-SIM (right)"),
    ("dscore", "D-SCORE"),
    ("simpherm", "SimpHerm"),
    ("herm-rw", "Herm (random walk)"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lesc,
    Baseline(BaselineMethod),
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Lesc => "lesc",
            Self::Baseline(m) => m.name(),
        }
    }
}

pub fn parse_method(name: &str) -> CliResult<Method> {
    let lower = name.to_ascii_lowercase();
    if lower == "lesc" {
        return Ok(Method::Lesc);
    }
    if let Ok(m) = lower.parse::<BaselineMethod>() {
        return Ok(Method::Baseline(m));
    }
    if let Some((_, display)) = UNIMPLEMENTED_METHODS.iter().find(|(n, _)| *n == lower) {
        return Err(CliError::Unimplemented(format!(
            "method `{name}` ({display}) is a recognized baseline but is not implemented"
        )));
    }
    Err(CliError::Usage(format!(
        "unknown method `{name}`; expected one of lesc, sym, bibsym, herm"
    )))
}

/// Applies [`THREADS_ENV`] to the global thread pool. Later calls are no-ops.
pub fn configure_threads() -> CliResult<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
        // already-initialized pools keep their size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Theory(args) => cmd_theory(args),
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_graph(path: &Path) -> CliResult<DirectedGraph> {
    Ok(lesc::io::read_edge_list(open(path)?)?)
}

pub fn read_labels(path: &Path) -> CliResult<Labeling> {
    Ok(lesc::io::read_labels(open(path)?)?)
}

fn write_labels(path: &Path, labels: &Labeling) -> CliResult<()> {
    Ok(lesc::io::write_labels(create(path)?, labels)?)
}

pub fn cmd_generate(args: GenerateArgs) -> CliResult<()> {
    let (graph, labels, sample) = match args.model {
        Model::Dsbm2 { n1, n2, sample } => {
            let params = DsbmParams::two(n1, n2, sample.p, sample.q, sample.eta)?;
            let (g, l) = sample_dsbm2(&params, sample.seed)?;
            (g, l, sample)
        }
        Model::Meta {
            sizes,
            meta,
            shape,
            sample,
        } => {
            let k = sizes.len();
            let meta = match (meta, shape) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    MetaGraph::from_json(&text)?
                }
                (None, Some(MetaShape::Path)) => MetaGraph::path(k),
                (None, Some(MetaShape::Cycle)) => MetaGraph::cycle(k),
                (None, None) => return Err(CliError::Usage("meta model needs --meta or --shape".into())),
            };
            let params = DsbmParams::new(sizes, sample.p, sample.q, sample.eta)?;
            let (g, l) = sample_dsbm_meta(&params, &meta, sample.seed)?;
            (g, l, sample)
        }
    };
    let (graph, labels) = if sample.shuffle {
        shuffle_vertices(&graph, &labels, sample.seed)?
    } else {
        (graph, labels)
    };
    let summary = format!("N={} |E|={}", graph.n(), graph.edge_count());
    match &sample.out {
        Some(path) => {
            lesc::io::write_edge_list(create(path)?, &graph)?;
            println!("{summary}");
        }
        None => {
            lesc::io::write_edge_list(io::stdout().lock(), &graph)?;
            eprintln!("{summary}");
        }
    }
    if let Some(path) = &sample.labels {
        write_labels(path, &labels)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ClusterReport {
    pub method: String,
    pub k: usize,
    pub seed: u64,
    pub n: usize,
    pub edges: usize,
    pub normalized: bool,
    /// Outer rounds (lesc, k = 2) or splits (recursive runs).
    pub iterations: usize,
    pub params: Option<lesc::ModelParams>,
    pub eigen_unconverged: Option<bool>,
    pub ari: Option<f64>,
    pub error_rate: Option<f64>,
    pub wall_secs: f64,
}

fn lesc_config(args: &ClusterArgs, n: usize) -> CliResult<LescConfig> {
    let init = match &args.warm_labels {
        Some(path) => {
            let labels = read_labels(path)?;
            if labels.len() != n {
                return Err(CliError::Usage(format!(
                    "warm labels have {} entries for {n} vertices",
                    labels.len()
                )));
            }
            LescInit::WarmLabels(Labeling::new(labels.into_assignments(), 2)?)
        }
        None => match args.init {
            InitArg::RandomParams => LescInit::RandomParams,
            InitArg::FlowMatrix => LescInit::FlowMatrix,
            InitArg::TotalFlow => LescInit::TotalFlow,
        },
    };
    Ok(LescConfig {
        max_outer_iter: args.max_outer_iter,
        init,
        eigen: EigenConfig {
            tol: args.eigen_tol,
            max_iter: args.eigen_max_iter,
            seed: 0,
        },
        kmeans: KmeansConfig {
            restarts: args.restarts,
            ..KmeansConfig::default()
        },
        seed: args.seed,
    })
}

pub fn cmd_cluster(args: ClusterArgs) -> CliResult<()> {
    let method = parse_method(&args.method)?;
    if args.k < 2 {
        return Err(CliError::Usage(format!("--k must be at least 2, got {}", args.k)));
    }
    let mut graph = read_graph(&args.graph)?;
    if args.normalize {
        graph = graph.symmetric_normalize();
    }
    let truth = args.truth.as_deref().map(read_labels).transpose()?;
    let cfg = lesc_config(&args, graph.n())?;
    let started = Instant::now();
    let (labels, iterations, params, unconverged, trace) = match method {
        Method::Lesc if args.k == 2 => {
            let r = lesc_bipartition(&graph, &cfg)?;
            let iterations = r.trace.len();
            let unconverged = r.trace.any_unconverged();
            (r.labels, iterations, Some(r.params), Some(unconverged), Some(r.trace))
        }
        Method::Lesc => (lesc_k(&graph, args.k, &cfg)?, args.k - 1, None, None, None),
        Method::Baseline(m) => {
            let bcfg = BaselineConfig {
                eigen: cfg.eigen,
                kmeans: cfg.kmeans,
                seed: args.seed,
            };
            (baseline_cluster(&graph, m, args.k, &bcfg)?, args.k - 1, None, None, None)
        }
    };
    let wall_secs = started.elapsed().as_secs_f64();
    let (ari_value, error_rate) = match &truth {
        Some(t) => (
            Some(ari(t, &labels)?),
            Some(misclustering_error(t, &labels)? as f64 / labels.len() as f64),
        ),
        None => (None, None),
    };
    if let Some(path) = &args.out {
        write_labels(path, &labels)?;
    }
    if let (Some(path), Some(trace)) = (&args.trace, &trace) {
        trace.write_csv(create(path)?)?;
    }
    let report = ClusterReport {
        method: method.name().to_string(),
        k: args.k,
        seed: args.seed,
        n: graph.n(),
        edges: graph.edge_count(),
        normalized: args.normalize,
        iterations,
        params,
        eigen_unconverged: unconverged,
        ari: ari_value,
        error_rate,
        wall_secs,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.report {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{json}")?;
            w.flush()?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct EvaluateReport {
    pub n: usize,
    pub ari: f64,
    pub misclustering_error: usize,
    pub error_rate: f64,
}

pub fn cmd_evaluate(args: EvaluateArgs) -> CliResult<()> {
    let truth = read_labels(&args.truth)?;
    let pred = read_labels(&args.pred)?;
    let errors = misclustering_error(&truth, &pred)?;
    let report = EvaluateReport {
        n: truth.len(),
        ari: ari(&truth, &pred)?,
        misclustering_error: errors,
        error_rate: errors as f64 / truth.len().max(1) as f64,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

pub fn cmd_benchmark(args: BenchmarkArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let mut config: benchmark::BenchmarkConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad benchmark config: {e}")))?;
    if let Some(out) = args.out {
        config.output = out;
    }
    let rows = benchmark::run_benchmark(&config)?;
    benchmark::write_results(&config.output, &rows)?;
    let aggregate_path = config.aggregate_path();
    benchmark::write_aggregate(&aggregate_path, &benchmark::aggregate(&rows))?;
    println!(
        "{} rows -> {}, aggregate -> {}",
        rows.len(),
        config.output.display(),
        aggregate_path.display()
    );
    Ok(())
}

/// One row of the theory table.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub eta: f64,
    pub l: f64,
    pub delta: f64,
    /// 0 when the centroids coincide.
    pub d: f64,
    /// Infinite when the centroids coincide.
    pub bound: f64,
}

pub fn theory_rows(args: &TheoryArgs) -> CliResult<Vec<TheoryRow>> {
    if args.points == 0 {
        return Err(CliError::Usage("--points must be at least 1".into()));
    }
    if !(0.0..=0.5).contains(&args.eta_min) || !(0.0..=0.5).contains(&args.eta_max) || args.eta_min > args.eta_max {
        return Err(CliError::Usage("eta grid must satisfy 0 <= eta-min <= eta-max <= 0.5".into()));
    }
    if args.n1 == 0 || args.n2 == 0 {
        return Err(CliError::Usage("--n1 and --n2 must be positive".into()));
    }
    if !(args.epsilon > 0.0) {
        return Err(CliError::Usage("--epsilon must be positive".into()));
    }
    (0..args.points)
        .map(|i| {
            let eta = if args.points == 1 {
                args.eta_min
            } else {
                args.eta_min + (args.eta_max - args.eta_min) * i as f64 / (args.points - 1) as f64
            };
            let s = theory::population_summary(args.n1, args.n2, args.p, args.q, eta, args.epsilon)?;
            Ok(TheoryRow {
                eta,
                l: theory::l_eta(eta),
                delta: s.delta,
                d: s.centroid_distance.unwrap_or(0.0),
                bound: s.error_bound.unwrap_or(f64::INFINITY),
            })
        })
        .collect()
}

pub fn write_theory_csv<W: Write>(mut w: W, rows: &[TheoryRow]) -> io::Result<()> {
    writeln!(w, "eta,L,delta,d,bound")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.eta, r.l, r.delta, r.d, r.bound)?;
    }
    w.flush()
}

pub fn cmd_theory(args: TheoryArgs) -> CliResult<()> {
    let rows = theory_rows(&args)?;
    match &args.out {
        Some(path) => write_theory_csv(create(path)?, &rows)?,
        None => write_theory_csv(io::stdout().lock(), &rows)?,
    }
    Ok(())
}
