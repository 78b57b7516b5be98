mod figures;
mod points;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphmetric::joint::product_law_report;
use graphmetric::laws::{self, Law};
use graphmetric::{
    distance_distribution, generate, graphon_distance, log_distance_ratio_distribution, step_graphon,
    union_decomposition, Digraph, DistanceTable, DistributionSummary, Error, EstimatorConfig, EstimatorMode,
    Evaluation, ExportFormat, GraphKind, Graphon, Metric, Path as PathFn, SampleMode, SampleSource, SampleSpec,
    Space,
};
use num_complex::Complex;
use serde_json::json;

#[derive(Parser)]
#[command(name = "graphmetric", version, about = "Graph-parameterized joint metrics on product spaces")]
struct Cli {
    /// Seed for every random choice made by the subcommand.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (a directory for `reproduce-figure`). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic graph as JSON.
    Generate(GenerateArgs),
    /// Joint distances for consecutive row pairs of a points CSV.
    Dist(DistArgs),
    /// Run a randomized law suite; exits 1 if any trial fails.
    Verify(VerifyArgs),
    /// Disjoint-union decomposition records as JSON.
    Union(UnionArgs),
    /// Cartesian product graph, and product-law reports for point pairs.
    Product(ProductArgs),
    /// Graphon-limit distance between two path functions.
    Graphon(GraphonArgs),
    /// Distance or log-distance-ratio histogram over sampled pairs.
    Experiment(ExperimentArgs),
    /// Reproduce one of the distribution figures.
    #[command(long_about = figures::HELP)]
    ReproduceFigure(FigureArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Null,
    Complete,
    StarOut,
    StarIn,
    Chain,
    Cycle,
    Grid2d,
    WattsStrogatz,
    RandomSparse,
    Buckyball,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[arg(long)]
    n: Option<usize>,
    /// Ring-lattice degree (watts-strogatz).
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability (watts-strogatz).
    #[arg(long)]
    beta: Option<f64>,
    /// Undirected edge count (random-sparse).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Weight of every explicit edge.
    #[arg(long, default_value_t = 1.0)]
    weight: f64,
    /// Keep only edges (j, i) with j <= i.
    #[arg(long)]
    upper: bool,
    /// Replace the graph by its transitive closure.
    #[arg(long)]
    transitive: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    HalfAbsolute,
    Discrete,
}

#[derive(Args)]
struct SpaceArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::HalfAbsolute)]
    metric: MetricArg,
    /// Finite metric table used for every coordinate instead of `--metric`.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct DistArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// CSV of points; rows 2k and 2k+1 form a pair.
    #[arg(long)]
    points: PathBuf,
    /// Evaluate the product directly instead of in the log domain.
    #[arg(long)]
    direct: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_law)]
    law: Law,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Args)]
struct UnionArgs {
    /// Part graphs, in block order. Repeat the flag for each part.
    #[arg(long = "graph", required = true)]
    graphs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricArg::HalfAbsolute)]
    metric: MetricArg,
    /// Points over the concatenated coordinates; rows pair up two at a time.
    #[arg(long)]
    points: PathBuf,
}

#[derive(Args)]
struct ProductArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// Codomain metric table for the right factor's coordinates (default: discrete on 2 points).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Product points: one function index per product vertex `u1 * n2 + u2`,
    /// indexing functions from the left vertex's domain into the right vertex's codomain.
    #[arg(long)]
    points: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    MonteCarlo,
    Grid,
}

#[derive(Args)]
struct GraphonArgs {
    /// Symmetric graph whose step graphon is used.
    #[arg(long, conflicts_with = "constant")]
    graph: Option<PathBuf>,
    /// Constant graphon value in (0, 1].
    #[arg(long)]
    constant: Option<f64>,
    /// Value assigned to cells of absent edges.
    #[arg(long, default_value_t = graphmetric::graphon::DEFAULT_FLOOR)]
    floor: f64,
    /// Path function `g` as JSON, or a real constant.
    #[arg(long)]
    g: String,
    /// Path function `h` as JSON, or a real constant.
    #[arg(long)]
    h: String,
    #[arg(long, value_enum, default_value_t = EstimatorArg::MonteCarlo)]
    mode: EstimatorArg,
    #[arg(long, default_value_t = 4096)]
    outer: usize,
    #[arg(long, default_value_t = graphmetric::graphon::DEFAULT_INNER_BATCH)]
    inner: usize,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Fail on saturated elemental distances instead of clamping them.
    #[arg(long)]
    no_clamp: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    CubeVolume,
    CubeVertices,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Distance,
    LogRatio,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Random,
    Exhaustive,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = SourceArg::CubeVolume)]
    source: SourceArg,
    #[arg(long, value_enum, default_value_t = QuantityArg::Distance)]
    quantity: QuantityArg,
    #[arg(long, default_value_t = graphmetric::experiment::DEFAULT_PAIRS)]
    pairs: usize,
    #[arg(long, default_value_t = graphmetric::experiment::DEFAULT_BINS)]
    bins: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// Evaluate the transitive closure of the graph (poset weights).
    #[arg(long)]
    transitive: bool,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, value_parser = figures::IDS)]
    id: String,
    #[arg(long, default_value_t = graphmetric::experiment::DEFAULT_PAIRS)]
    pairs: usize,
    #[arg(long, default_value_t = graphmetric::experiment::DEFAULT_BINS)]
    bins: usize,
}

fn parse_law(s: &str) -> Result<Law, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvariantViolation(_) => Failure::Verification(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let json_errors = argv.windows(2).any(|w| w[0] == "--format" && w[1] == "json")
        || argv.iter().any(|a| a == "--format=json");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if json_errors {
                eprintln!("{}", json!({"error": "usage", "message": e.to_string().trim()}));
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    if let Err(msg) = configure_threads() {
        return report(json_errors, Failure::Usage(msg));
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(cli.format == Format::Json, f),
    }
}

fn report(json_errors: bool, failure: Failure) -> ExitCode {
    let (kind, message, code) = match failure {
        Failure::Usage(m) => ("usage", m, 2),
        Failure::Verification(m) => ("verification", m, 1),
    };
    if json_errors {
        eprintln!("{}", json!({"error": kind, "message": message}));
    } else {
        eprintln!("error: {message}");
    }
    ExitCode::from(code)
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("GRAPHMETRIC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("GRAPHMETRIC_THREADS must be a non-negative integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Generate(a) => cmd_generate(cli, a),
        Command::Dist(a) => cmd_dist(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Union(a) => cmd_union(cli, a),
        Command::Product(a) => cmd_product(cli, a),
        Command::Graphon(a) => cmd_graphon(cli, a),
        Command::Experiment(a) => cmd_experiment(cli, a),
        Command::ReproduceFigure(a) => figures::reproduce(cli.out.as_deref(), cli.seed, &a.id, a.pairs, a.bins),
    }
}

/// Writes `text` to `--out`, or stdout when absent.
fn emit(cli: &Cli, text: &str) -> Outcome {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Usage(format!("--{flag} is required for --kind {kind}")))
}

fn cmd_generate(cli: &Cli, a: &GenerateArgs) -> Outcome {
    let n = |kind| need(a.n, "n", kind);
    let kind = match a.kind {
        KindArg::Null => GraphKind::Null { n: n("null")? },
        KindArg::Complete => GraphKind::Complete { n: n("complete")? },
        KindArg::StarOut => GraphKind::StarOut { n: n("star-out")? },
        KindArg::StarIn => GraphKind::StarIn { n: n("star-in")? },
        KindArg::Chain => GraphKind::Chain { n: n("chain")? },
        KindArg::Cycle => GraphKind::Cycle { n: n("cycle")? },
        KindArg::Grid2d => GraphKind::Grid2d {
            rows: need(a.rows, "rows", "grid2d")?,
            cols: need(a.cols, "cols", "grid2d")?,
        },
        KindArg::WattsStrogatz => GraphKind::WattsStrogatz {
            n: n("watts-strogatz")?,
            k: need(a.k, "k", "watts-strogatz")?,
            beta: need(a.beta, "beta", "watts-strogatz")?,
            seed: cli.seed,
        },
        KindArg::RandomSparse => GraphKind::RandomSparse {
            n: n("random-sparse")?,
            m: need(a.m, "m", "random-sparse")?,
            seed: cli.seed,
        },
        KindArg::Buckyball => GraphKind::Buckyball,
    };
    let mut g: Digraph = generate(&kind, a.weight)?;
    if a.upper {
        g = g.upper();
    }
    if a.transitive {
        g = g.transitive_closure();
    }
    emit(cli, &g.to_json_string())
}

fn metric(arg: MetricArg) -> Metric {
    match arg {
        MetricArg::HalfAbsolute => Metric::HalfAbsolute,
        MetricArg::Discrete => Metric::Discrete,
    }
}

fn load_space(a: &SpaceArgs) -> Result<Space, Failure> {
    let g = Digraph::read_json(&a.graph)?;
    let m = match &a.table {
        Some(path) => Metric::Table(DistanceTable::from_csv_file(path)?),
        None => metric(a.metric),
    };
    Ok(Space::uniform(g, m))
}

fn cmd_dist(cli: &Cli, a: &DistArgs) -> Outcome {
    let space = load_space(&a.space)?;
    let pairs = points::read_pairs(&a.points)?;
    let evaluation = if a.direct { Evaluation::Direct } else { Evaluation::LogDomain };
    let distances = pairs
        .iter()
        .map(|(x, y)| space.joint_distance_with(x, y, evaluation))
        .collect::<Result<Vec<f64>, Error>>()?;
    let text = match cli.format {
        Format::Json => pretty(&distances),
        _ => distances.iter().map(|d| format!("{d}\n")).collect(),
    };
    emit(cli, &text)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Outcome {
    let report = laws::verify(a.law, a.trials, cli.seed)?;
    let text = match cli.format {
        Format::Json => pretty(&report),
        _ => {
            let mut s = format!(
                "{}: {} ({} of {} trials failed, seed {}, max violation {:e})\n",
                report.law,
                if report.passed() { "PASS" } else { "FAIL" },
                report.failed,
                report.trials,
                report.seed,
                report.max_violation
            );
            for f in &report.failures {
                s.push_str(&format!("  {f}\n"));
            }
            s
        }
    };
    emit(cli, &text)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} failed {} of {} trials", report.law, report.failed, report.trials)))
    }
}

fn cmd_union(cli: &Cli, a: &UnionArgs) -> Outcome {
    let parts: Vec<Space> = a
        .graphs
        .iter()
        .map(|p| Ok(Space::uniform(Digraph::read_json(p)?, metric(a.metric))))
        .collect::<Result<_, Error>>()?;
    let refs: Vec<&Space> = parts.iter().collect();
    let records = points::read_pairs(&a.points)?
        .iter()
        .map(|(x, y)| union_decomposition(&refs, x, y))
        .collect::<Result<Vec<_>, Error>>()?;
    emit(cli, &pretty(&records))
}

fn cmd_product(cli: &Cli, a: &ProductArgs) -> Outcome {
    let g1 = Digraph::read_json(&a.left)?;
    let g2 = Digraph::read_json(&a.right)?;
    let codomain = match &a.table {
        Some(path) => DistanceTable::from_csv_file(path)?,
        None => DistanceTable::discrete(2)?,
    };
    let domain = DistanceTable::discrete(2)?;
    let s1 = Space::uniform(g1, Metric::Table(domain));
    let s2 = Space::uniform(g2, Metric::Table(codomain));
    let product = Space::cartesian_function_space(&s1, &s2)?;
    let reports = match &a.points {
        Some(path) => points::read_pairs(path)?
            .iter()
            .map(|(x, y)| product_law_report(&s1, &s2, x, y))
            .collect::<Result<Vec<_>, Error>>()?,
        None => Vec::new(),
    };
    let g = product.graph();
    let record = json!({
        "n": g.n(),
        "edges": g.edge_count(),
        "non_self_edges": g.non_self_edge_count(),
        "graph": serde_json::from_str::<serde_json::Value>(&g.to_json_string()).expect("graph json"),
        "reports": reports,
    });
    emit(cli, &pretty(&record))
}

fn path_function(spec: &str) -> Result<PathFn, Failure> {
    if let Ok(v) = spec.trim().parse::<f64>() {
        return Ok(PathFn::Constant(Complex::new(v, 0.0)));
    }
    Ok(PathFn::read_json(spec)?)
}

fn cmd_graphon(cli: &Cli, a: &GraphonArgs) -> Outcome {
    let w = match (&a.graph, a.constant) {
        (Some(path), _) => step_graphon(&Digraph::read_json(path)?, a.floor)?,
        (None, Some(c)) => Graphon::constant(c)?,
        (None, None) => return Err(Failure::Usage("one of --graph or --constant is required".into())),
    };
    let g = path_function(&a.g)?;
    let h = path_function(&a.h)?;
    let mut cfg = match a.mode {
        EstimatorArg::MonteCarlo => EstimatorConfig::monte_carlo(a.outer, cli.seed),
        EstimatorArg::Grid => EstimatorConfig::grid(a.resolution),
    };
    if let EstimatorMode::MonteCarlo { inner, .. } = &mut cfg.mode {
        *inner = a.inner;
    }
    if a.no_clamp {
        cfg.saturation_clamp = None;
    }
    let est = graphon_distance(&w, &g, &h, &cfg)?;
    let text = match cli.format {
        Format::Json => pretty(&est),
        _ => match est.std_error {
            Some(se) => format!("{} +- {se}\n", est.estimate),
            None => format!("{}\n", est.estimate),
        },
    };
    emit(cli, &text)
}

fn export_format(cli: &Cli) -> ExportFormat {
    match cli.format {
        Format::Json => ExportFormat::Json,
        Format::Svg => ExportFormat::Svg,
        Format::Csv | Format::Text => match cli.out.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
            Some("json") => ExportFormat::Json,
            Some("svg") => ExportFormat::Svg,
            _ => ExportFormat::Csv,
        },
    }
}

fn cmd_experiment(cli: &Cli, a: &ExperimentArgs) -> Outcome {
    let mut g = Digraph::read_json(&a.graph)?;
    if a.transitive {
        g = g.transitive_closure();
    }
    let source = match a.source {
        SourceArg::CubeVolume => SampleSource::CubeVolume,
        SourceArg::CubeVertices => SampleSource::CubeVertices,
    };
    let mode = match a.mode {
        ModeArg::Auto => SampleMode::Auto,
        ModeArg::Random => SampleMode::Random,
        ModeArg::Exhaustive => SampleMode::Exhaustive,
    };
    let spec = SampleSpec::new(source, a.pairs, cli.seed).with_mode(mode);
    let space = source.space(g);
    let summary: DistributionSummary = match a.quantity {
        QuantityArg::Distance => distance_distribution(&space, &spec, a.bins)?,
        QuantityArg::LogRatio => log_distance_ratio_distribution(&space, &spec, a.bins)?,
    };
    emit(cli, &summary.render(export_format(cli)))
}
