//! Command-line frontend binding graph ingestion, sampling, metrics,
//! report comparison, and benchmarking.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use gsamp_core::io::{
    generate_synthetic, read_edge_list, read_report, write_dot, write_edge_list, write_report,
    EdgeListFormat, SyntheticSpec,
};
use gsamp_core::metrics::{compare_reports, metrics_report, MetricsOptions};
use gsamp_core::sampling::sample;
use gsamp_core::{
    Algorithm, ExecutionContext, Graph, LocalCcMode, NeighborhoodDirection, SampleConfig,
    SampleSize,
};

#[derive(Parser)]
#[command(
    name = "gsamp",
    version,
    about = "Parallel in-memory graph sampling toolkit",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write the result as an edge list
    Sample(SampleArgs),
    /// Compute a graph's metric report
    Metrics(MetricsArgs),
    /// Print a side-by-side diff of two metric reports
    Compare(CompareArgs),
    /// Time sampling jobs across parallelism degrees, appending CSV rows
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Rv,
    Re,
    Rvn,
    Rw,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Rv => Algorithm::Rv,
            AlgorithmArg::Re => Algorithm::Re,
            AlgorithmArg::Rvn => Algorithm::Rvn,
            AlgorithmArg::Rw => Algorithm::Rw,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    In,
    Out,
    Both,
}

impl From<DirectionArg> for NeighborhoodDirection {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::In => NeighborhoodDirection::Incoming,
            DirectionArg::Out => NeighborhoodDirection::Outgoing,
            DirectionArg::Both => NeighborhoodDirection::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LocalCcModeArg {
    Directed,
    Undirected,
}

impl From<LocalCcModeArg> for LocalCcMode {
    fn from(m: LocalCcModeArg) -> Self {
        match m {
            LocalCcModeArg::Directed => LocalCcMode::Directed,
            LocalCcModeArg::Undirected => LocalCcMode::Undirected,
        }
    }
}

/// `n=<int>,m=<int>[,gamma=<float>]`
#[derive(Clone, Copy, Debug)]
struct GenerateArg {
    n: u64,
    m: u64,
    gamma: Option<f64>,
}

fn parse_generate(raw: &str) -> Result<GenerateArg, String> {
    let mut n = None;
    let mut m = None;
    let mut gamma = None;
    for part in raw.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        match key.trim() {
            "n" => n = Some(value.trim().parse::<u64>().map_err(|e| e.to_string())?),
            "m" => m = Some(value.trim().parse::<u64>().map_err(|e| e.to_string())?),
            "gamma" => gamma = Some(value.trim().parse::<f64>().map_err(|e| e.to_string())?),
            other => return Err(format!("unknown generator key {other:?}")),
        }
    }
    Ok(GenerateArg {
        n: n.ok_or("missing n=<int>")?,
        m: m.ok_or("missing m=<int>")?,
        gamma,
    })
}

fn parse_unit_interval(raw: &str) -> Result<f64, String> {
    let v: f64 = raw.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must lie in [0, 1], got {v}"))
    }
}

fn parse_at_least_one(raw: &str) -> Result<usize, String> {
    let v: usize = raw.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    #[arg(long, value_parser = parse_unit_interval)]
    sample_size: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighborhood direction; only valid with --algorithm rvn
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Walker count; only valid with --algorithm rw
    #[arg(long, value_parser = parse_at_least_one)]
    walkers: Option<usize>,
    /// Jump probability; only valid with --algorithm rw
    #[arg(long, value_parser = parse_unit_interval)]
    jump_probability: Option<f64>,
    #[arg(long, value_parser = parse_at_least_one, default_value_t = default_parallelism())]
    parallelism: usize,
    /// Edge list to sample
    #[arg(long, required_unless_present = "generate", conflicts_with = "generate")]
    input: Option<PathBuf>,
    /// Synthetic input instead of a file: n=<int>,m=<int>[,gamma=<float>]
    #[arg(long, value_parser = parse_generate)]
    generate: Option<GenerateArg>,
    /// Output edge list
    #[arg(long)]
    output: PathBuf,
    /// Also write a DOT rendering of the sample
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Report path; a .json extension selects the structured format
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    skip_heavy_metrics: bool,
    #[arg(long, value_enum, default_value = "directed")]
    local_cc_mode: LocalCcModeArg,
    #[arg(long, value_parser = parse_at_least_one, default_value_t = default_parallelism())]
    parallelism: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// Baseline report
    report_a: PathBuf,
    /// Report to compare against the baseline
    report_b: PathBuf,
    /// Write the table here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    #[arg(long, value_parser = parse_unit_interval, default_value_t = 0.1)]
    sample_size: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighborhood direction; only valid with --algorithm rvn
    #[arg(long, value_enum)]
    direction: Option<DirectionArg>,
    /// Walker count; only valid with --algorithm rw (default 3000)
    #[arg(long, value_parser = parse_at_least_one)]
    walkers: Option<usize>,
    /// Jump probability; only valid with --algorithm rw
    #[arg(long, value_parser = parse_unit_interval)]
    jump_probability: Option<f64>,
    /// Comma-separated parallelism degrees, one CSV row each
    #[arg(long, value_delimiter = ',', value_parser = parse_at_least_one, default_value = "1,2,4,8")]
    parallelism: Vec<usize>,
    #[arg(long, required_unless_present = "generate", conflicts_with = "generate")]
    input: Option<PathBuf>,
    /// Synthetic input instead of a file: n=<int>,m=<int>[,gamma=<float>]
    #[arg(long, value_parser = parse_generate)]
    generate: Option<GenerateArg>,
    /// CSV file to append result rows to
    #[arg(long)]
    out: PathBuf,
    /// Timed executions averaged per row
    #[arg(long, value_parser = parse_at_least_one, default_value_t = 3)]
    repetitions: usize,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => run_sample(args),
        Command::Metrics(args) => run_metrics(args),
        Command::Compare(args) => run_compare(args),
        Command::Bench(args) => run_bench(args),
    };
    if let Err(e) = result {
        eprintln!("gsamp: {e:#}");
        std::process::exit(1);
    }
}

/// Flags that only apply to one algorithm are usage errors elsewhere.
fn check_algorithm_flags(
    algorithm: AlgorithmArg,
    direction: Option<DirectionArg>,
    walkers: Option<usize>,
    jump_probability: Option<f64>,
) {
    let reject = |flag: &str| -> ! {
        Cli::command()
            .error(
                ErrorKind::ArgumentConflict,
                format!("{flag} does not apply to the selected algorithm"),
            )
            .exit()
    };
    if direction.is_some() && !matches!(algorithm, AlgorithmArg::Rvn) {
        reject("--direction");
    }
    if walkers.is_some() && !matches!(algorithm, AlgorithmArg::Rw) {
        reject("--walkers");
    }
    if jump_probability.is_some() && !matches!(algorithm, AlgorithmArg::Rw) {
        reject("--jump-probability");
    }
}

fn build_config(
    algorithm: AlgorithmArg,
    sample_size: f64,
    seed: u64,
    direction: Option<DirectionArg>,
    walkers: Option<usize>,
    jump_probability: Option<f64>,
    default_walkers: usize,
) -> anyhow::Result<SampleConfig> {
    let mut config = SampleConfig::new(
        algorithm.into(),
        SampleSize::new(sample_size)?,
        seed,
    );
    config.direction = direction.map(Into::into).unwrap_or(NeighborhoodDirection::Both);
    config.walkers = walkers.unwrap_or(default_walkers);
    config.jump_probability = jump_probability.unwrap_or(0.1);
    Ok(config)
}

fn load_graph(
    ctx: &ExecutionContext,
    input: &Option<PathBuf>,
    generate: &Option<GenerateArg>,
    seed: u64,
) -> anyhow::Result<Graph> {
    match (input, generate) {
        (Some(path), None) => read_edge_list(ctx, path, &EdgeListFormat::default())
            .with_context(|| format!("reading {}", path.display())),
        (None, Some(g)) => {
            let mut spec = SyntheticSpec::new(g.n, g.m, seed);
            if let Some(gamma) = g.gamma {
                spec.gamma = gamma;
            }
            Ok(generate_synthetic(ctx, &spec)?)
        }
        _ => unreachable!("clap enforces exactly one graph source"),
    }
}

fn run_sample(args: SampleArgs) -> anyhow::Result<()> {
    check_algorithm_flags(args.algorithm, args.direction, args.walkers, args.jump_probability);
    let config = build_config(
        args.algorithm,
        args.sample_size,
        args.seed,
        args.direction,
        args.walkers,
        args.jump_probability,
        1,
    )?;
    let ctx = ExecutionContext::new(args.parallelism, args.seed)?;
    let graph = load_graph(&ctx, &args.input, &args.generate, args.seed)?;
    let sampled = sample(&graph, &config)?;
    write_edge_list(&sampled, &args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    if let Some(dot) = &args.dot {
        write_dot(&sampled, dot, LocalCcMode::Directed)
            .with_context(|| format!("writing {}", dot.display()))?;
    }
    println!(
        "sampled {} of {} vertices, {} of {} edges -> {}",
        sampled.vertex_count(),
        graph.vertex_count(),
        sampled.edge_count(),
        graph.edge_count(),
        args.output.display()
    );
    Ok(())
}

fn run_metrics(args: MetricsArgs) -> anyhow::Result<()> {
    let ctx = ExecutionContext::new(args.parallelism, 0)?;
    let graph = read_edge_list(&ctx, &args.input, &EdgeListFormat::default())
        .with_context(|| format!("reading {}", args.input.display()))?;
    let options = MetricsOptions {
        skip_heavy: args.skip_heavy_metrics,
        local_cc_mode: args.local_cc_mode.into(),
    };
    let report = metrics_report(&graph, &options);
    write_report(&report, &args.output)
        .with_context(|| format!("writing {}", args.output.display()))?;
    print!("{}", gsamp_core::io::report_to_text(&report));
    Ok(())
}

fn run_compare(args: CompareArgs) -> anyhow::Result<()> {
    let a = read_report(&args.report_a)
        .with_context(|| format!("reading {}", args.report_a.display()))?;
    let b = read_report(&args.report_b)
        .with_context(|| format!("reading {}", args.report_b.display()))?;
    let table = compare_reports(&a, &b).to_string();
    match &args.output {
        Some(path) => std::fs::write(path, &table)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{table}"),
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> anyhow::Result<()> {
    check_algorithm_flags(args.algorithm, args.direction, args.walkers, args.jump_probability);
    let config = build_config(
        args.algorithm,
        args.sample_size,
        args.seed,
        args.direction,
        args.walkers,
        args.jump_probability,
        // The multi-walker setup the scalability runs use.
        3000,
    )?;

    // Synthetic graphs are generated once, outside the timed span; the
    // timed span then covers sample + write. File inputs are re-read inside
    // the span so it covers read + sample + write.
    let pregenerated = match (&args.input, &args.generate) {
        (None, Some(_)) => {
            let ctx = ExecutionContext::new(args.parallelism[0], args.seed)?;
            Some(load_graph(&ctx, &args.input, &args.generate, args.seed)?)
        }
        _ => None,
    };

    let scratch = tempfile::NamedTempFile::new().context("creating scratch output file")?;

    let mut rows = Vec::new();
    for &parallelism in &args.parallelism {
        let ctx = ExecutionContext::new(parallelism, args.seed)?;
        let staged = pregenerated.as_ref().map(|g| g.with_context(&ctx));
        let mut seconds_total = 0.0;
        let mut cardinality: Option<(usize, usize, usize, usize)> = None;
        for _ in 0..args.repetitions {
            let start = Instant::now();
            let graph = match &staged {
                Some(g) => g.clone(),
                None => load_graph(&ctx, &args.input, &args.generate, args.seed)?,
            };
            let sampled = sample(&graph, &config)?;
            write_edge_list(&sampled, scratch.path())?;
            seconds_total += start.elapsed().as_secs_f64();

            let this = (
                graph.vertex_count(),
                graph.edge_count(),
                sampled.vertex_count(),
                sampled.edge_count(),
            );
            if let Some(previous) = cardinality {
                anyhow::ensure!(
                    previous == this,
                    "nondeterministic sample across repetitions"
                );
            }
            cardinality = Some(this);
        }
        let (n, m, sample_vertices, sample_edges) =
            cardinality.expect("at least one repetition ran");
        let seconds = seconds_total / args.repetitions as f64;
        let row = format!(
            "{},{},{},{},{:.6},{},{}",
            config.algorithm.name(),
            n,
            m,
            parallelism,
            seconds,
            sample_vertices,
            sample_edges
        );
        println!("{row}");
        rows.push(row);
    }

    append_csv(&args.out, &rows)?;
    Ok(())
}

const BENCH_CSV_HEADER: &str = "algorithm,n,m,parallelism,seconds,sample_vertices,sample_edges";

fn append_csv(path: &PathBuf, rows: &[String]) -> anyhow::Result<()> {
    use std::io::Write;
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(file, "{BENCH_CSV_HEADER}")?;
    }
    for row in rows {
        writeln!(file, "{row}")?;
    }
    Ok(())
}
