//! `gsi`: graph construction, spectra, smoothness, sampling, interpolation
//! and benchmarks from the command line.
//!
//! Exit codes: 0 on success, 1 for bad input, 2 for numerical failures
//! (a JSON diagnostic is printed on stderr).

mod error;
mod files;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsi_core::experiments::{
    approx_bandlimited_signal, bandlimited_signal, derive_seed, random_geometric_graph, run_benchmark,
    synthetic_sensor_table, three_cluster_toy,
};
use gsi_core::graph::{geodesic_affinity, knn_affinity, Graph, Kernel, DEFAULT_DISTANCE_SCALE};
use gsi_core::interpolation::{
    interpolate_iterative_with, interpolate_one_shot, least_squares_baseline, spectral_regression_baseline,
    InterpolationResult, Method, NewNodeValues,
};
use gsi_core::io;
use gsi_core::l1::SolveStatus;
use gsi_core::nystrom::{interpolate_nystrom, nystrom_markov_eigs, NystromMode};
use gsi_core::sampling::{greedy_spectral_sample, uniform_sample, Strategy};
use gsi_core::smoothness::{evaluate, Measure, Norm};
use gsi_core::spectral::markov_eigs;
use serde_json::json;

use error::CliError;
use files::{open, sidecar_path, write_atomic};

#[derive(Parser)]
#[command(name = "gsi", version, about = "Smooth graph signal interpolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a k-nearest-neighbor graph from points or sensors.
    BuildGraph(BuildGraph),
    /// Markov eigenvalues (and optionally eigenvectors) of a graph.
    Eigs(Eigs),
    /// Smoothness of a signal on a graph.
    Smoothness(Smoothness),
    /// Choose sample nodes.
    Sample(Sample),
    /// Interpolate a sampled signal over a graph.
    Interpolate(Interpolate),
    /// Run a benchmark scenario.
    Benchmark(Benchmark),
    /// Generate synthetic graphs, signals and sensor tables.
    GenSynthetic(GenSynthetic),
}

#[derive(Args)]
struct GraphInput {
    /// Edge list CSV (`src,dst,weight`).
    #[arg(long)]
    graph: PathBuf,
    /// Node count, when trailing nodes have no listed edges.
    #[arg(long)]
    nodes: Option<usize>,
}

impl GraphInput {
    fn load(&self) -> Result<Graph, CliError> {
        io::read_graph_csv(open(&self.graph)?, self.nodes).map_err(|e| CliError::from_core(e).context(&self.graph))
    }
}

#[derive(Args)]
struct BuildGraph {
    /// Point CSV with header `x0,x1,...`.
    #[arg(long, conflicts_with = "sensors", required_unless_present = "sensors")]
    points: Option<PathBuf>,
    /// Sensor CSV with header `lon,lat,elev,value`.
    #[arg(long)]
    sensors: Option<PathBuf>,
    /// Neighbors per node.
    #[arg(long)]
    neighbors: usize,
    /// Weight kernel for points: exp_neg_dist or normalized_dist.
    #[arg(long, default_value = "exp_neg_dist")]
    kernel: String,
    /// Distance scale for sensors (haversine km multiplier).
    #[arg(long, default_value_t = DEFAULT_DISTANCE_SCALE)]
    scale: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Eigs {
    #[command(flatten)]
    input: GraphInput,
    /// Eigenvalue CSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional eigenvector CSV, one line per eigenvector.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Approximate with the Nystrom extension on the given landmarks.
    #[arg(long, requires = "landmarks")]
    nystrom: bool,
    /// Landmark index CSV (`index` column).
    #[arg(long)]
    landmarks: Option<PathBuf>,
    /// Nystrom mode: standard or revised.
    #[arg(long, default_value = "revised")]
    mode: String,
}

#[derive(Args)]
struct Smoothness {
    #[command(flatten)]
    input: GraphInput,
    /// Signal CSV (`index,value`).
    #[arg(long)]
    signal: PathBuf,
    /// markov_variation, total_variation or laplacian_quadratic.
    #[arg(long, default_value = "markov_variation")]
    measure: String,
    /// Norm order: 1, 2 or inf.
    #[arg(long, default_value = "2")]
    p: String,
}

#[derive(Args)]
struct Sample {
    /// uniform or greedy.
    #[arg(long, default_value = "uniform")]
    strategy: String,
    /// Number of samples.
    #[arg(long)]
    r: usize,
    /// Bandwidth for greedy sampling.
    #[arg(long = "K", alias = "k")]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Graph CSV; required for greedy sampling.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Node count when no graph is given.
    #[arg(long)]
    nodes: Option<usize>,
    /// Index CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Interpolate {
    #[command(flatten)]
    input: GraphInput,
    /// Sample CSV (`index,value`).
    #[arg(long)]
    samples: PathBuf,
    /// oneshot, iterative, lsq, specreg or nystrom.
    #[arg(long, default_value = "oneshot")]
    method: String,
    /// Sample tolerance; defaults to 1e-8 times the largest sample magnitude.
    #[arg(long)]
    eta: Option<f64>,
    /// Spectrum width (oneshot, iterative, lsq; default N) or bandlimit
    /// (specreg; default the sample count). Ignored by nystrom.
    #[arg(long)]
    bandwidth: Option<usize>,
    /// Nystrom mode: standard or revised.
    #[arg(long, default_value = "revised")]
    mode: String,
    /// Values for nodes joining the iterative active set: reconstruction or synthesis.
    #[arg(long, default_value = "reconstruction")]
    new_values: String,
    /// Signal CSV.
    #[arg(long)]
    out: PathBuf,
    /// JSON diagnostics; defaults to `<out>.json`.
    #[arg(long)]
    diagnostics: Option<PathBuf>,
}

#[derive(Args)]
struct Benchmark {
    /// Scenario JSON.
    #[arg(long)]
    scenario: PathBuf,
    /// Result CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time per row (makes the output non-deterministic).
    #[arg(long)]
    timing: bool,
    /// Override the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SyntheticKind {
    /// Random geometric graph with a bandlimited signal.
    Geometric,
    /// Sensor table with a smooth temperature-like field.
    Sensors,
    /// Three Gaussian clusters with labels.
    Toy,
}

#[derive(Args)]
struct GenSynthetic {
    #[arg(long, value_enum)]
    kind: SyntheticKind,
    /// Node count (geometric, sensors).
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Neighbors per node (geometric, sensors).
    #[arg(long, default_value_t = 12)]
    neighbors: usize,
    /// Bandlimit of the geometric signal.
    #[arg(long = "K", alias = "k", default_value_t = 20)]
    k: usize,
    /// Out-of-band noise amplitude for the geometric signal.
    #[arg(long, default_value_t = 0.0)]
    amp: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    graph_out: Option<PathBuf>,
    /// Signal CSV (geometric) or label CSV (toy).
    #[arg(long)]
    signal_out: Option<PathBuf>,
    #[arg(long)]
    points_out: Option<PathBuf>,
    #[arg(long)]
    sensors_out: Option<PathBuf>,
}

fn parse<T: std::str::FromStr<Err = gsi_core::error::GsiError>>(s: &str) -> Result<T, CliError> {
    s.parse().map_err(CliError::from_core)
}

fn build_graph(a: BuildGraph) -> Result<(), CliError> {
    let g = if let Some(path) = &a.points {
        let points = io::read_points_csv(open(path)?).map_err(|e| CliError::from_core(e).context(path))?;
        knn_affinity(&points, a.neighbors, parse::<Kernel>(&a.kernel)?)?
    } else {
        let path = a.sensors.as_ref().expect("clap requires points or sensors");
        let table = io::read_sensor_csv(open(path)?).map_err(|e| CliError::from_core(e).context(path))?;
        geodesic_affinity(&table, a.neighbors, a.scale)?
    };
    log::info!("graph with {} nodes and {} edges", g.n(), g.edges().len());
    write_atomic(&a.out, |w| io::write_graph_csv(w, &g))
}

fn eigs(a: Eigs) -> Result<(), CliError> {
    let g = a.input.load()?;
    let (values, vectors) = if a.nystrom {
        let path = a.landmarks.as_ref().expect("clap requires landmarks");
        let landmarks = io::read_index_csv(open(path)?).map_err(|e| CliError::from_core(e).context(path))?;
        let b = nystrom_markov_eigs(&g, &landmarks, parse(&a.mode)?)?;
        (b.eigenvalues().clone(), b.eigenvectors().clone())
    } else {
        let b = markov_eigs(&g)?;
        (b.eigenvalues().clone(), b.eigenvectors().clone())
    };
    write_atomic(&a.out, |w| io::write_eigenvalues_csv(w, &values))?;
    if let Some(path) = &a.vectors {
        write_atomic(path, |w| io::write_eigenvectors_csv(w, &vectors))?;
    }
    Ok(())
}

fn smoothness(a: Smoothness) -> Result<(), CliError> {
    let g = a.input.load()?;
    let s = io::read_signal_csv(open(&a.signal)?).map_err(|e| CliError::from_core(e).context(&a.signal))?;
    let report = evaluate(&g, &s, parse::<Measure>(&a.measure)?, parse::<Norm>(&a.p)?)?;
    println!("{}", io::fmt_f64(report.value));
    Ok(())
}

fn sample(a: Sample) -> Result<(), CliError> {
    let strategy: Strategy = parse(&a.strategy)?;
    let graph = match &a.graph {
        Some(path) => Some(GraphInput { graph: path.clone(), nodes: a.nodes }.load()?),
        None => None,
    };
    let n = match (&graph, a.nodes) {
        (Some(g), _) => g.n(),
        (None, Some(n)) => n,
        (None, None) => return Err(CliError::User("sample needs --graph or --nodes".into())),
    };
    let picked = match strategy {
        Strategy::Uniform => uniform_sample(n, a.r, a.seed)?,
        Strategy::GreedySpectral => {
            let g = graph.ok_or_else(|| CliError::User("greedy sampling needs --graph".into()))?;
            let k = a.k.ok_or_else(|| CliError::User("greedy sampling needs --K".into()))?;
            greedy_spectral_sample(markov_eigs(&g)?.eigenvectors(), k, a.r)?
        }
    };
    match &a.out {
        Some(path) => write_atomic(path, |w| io::write_index_csv(w, &picked)),
        None => {
            let mut out = std::io::stdout().lock();
            io::write_index_csv(&mut out, &picked)?;
            out.flush().map_err(|e| CliError::User(e.to_string()))
        }
    }
}

fn interpolate(a: Interpolate) -> Result<(), CliError> {
    let g = a.input.load()?;
    let samples = io::read_samples_csv(open(&a.samples)?).map_err(|e| CliError::from_core(e).context(&a.samples))?;
    samples.check_range(g.n())?;
    let method: Method = parse(&a.method)?;
    let eta = a.eta.unwrap_or_else(|| samples.default_eta());
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(CliError::User(format!("--eta must be finite and >= 0, got {eta}")));
    }
    let n = g.n();
    let start = Instant::now();
    let (res, width): (InterpolationResult, usize) = match method {
        Method::Nystrom => {
            if a.bandwidth.is_some() {
                log::warn!("--bandwidth is ignored by the nystrom method");
            }
            (interpolate_nystrom(&g, &samples, eta, parse::<NystromMode>(&a.mode)?)?, samples.len())
        }
        _ => {
            let basis = markov_eigs(&g)?;
            let width = a.bandwidth.unwrap_or(if method == Method::SpectralRegression { samples.len() } else { n });
            let res = match method {
                Method::OneShot => interpolate_one_shot(&basis, &samples, eta, width)?,
                Method::Iterative => {
                    let source: NewNodeValues = parse(&a.new_values)?;
                    interpolate_iterative_with(&g, &basis, &samples, eta, width, source)?
                }
                Method::LeastSquares => least_squares_baseline(&basis, &samples, width)?,
                Method::SpectralRegression => spectral_regression_baseline(&basis, &samples, width)?,
                Method::Nystrom => unreachable!(),
            };
            (res, width)
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    if res.status == SolveStatus::IterationLimit {
        return Err(CliError::Numerical {
            kind: "iteration_limit",
            message: "l1 solver stopped at its iteration limit".into(),
            detail: json!({ "iterations": res.iterations }),
        });
    }
    write_atomic(&a.out, |w| io::write_signal_csv(w, &res.signal))?;
    let diag = json!({
        "method": res.method.as_str(),
        "nodes": n,
        "samples": samples.len(),
        "eta": eta,
        "width": width,
        "status": res.status,
        "fallback": res.fallback,
        "unreached": res.unreached,
        "iterations": res.iterations,
        "wall_ms": wall_ms,
    });
    let path = a.diagnostics.clone().unwrap_or_else(|| sidecar_path(&a.out));
    write_atomic(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &diag).map_err(|e| gsi_core::error::GsiError::Io(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    })
}

fn benchmark(a: Benchmark) -> Result<(), CliError> {
    let mut scenario = io::read_scenario_json(open(&a.scenario)?).map_err(|e| CliError::from_core(e).context(&a.scenario))?;
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    scenario.timing |= a.timing;
    let rows = run_benchmark(&scenario)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        log::warn!("{failed} of {} rows did not finish cleanly", rows.len());
    }
    match &a.out {
        Some(path) => write_atomic(path, |w| io::write_benchmark_csv(w, &rows)),
        None => {
            let mut out = std::io::stdout().lock();
            io::write_benchmark_csv(&mut out, &rows)?;
            out.flush().map_err(|e| CliError::User(e.to_string()))
        }
    }
}

fn require<'a>(p: &'a Option<PathBuf>, flag: &str, kind: &str) -> Result<&'a Path, CliError> {
    p.as_deref().ok_or_else(|| CliError::User(format!("--kind {kind} needs {flag}")))
}

fn gen_synthetic(a: GenSynthetic) -> Result<(), CliError> {
    match a.kind {
        SyntheticKind::Geometric => {
            let graph_out = require(&a.graph_out, "--graph-out", "geometric")?;
            let (g, points) = random_geometric_graph(a.n, a.neighbors, derive_seed(a.seed, 0), Kernel::ExpNegDist)?;
            write_atomic(graph_out, |w| io::write_graph_csv(w, &g))?;
            if let Some(path) = &a.signal_out {
                let basis = markov_eigs(&g)?;
                let seed = derive_seed(a.seed, 1);
                let x = if a.amp > 0.0 {
                    approx_bandlimited_signal(&basis, a.k, a.amp, seed)?
                } else {
                    bandlimited_signal(&basis, a.k, seed)?
                };
                write_atomic(path, |w| io::write_signal_csv(w, &x))?;
            }
            if let Some(path) = &a.points_out {
                write_atomic(path, |w| io::write_points_csv(w, &points))?;
            }
        }
        SyntheticKind::Sensors => {
            let out = require(&a.sensors_out, "--sensors-out", "sensors")?;
            let table = synthetic_sensor_table(a.n, a.seed)?;
            write_atomic(out, |w| io::write_sensor_csv(w, &table))?;
            if let Some(path) = &a.graph_out {
                let g = geodesic_affinity(&table, a.neighbors, DEFAULT_DISTANCE_SCALE)?;
                write_atomic(path, |w| io::write_graph_csv(w, &g))?;
            }
        }
        SyntheticKind::Toy => {
            let graph_out = require(&a.graph_out, "--graph-out", "toy")?;
            let (g, points, labels) = three_cluster_toy(a.seed)?;
            write_atomic(graph_out, |w| io::write_graph_csv(w, &g))?;
            if let Some(path) = &a.signal_out {
                let labels: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
                write_atomic(path, |w| io::write_signal_csv(w, &labels))?;
            }
            if let Some(path) = &a.points_out {
                write_atomic(path, |w| io::write_points_csv(w, &points))?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::BuildGraph(a) => build_graph(a),
        Command::Eigs(a) => eigs(a),
        Command::Smoothness(a) => smoothness(a),
        Command::Sample(a) => sample(a),
        Command::Interpolate(a) => interpolate(a),
        Command::Benchmark(a) => benchmark(a),
        Command::GenSynthetic(a) => gen_synthetic(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GSI_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.exit_code())
        }
    }
}
