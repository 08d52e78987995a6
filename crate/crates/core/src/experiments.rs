//! Synthetic generators, error metrics and the benchmark runner.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{GsiError, Result};
use crate::graph::{geodesic_affinity, knn_affinity, Graph, Kernel, PointCloud, Sensor, SensorTable, DEFAULT_DISTANCE_SCALE};
use crate::interpolation::{
    decode_classes, interpolate_iterative_with, interpolate_one_shot, least_squares_baseline,
    spectral_regression_baseline, InterpolationResult, Method, NewNodeValues, SampleSet,
};
use crate::l1::SolveStatus;
use crate::nystrom::{interpolate_nystrom, NystromMode};
use crate::sampling::{greedy_spectral_sample, uniform_sample, Strategy};
use crate::spectral::{igft, markov_eigs, SpectralBasis};

/// Mixes a master seed with a stream index (splitmix64 finalizer), so that
/// per-trial streams do not depend on execution order.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` points uniform in `[0, 1]^dim`.
pub fn uniform_points(n: usize, dim: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = rng(seed);
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect();
    PointCloud::new(&pts)
}

/// Uniform points in the unit square joined to their `l` nearest neighbors.
pub fn random_geometric_graph(n: usize, l: usize, seed: u64, kernel: Kernel) -> Result<(Graph, PointCloud)> {
    let points = uniform_points(n, 2, seed)?;
    let g = knn_affinity(&points, l, kernel)?;
    Ok((g, points))
}

/// Isotropic Gaussian clusters. Point `i` belongs to cluster `i % C`.
pub fn gaussian_blobs(n: usize, centers: &[Vec<f64>], std: f64, seed: u64) -> Result<(PointCloud, Vec<usize>)> {
    if centers.is_empty() {
        return Err(GsiError::InvalidParameter("no cluster centers".into()));
    }
    let normal = Normal::new(0.0, std).map_err(|e| GsiError::InvalidParameter(e.to_string()))?;
    let mut rng = rng(seed);
    let labels: Vec<usize> = (0..n).map(|i| i % centers.len()).collect();
    let pts: Vec<Vec<f64>> = labels
        .iter()
        .map(|&c| centers[c].iter().map(|x| x + normal.sample(&mut rng)).collect())
        .collect();
    Ok((PointCloud::new(&pts)?, labels))
}

/// `c` centers uniform in `[0, spread]^dim`.
pub fn random_centers(c: usize, dim: usize, spread: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng(seed);
    (0..c).map(|_| (0..dim).map(|_| spread * rng.gen::<f64>()).collect()).collect()
}

/// Centers of the three-cluster toy in the unit square.
pub const TOY_CENTERS: [[f64; 2]; 3] = [[0.25, 0.3], [0.75, 0.3], [0.5, 0.75]];
pub const TOY_STD: f64 = 0.1;

/// 100 points in three Gaussian clusters of the unit square, 9-NN with
/// `exp(-d)` weights.
pub fn three_cluster_toy(seed: u64) -> Result<(Graph, PointCloud, Vec<usize>)> {
    let centers: Vec<Vec<f64>> = TOY_CENTERS.iter().map(|c| c.to_vec()).collect();
    let (points, labels) = gaussian_blobs(100, &centers, TOY_STD, seed)?;
    let g = knn_affinity(&points, 9, Kernel::ExpNegDist)?;
    Ok((g, points, labels))
}

/// Smooth temperature-like field over the contiguous United States:
/// a latitude gradient, a slow east-west wave and a lapse rate on a
/// mountain ridge.
pub fn sensor_field(lon: f64, lat: f64, elev: f64) -> f64 {
    30.0 - 0.7 * (lat - 25.0) + 2.0 * (lon / 12.0).sin() - 6.5e-3 * elev
}

fn ridge_elevation(lon: f64, lat: f64) -> f64 {
    2000.0 * (-((lon + 110.0) / 6.0).powi(2)).exp() * (1.0 - ((lat - 37.0) / 30.0).powi(2))
}

/// `n` sensors uniform over a lon/lat box around the contiguous US with
/// the smooth [`sensor_field`] as values.
pub fn synthetic_sensor_table(n: usize, seed: u64) -> Result<SensorTable> {
    let mut rng = rng(seed);
    let rows = (0..n)
        .map(|_| {
            let lon = rng.gen_range(-124.0..-68.0);
            let lat = rng.gen_range(26.0..48.0);
            let elev = ridge_elevation(lon, lat);
            Sensor {
                lon,
                lat,
                elev,
                value: sensor_field(lon, lat, elev),
            }
        })
        .collect();
    SensorTable::new(rows)
}

/// First `k` spectrum entries uniform in `[-1, 1]`, the rest zero.
pub fn bandlimited_spectrum(n: usize, k: usize, seed: u64) -> Result<Vec<f64>> {
    if k == 0 || k > n {
        return Err(GsiError::InvalidParameter(format!("bandwidth {k} must be in 1..={n}")));
    }
    let mut rng = rng(seed);
    let mut s = vec![0.0; n];
    for v in s.iter_mut().take(k) {
        *v = rng.gen_range(-1.0..=1.0);
    }
    Ok(s)
}

pub fn bandlimited_signal(basis: &SpectralBasis, k: usize, seed: u64) -> Result<Vec<f64>> {
    let spec = bandlimited_spectrum(basis.n(), k, seed)?;
    Ok(igft(basis, &spec)?.iter().copied().collect())
}

/// Bandlimited spectrum plus `amp * U[-1, 1]` on every entry. The noise
/// uses a stream derived from `seed`, so `amp = 0` reproduces
/// [`bandlimited_signal`].
pub fn approx_bandlimited_spectrum(n: usize, k: usize, amp: f64, seed: u64) -> Result<Vec<f64>> {
    if !(amp >= 0.0 && amp.is_finite()) {
        return Err(GsiError::InvalidParameter(format!("noise amplitude {amp} must be finite and >= 0")));
    }
    let mut spec = bandlimited_spectrum(n, k, seed)?;
    let mut noise = rng(derive_seed(seed, 0x006e_6f69_7365));
    for v in spec.iter_mut() {
        *v += amp * noise.gen_range(-1.0..=1.0);
    }
    Ok(spec)
}

pub fn approx_bandlimited_signal(basis: &SpectralBasis, k: usize, amp: f64, seed: u64) -> Result<Vec<f64>> {
    let spec = approx_bandlimited_spectrum(basis.n(), k, amp, seed)?;
    Ok(igft(basis, &spec)?.iter().copied().collect())
}

/// Default noise amplitude: `0.05 ||x_hat||_inf` of the clean spectrum.
pub fn default_noise_amplitude(n: usize, k: usize, seed: u64) -> Result<f64> {
    let clean = bandlimited_spectrum(n, k, seed)?;
    Ok(0.05 * clean.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// One-hot indicator signal per class.
pub fn cluster_indicator_signals(labels: &[usize], classes: usize) -> Result<Vec<Vec<f64>>> {
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(GsiError::InvalidParameter(format!("label {bad} outside 0..{classes}")));
    }
    Ok((0..classes)
        .map(|k| labels.iter().map(|&l| if l == k { 1.0 } else { 0.0 }).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// `|| y / ||y|| - y_hat / ||y_hat|| ||_2`.
    #[default]
    NormalizedDiff,
    /// `||y - y_hat||_2 / ||y||_2`.
    RelL2,
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn relative_error(y: &[f64], y_hat: &[f64], mode: ErrorMode) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(GsiError::DimensionMismatch {
            expected: y.len(),
            got: y_hat.len(),
        });
    }
    let ny = l2(y);
    if ny == 0.0 {
        return Err(GsiError::UndefinedMetric("reference signal is zero".into()));
    }
    match mode {
        ErrorMode::NormalizedDiff => {
            let nh = l2(y_hat);
            if nh == 0.0 {
                return Err(GsiError::UndefinedMetric("estimate is zero".into()));
            }
            let d: Vec<f64> = y.iter().zip(y_hat).map(|(a, b)| a / ny - b / nh).collect();
            Ok(l2(&d))
        }
        ErrorMode::RelL2 => {
            let d: Vec<f64> = y.iter().zip(y_hat).map(|(a, b)| a - b).collect();
            Ok(l2(&d) / ny)
        }
    }
}

/// Percent of `eval` nodes whose decoded class matches the label.
pub fn classification_accuracy(labels: &[usize], signals: &[Vec<f64>], eval: &[usize]) -> Result<f64> {
    if eval.is_empty() {
        return Err(GsiError::InvalidParameter("evaluation set is empty".into()));
    }
    let decoded = decode_classes(signals)?;
    if decoded.len() != labels.len() {
        return Err(GsiError::DimensionMismatch {
            expected: labels.len(),
            got: decoded.len(),
        });
    }
    let mut hits = 0usize;
    for &i in eval {
        if i >= labels.len() {
            return Err(GsiError::IndexOutOfRange { index: i, n: labels.len() });
        }
        hits += usize::from(decoded[i] == labels[i]);
    }
    Ok(100.0 * hits as f64 / eval.len() as f64)
}

// ---------------------------------------------------------------------------
// Scenarios

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    RandomGeometric {
        n: usize,
        l: usize,
        #[serde(default = "default_rgg_kernel")]
        kernel: Kernel,
    },
    GaussianBlobs {
        n: usize,
        clusters: usize,
        dim: usize,
        std: f64,
        #[serde(default = "default_spread")]
        spread: f64,
        l: usize,
        #[serde(default = "default_blob_kernel")]
        kernel: Kernel,
    },
    Sensors {
        n: usize,
        k: usize,
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

fn default_rgg_kernel() -> Kernel {
    Kernel::ExpNegDist
}

fn default_blob_kernel() -> Kernel {
    Kernel::NormalizedDist
}

fn default_spread() -> f64 {
    1.0
}

fn default_scale() -> f64 {
    DEFAULT_DISTANCE_SCALE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalSpec {
    Bandlimited { k: usize },
    /// `amp` defaults to `0.05 ||x_hat||_inf`.
    ApproxBandlimited { k: usize, amp: Option<f64> },
    /// One indicator per blob label; scored by decoding accuracy.
    ClusterIndicators,
    /// Sensor values of a `sensors` graph.
    SensorField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub strategy: Strategy,
    /// Bandwidth fed to the greedy strategy.
    #[serde(default)]
    pub k: Option<usize>,
}

/// Spectrum width: a fixed count, the node count or the sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Width {
    Fixed(usize),
    Named(WidthName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthName {
    N,
    R,
}

impl Width {
    pub fn resolve(self, n: usize, r: usize) -> usize {
        match self {
            Width::Fixed(m) => m,
            Width::Named(WidthName::N) => n,
            Width::Named(WidthName::R) => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    /// Defaults to `1e-8 ||s_M||_inf`.
    #[serde(default)]
    pub eta: Option<f64>,
    /// `m` for the Markov methods and least squares, `K` for spectral
    /// regression. Defaults to `r`. Ignored by `nystrom`.
    #[serde(default)]
    pub width: Option<Width>,
    #[serde(default)]
    pub mode: Option<NystromMode>,
    #[serde(default)]
    pub new_values: Option<NewNodeValues>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub graph: GraphSpec,
    pub signal: SignalSpec,
    pub sampling: SamplingSpec,
    #[serde(default = "default_r_values")]
    pub r_values: Vec<usize>,
    pub trials: usize,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub error: ErrorMode,
    /// Record `wall_ms`. Off by default so that tables are byte-identical
    /// across runs.
    #[serde(default)]
    pub timing: bool,
}

fn default_r_values() -> Vec<usize> {
    vec![20, 40, 60, 80, 100]
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(GsiError::InvalidParameter("trial count must be >= 1".into()));
        }
        if self.methods.is_empty() || self.r_values.is_empty() {
            return Err(GsiError::InvalidParameter("scenario needs methods and r values".into()));
        }
        let sensors = matches!(self.graph, GraphSpec::Sensors { .. });
        let blobs = matches!(self.graph, GraphSpec::GaussianBlobs { .. });
        match self.signal {
            SignalSpec::SensorField if !sensors => Err(GsiError::InvalidParameter(
                "sensor_field signals need a sensors graph".into(),
            )),
            SignalSpec::ClusterIndicators if !blobs => Err(GsiError::InvalidParameter(
                "cluster_indicators signals need a gaussian_blobs graph".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: Method,
    pub r: usize,
    pub trial: usize,
    pub error: f64,
    /// Percent correct; indicator problems only.
    pub accuracy: Option<f64>,
    pub wall_ms: Option<f64>,
    pub status: String,
}

struct Instance {
    graph: Graph,
    basis: SpectralBasis,
    labels: Option<(Vec<usize>, usize)>,
    sensor_values: Option<Vec<f64>>,
}

fn build_instance(spec: &GraphSpec, seed: u64) -> Result<Instance> {
    let (graph, labels, sensor_values) = match *spec {
        GraphSpec::RandomGeometric { n, l, kernel } => (random_geometric_graph(n, l, seed, kernel)?.0, None, None),
        GraphSpec::GaussianBlobs {
            n,
            clusters,
            dim,
            std,
            spread,
            l,
            kernel,
        } => {
            let centers = random_centers(clusters, dim, spread, derive_seed(seed, 1));
            let (pts, labels) = gaussian_blobs(n, &centers, std, seed)?;
            (knn_affinity(&pts, l, kernel)?, Some((labels, clusters)), None)
        }
        GraphSpec::Sensors { n, k, scale } => {
            let table = synthetic_sensor_table(n, seed)?;
            (geodesic_affinity(&table, k, scale)?, None, Some(table.values()))
        }
    };
    let basis = markov_eigs(&graph)?;
    Ok(Instance {
        graph,
        basis,
        labels,
        sensor_values,
    })
}

fn run_method(inst: &Instance, spec: &MethodSpec, samples: &SampleSet, r: usize) -> Result<InterpolationResult> {
    let n = inst.graph.n();
    let width = spec.width.unwrap_or(Width::Named(WidthName::R)).resolve(n, r);
    let eta = spec.eta.unwrap_or_else(|| samples.default_eta());
    match spec.method {
        Method::OneShot => interpolate_one_shot(&inst.basis, samples, eta, width),
        Method::Iterative => interpolate_iterative_with(
            &inst.graph,
            &inst.basis,
            samples,
            eta,
            width,
            spec.new_values.unwrap_or_default(),
        ),
        Method::LeastSquares => least_squares_baseline(&inst.basis, samples, width),
        Method::SpectralRegression => spectral_regression_baseline(&inst.basis, samples, width),
        Method::Nystrom => interpolate_nystrom(&inst.graph, samples, eta, spec.mode.unwrap_or_default()),
    }
}

fn status_tag(res: &InterpolationResult) -> String {
    let base = match res.status {
        SolveStatus::Optimal => "ok",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::IterationLimit => "iteration_limit",
    };
    if res.fallback {
        format!("{base}_lsq_fallback")
    } else {
        base.to_string()
    }
}

fn error_tag(e: &GsiError) -> String {
    match e {
        GsiError::Infeasible(_) => "infeasible".into(),
        GsiError::SingularBlock { .. } => "singular_block".into(),
        GsiError::UndefinedMetric(_) => "undefined_metric".into(),
        _ => "error".into(),
    }
}

/// Runs every `(trial, r, method)` combination. The graph is built once
/// from the master seed; signals and samples vary per trial through
/// derived seeds. Failures become rows with `error = NaN`.
pub fn run_benchmark(scenario: &Scenario) -> Result<Vec<BenchmarkRow>> {
    scenario.validate()?;
    let inst = build_instance(&scenario.graph, derive_seed(scenario.seed, 0))?;
    let n = inst.graph.n();
    let mut rows = Vec::with_capacity(scenario.trials * scenario.r_values.len() * scenario.methods.len());

    for trial in 0..scenario.trials {
        let trial_seed = derive_seed(scenario.seed, 1 + trial as u64);
        // One or more reference signals per trial.
        let truths: Vec<Vec<f64>> = match scenario.signal {
            SignalSpec::Bandlimited { k } => vec![bandlimited_signal(&inst.basis, k, trial_seed)?],
            SignalSpec::ApproxBandlimited { k, amp } => {
                let amp = match amp {
                    Some(a) => a,
                    None => default_noise_amplitude(n, k, trial_seed)?,
                };
                vec![approx_bandlimited_signal(&inst.basis, k, amp, trial_seed)?]
            }
            SignalSpec::ClusterIndicators => {
                let (labels, c) = inst.labels.as_ref().expect("validated");
                cluster_indicator_signals(labels, *c)?
            }
            SignalSpec::SensorField => vec![inst.sensor_values.clone().expect("validated")],
        };

        for &r in &scenario.r_values {
            let sample_seed = derive_seed(trial_seed, r as u64);
            let nodes = match scenario.sampling.strategy {
                Strategy::Uniform => uniform_sample(n, r, sample_seed),
                Strategy::GreedySpectral => {
                    let k = scenario.sampling.k.unwrap_or(r);
                    greedy_spectral_sample(inst.basis.eigenvectors(), k, r)
                }
            };
            for spec in &scenario.methods {
                let row = |error: f64, accuracy: Option<f64>, wall_ms: Option<f64>, status: String| BenchmarkRow {
                    method: spec.method,
                    r,
                    trial,
                    error,
                    accuracy,
                    wall_ms,
                    status,
                };
                let nodes = match &nodes {
                    Ok(v) => v,
                    Err(e) => {
                        rows.push(row(f64::NAN, None, None, format!("sampling_{}", error_tag(e))));
                        continue;
                    }
                };
                let start = Instant::now();
                let outcome: Result<Vec<InterpolationResult>> = truths
                    .iter()
                    .map(|t| run_method(&inst, spec, &SampleSet::from_signal(t, nodes)?, r))
                    .collect();
                let wall = scenario.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
                let results = match outcome {
                    Ok(v) => v,
                    Err(e) => {
                        log::debug!("trial {trial}, r = {r}, {}: {e}", spec.method);
                        rows.push(row(f64::NAN, None, wall, error_tag(&e)));
                        continue;
                    }
                };
                let status = status_tag(&results[0]);
                match &inst.labels {
                    Some((labels, _)) if matches!(scenario.signal, SignalSpec::ClusterIndicators) => {
                        let signals: Vec<Vec<f64>> = results.into_iter().map(|r| r.signal).collect();
                        let sampled: std::collections::HashSet<usize> = nodes.iter().copied().collect();
                        let eval: Vec<usize> = (0..n).filter(|i| !sampled.contains(i)).collect();
                        match classification_accuracy(labels, &signals, &eval) {
                            Ok(acc) => rows.push(row(1.0 - acc / 100.0, Some(acc), wall, status)),
                            Err(e) => rows.push(row(f64::NAN, None, wall, error_tag(&e))),
                        }
                    }
                    _ => match relative_error(&truths[0], &results[0].signal, scenario.error) {
                        Ok(err) => rows.push(row(err, None, wall, status)),
                        Err(e) => rows.push(row(f64::NAN, None, wall, error_tag(&e))),
                    },
                }
            }
        }
    }
    Ok(rows)
}
