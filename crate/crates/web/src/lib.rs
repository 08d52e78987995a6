//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes plain numbers or a JSON string and returns a JSON
//! string. Failures come back as `{"error": "..."}` so the page never has
//! to catch exceptions.

use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::wasm_bindgen;

use gsi_core::experiments::{
    bandlimited_signal, classification_accuracy, cluster_indicator_signals, derive_seed, random_geometric_graph,
    relative_error, three_cluster_toy, ErrorMode,
};
use gsi_core::graph::{Graph, Kernel, PointCloud};
use gsi_core::interpolation::{decode_classes, interpolate_iterative, interpolate_one_shot, SampleSet};
use gsi_core::sampling::{greedy_spectral_sample, uniform_sample};
use gsi_core::smoothness::{laplacian_quadratic, markov_variation, total_variation, Norm};
use gsi_core::spectral::markov_eigs;
use gsi_core::Result;

fn respond<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string()),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

#[derive(Serialize)]
struct Drawing {
    points: Vec<[f64; 2]>,
    edges: Vec<[usize; 2]>,
}

fn drawing(g: &Graph, pts: &PointCloud) -> Drawing {
    Drawing {
        points: (0..pts.len()).map(|i| [pts.point(i)[0], pts.point(i)[1]]).collect(),
        edges: g.edges().into_iter().filter(|e| e.0 < e.1).map(|(i, j, _)| [i, j]).collect(),
    }
}

#[derive(Serialize)]
struct ToyResult {
    #[serde(flatten)]
    drawing: Drawing,
    labels: Vec<usize>,
    picks: Vec<usize>,
    predicted: Vec<usize>,
    /// Percent of unpicked nodes labelled correctly.
    accuracy: f64,
    iterations: Vec<usize>,
}

/// Three-cluster toy: label the picked nodes and propagate by iterative
/// interpolation. `picks_json` is an array of node indices; an empty array
/// picks the first member of each cluster.
#[wasm_bindgen]
pub fn toy_classify(seed: u32, picks_json: &str) -> String {
    respond(toy(seed as u64, picks_json))
}

fn toy(seed: u64, picks_json: &str) -> Result<ToyResult> {
    let (g, pts, labels) = three_cluster_toy(seed)?;
    let mut picks: Vec<usize> = serde_json::from_str(picks_json)
        .map_err(|e| gsi_core::GsiError::InvalidParameter(format!("picks: {e}")))?;
    if picks.is_empty() {
        picks = (0..3).filter_map(|c| labels.iter().position(|&l| l == c)).collect();
    }
    picks.sort_unstable();
    picks.dedup();
    let basis = markov_eigs(&g)?;
    let mut signals = Vec::new();
    let mut iterations = Vec::new();
    for ind in cluster_indicator_signals(&labels, 3)? {
        let s = SampleSet::from_signal(&ind, &picks)?;
        let res = interpolate_iterative(&g, &basis, &s, 1e-8, g.n())?;
        iterations.push(res.iterations.len());
        signals.push(res.signal);
    }
    let eval: Vec<usize> = (0..g.n()).filter(|i| picks.binary_search(i).is_err()).collect();
    let accuracy = if eval.is_empty() { 100.0 } else { classification_accuracy(&labels, &signals, &eval)? };
    Ok(ToyResult {
        drawing: drawing(&g, &pts),
        labels,
        picks,
        predicted: decode_classes(&signals)?,
        accuracy,
        iterations,
    })
}

#[derive(Serialize)]
struct StarSmoothness {
    markov_variation: f64,
    total_variation: f64,
    laplacian_quadratic: f64,
}

/// Smoothness of a signal on a star with node 0 at the centre.
/// `values_json` holds one value per node; its length sets the star size.
#[wasm_bindgen]
pub fn star_smoothness(values_json: &str) -> String {
    respond(star(values_json))
}

fn star(values_json: &str) -> Result<StarSmoothness> {
    let s: Vec<f64> = serde_json::from_str(values_json)
        .map_err(|e| gsi_core::GsiError::InvalidParameter(format!("values: {e}")))?;
    let edges: Vec<_> = (1..s.len()).map(|i| (0, i, 1.0)).collect();
    let g = Graph::from_edges(s.len(), &edges)?;
    Ok(StarSmoothness {
        markov_variation: markov_variation(&g, &s, Norm::L2)?,
        total_variation: total_variation(&g, &s, Norm::L2)?,
        laplacian_quadratic: laplacian_quadratic(&g, &s)?,
    })
}

#[derive(Serialize)]
struct Recovery {
    #[serde(flatten)]
    drawing: Drawing,
    truth: Vec<f64>,
    recovered: Vec<f64>,
    samples: Vec<usize>,
    error: f64,
}

/// Random geometric graph with a `k`-bandlimited signal, sampled at `r`
/// nodes (greedy when `greedy`, otherwise uniform) and recovered in one shot.
#[wasm_bindgen]
pub fn bandlimited_recovery(n: u32, k: u32, r: u32, seed: u32, greedy: bool) -> String {
    respond(recovery(n as usize, k as usize, r as usize, seed as u64, greedy))
}

fn recovery(n: usize, k: usize, r: usize, seed: u64, greedy: bool) -> Result<Recovery> {
    let l = 8.min(n.saturating_sub(1)).max(1);
    let (g, pts) = random_geometric_graph(n, l, derive_seed(seed, 0), Kernel::ExpNegDist)?;
    let basis = markov_eigs(&g)?;
    let truth = bandlimited_signal(&basis, k, derive_seed(seed, 1))?;
    let samples =
        if greedy { greedy_spectral_sample(basis.eigenvectors(), k, r)? } else { uniform_sample(n, r, derive_seed(seed, 2))? };
    let set = SampleSet::from_signal(&truth, &samples)?;
    let res = interpolate_one_shot(&basis, &set, set.default_eta(), r)?;
    let error = relative_error(&truth, &res.signal, ErrorMode::NormalizedDiff)?;
    Ok(Recovery {
        drawing: drawing(&g, &pts),
        truth,
        recovered: res.signal,
        samples,
        error,
    })
}
