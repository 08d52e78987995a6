//! Sample-set selection.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GsiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Uniform,
    GreedySpectral,
}

impl std::str::FromStr for Strategy {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Strategy::Uniform),
            "greedy" | "greedy_spectral" => Ok(Strategy::GreedySpectral),
            _ => Err(GsiError::InvalidParameter(format!(
                "unknown sampling strategy '{s}' (expected uniform or greedy)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub strategy: Strategy,
    pub r: usize,
    /// Bandwidth for the greedy strategy; ignored by `Uniform`.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl SamplingConfig {
    /// Runs the configured strategy. `eigenvectors` is only read by the
    /// greedy strategy and may be exact or approximate.
    pub fn select(&self, n: usize, eigenvectors: Option<&DMatrix<f64>>) -> Result<Vec<usize>> {
        match self.strategy {
            Strategy::Uniform => uniform_sample(n, self.r, self.seed),
            Strategy::GreedySpectral => {
                let v = eigenvectors.ok_or_else(|| {
                    GsiError::InvalidParameter("greedy sampling needs eigenvectors".into())
                })?;
                let k = self.k.ok_or_else(|| GsiError::InvalidParameter("greedy sampling needs K".into()))?;
                greedy_spectral_sample(v, k, self.r)
            }
        }
    }
}

/// `r` distinct nodes drawn uniformly without replacement, returned sorted.
pub fn uniform_sample(n: usize, r: usize, seed: u64) -> Result<Vec<usize>> {
    if r == 0 || r > n {
        return Err(GsiError::InvalidParameter(format!("sample count {r} must be in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, n, r).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

fn smallest_singular_value(rows: &DMatrix<f64>) -> f64 {
    rows.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Smallest singular value of `V[rows, 0..k]`.
pub fn sampled_block_sigma_min(eigenvectors: &DMatrix<f64>, rows: &[usize], k: usize) -> f64 {
    let block = DMatrix::from_fn(rows.len(), k, |i, j| eigenvectors[(rows[i], j)]);
    smallest_singular_value(&block)
}

/// Greedily grows a sample set, each step adding the node that maximizes
/// the smallest singular value of the leading `k` eigenvector columns
/// restricted to the chosen rows. Ties go to the lowest node index. The
/// result is in selection order.
pub fn greedy_spectral_sample(eigenvectors: &DMatrix<f64>, k: usize, r: usize) -> Result<Vec<usize>> {
    let (n, cols) = eigenvectors.shape();
    if k == 0 || k > cols {
        return Err(GsiError::InvalidParameter(format!("bandwidth K = {k} must be in 1..={cols}")));
    }
    if r < k || r > n {
        return Err(GsiError::InvalidParameter(format!("sample count {r} must be in {k}..={n}")));
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    let mut taken = vec![false; n];
    let mut block = DMatrix::<f64>::zeros(0, k);
    while chosen.len() < r {
        let rows = block.nrows();
        let mut best: Option<(usize, f64)> = None;
        let mut trial = block.clone().insert_row(rows, 0.0);
        for v in (0..n).filter(|&v| !taken[v]) {
            for j in 0..k {
                trial[(rows, j)] = eigenvectors[(v, j)];
            }
            let s = smallest_singular_value(&trial);
            // Relative slack so round-off cannot reorder exact ties.
            let better = match best {
                None => true,
                Some((_, b)) => s > b + 1e-12 * b.abs().max(1e-300),
            };
            if better {
                best = Some((v, s));
            }
        }
        let (v, _) = best.expect("r <= n leaves a candidate");
        taken[v] = true;
        chosen.push(v);
        block = block.insert_row(rows, 0.0);
        for j in 0..k {
            block[(rows, j)] = eigenvectors[(v, j)];
        }
    }
    let sigma = sampled_block_sigma_min(eigenvectors, &chosen, k);
    if sigma <= 1e-10 {
        log::warn!("greedy sample set is rank deficient: sigma_min = {sigma:e}");
    }
    Ok(chosen)
}
