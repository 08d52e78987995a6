//! Interpolation from a sampled subset of nodes.
//!
//! A signal with zero Markov variation satisfies `s = P s = V Lambda s_hat`.
//! Keeping only the sampled rows gives the underdetermined system
//! `s_M = A y` with `A = [lambda_j psi_j(M)]`; the interpolant is the
//! minimum-l1 `y` with `|A y - s_M| <= eta`, mapped back through
//! `V Lambda y`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GsiError, Result};
use crate::graph::{one_hop_closure, Graph};
use crate::l1::{solve_bp_box, L1Problem, L1Solution, SolveStatus};
use crate::smoothness::{markov_variation, Norm};
use crate::spectral::SpectralBasis;

/// Eigenvector columns and matching Markov eigenvalues, leading pair first.
/// Implemented by exact and approximate decompositions.
pub trait Eigenpairs {
    /// `N x k`, one eigenvector per column.
    fn vectors(&self) -> &DMatrix<f64>;
    /// Length `k`, descending.
    fn values(&self) -> &DVector<f64>;

    fn n(&self) -> usize {
        self.vectors().nrows()
    }

    fn width(&self) -> usize {
        self.values().len()
    }
}

impl Eigenpairs for SpectralBasis {
    fn vectors(&self) -> &DMatrix<f64> {
        self.eigenvectors()
    }

    fn values(&self) -> &DVector<f64> {
        self.eigenvalues()
    }
}

/// Sampled node indices with their observed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SampleSet {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.is_empty() {
            return Err(GsiError::InvalidParameter("sample set is empty".into()));
        }
        if indices.len() != values.len() {
            return Err(GsiError::DimensionMismatch {
                expected: indices.len(),
                got: values.len(),
            });
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(GsiError::InvalidParameter(format!("node {} sampled twice", w[0])));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(GsiError::InvalidParameter(format!("non-finite sample value {v}")));
        }
        Ok(Self { indices, values })
    }

    /// Samples `signal` at `indices`.
    pub fn from_signal(signal: &[f64], indices: &[usize]) -> Result<Self> {
        for &i in indices {
            if i >= signal.len() {
                return Err(GsiError::IndexOutOfRange { index: i, n: signal.len() });
            }
        }
        Self::new(indices.to_vec(), indices.iter().map(|&i| signal[i]).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.indices.iter().find(|&&i| i >= n) {
            Some(&index) => Err(GsiError::IndexOutOfRange { index, n }),
            None => Ok(()),
        }
    }

    /// `1e-8 ||s_M||_inf`, the per-call default tolerance.
    pub fn default_eta(&self) -> f64 {
        1e-8 * self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "oneshot", alias = "one_shot")]
    OneShot,
    #[serde(rename = "iterative")]
    Iterative,
    #[serde(rename = "lsq", alias = "least_squares")]
    LeastSquares,
    #[serde(rename = "specreg", alias = "spectral_regression")]
    SpectralRegression,
    #[serde(rename = "nystrom")]
    Nystrom,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::OneShot,
        Method::Iterative,
        Method::LeastSquares,
        Method::SpectralRegression,
        Method::Nystrom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::OneShot => "oneshot",
            Method::Iterative => "iterative",
            Method::LeastSquares => "lsq",
            Method::SpectralRegression => "specreg",
            Method::Nystrom => "nystrom",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == s).ok_or_else(|| {
            GsiError::InvalidParameter(format!(
                "unknown method '{s}' (expected one of: oneshot, iterative, lsq, specreg, nystrom)"
            ))
        })
    }
}

/// Diagnostics of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Number of constrained rows.
    pub active: usize,
    pub spectrum_l1: f64,
    /// `||A y - b||_inf` over the constrained rows.
    pub residual_inf: f64,
    /// `||s - P s||_2` of the reconstruction, when a graph is available.
    pub markov_variation: Option<f64>,
    pub solver_iterations: usize,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationResult {
    pub method: Method,
    pub signal: Vec<f64>,
    pub spectrum: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub status: SolveStatus,
    /// Spectral regression fell back to least squares.
    pub fallback: bool,
    /// Nodes never reached by the iterative growth.
    pub unreached: Vec<usize>,
}

/// `A[i, j] = lambda_j psi_j(M_i)` for `j < m`.
pub fn constraint_matrix<B: Eigenpairs + ?Sized>(basis: &B, nodes: &[usize], m: usize) -> Result<DMatrix<f64>> {
    check_width(basis, m)?;
    let (v, lambda) = (basis.vectors(), basis.values());
    for &i in nodes {
        if i >= basis.n() {
            return Err(GsiError::IndexOutOfRange { index: i, n: basis.n() });
        }
    }
    Ok(DMatrix::from_fn(nodes.len(), m, |i, j| lambda[j] * v[(nodes[i], j)]))
}

fn unscaled_columns<B: Eigenpairs + ?Sized>(basis: &B, nodes: &[usize], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(nodes.len(), k, |i, j| basis.vectors()[(nodes[i], j)])
}

fn check_width<B: Eigenpairs + ?Sized>(basis: &B, m: usize) -> Result<()> {
    if m == 0 || m > basis.width() {
        return Err(GsiError::InvalidParameter(format!(
            "spectrum width {m} must be in 1..={}",
            basis.width()
        )));
    }
    Ok(())
}

/// `V[:, ..m] diag(lambda[..m]) y`.
pub fn reconstruct<B: Eigenpairs + ?Sized>(basis: &B, spectrum: &[f64]) -> Vec<f64> {
    let m = spectrum.len();
    let scaled = DVector::from_iterator(m, spectrum.iter().zip(basis.values().iter()).map(|(y, l)| y * l));
    (basis.vectors().columns(0, m) * scaled).iter().copied().collect()
}

/// `V[:, ..m] y`.
fn synthesize<B: Eigenpairs + ?Sized>(basis: &B, spectrum: &[f64]) -> Vec<f64> {
    let m = spectrum.len();
    (basis.vectors().columns(0, m) * DVector::from_column_slice(spectrum)).iter().copied().collect()
}

fn solve(a: DMatrix<f64>, b: &[f64], eta: f64) -> Result<L1Solution> {
    let p = L1Problem::new(a, DVector::from_column_slice(b), eta)?;
    let sol = solve_bp_box(&p);
    match sol.status {
        SolveStatus::Infeasible => Err(GsiError::Infeasible(sol.residual_inf)),
        SolveStatus::IterationLimit => {
            log::warn!("l1 solver hit its iteration limit; returning the last iterate");
            Ok(sol)
        }
        SolveStatus::Optimal => Ok(sol),
    }
}

fn record(sol: &L1Solution, active: usize, mv: Option<f64>) -> IterationRecord {
    IterationRecord {
        active,
        spectrum_l1: sol.objective,
        residual_inf: sol.residual_inf,
        markov_variation: mv,
        solver_iterations: sol.iterations,
        status: sol.status,
    }
}

/// Minimum-l1 spectrum over the `m` leading eigenpairs consistent with the
/// samples to within `eta`, reconstructed as `V Lambda y`.
pub fn interpolate_one_shot<B: Eigenpairs + ?Sized>(
    basis: &B,
    samples: &SampleSet,
    eta: f64,
    m: usize,
) -> Result<InterpolationResult> {
    samples.check_range(basis.n())?;
    if m < samples.len() {
        log::warn!("spectrum width {m} is below the sample count {}", samples.len());
    }
    let a = constraint_matrix(basis, samples.indices(), m)?;
    let sol = solve(a, samples.values(), eta)?;
    let spectrum: Vec<f64> = sol.y.iter().copied().collect();
    let signal = reconstruct(basis, &spectrum);
    Ok(InterpolationResult {
        method: Method::OneShot,
        signal,
        spectrum,
        iterations: vec![record(&sol, samples.len(), None)],
        status: sol.status,
        fallback: false,
        unreached: Vec::new(),
    })
}

/// Where the iterative method takes constraint values for nodes that join
/// the active set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NewNodeValues {
    /// `V Lambda y`: the current reconstruction. The current iterate stays
    /// feasible for the grown system, so later solves only change it when
    /// the optimum is not unique.
    #[default]
    Reconstruction,
    /// `V y`: the signal whose spectrum is the current iterate. The current
    /// iterate stays feasible exactly when it is smooth at the new nodes.
    /// Coefficients on small eigenvalues are amplified, so this can diverge.
    Synthesis,
}

impl FromStr for NewNodeValues {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synthesis" => Ok(NewNodeValues::Synthesis),
            "reconstruction" => Ok(NewNodeValues::Reconstruction),
            _ => Err(GsiError::InvalidParameter(format!(
                "unknown value source '{s}' (expected synthesis or reconstruction)"
            ))),
        }
    }
}

/// Repeats the one-shot solve on the one-hop closure of the active set
/// until it stops growing. Original samples are never overwritten; values
/// for joining nodes are frozen when they join.
pub fn interpolate_iterative<B: Eigenpairs + ?Sized>(
    g: &Graph,
    basis: &B,
    samples: &SampleSet,
    eta: f64,
    m: usize,
) -> Result<InterpolationResult> {
    interpolate_iterative_with(g, basis, samples, eta, m, NewNodeValues::default())
}

pub fn interpolate_iterative_with<B: Eigenpairs + ?Sized>(
    g: &Graph,
    basis: &B,
    samples: &SampleSet,
    eta: f64,
    m: usize,
    source: NewNodeValues,
) -> Result<InterpolationResult> {
    if g.n() != basis.n() {
        return Err(GsiError::DimensionMismatch {
            expected: g.n(),
            got: basis.n(),
        });
    }
    samples.check_range(g.n())?;
    let mut known: Vec<Option<f64>> = vec![None; g.n()];
    for (&i, &v) in samples.indices().iter().zip(samples.values()) {
        known[i] = Some(v);
    }
    let mut active: Vec<usize> = samples.indices().to_vec();
    active.sort_unstable();

    let mut records = Vec::new();
    let mut best: Option<(Vec<f64>, Vec<f64>, SolveStatus)> = None;
    loop {
        let b: Vec<f64> = active.iter().map(|&i| known[i].expect("active nodes carry values")).collect();
        let a = constraint_matrix(basis, &active, m)?;
        let sol = match solve(a, &b, eta) {
            Ok(sol) => sol,
            Err(GsiError::Infeasible(res)) if best.is_some() => {
                log::warn!(
                    "iteration {} became infeasible (residual {res:e}); keeping the previous iterate",
                    records.len() + 1
                );
                break;
            }
            Err(e) => return Err(e),
        };
        let spectrum: Vec<f64> = sol.y.iter().copied().collect();
        let signal = reconstruct(basis, &spectrum);
        let mv = markov_variation(g, &signal, Norm::L2)?;
        records.push(record(&sol, active.len(), Some(mv)));
        log::debug!(
            "iteration {}: |M| = {}, ||y||_1 = {:e}, MV_2 = {:e}",
            records.len(),
            active.len(),
            sol.objective,
            mv
        );

        let next = one_hop_closure(g, &active)?;
        if next.len() == active.len() {
            best = Some((signal, spectrum, sol.status));
            break;
        }
        let fill = match source {
            NewNodeValues::Synthesis => synthesize(basis, &spectrum),
            NewNodeValues::Reconstruction => signal.clone(),
        };
        for &j in &next {
            if known[j].is_none() {
                known[j] = Some(fill[j]);
            }
        }
        best = Some((signal, spectrum, sol.status));
        active = next;
    }

    let unreached: Vec<usize> = (0..g.n()).filter(|&i| known[i].is_none()).collect();
    if !unreached.is_empty() {
        log::warn!(
            "{} nodes lie in components without samples and were never constrained: {:?}",
            unreached.len(),
            unreached
        );
    }
    let (signal, spectrum, status) = best.expect("at least one solve");
    Ok(InterpolationResult {
        method: Method::Iterative,
        signal,
        spectrum,
        iterations: records,
        status,
        fallback: false,
        unreached,
    })
}

/// Minimum-norm least-squares spectrum of `A y = s_M`.
pub fn least_squares_baseline<B: Eigenpairs + ?Sized>(
    basis: &B,
    samples: &SampleSet,
    m: usize,
) -> Result<InterpolationResult> {
    samples.check_range(basis.n())?;
    let a = constraint_matrix(basis, samples.indices(), m)?;
    let spectrum = min_norm_lstsq(a, samples.values())?;
    let signal = reconstruct(basis, &spectrum);
    let residual = sample_residual(samples, &signal);
    Ok(InterpolationResult {
        method: Method::LeastSquares,
        signal,
        iterations: vec![IterationRecord {
            active: samples.len(),
            spectrum_l1: spectrum.iter().map(|v| v.abs()).sum(),
            residual_inf: residual,
            markov_variation: None,
            solver_iterations: 0,
            status: SolveStatus::Optimal,
        }],
        spectrum,
        status: SolveStatus::Optimal,
        fallback: false,
        unreached: Vec::new(),
    })
}

fn min_norm_lstsq(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let svd = a.svd(true, true);
    let eps = 1e-12 * scale * svd.singular_values.len() as f64;
    let y = svd
        .solve(&DVector::from_column_slice(b), eps)
        .map_err(|e| GsiError::InvalidParameter(e.to_string()))?;
    Ok(y.iter().copied().collect())
}

fn sample_residual(samples: &SampleSet, signal: &[f64]) -> f64 {
    samples
        .indices()
        .iter()
        .zip(samples.values())
        .fold(0.0, |m, (&i, &v)| m.max((signal[i] - v).abs()))
}

/// Minimum-l1 coefficients over the `k` leading unscaled eigenvectors with
/// exact sample consistency, reconstructed as `V[:, ..k] y`. Infeasible
/// systems fall back to least squares on the same columns.
pub fn spectral_regression_baseline<B: Eigenpairs + ?Sized>(
    basis: &B,
    samples: &SampleSet,
    k: usize,
) -> Result<InterpolationResult> {
    samples.check_range(basis.n())?;
    check_width(basis, k)?;
    let a = unscaled_columns(basis, samples.indices(), k);
    let (spectrum, rec, fallback) = match solve(a.clone(), samples.values(), 0.0) {
        Ok(sol) => {
            let rec = record(&sol, samples.len(), None);
            (sol.y.iter().copied().collect::<Vec<_>>(), rec, false)
        }
        Err(GsiError::Infeasible(_)) => {
            log::info!("spectral regression system is inconsistent; using least squares on the same columns");
            let y = min_norm_lstsq(a, samples.values())?;
            let rec = IterationRecord {
                active: samples.len(),
                spectrum_l1: y.iter().map(|v| v.abs()).sum(),
                residual_inf: f64::NAN,
                markov_variation: None,
                solver_iterations: 0,
                status: SolveStatus::Infeasible,
            };
            (y, rec, true)
        }
        Err(e) => return Err(e),
    };
    let signal = synthesize(basis, &spectrum);
    let mut rec = rec;
    if fallback {
        rec.residual_inf = sample_residual(samples, &signal);
    }
    Ok(InterpolationResult {
        method: Method::SpectralRegression,
        signal,
        spectrum,
        status: rec.status,
        iterations: vec![rec],
        fallback,
        unreached: Vec::new(),
    })
}

/// Node-wise `argmax_k |s^k_i|`, lowest `k` on ties.
pub fn decode_classes(signals: &[Vec<f64>]) -> Result<Vec<usize>> {
    let Some(first) = signals.first() else {
        return Err(GsiError::InvalidParameter("no class signals".into()));
    };
    let n = first.len();
    if let Some(s) = signals.iter().find(|s| s.len() != n) {
        return Err(GsiError::DimensionMismatch { expected: n, got: s.len() });
    }
    Ok((0..n)
        .map(|i| {
            let mut best = 0;
            for k in 1..signals.len() {
                if signals[k][i].abs() > signals[best][i].abs() {
                    best = k;
                }
            }
            best
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::markov_matrix;
    use crate::spectral::markov_eigs;

    fn star() -> Graph {
        Graph::from_edges(5, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j, 1.0));
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }

    fn ring(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0 + 0.1 * i as f64)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    #[test]
    fn sample_set_validation() {
        assert!(SampleSet::new(vec![], vec![]).is_err());
        assert!(SampleSet::new(vec![1, 1], vec![0.0, 0.0]).is_err());
        assert!(SampleSet::new(vec![1], vec![f64::NAN]).is_err());
        assert!(SampleSet::new(vec![1, 2], vec![0.0]).is_err());
        let s = SampleSet::new(vec![3, 1], vec![2.0, -4.0]).unwrap();
        assert_eq!(s.default_eta(), 4e-8);
        assert!(s.check_range(3).is_err());
    }

    #[test]
    fn star_constraint_row() {
        let b = markov_eigs(&star()).unwrap();
        let a = constraint_matrix(&b, &[0], 5).unwrap();
        let v = b.eigenvectors();
        assert!((a[(0, 0)] - v[(0, 0)]).abs() < 1e-12);
        for j in 1..4 {
            assert!(a[(0, j)].abs() < 1e-12);
        }
        assert!((a[(0, 4)] + v[(0, 4)]).abs() < 1e-12);
    }

    #[test]
    fn full_constraint_matrix_is_pv() {
        let g = ring(7);
        let b = markov_eigs(&g).unwrap();
        let all: Vec<usize> = (0..7).collect();
        let a = constraint_matrix(&b, &all, 7).unwrap();
        let pv = markov_matrix(&g).unwrap().entries().to_dense() * b.eigenvectors();
        assert!((a - pv).amax() < 1e-8);
    }

    #[test]
    fn constant_signal_from_one_sample() {
        let g = complete(6);
        let b = markov_eigs(&g).unwrap();
        let s = SampleSet::new(vec![2], vec![3.5]).unwrap();
        let r = interpolate_one_shot(&b, &s, 0.0, 6).unwrap();
        for v in &r.signal {
            assert!((v - 3.5).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn star_iterative_converges_in_two() {
        let g = star();
        let b = markov_eigs(&g).unwrap();
        let s = SampleSet::new(vec![0], vec![1.0]).unwrap();
        let r = interpolate_iterative(&g, &b, &s, 1e-9, 5).unwrap();
        assert_eq!(r.iterations.len(), 2);
        assert_eq!(r.iterations[1].active, 5);
        assert!((r.signal[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn all_sampled_runs_once() {
        let g = ring(6);
        let b = markov_eigs(&g).unwrap();
        let truth: Vec<f64> = (0..6).map(|i| (i as f64).cos()).collect();
        let s = SampleSet::from_signal(&truth, &[0, 1, 2, 3, 4, 5]).unwrap();
        let r = interpolate_iterative(&g, &b, &s, 0.0, 6).unwrap();
        assert_eq!(r.iterations.len(), 1);
        for (a, t) in r.signal.iter().zip(&truth) {
            assert!((a - t).abs() < 1e-8);
        }
    }

    #[test]
    fn unsampled_component_reported() {
        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        let b = crate::spectral::markov_eigs(&g).unwrap();
        let s = SampleSet::new(vec![0], vec![1.0]).unwrap();
        let r = interpolate_iterative(&g, &b, &s, 1e-9, 5).unwrap();
        assert_eq!(r.unreached, vec![3, 4]);
    }

    #[test]
    fn least_squares_square_system() {
        let g = ring(5);
        let b = markov_eigs(&g).unwrap();
        let s = SampleSet::new(vec![0, 2, 4], vec![1.0, -1.0, 0.5]).unwrap();
        let r = least_squares_baseline(&b, &s, 3).unwrap();
        for (&i, &v) in s.indices().iter().zip(s.values()) {
            assert!((r.signal[i] - v).abs() < 1e-8);
        }
        let o = interpolate_one_shot(&b, &s, 0.0, 3).unwrap();
        for i in 0..5 {
            assert!((r.signal[i] - o.signal[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn spectral_regression_constant_and_fallback() {
        let g = ring(6);
        let b = markov_eigs(&g).unwrap();
        let s = SampleSet::new(vec![4], vec![2.0]).unwrap();
        let r = spectral_regression_baseline(&b, &s, 1).unwrap();
        assert!(!r.fallback);
        assert!(r.signal.iter().all(|v| (v - 2.0).abs() < 1e-9));
        // Two different values cannot both be matched by a constant.
        let s = SampleSet::new(vec![0, 3], vec![1.0, 2.0]).unwrap();
        let r = spectral_regression_baseline(&b, &s, 1).unwrap();
        assert!(r.fallback);
        assert!(r.signal.iter().all(|v| (v - r.signal[0]).abs() < 1e-9));
    }

    #[test]
    fn decode_ties_and_magnitudes() {
        let sig = vec![vec![0.2, -0.9, 0.0], vec![0.2, 0.5, 0.0], vec![0.1, 0.95, 0.0]];
        assert_eq!(decode_classes(&sig).unwrap(), vec![0, 2, 0]);
        assert!(decode_classes(&[]).is_err());
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        let err = "bogus".parse::<Method>().unwrap_err().to_string();
        assert!(err.contains("oneshot") && err.contains("specreg"));
    }
}
