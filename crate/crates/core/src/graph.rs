//! Undirected weighted graphs, affinity construction and the Markov matrix.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{GsiError, Result};
use crate::sparse::CsrMatrix;

/// Mean Earth radius used by the haversine distance, in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Default multiplier applied to great-circle kilometers before the
/// Gaussian kernel, so that `exp(-d^2)` does not underflow for typical
/// sensor spacings.
pub const DEFAULT_DISTANCE_SCALE: f64 = 0.01;

/// Undirected weighted graph with a symmetric nonnegative affinity matrix
/// and cached degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    affinity: CsrMatrix,
    degrees: Vec<f64>,
}

impl Graph {
    /// Validates `w` (square, finite, nonnegative, zero diagonal, exactly
    /// symmetric) and caches its row sums. Explicit zero entries are dropped.
    pub fn from_affinity(w: CsrMatrix) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(GsiError::DimensionMismatch {
                expected: w.nrows(),
                got: w.ncols(),
            });
        }
        let mut kept = Vec::with_capacity(w.nnz());
        for (i, j, v) in w.triplets() {
            if !v.is_finite() || v < 0.0 {
                return Err(GsiError::InvalidWeight { i, j, weight: v });
            }
            if v == 0.0 {
                continue;
            }
            if i == j {
                return Err(GsiError::InvalidWeight { i, j, weight: v });
            }
            if w.get(j, i) != v {
                return Err(GsiError::NotSymmetric(i, j));
            }
            kept.push((i, j, v));
        }
        let affinity = CsrMatrix::from_triplets(w.nrows(), w.ncols(), &kept)?;
        let degrees = affinity.row_sums();
        Ok(Self { affinity, degrees })
    }

    /// Builds from a list of undirected edges `(i, j, w)`. Repeated edges keep
    /// the larger weight.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut triplets = Vec::with_capacity(2 * edges.len());
        for &(i, j, w) in edges {
            if i == j {
                return Err(GsiError::InvalidWeight { i, j, weight: w });
            }
            if !w.is_finite() || w < 0.0 {
                return Err(GsiError::InvalidWeight { i, j, weight: w });
            }
            triplets.push((i, j, w));
            triplets.push((j, i, w));
        }
        let w = CsrMatrix::from_triplets_with(n, n, &triplets, f64::max)?;
        Self::from_affinity(w)
    }

    /// Dense constructor for small hand-written graphs.
    pub fn from_dense(w: &nalgebra::DMatrix<f64>) -> Result<Self> {
        Self::from_affinity(CsrMatrix::from_dense(w))
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn affinity(&self) -> &CsrMatrix {
        &self.affinity
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.affinity.row(i).0
    }

    /// Undirected edges with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.affinity.triplets().filter(|&(i, j, _)| i < j).collect()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            Err(GsiError::IndexOutOfRange { index: i, n: self.n() })
        } else {
            Ok(())
        }
    }

    /// Breadth-first hop distance from the nearest source; `None` for nodes
    /// in components without a source.
    pub fn hop_distances(&self, sources: &[usize]) -> Result<Vec<Option<usize>>> {
        let mut dist = vec![None; self.n()];
        let mut queue = VecDeque::new();
        for &s in sources {
            self.check_index(s)?;
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes have a distance");
            for &v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist)
    }

    /// Connected component id per node, numbered by lowest member index.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n()];
        let mut next = 0;
        for start in 0..self.n() {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.components().iter().all(|&c| c == 0)
    }
}

/// Row-stochastic transition matrix `P = D^{-1} W`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowStochasticMatrix {
    entries: CsrMatrix,
}

impl RowStochasticMatrix {
    pub fn entries(&self) -> &CsrMatrix {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// `P s`.
    pub fn shift(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.entries.mul_vec(s)
    }
}

/// `P = D^{-1} W`; rejects any zero-degree node by index.
pub fn markov_matrix(g: &Graph) -> Result<RowStochasticMatrix> {
    if let Some(i) = g.degrees().iter().position(|&d| d <= 0.0) {
        return Err(GsiError::IsolatedNode(i));
    }
    let d = g.degrees();
    let entries = g.affinity().map_values(|i, _, w| w / d[i]);
    Ok(RowStochasticMatrix { entries })
}

/// Graph shift `A s`.
pub fn graph_shift(a: &CsrMatrix, s: &[f64]) -> Result<Vec<f64>> {
    a.mul_vec(s)
}

/// `M` together with every neighbor of a member, sorted ascending.
pub fn one_hop_closure(g: &Graph, nodes: &[usize]) -> Result<Vec<usize>> {
    let mut mark = vec![false; g.n()];
    for &i in nodes {
        g.check_index(i)?;
        mark[i] = true;
        for &j in g.neighbors(i) {
            mark[j] = true;
        }
    }
    Ok(mark
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect())
}

/// Entrywise maximum `max(W, W^T)`. The input must be square and
/// nonnegative with a zero diagonal.
pub fn symmetrize(w: &CsrMatrix) -> Result<Graph> {
    if w.nrows() != w.ncols() {
        return Err(GsiError::DimensionMismatch {
            expected: w.nrows(),
            got: w.ncols(),
        });
    }
    let mut triplets = Vec::with_capacity(2 * w.nnz());
    for (i, j, v) in w.triplets() {
        if !v.is_finite() || v < 0.0 || (i == j && v != 0.0) {
            return Err(GsiError::InvalidWeight { i, j, weight: v });
        }
        triplets.push((i, j, v));
        triplets.push((j, i, v));
    }
    let sym = CsrMatrix::from_triplets_with(w.nrows(), w.ncols(), &triplets, f64::max)?;
    Graph::from_affinity(sym)
}

/// Points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(1);
        if dim == 0 {
            return Err(GsiError::InvalidParameter("points must have dimension >= 1".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(GsiError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, coords })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Edge weight kernel for k-nearest-neighbor graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `exp(-d(x_i, x_j))`.
    ExpNegDist,
    /// `F_ij N^2 / sum_n sum_{m in M_n} F_nm` on the retained distances.
    /// Weights grow with distance; this is the literal digit-graph formula.
    NormalizedDist,
}

impl std::str::FromStr for Kernel {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp_neg_dist" => Ok(Kernel::ExpNegDist),
            "normalized_dist" => Ok(Kernel::NormalizedDist),
            _ => Err(GsiError::InvalidParameter(format!(
                "unknown kernel '{s}' (expected exp_neg_dist or normalized_dist)"
            ))),
        }
    }
}

/// Indices of the `l` nearest other nodes for each row, given a distance
/// callback. Ties at equal distance go to the lower index.
fn nearest<F: Fn(usize, usize) -> f64>(n: usize, l: usize, dist: F) -> Vec<Vec<(usize, f64)>> {
    (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = (0..n).filter(|&j| j != i).map(|j| (j, dist(i, j))).collect();
            let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
            if l < row.len() {
                row.select_nth_unstable_by(l, cmp);
                row.truncate(l);
            }
            row.sort_by(cmp);
            row
        })
        .collect()
}

/// k-nearest-neighbor affinity on a point cloud, max-symmetrized.
pub fn knn_affinity(points: &PointCloud, l: usize, kernel: Kernel) -> Result<Graph> {
    let n = points.len();
    if l == 0 || l >= n {
        return Err(GsiError::InvalidParameter(format!(
            "neighbor count must satisfy 1 <= L < N (L = {l}, N = {n})"
        )));
    }
    let nn = nearest(n, l, |i, j| points.distance(i, j));
    let mut triplets = Vec::with_capacity(n * l);
    match kernel {
        Kernel::ExpNegDist => {
            for (i, row) in nn.iter().enumerate() {
                for &(j, d) in row {
                    triplets.push((i, j, (-d).exp()));
                }
            }
        }
        Kernel::NormalizedDist => {
            let total: f64 = nn.iter().flatten().map(|&(_, d)| d).sum();
            if total <= 0.0 {
                return Err(GsiError::InvalidParameter(
                    "all retained distances are zero; normalized kernel undefined".into(),
                ));
            }
            let scale = (n * n) as f64 / total;
            for (i, row) in nn.iter().enumerate() {
                for &(j, d) in row {
                    triplets.push((i, j, d * scale));
                }
            }
        }
    }
    let directed = CsrMatrix::from_triplets(n, n, &triplets)?;
    symmetrize(&directed)
}

/// One sensor: position in degrees, elevation in meters, measured value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub lon: f64,
    pub lat: f64,
    pub elev: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SensorTable {
    rows: Vec<Sensor>,
}

impl SensorTable {
    pub fn new(rows: Vec<Sensor>) -> Result<Self> {
        for (k, s) in rows.iter().enumerate() {
            if !(-180.0..=180.0).contains(&s.lon) || !(-90.0..=90.0).contains(&s.lat) {
                return Err(GsiError::InvalidParameter(format!(
                    "sensor {k}: coordinates ({}, {}) out of range",
                    s.lon, s.lat
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Sensor] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|s| s.value).collect()
    }
}

/// Great-circle distance in kilometers; elevation is ignored.
pub fn haversine_km(a: &Sensor, b: &Sensor) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Sensor graph on the `k` geodesically nearest neighbors:
/// `A_nm = exp(-d_nm^2) / sqrt(S_n S_m)` with `S_n = sum_{k in N_n} exp(-d_nk^2)`,
/// then `W = max(A, A^T)`. Distances are haversine kilometers times `scale`.
pub fn geodesic_affinity(sensors: &SensorTable, k: usize, scale: f64) -> Result<Graph> {
    let n = sensors.len();
    if k == 0 || k >= n {
        return Err(GsiError::InvalidParameter(format!(
            "neighbor count must satisfy 1 <= K < N (K = {k}, N = {n})"
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(GsiError::InvalidParameter(format!("distance scale {scale} must be positive")));
    }
    let rows = sensors.rows();
    let nn = nearest(n, k, |i, j| haversine_km(&rows[i], &rows[j]) * scale);
    // Normalizers in log space so that far-apart neighborhoods do not underflow.
    let log_s: Vec<f64> = nn
        .iter()
        .map(|row| log_sum_exp(row.iter().map(|&(_, d)| -d * d)))
        .collect();
    let mut triplets = Vec::with_capacity(n * k);
    for (i, row) in nn.iter().enumerate() {
        for &(j, d) in row {
            let w = (-d * d - 0.5 * (log_s[i] + log_s[j])).exp();
            triplets.push((i, j, w));
        }
    }
    let directed = CsrMatrix::from_triplets(n, n, &triplets)?;
    symmetrize(&directed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    pub(crate) fn star() -> Graph {
        let mut w = DMatrix::zeros(5, 5);
        for j in 1..5 {
            w[(0, j)] = 1.0;
            w[(j, 0)] = 1.0;
        }
        Graph::from_dense(&w).unwrap()
    }

    #[test]
    fn rejects_asymmetric_and_negative() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 1.0, 0.0]);
        assert_eq!(Graph::from_dense(&w), Err(GsiError::NotSymmetric(0, 1)));
        let w = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        assert!(matches!(Graph::from_dense(&w), Err(GsiError::InvalidWeight { .. })));
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert!(Graph::from_dense(&w).is_err());
    }

    #[test]
    fn star_markov_rows() {
        let p = markov_matrix(&star()).unwrap();
        let d = p.entries().to_dense();
        for j in 1..5 {
            assert_eq!(d[(0, j)], 0.25);
            assert_eq!(d[(j, 0)], 1.0);
        }
        assert_eq!(d[(0, 0)], 0.0);
    }

    #[test]
    fn complete_three_markov() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let p = markov_matrix(&g).unwrap();
        for (i, j, v) in p.entries().triplets() {
            assert_ne!(i, j);
            assert_eq!(v, 0.5);
        }
        assert_eq!(p.shift(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn isolated_node_is_named() {
        let g = Graph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(markov_matrix(&g), Err(GsiError::IsolatedNode(2)));
    }

    #[test]
    fn shift_examples() {
        let p = markov_matrix(&star()).unwrap();
        let s2 = [0.0, -2.0, -2.0, 2.0, 2.0];
        assert_eq!(p.shift(&s2).unwrap(), vec![0.0; 5]);
        let id = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]).unwrap();
        assert_eq!(graph_shift(&id, &[3.0, -1.0, 2.0]).unwrap(), vec![3.0, -1.0, 2.0]);
        assert!(graph_shift(&id, &[1.0]).is_err());
    }

    #[test]
    fn closure_examples() {
        let g = star();
        assert_eq!(one_hop_closure(&g, &[0]).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(one_hop_closure(&g, &[1]).unwrap(), vec![0, 1]);
        assert_eq!(one_hop_closure(&g, &[0, 1, 2, 3, 4]).unwrap(), vec![0, 1, 2, 3, 4]);
        assert!(one_hop_closure(&g, &[5]).is_err());
    }

    #[test]
    fn symmetrize_examples() {
        let w = CsrMatrix::from_triplets(2, 2, &[(0, 1, 2.0), (1, 0, 1.0)]).unwrap();
        let g = symmetrize(&w).unwrap();
        assert_eq!(g.affinity().to_dense(), DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0]));
        let again = symmetrize(g.affinity()).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn knn_collinear() {
        let pc = PointCloud::new(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let g = knn_affinity(&pc, 1, Kernel::ExpNegDist).unwrap();
        let e = (-1.0f64).exp();
        assert_eq!(g.edges(), vec![(0, 1, e), (1, 2, e)]);

        let pc = PointCloud::new(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let g = knn_affinity(&pc, 1, Kernel::ExpNegDist).unwrap();
        assert_eq!(g.edges(), vec![(0, 1, e), (1, 2, (-2.0f64).exp())]);
    }

    #[test]
    fn knn_identical_points() {
        let pc = PointCloud::new(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let g = knn_affinity(&pc, 1, Kernel::ExpNegDist).unwrap();
        assert_eq!(g.edges(), vec![(0, 1, 1.0)]);
        assert!(knn_affinity(&pc, 2, Kernel::ExpNegDist).is_err());
    }

    #[test]
    fn knn_tie_goes_to_lower_index() {
        let pc = PointCloud::new(&[vec![0.0], vec![-1.0], vec![1.0]]).unwrap();
        let nn = nearest(3, 1, |i, j| pc.distance(i, j));
        // Node 0 is equidistant from 1 and 2 and keeps node 1.
        assert_eq!(nn[0], vec![(1, 1.0)]);
    }

    #[test]
    fn normalized_kernel_formula() {
        let pc = PointCloud::new(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let g = knn_affinity(&pc, 1, Kernel::NormalizedDist).unwrap();
        // Retained distances: 0->1 (1), 1->0 (1), 2->1 (2); sum 4, N^2 = 9.
        assert!((g.affinity().get(0, 1) - 9.0 / 4.0).abs() < 1e-15);
        assert!((g.affinity().get(1, 2) - 2.0 * 9.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn geodesic_two_and_three_sensors() {
        let s = |lon, lat| Sensor {
            lon,
            lat,
            elev: 0.0,
            value: 0.0,
        };
        let two = SensorTable::new(vec![s(0.0, 0.0), s(1.0, 0.0)]).unwrap();
        let g = geodesic_affinity(&two, 1, DEFAULT_DISTANCE_SCALE).unwrap();
        assert!((g.affinity().get(0, 1) - 1.0).abs() < 1e-12);

        // Equilateral triangle near the equator, 1 degree sides.
        let h = (3.0f64).sqrt() / 2.0;
        let tri = SensorTable::new(vec![s(0.0, 0.0), s(1.0, 0.0), s(0.5, h)]).unwrap();
        let g = geodesic_affinity(&tri, 2, DEFAULT_DISTANCE_SCALE).unwrap();
        for (_, _, w) in g.edges() {
            assert!((w - 0.5).abs() < 1e-3, "{w}");
        }
    }

    #[test]
    fn sensor_range_checked() {
        let bad = Sensor {
            lon: 190.0,
            lat: 0.0,
            elev: 0.0,
            value: 1.0,
        };
        assert!(SensorTable::new(vec![bad]).is_err());
    }

    #[test]
    fn hop_distances_and_components() {
        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)]).unwrap();
        assert_eq!(g.hop_distances(&[0]).unwrap(), vec![Some(0), Some(1), Some(2), None, None]);
        assert_eq!(g.components(), vec![0, 0, 0, 1, 1]);
        assert!(!g.is_connected());
    }
}
