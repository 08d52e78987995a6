//! Nystrom-extended approximate Markov spectra.
//!
//! The kernel is the normalized Laplacian `L`, which is PSD. With the
//! landmark nodes ordered first, `L = [E B^T; B C]`. The eigenpairs
//! `E = Z Q Z^T` of the landmark block are extended to all nodes as
//! `[Z; B Z Q^{-1}]` (standard) or `[Z; B Z]` (revised, every eigenvalue
//! treated as one), then mapped to the Markov matrix by `V = D^{-1/2} Z`
//! and `lambda = 1 - q`. `C` is never formed.
//!
//! Only `r` eigenpairs are produced. Interpolation constrains only the
//! landmark rows, which are identical in both modes, so the spectrum does
//! not depend on the mode; only the extended rows of the signal do.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GsiError, Result};
use crate::graph::Graph;
use crate::interpolation::{interpolate_one_shot, Eigenpairs, InterpolationResult, Method, SampleSet};
use crate::sparse::CsrMatrix;
use crate::spectral::sorted_symmetric_eigen;

const SINGULAR_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NystromMode {
    Standard,
    #[default]
    Revised,
}

impl FromStr for NystromMode {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(NystromMode::Standard),
            "revised" => Ok(NystromMode::Revised),
            _ => Err(GsiError::InvalidParameter(format!(
                "unknown Nystrom mode '{s}' (expected standard or revised)"
            ))),
        }
    }
}

/// Landmark block `E = L[M, M]` and extension block `B = L[M^c, M]`.
#[derive(Debug, Clone)]
pub struct KernelBlocks {
    pub e: DMatrix<f64>,
    pub b: CsrMatrix,
    /// Landmarks in the given order, then the remaining nodes ascending.
    pub permutation: Vec<usize>,
}

impl KernelBlocks {
    pub fn r(&self) -> usize {
        self.e.nrows()
    }
}

fn inv_sqrt_degrees(g: &Graph) -> Result<Vec<f64>> {
    if let Some(i) = g.degrees().iter().position(|&d| d <= 0.0) {
        return Err(GsiError::IsolatedNode(i));
    }
    Ok(g.degrees().iter().map(|d| 1.0 / d.sqrt()).collect())
}

pub fn partition_kernel(g: &Graph, landmarks: &[usize]) -> Result<KernelBlocks> {
    let n = g.n();
    if landmarks.is_empty() {
        return Err(GsiError::InvalidParameter("landmark set is empty".into()));
    }
    let mut pos = vec![usize::MAX; n];
    for (k, &i) in landmarks.iter().enumerate() {
        if i >= n {
            return Err(GsiError::IndexOutOfRange { index: i, n });
        }
        if pos[i] != usize::MAX {
            return Err(GsiError::InvalidParameter(format!("landmark {i} listed twice")));
        }
        pos[i] = k;
    }
    let inv = inv_sqrt_degrees(g)?;
    let r = landmarks.len();
    let rest: Vec<usize> = (0..n).filter(|&i| pos[i] == usize::MAX).collect();

    let mut e = DMatrix::identity(r, r);
    for (k, &i) in landmarks.iter().enumerate() {
        let (cols, vals) = g.affinity().row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            if pos[j] != usize::MAX {
                e[(k, pos[j])] -= w * inv[i] * inv[j];
            }
        }
    }
    let mut triplets = Vec::new();
    for (row, &i) in rest.iter().enumerate() {
        let (cols, vals) = g.affinity().row(i);
        for (&j, &w) in cols.iter().zip(vals) {
            if pos[j] != usize::MAX {
                triplets.push((row, pos[j], -w * inv[i] * inv[j]));
            }
        }
    }
    let b = CsrMatrix::from_triplets(rest.len(), r, &triplets)?;
    let mut permutation = landmarks.to_vec();
    permutation.extend(rest);
    Ok(KernelBlocks { e, b, permutation })
}

/// Extended eigenvectors in permuted order and the landmark-block
/// eigenvalues `q`, ascending.
#[derive(Debug, Clone)]
pub struct Extension {
    pub z: DMatrix<f64>,
    pub q: DVector<f64>,
}

pub fn nystrom_extend(blocks: &KernelBlocks, mode: NystromMode) -> Result<Extension> {
    let r = blocks.r();
    let (q, z) = sorted_symmetric_eigen(blocks.e.clone());
    if let Some(&min) = q.iter().find(|&&v| v < -PSD_TOL) {
        log::warn!("landmark block has a negative eigenvalue {min:e}; the kernel is not PSD");
    }
    let mut lower = blocks.b.mul_dense(&z)?;
    if mode == NystromMode::Standard {
        if let Some(&value) = q.iter().find(|v| v.abs() < SINGULAR_TOL) {
            return Err(GsiError::SingularBlock { value });
        }
        for (j, mut col) in lower.column_iter_mut().enumerate() {
            col /= q[j];
        }
    }
    let rest = lower.nrows();
    let mut full = DMatrix::zeros(r + rest, r);
    full.rows_mut(0, r).copy_from(&z);
    full.rows_mut(r, rest).copy_from(&lower);
    Ok(Extension { z: full, q })
}

/// Approximate Markov eigenpairs, `r` of them, leading first.
#[derive(Debug, Clone)]
pub struct ApproxBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    landmarks: Vec<usize>,
    mode: NystromMode,
}

impl ApproxBasis {
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `N x r`, rows in original node order.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn landmarks(&self) -> &[usize] {
        &self.landmarks
    }

    pub fn mode(&self) -> NystromMode {
        self.mode
    }
}

impl Eigenpairs for ApproxBasis {
    fn vectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    fn values(&self) -> &DVector<f64> {
        &self.eigenvalues
    }
}

pub fn nystrom_markov_eigs(g: &Graph, landmarks: &[usize], mode: NystromMode) -> Result<ApproxBasis> {
    let blocks = partition_kernel(g, landmarks)?;
    let ext = nystrom_extend(&blocks, mode)?;
    let inv = inv_sqrt_degrees(g)?;
    let (n, r) = (g.n(), blocks.r());
    let mut v = DMatrix::zeros(n, r);
    for (k, &node) in blocks.permutation.iter().enumerate() {
        for j in 0..r {
            v[(node, j)] = ext.z[(k, j)] * inv[node];
        }
    }
    Ok(ApproxBasis {
        eigenvalues: ext.q.map(|q| 1.0 - q),
        eigenvectors: v,
        landmarks: landmarks.to_vec(),
        mode,
    })
}

/// One-shot interpolation over the Nystrom basis built with the sample
/// nodes as landmarks, using all `r` approximate eigenpairs.
///
/// A sample with no sampled neighbor gets an all-zero constraint row (its
/// landmark-block eigenvalue is exactly `q = 1`), so it can only be matched
/// when its value is within `eta` of zero. This is the sparse-graph regime
/// the method is not meant for.
pub fn interpolate_nystrom(g: &Graph, samples: &SampleSet, eta: f64, mode: NystromMode) -> Result<InterpolationResult> {
    samples.check_range(g.n())?;
    let mut sampled = vec![false; g.n()];
    for &i in samples.indices() {
        sampled[i] = true;
    }
    let lonely: Vec<usize> = samples
        .indices()
        .iter()
        .copied()
        .filter(|&i| !g.neighbors(i).iter().any(|&j| sampled[j]))
        .collect();
    if !lonely.is_empty() {
        log::warn!("samples without a sampled neighbor have zero constraint rows: {lonely:?}");
    }
    let basis = nystrom_markov_eigs(g, samples.indices(), mode)?;
    let mut res = interpolate_one_shot(&basis, samples, eta, basis.width())?;
    res.method = Method::Nystrom;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::normalized_laplacian;

    fn k2() -> Graph {
        Graph::from_edges(2, &[(0, 1, 2.0)]).unwrap()
    }

    #[test]
    fn k2_blocks() {
        let b = partition_kernel(&k2(), &[0]).unwrap();
        assert_eq!(b.e[(0, 0)], 1.0);
        assert_eq!(b.permutation, vec![0, 1]);
        // -w / sqrt(d1 d2) with w = d = 2.
        assert!((b.b.get(0, 0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn blocks_match_dense_laplacian() {
        let g = Graph::from_edges(5, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 4, 0.5), (4, 0, 1.5), (1, 3, 0.7)]).unwrap();
        let l = normalized_laplacian(&g).unwrap();
        let m = [3, 0];
        let b = partition_kernel(&g, &m).unwrap();
        assert_eq!(b.permutation, vec![3, 0, 1, 2, 4]);
        for (a, &i) in m.iter().enumerate() {
            for (c, &j) in m.iter().enumerate() {
                assert!((b.e[(a, c)] - l[(i, j)]).abs() < 1e-15);
            }
        }
        for (row, &i) in b.permutation[2..].iter().enumerate() {
            for (c, &j) in m.iter().enumerate() {
                assert!((b.b.get(row, c) - l[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn diagonal_example() {
        let blocks = KernelBlocks {
            e: DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
            b: CsrMatrix::from_dense(&DMatrix::from_row_slice(1, 2, &[1.0, 0.0])),
            permutation: vec![0, 1, 2],
        };
        let s = nystrom_extend(&blocks, NystromMode::Standard).unwrap();
        let r = nystrom_extend(&blocks, NystromMode::Revised).unwrap();
        assert_eq!(s.z.row(2).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0]);
        assert_eq!(r.z.row(2).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0]);
    }

    #[test]
    fn singular_block_rejected_in_standard_mode() {
        // With every node a landmark, E = L has the eigenvalue 0.
        let g = k2();
        let blocks = partition_kernel(&g, &[0, 1]).unwrap();
        assert!(matches!(nystrom_extend(&blocks, NystromMode::Standard), Err(GsiError::SingularBlock { .. })));
        assert!(nystrom_extend(&blocks, NystromMode::Revised).is_ok());
    }

    #[test]
    fn rejects_bad_landmarks() {
        assert!(partition_kernel(&k2(), &[]).is_err());
        assert!(partition_kernel(&k2(), &[0, 0]).is_err());
        assert!(partition_kernel(&k2(), &[2]).is_err());
    }
}
