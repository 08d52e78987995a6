//! Exact Markov spectra through the normalized Laplacian.
//!
//! The Markov matrix `P = D^{-1} W` is similar to `I - L` where
//! `L = I - D^{-1/2} W D^{-1/2}` is symmetric. We decompose `L = U diag(mu) U^T`
//! and map `psi_i = D^{-1/2} u_i`, `lambda_i = 1 - mu_i`. Columns of `V` are
//! therefore not unit norm; rescaling a column rescales the matching spectrum
//! entry inversely and leaves reconstructions unchanged.

use nalgebra::{DMatrix, DVector};

use crate::error::{GsiError, Result};
use crate::graph::Graph;

/// Largest graph decomposed densely by [`markov_eigs`].
pub const FULL_DECOMPOSITION_LIMIT: usize = 4096;

/// Markov eigenpairs sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    laplacian_eigenvalues: DVector<f64>,
    laplacian_eigenvectors: DMatrix<f64>,
    degree_sqrt: DVector<f64>,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Markov eigenvalues `lambda`, descending.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `V = D^{-1/2} U`, one eigenvector per column.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Normalized Laplacian eigenvalues `1 - lambda`, ascending.
    pub fn laplacian_eigenvalues(&self) -> &DVector<f64> {
        &self.laplacian_eigenvalues
    }

    /// Orthonormal `U`.
    pub fn laplacian_eigenvectors(&self) -> &DMatrix<f64> {
        &self.laplacian_eigenvectors
    }

    pub fn degree_sqrt(&self) -> &DVector<f64> {
        &self.degree_sqrt
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(GsiError::DimensionMismatch {
                expected: self.n(),
                got: len,
            });
        }
        Ok(())
    }
}

/// Symmetric normalized Laplacian as a dense matrix.
pub fn normalized_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    if let Some(i) = g.degrees().iter().position(|&d| d <= 0.0) {
        return Err(GsiError::IsolatedNode(i));
    }
    let n = g.n();
    let inv_sqrt: Vec<f64> = g.degrees().iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut l = DMatrix::identity(n, n);
    for (i, j, w) in g.affinity().triplets() {
        l[(i, j)] -= w * inv_sqrt[i] * inv_sqrt[j];
    }
    Ok(l)
}

/// Flips each column so that its largest-magnitude entry (first on ties) is
/// positive.
pub(crate) fn fix_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut best = 0usize;
        for k in 1..col.len() {
            if col[k].abs() > col[best].abs() {
                best = k;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Eigendecomposition of a dense symmetric matrix with eigenvalues ascending
/// (stable order) and sign-normalized eigenvectors.
pub(crate) fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    fix_signs(&mut vectors);
    (values, vectors)
}

/// Full Markov eigendecomposition. Fails above [`FULL_DECOMPOSITION_LIMIT`]
/// nodes; see [`markov_eigs_unbounded`].
pub fn markov_eigs(g: &Graph) -> Result<SpectralBasis> {
    if g.n() > FULL_DECOMPOSITION_LIMIT {
        return Err(GsiError::TooLarge {
            n: g.n(),
            limit: FULL_DECOMPOSITION_LIMIT,
        });
    }
    markov_eigs_unbounded(g)
}

/// [`markov_eigs`] without the size guard.
pub fn markov_eigs_unbounded(g: &Graph) -> Result<SpectralBasis> {
    let l = normalized_laplacian(g)?;
    if !g.is_connected() {
        log::warn!("graph is disconnected; eigenvalue 1 is repeated and the leading eigenvector is not unique");
    }
    let n = g.n();
    let (mu, u) = sorted_symmetric_eigen(l);
    let degree_sqrt = DVector::from_iterator(n, g.degrees().iter().map(|d| d.sqrt()));
    let mut v = u.clone();
    for (i, mut row) in v.row_iter_mut().enumerate() {
        row /= degree_sqrt[i];
    }
    let lambda = mu.map(|x| 1.0 - x);
    Ok(SpectralBasis {
        eigenvalues: lambda,
        eigenvectors: v,
        laplacian_eigenvalues: mu,
        laplacian_eigenvectors: u,
        degree_sqrt,
    })
}

/// Graph Fourier transform `V^{-1} s = U^T D^{1/2} s`.
pub fn gft(basis: &SpectralBasis, s: &[f64]) -> Result<DVector<f64>> {
    basis.check_len(s.len())?;
    let scaled = DVector::from_iterator(s.len(), s.iter().zip(basis.degree_sqrt.iter()).map(|(x, d)| x * d));
    Ok(basis.laplacian_eigenvectors.tr_mul(&scaled))
}

/// Inverse transform `V s_hat`.
pub fn igft(basis: &SpectralBasis, spectrum: &[f64]) -> Result<DVector<f64>> {
    basis.check_len(spectrum.len())?;
    Ok(&basis.eigenvectors * DVector::from_column_slice(spectrum))
}

/// Rows of `Psi_t = V Lambda^t`; row `i` is the embedding of node `i`.
#[derive(Debug, Clone)]
pub struct DiffusionEmbedding {
    pub scale: u32,
    pub vectors: DMatrix<f64>,
}

impl DiffusionEmbedding {
    pub fn node(&self, i: usize) -> Vec<f64> {
        self.vectors.row(i).iter().copied().collect()
    }
}

pub fn diffusion_embedding(basis: &SpectralBasis, t: u32) -> DiffusionEmbedding {
    let mut vectors = basis.eigenvectors.clone();
    if t > 0 {
        for (j, mut col) in vectors.column_iter_mut().enumerate() {
            col *= basis.eigenvalues[j].powi(t as i32);
        }
    }
    DiffusionEmbedding { scale: t, vectors }
}
