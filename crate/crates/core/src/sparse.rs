//! Compressed sparse row storage.

use nalgebra::{DMatrix, DVector};

use crate::error::{GsiError, Result};

/// Square or rectangular matrix in compressed row form. Column indices are
/// sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicate entries are
    /// combined with `merge`.
    pub fn from_triplets_with<F>(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
        merge: F,
    ) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(i, j, _) in &sorted {
            if i >= nrows {
                return Err(GsiError::IndexOutOfRange { index: i, n: nrows });
            }
            if j >= ncols {
                return Err(GsiError::IndexOutOfRange { index: j, n: ncols });
            }
        }
        sorted.sort_by_key(|e| (e.0, e.1));

        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut data: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                let slot = data.last_mut().expect("entry exists");
                *slot = merge(*slot, v);
            } else {
                indices.push(j);
                data.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        })
    }

    /// Builds from triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_triplets_with(nrows, ncols, triplets, |a, b| a + b)
    }

    /// Keeps the entries of a dense matrix whose value is nonzero.
    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &triplets).expect("indices in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.data[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<(usize, usize, f64)> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t).expect("indices in range")
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(GsiError::DimensionMismatch {
                expected: self.ncols,
                got: x.len(),
            });
        }
        Ok((0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    pub fn mul_dvector(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.mul_vec(x.as_slice()).map(DVector::from_vec)
    }

    /// Sparse times dense product.
    pub fn mul_dense(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.ncols {
            return Err(GsiError::DimensionMismatch {
                expected: self.ncols,
                got: m.nrows(),
            });
        }
        let mut out = DMatrix::zeros(self.nrows, m.ncols());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for c in 0..m.ncols() {
                out[(i, c)] = cols.iter().zip(vals).map(|(&j, &v)| v * m[(j, c)]).sum();
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Applies `f` to every stored value, keeping the sparsity pattern.
    pub fn map_values<F: Fn(usize, usize, f64) -> f64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.data[k] = f(i, self.indices[k], self.data[k]);
            }
        }
        out
    }
}
