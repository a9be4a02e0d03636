//! Compressed sparse row storage for real matrices.

use nalgebra::DMatrix;
use rayon::prelude::*;

/// Rows below this count are multiplied sequentially.
const PAR_ROWS: usize = 4096;

/// A real matrix in compressed sparse row form.
///
/// Column indices inside each row are strictly increasing and explicit zeros
/// are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate positions are summed; positions whose sum is exactly zero are
    /// dropped. Indices must already be in range.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of range");
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0f64; triplets.len()];
        for &(i, j, v) in triplets {
            let slot = next[i];
            cols[slot] = j;
            vals[slot] = v;
            next[i] += 1;
        }

        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|s| (cols[s], vals[s])));
            row.sort_by_key(|&(j, _)| j);
            let mut p = 0;
            while p < row.len() {
                let j = row[p].0;
                let mut sum = 0.0;
                while p < row.len() && row[p].0 == j {
                    sum += row[p].1;
                    p += 1;
                }
                if sum != 0.0 {
                    indices.push(j);
                    values.push(sum);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    /// Builds a matrix from rows already sorted by column without duplicates.
    pub(crate) fn from_sorted_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                debug_assert!(j < ncols);
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_sorted_rows(m.ncols(), rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[range.clone()], &self.values[range])
    }

    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (cols, vals) = self.row(i);
        cols.iter().copied().zip(vals.iter().copied())
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row_iter(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.ncols];
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            sums[j] += v;
        }
        sums
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0f64; self.nnz()];
        for i in 0..self.nrows {
            for (j, v) in self.row_iter(i) {
                let slot = next[j];
                indices[slot] = i;
                values[slot] = v;
                next[j] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr: counts,
            indices,
            values,
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let row_dot = |i: usize| -> f64 {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
        };
        if self.nrows >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
    }

    /// `y = A^T x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, v) in self.row_iter(i) {
                y[j] += v * xi;
            }
        }
        y
    }

    /// Sparse product `A B`, one output row at a time with a dense
    /// accumulator. Output rows are independent, so the result does not depend
    /// on the thread count.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in matmul");
        let ncols = other.ncols;
        let compute_row = |i: usize, acc: &mut Vec<f64>, mark: &mut Vec<bool>| {
            let mut touched: Vec<usize> = Vec::new();
            for (k, a) in self.row_iter(i) {
                for (j, b) in other.row_iter(k) {
                    if !mark[j] {
                        mark[j] = true;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            let row: Vec<(usize, f64)> = touched
                .iter()
                .map(|&j| {
                    let v = acc[j];
                    acc[j] = 0.0;
                    mark[j] = false;
                    (j, v)
                })
                .filter(|&(_, v)| v != 0.0)
                .collect();
            row
        };
        let rows: Vec<Vec<(usize, f64)>> = if self.nrows >= PAR_ROWS {
            (0..self.nrows)
                .into_par_iter()
                .map_init(
                    || (vec![0.0; ncols], vec![false; ncols]),
                    |(acc, mark), i| compute_row(i, acc, mark),
                )
                .collect()
        } else {
            let mut acc = vec![0.0; ncols];
            let mut mark = vec![false; ncols];
            (0..self.nrows)
                .map(|i| compute_row(i, &mut acc, &mut mark))
                .collect()
        };
        CsrMatrix::from_sorted_rows(ncols, rows)
    }

    /// Multiplies row `i` by `scale[i]`.
    pub fn scale_rows(&self, scale: &[f64]) -> CsrMatrix {
        assert_eq!(scale.len(), self.nrows);
        let mut out = self.clone();
        for (i, &s) in scale.iter().enumerate() {
            for v in &mut out.values[self.indptr[i]..self.indptr[i + 1]] {
                *v *= s;
            }
        }
        out.drop_zeros();
        out
    }

    /// Multiplies column `j` by `scale[j]`.
    pub fn scale_cols(&self, scale: &[f64]) -> CsrMatrix {
        assert_eq!(scale.len(), self.ncols);
        let mut out = self.clone();
        for (v, &j) in out.values.iter_mut().zip(&self.indices) {
            *v *= scale[j];
        }
        out.drop_zeros();
        out
    }

    /// `alpha * self + beta * other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let rows = (0..self.nrows)
            .map(|i| {
                let (ca, va) = self.row(i);
                let (cb, vb) = other.row(i);
                let mut row = Vec::with_capacity(ca.len() + cb.len());
                let (mut p, mut q) = (0, 0);
                while p < ca.len() || q < cb.len() {
                    if q == cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                        row.push((ca[p], alpha * va[p]));
                        p += 1;
                    } else if p == ca.len() || cb[q] < ca[p] {
                        row.push((cb[q], beta * vb[q]));
                        q += 1;
                    } else {
                        row.push((ca[p], alpha * va[p] + beta * vb[q]));
                        p += 1;
                        q += 1;
                    }
                }
                row
            })
            .collect();
        CsrMatrix::from_sorted_rows(self.ncols, rows)
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let rows = (0..self.nrows)
            .map(|i| self.row_iter(i).filter(|&(_, v)| v != 0.0).collect())
            .collect();
        *self = CsrMatrix::from_sorted_rows(self.ncols, rows);
    }

    /// Largest `|a_ij - a_ji|` over all positions.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let t = self.transpose();
        self.add_scaled(1.0, &t, -1.0)
            .values
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.ncols];
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            sums[j] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> CsrMatrix {
        CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 0, 2.0), (1, 1, 3.0), (0, 2, 4.0)])
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = example();
        assert_eq!(a.row(0), (&[0usize, 2][..], &[2.0, 5.0][..]));
        assert_eq!(a.get(1, 1), 3.0);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn cancelling_duplicates_are_dropped() {
        let a = CsrMatrix::from_triplets(1, 1, &[(0, 0, 1.0), (0, 0, -1.0)]);
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn transpose_and_products_match_dense() {
        let a = example();
        let b = CsrMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (2, 1, -1.0), (1, 0, 0.5)]);
        let dense = a.to_dense() * b.to_dense();
        assert_eq!(a.matmul(&b).to_dense(), dense);
        assert_eq!(a.transpose().to_dense(), a.to_dense().transpose());
        let x = [1.0, 2.0, 3.0];
        assert_eq!(a.matvec(&x), vec![17.0, 6.0]);
        assert_eq!(a.tr_matvec(&[1.0, 1.0]), vec![2.0, 3.0, 5.0]);
    }

    #[test]
    fn sums_and_norms() {
        let a = example();
        assert_eq!(a.row_sums(), vec![7.0, 3.0]);
        assert_eq!(a.col_sums(), vec![2.0, 3.0, 5.0]);
        assert_eq!(a.norm_one(), 5.0);
        let s = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.5)]);
        assert_eq!(s.max_asymmetry(), 0.5);
    }

    #[test]
    fn add_scaled_merges_patterns() {
        let a = CsrMatrix::identity(2);
        let b = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 1, 1.0)]);
        let c = a.add_scaled(1.0, &b, -1.0);
        assert_eq!(c.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]));
        assert_eq!(c.nnz(), 2);
    }
}
