//! Eigen- and singular-value decompositions for the clustering pipelines.
//!
//! Matrices up to [`EigenOptions::dense_threshold`] rows go through a dense
//! symmetric solver; larger ones through [`lanczos::lanczos_top_k`].

pub mod lanczos;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DegreeVector;
use crate::operators::{NuVector, StochasticMatrix};
use crate::sparse::CsrMatrix;
use crate::tolerances::DEFAULT;
use lanczos::{lanczos_top_k, LanczosParams, LinearOperator};

/// Solver configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Matrices with at most this many rows are solved densely.
    pub dense_threshold: usize,
    /// Ritz residual at which a Lanczos pair counts as converged.
    pub tol: f64,
    /// Lanczos steps per run; `None` means `10 k + 200`.
    pub max_iter: Option<usize>,
    /// Seed for the Lanczos start vectors.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            dense_threshold: 512,
            tol: 1e-9,
            max_iter: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Dense,
    Lanczos { iterations: usize },
}

/// Leading eigenpairs, sorted by descending eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// `n x k`, unit columns; the largest-magnitude entry of each column is
    /// positive.
    pub eigenvectors: DMatrix<f64>,
    /// `||M v - lambda v||_2` per pair.
    pub residuals: Vec<f64>,
    /// Index groups of eigenvalues closer than the degeneracy gap. Only the
    /// spanned subspace of such a group is meaningful.
    pub degenerate_groups: Vec<Vec<usize>>,
    pub method: SolverMethod,
}

impl SpectralDecomposition {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Square roots of the (clamped) eigenvalues; singular values when the
    /// decomposition came from [`right_singular_vectors`].
    pub fn singular_values(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect()
    }
}

/// Flips each column so its largest-magnitude entry is positive.
pub fn normalize_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0.0f64;
        for &x in col.iter() {
            if x.abs() > best.abs() {
                best = x;
            }
        }
        if best < 0.0 {
            col.neg_mut();
        }
    }
}

fn degenerate_groups(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    let mut current = vec![0];
    for i in 1..values.len() {
        if (values[i - 1] - values[i]).abs() < gap {
            current.push(i);
        } else {
            if current.len() > 1 {
                groups.push(std::mem::take(&mut current));
            }
            current = vec![i];
        }
    }
    if current.len() > 1 {
        groups.push(current);
    }
    groups
}

fn residuals(op: &dyn LinearOperator, values: &[f64], vectors: &DMatrix<f64>) -> Vec<f64> {
    let n = op.dim();
    let mut y = vec![0.0; n];
    values
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let v: Vec<f64> = vectors.column(i).iter().copied().collect();
            op.apply(&v, &mut y);
            y.iter()
                .zip(&v)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

fn assemble(
    op: &dyn LinearOperator,
    values: Vec<f64>,
    mut vectors: DMatrix<f64>,
    method: SolverMethod,
) -> SpectralDecomposition {
    normalize_signs(&mut vectors);
    let residuals = residuals(op, &values, &vectors);
    let degenerate_groups = degenerate_groups(&values, DEFAULT.degeneracy_gap);
    SpectralDecomposition {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
        degenerate_groups,
        method,
    }
}

/// Top `k` eigenpairs of a dense symmetric matrix, descending.
pub(crate) fn dense_top_k(m: DMatrix<f64>, k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order.truncate(k);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<DVector<f64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, DMatrix::from_columns(&cols))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

fn solve_operator(
    op: &dyn LinearOperator,
    dense: impl FnOnce() -> DMatrix<f64>,
    k: usize,
    opts: &EigenOptions,
) -> Result<SpectralDecomposition> {
    let n = op.dim();
    check_k(k, n)?;
    if n <= opts.dense_threshold {
        let (values, vectors) = dense_top_k(dense(), k);
        return Ok(assemble(op, values, vectors, SolverMethod::Dense));
    }
    let params = LanczosParams {
        tol: opts.tol,
        max_iter: opts.max_iter.unwrap_or(10 * k + 200),
        seed: opts.seed,
    };
    let out = lanczos_top_k(op, k, &params)?;
    let cols: Vec<DVector<f64>> = out.vectors.into_iter().map(DVector::from_vec).collect();
    Ok(assemble(
        op,
        out.values,
        DMatrix::from_columns(&cols),
        SolverMethod::Lanczos {
            iterations: out.iterations,
        },
    ))
}

/// The `k` largest eigenpairs of a symmetric sparse matrix.
pub fn top_eigs_symmetric(m: &CsrMatrix, k: usize, opts: &EigenOptions) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let asym = m.max_asymmetry();
    if asym > DEFAULT.laplacian_row_sum {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    solve_operator(m, || m.to_dense(), k, opts)
}

/// The `k` largest eigenpairs of `P` for an undirected graph, via the
/// symmetric similarity transform `D^1/2 P D^-1/2`. Returned vectors are
/// eigenvectors of `P` (unit-normalized), with residuals measured against `P`.
pub fn eigs_undirected_rw(
    p: &StochasticMatrix,
    degrees: &DegreeVector,
    k: usize,
    opts: &EigenOptions,
) -> Result<SpectralDecomposition> {
    let n = p.n();
    if degrees.len() != n {
        return Err(Error::LengthMismatch {
            left: degrees.len(),
            right: n,
        });
    }
    check_k(k, n)?;
    if let Some(v) = degrees.first_zero() {
        return Err(Error::ZeroDegree(v));
    }
    let sqrt_d: Vec<f64> = degrees.values.iter().map(|d| d.sqrt()).collect();
    let inv_sqrt_d: Vec<f64> = sqrt_d.iter().map(|s| 1.0 / s).collect();
    let s = p.matrix().scale_rows(&sqrt_d).scale_cols(&inv_sqrt_d);
    let asym = s.max_asymmetry();
    if asym > DEFAULT.laplacian_row_sum * s.max_abs().max(1.0) {
        return Err(Error::NotSymmetrizable { asymmetry: asym });
    }
    let s = s.add_scaled(0.5, &s.transpose(), 0.5);
    let sym = top_eigs_symmetric(&s, k, opts)?;

    let mut vectors = sym.eigenvectors;
    for mut col in vectors.column_iter_mut() {
        for (x, w) in col.iter_mut().zip(&inv_sqrt_d) {
            *x *= w;
        }
        let norm = col.norm();
        col /= norm;
    }
    Ok(assemble(p.matrix(), sym.eigenvalues, vectors, sym.method))
}

/// `x -> B^T (B x)` for a sparse `B`.
struct NormalOperator {
    b: CsrMatrix,
    bt: CsrMatrix,
}

impl LinearOperator for NormalOperator {
    fn dim(&self) -> usize {
        self.b.ncols()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let bx = self.b.matvec(x);
        self.bt.matvec_into(&bx, y);
    }
}

/// Leading right singular vectors of `B = diag(nu)^-1/2 P^T`.
///
/// Eigenvalues of the result are the squared singular values, which equal the
/// eigenvalues of `Q`. Small problems use a dense SVD of `B`; large ones run
/// Lanczos on `B^T B` applied matrix-free, never forming `Q`.
pub fn right_singular_vectors(
    p: &StochasticMatrix,
    nu: &NuVector,
    k: usize,
    opts: &EigenOptions,
) -> Result<SpectralDecomposition> {
    let n = p.n();
    check_k(k, n)?;
    if nu.values.len() != n {
        return Err(Error::LengthMismatch {
            left: nu.values.len(),
            right: n,
        });
    }
    if let Some(v) = nu.first_singular(DEFAULT.nu_threshold) {
        return Err(Error::SingularNu {
            vertex: v,
            value: nu.values[v],
        });
    }
    let scale: Vec<f64> = nu.values.iter().map(|v| 1.0 / v.sqrt()).collect();
    let b = p.matrix().transpose().scale_rows(&scale);
    let op = NormalOperator {
        bt: b.transpose(),
        b,
    };
    if n <= opts.dense_threshold {
        let svd = op.b.to_dense().svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let sigma = svd.singular_values;
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
        order.truncate(k);
        let values = order.iter().map(|&i| sigma[i] * sigma[i]).collect();
        let cols: Vec<DVector<f64>> = order.iter().map(|&i| v_t.row(i).transpose()).collect();
        let d = assemble(&op, values, DMatrix::from_columns(&cols), SolverMethod::Dense);
        if d.max_residual() <= opts.tol {
            return Ok(d);
        }
        // The dense SVD occasionally stalls on block-diagonal inputs.
        log::warn!("dense SVD residual {:.2e}; using the eigendecomposition of B^T B", d.max_residual());
        let bd = op.b.to_dense();
        let (values, vectors) = dense_top_k(bd.transpose() * bd, k);
        return Ok(assemble(&op, values, vectors, SolverMethod::Dense));
    }
    solve_operator(&op, || unreachable!("dense path handled above"), k, opts)
}

/// Largest principal-angle sine between the column spans of `a` and `b`
/// (both with orthonormal columns).
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let cosines = (qa.transpose() * &qb).singular_values();
    let min_cos = cosines.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    (1.0 - min_cos * min_cos).max(0.0).sqrt()
}
