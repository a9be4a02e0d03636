//! Sparse eigenbasis approximation (SEBA).
//!
//! Rotates an orthonormal basis `V` towards a sparse basis `S` by alternating
//! soft-thresholding of `V R^T` with the polar rotation `R = polar(S^T V)`.
//! The result is made nonnegative and each column scaled to maximum 1, so
//! entries read as membership strengths.

use nalgebra::DMatrix;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SebaOptions {
    pub max_iter: usize,
    /// Stop when the Frobenius change of the rotation falls below this.
    pub tol: f64,
    /// A vertex is assigned when its largest membership reaches this fraction
    /// of the column maximum.
    pub threshold: f64,
}

impl Default for SebaOptions {
    fn default() -> Self {
        SebaOptions {
            max_iter: 5000,
            tol: 1e-12,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SebaResult {
    /// `n x k`, nonnegative, each column with maximum 1 (or all zero).
    pub basis: DMatrix<f64>,
    /// Per-vertex argmax column, `None` below the threshold.
    pub labels: Vec<Option<usize>>,
    pub iterations: usize,
    pub converged: bool,
}

/// Orthonormal columns spanning those of `v`, unchanged when already
/// orthonormal to within `1e-8`.
fn orthonormalize(v: &DMatrix<f64>) -> DMatrix<f64> {
    let k = v.ncols();
    let gram = v.transpose() * v;
    let residual = (gram - DMatrix::identity(k, k)).abs().max();
    if residual <= 1e-8 {
        return v.clone();
    }
    let q = v.clone().qr().q();
    q.columns(0, k).into_owned()
}

/// Soft-thresholds each column at `mu` and rescales it to unit norm.
fn sparsify(z: &DMatrix<f64>, mu: f64) -> DMatrix<f64> {
    let mut s = z.map(|x| x.signum() * (x.abs() - mu).max(0.0));
    for mut col in s.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }
    s
}

/// Orthogonal polar factor `U W^T` of a square matrix.
fn polar(m: DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.svd(true, true);
    svd.u.expect("requested U") * svd.v_t.expect("requested V^T")
}

pub fn seba(v: &DMatrix<f64>, opts: &SebaOptions) -> Result<SebaResult> {
    let n = v.nrows();
    let k = v.ncols();
    let v = orthonormalize(v);
    let mu = 0.99 / (n as f64).sqrt();

    let mut r = DMatrix::<f64>::identity(k, k);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let previous = r.clone();
        let s = sparsify(&(&v * r.transpose()), mu);
        r = polar(s.transpose() * &v);
        if (&r - previous).norm() < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("SEBA stopped after {iterations} iterations without converging");
    }
    let mut s = sparsify(&(&v * r.transpose()), mu);

    // Orient columns to positive mass, drop negative parts, scale to max 1.
    for mut col in s.column_iter_mut() {
        if col.sum() < 0.0 {
            col.neg_mut();
        }
        col.apply(|x| *x = x.max(0.0));
        let max = col.max();
        if max > 0.0 {
            col /= max;
        }
    }

    let labels = (0..n)
        .map(|i| {
            let row = s.row(i);
            let (j, best) = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (j, &x)| if x > acc.1 { (j, x) } else { acc });
            (best > 0.0 && best >= opts.threshold).then_some(j)
        })
        .collect();
    Ok(SebaResult {
        basis: s,
        labels,
        iterations,
        converged,
    })
}
