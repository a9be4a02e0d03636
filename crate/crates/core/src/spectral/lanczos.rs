//! Symmetric Lanczos with full reorthogonalization.
//!
//! A single Krylov sequence sees only one direction of each eigenspace, so a
//! converged run is followed by deflated runs orthogonal to the vectors found
//! so far. A deflated run that finds nothing above the current k-th value ends
//! the search; otherwise its pairs are merged in and the search repeats.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// A symmetric linear map applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosParams {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct LanczosOutput {
    pub values: Vec<f64>,
    /// Ritz vectors, one per entry of `values`.
    pub vectors: Vec<Vec<f64>>,
    /// Lanczos steps (matrix-vector products) over all runs.
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two passes of classical Gram-Schmidt against `locked` and `basis`.
fn orthogonalize(w: &mut [f64], locked: &[Vec<f64>], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in locked.iter().chain(basis) {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

/// A unit vector orthogonal to `locked` and `basis`, or `None` if the random
/// draws keep landing in their span.
fn fresh_vector(
    n: usize,
    rng: &mut ChaCha8Rng,
    locked: &[Vec<f64>],
    basis: &[Vec<f64>],
) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        orthogonalize(&mut v, locked, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

struct RunResult {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residual_estimates: Vec<f64>,
    steps: usize,
    converged: bool,
}

/// Eigen-decomposition of the tridiagonal matrix, sorted descending.
fn tridiagonal_eigs(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<DVector<f64>>>(),
    );
    (values, vectors)
}

/// One Lanczos sequence restricted to the orthogonal complement of `locked`.
fn run(
    op: &dyn LinearOperator,
    k: usize,
    locked: &[Vec<f64>],
    params: &LanczosParams,
    rng: &mut ChaCha8Rng,
) -> Result<RunResult> {
    let n = op.dim();
    let space = n - locked.len();
    let max_steps = params.max_iter.min(space);
    let k = k.min(space);
    let Some(start) = fresh_vector(n, rng, locked, &[]) else {
        return Ok(RunResult {
            values: vec![],
            vectors: vec![],
            residual_estimates: vec![],
            steps: 0,
            converged: true,
        });
    };

    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut scale = 0.0f64;
    let mut next_check = k.max(1);
    // Minimum Krylov dimension before convergence may be declared.
    let min_dim = (2 * k + 10).min(space);

    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        orthogonalize(&mut w, locked, &basis);
        let b = norm(&w);
        scale = scale.max(a.abs()).max(b);
        let steps = j + 1;
        let breakdown = b <= 1e-12 * scale.max(1e-300);
        let exhausted = steps >= max_steps;

        if breakdown || exhausted || steps >= next_check {
            let last_beta = if breakdown { 0.0 } else { b };
            let (values, s) = tridiagonal_eigs(&alpha, &beta);
            let take = k.min(values.len());
            let estimates: Vec<f64> = (0..take)
                .map(|i| (last_beta * s[(steps - 1, i)]).abs())
                .collect();
            let threshold = params.tol * scale.max(1.0);
            let all_small = estimates.iter().all(|&r| r < threshold);
            let done = (all_small && take == k && steps >= min_dim)
                || (breakdown && steps == space)
                || (breakdown && take == k && steps >= min_dim)
                || exhausted;
            if done {
                let converged = all_small && take == k || steps == space;
                let vectors = (0..take)
                    .map(|i| {
                        let mut y = vec![0.0; n];
                        for (l, v) in basis.iter().enumerate() {
                            axpy(s[(l, i)], v, &mut y);
                        }
                        let ny = norm(&y);
                        y.iter_mut().for_each(|x| *x /= ny);
                        y
                    })
                    .collect();
                return Ok(RunResult {
                    values: values[..take].to_vec(),
                    vectors,
                    residual_estimates: estimates,
                    steps,
                    converged,
                });
            }
            next_check = steps + (steps / 10).max(5);
        }

        if breakdown {
            // Invariant subspace found: continue from a new direction with a
            // decoupled tridiagonal block.
            match fresh_vector(n, rng, locked, &basis) {
                Some(v) => {
                    beta.push(0.0);
                    basis.push(v);
                }
                None => {
                    return Err(Error::NoConvergence {
                        iterations: steps,
                        residuals: vec![],
                        max_residual: f64::NAN,
                    })
                }
            }
        } else {
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
    }
}

/// The `k` largest eigenpairs of a symmetric operator.
pub fn lanczos_top_k(op: &dyn LinearOperator, k: usize, params: &LanczosParams) -> Result<LanczosOutput> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut iterations = 0;

    let first = run(op, k, &[], params, &mut rng)?;
    iterations += first.steps;
    if !first.converged {
        return Err(no_convergence(iterations, first.residual_estimates));
    }
    let mut values = first.values;
    let mut vectors = first.vectors;

    // Deflated verification runs.
    for _ in 0..k {
        if vectors.len() >= n {
            break;
        }
        let extra = run(op, k, &vectors, params, &mut rng)?;
        iterations += extra.steps;
        if !extra.converged {
            return Err(no_convergence(iterations, extra.residual_estimates));
        }
        let kth = values[values.len().min(k) - 1];
        let tol = params.tol * values[0].abs().max(1.0);
        let improves = extra.values.first().is_some_and(|&v| v > kth + tol) || values.len() < k;
        if !improves {
            break;
        }
        values.extend(extra.values);
        vectors.extend(extra.vectors);
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        values = order.iter().map(|&i| values[i]).collect();
        vectors = order.iter().map(|&i| std::mem::take(&mut vectors[i])).collect();
        values.truncate(k);
        vectors.truncate(k);
    }
    Ok(LanczosOutput {
        values,
        vectors,
        iterations,
    })
}

fn no_convergence(iterations: usize, residuals: Vec<f64>) -> Error {
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Error::NoConvergence {
        iterations,
        residuals,
        max_residual,
    }
}
