//! Transition matrices, Laplacians, the forward-backward matrix and
//! temporal transition products.

use crate::error::{Error, Result};
use crate::graph::{TemporalGraph, WeightedGraph};
use crate::sparse::CsrMatrix;
use crate::tolerances::{Tolerances, DEFAULT};

/// Teleportation probability used when teleportation is enabled without an
/// explicit value.
pub const DEFAULT_TELEPORT: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StochasticKind {
    RowStochastic,
    DoublyStochasticSymmetric,
}

/// A row-stochastic sparse matrix; `Q` additionally is symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    matrix: CsrMatrix,
    kind: StochasticKind,
}

impl StochasticMatrix {
    /// Validates `matrix` against the invariants of `kind`.
    pub fn new(matrix: CsrMatrix, kind: StochasticKind) -> Result<Self> {
        let s = StochasticMatrix { matrix, kind };
        s.check(&DEFAULT)?;
        Ok(s)
    }

    pub(crate) fn new_unchecked(matrix: CsrMatrix, kind: StochasticKind) -> Self {
        debug_assert!(StochasticMatrix { matrix: matrix.clone(), kind }.check(&DEFAULT).is_ok());
        StochasticMatrix { matrix, kind }
    }

    /// Dense row-major input, mainly for tests and small examples.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        let triplets: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v)))
            .collect();
        Self::new(CsrMatrix::from_triplets(n, n, &triplets), StochasticKind::RowStochastic)
    }

    pub fn check(&self, tol: &Tolerances) -> Result<()> {
        let m = &self.matrix;
        if !m.is_square() {
            return Err(Error::InvalidArgument("stochastic matrix must be square".into()));
        }
        let n = m.nrows();
        let slack = tol.row_sum * n.max(1) as f64;
        if let Some(v) = m.values().iter().find(|&&v| !(-tol.symmetry..=1.0 + tol.symmetry).contains(&v)) {
            return Err(Error::InvalidArgument(format!("entry {v} outside [0, 1]")));
        }
        for (i, s) in m.row_sums().into_iter().enumerate() {
            if (s - 1.0).abs() > slack {
                return Err(Error::InvalidArgument(format!("row {i} sums to {s}")));
            }
        }
        if self.kind == StochasticKind::DoublyStochasticSymmetric {
            let asym = m.max_asymmetry();
            if asym > tol.symmetry {
                return Err(Error::NotSymmetric { asymmetry: asym });
            }
            for (j, s) in m.col_sums().into_iter().enumerate() {
                if (s - 1.0).abs() > slack {
                    return Err(Error::InvalidArgument(format!("column {j} sums to {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn kind(&self) -> StochasticKind {
        self.kind
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CsrMatrix {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }
}

/// Column sums `nu_j = sum_l p_lj` of a transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NuVector {
    pub values: Vec<f64>,
    invertible: bool,
}

impl NuVector {
    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    /// First vertex whose `nu` is at or below the threshold.
    pub fn first_singular(&self, threshold: f64) -> Option<usize> {
        self.values.iter().position(|&v| v <= threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianFlavor {
    RandomWalk,
    ForwardBackward,
}

/// `I - P` or `I - Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    matrix: CsrMatrix,
    flavor: LaplacianFlavor,
}

impl Laplacian {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn flavor(&self) -> LaplacianFlavor {
        self.flavor
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `P = D_o^-1 A`, optionally mixed with the uniform distribution.
///
/// With teleportation probability `alpha`, every row becomes
/// `(1 - alpha) row + alpha / n` and rows of dangling vertices become uniform.
/// Without it, a vertex with zero out-degree is an error.
pub fn transition_matrix(g: &WeightedGraph, teleport: Option<f64>) -> Result<StochasticMatrix> {
    let n = g.n();
    let degrees = g.out_degrees();
    let a = g.adjacency();
    match teleport {
        None => {
            if let Some(v) = degrees.first_zero() {
                return Err(Error::DanglingVertex {
                    vertex: v,
                    snapshot: None,
                });
            }
            let inv: Vec<f64> = degrees.values.iter().map(|d| 1.0 / d).collect();
            let p = a.scale_rows(&inv);
            Ok(StochasticMatrix::new_unchecked(
                renormalize_rows(p),
                StochasticKind::RowStochastic,
            ))
        }
        Some(alpha) => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::InvalidArgument(format!(
                    "teleport probability {alpha} outside [0, 1]"
                )));
            }
            let uniform = 1.0 / n as f64;
            let rows = (0..n)
                .map(|i| {
                    let d = degrees.values[i];
                    let mut row = vec![0.0; n];
                    if d > 0.0 {
                        row.iter_mut().for_each(|x| *x = alpha * uniform);
                        for (j, w) in a.row_iter(i) {
                            row[j] += (1.0 - alpha) * w / d;
                        }
                    } else {
                        row.iter_mut().for_each(|x| *x = uniform);
                    }
                    row.into_iter().enumerate().filter(|&(_, v)| v != 0.0).collect()
                })
                .collect();
            let p = CsrMatrix::from_sorted_rows(n, rows);
            Ok(StochasticMatrix::new_unchecked(p, StochasticKind::RowStochastic))
        }
    }
}

/// Divides each row by its sum; removes the last ulp of drift.
fn renormalize_rows(m: CsrMatrix) -> CsrMatrix {
    let sums = m.row_sums();
    if sums.iter().all(|&s| s == 1.0) {
        return m;
    }
    let inv: Vec<f64> = sums.iter().map(|&s| if s > 0.0 { 1.0 / s } else { 1.0 }).collect();
    m.scale_rows(&inv)
}

pub fn nu_vector(p: &StochasticMatrix) -> NuVector {
    nu_vector_with(p, DEFAULT.nu_threshold)
}

pub fn nu_vector_with(p: &StochasticMatrix, threshold: f64) -> NuVector {
    let values = p.matrix.col_sums();
    let invertible = values.iter().all(|&v| v > threshold);
    NuVector { values, invertible }
}

/// `M = P diag(nu)^-1/2`, the factor with `Q = M M^T`.
pub(crate) fn half_normalized(p: &StochasticMatrix, nu: &NuVector) -> Result<CsrMatrix> {
    if let Some(v) = nu.first_singular(DEFAULT.nu_threshold) {
        return Err(Error::SingularNu {
            vertex: v,
            value: nu.values[v],
        });
    }
    let scale: Vec<f64> = nu.values.iter().map(|v| 1.0 / v.sqrt()).collect();
    Ok(p.matrix.scale_cols(&scale))
}

/// `Q = P diag(nu)^-1 P^T`.
///
/// Assembled as `M M^T` with `M = P diag(nu)^-1/2`: every entry
/// `q_il = sum_j m_ij m_lj` is summed over `j` in the same order for
/// `(i, l)` and `(l, i)`, so the result is exactly symmetric.
pub fn forward_backward_matrix(p: &StochasticMatrix) -> Result<StochasticMatrix> {
    let nu = nu_vector(p);
    let m = half_normalized(p, &nu)?;
    let q = m.matmul(&m.transpose());
    Ok(StochasticMatrix::new_unchecked(
        q,
        StochasticKind::DoublyStochasticSymmetric,
    ))
}

/// `L_rw = I - P`.
pub fn random_walk_laplacian(p: &StochasticMatrix) -> Laplacian {
    Laplacian {
        matrix: CsrMatrix::identity(p.n()).add_scaled(1.0, &p.matrix, -1.0),
        flavor: LaplacianFlavor::RandomWalk,
    }
}

/// `L_fb = I - Q`; `q` must be the output of [`forward_backward_matrix`].
pub fn forward_backward_laplacian(q: &StochasticMatrix) -> Result<Laplacian> {
    if q.kind != StochasticKind::DoublyStochasticSymmetric {
        return Err(Error::KindMismatch {
            expected: "doubly stochastic symmetric",
        });
    }
    Ok(Laplacian {
        matrix: CsrMatrix::identity(q.n()).add_scaled(1.0, &q.matrix, -1.0),
        flavor: LaplacianFlavor::ForwardBackward,
    })
}

/// Transition matrix of each snapshot after adding self-loops.
pub fn snapshot_transitions(
    tg: &TemporalGraph,
    self_loop_weight: f64,
    teleport: Option<f64>,
) -> Result<Vec<StochasticMatrix>> {
    tg.snapshots()
        .iter()
        .enumerate()
        .map(|(t, g)| {
            let g = g.add_self_loops(self_loop_weight)?;
            transition_matrix(&g, teleport).map_err(|e| match e {
                Error::DanglingVertex { vertex, .. } => Error::DanglingVertex {
                    vertex,
                    snapshot: Some(t),
                },
                other => other,
            })
        })
        .collect()
}

/// Left-to-right product of row-stochastic matrices.
pub fn product(matrices: &[StochasticMatrix]) -> Result<StochasticMatrix> {
    let (first, rest) = matrices
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty product".into()))?;
    let mut acc = first.matrix.clone();
    for p in rest {
        acc = acc.matmul(&p.matrix);
    }
    Ok(StochasticMatrix::new_unchecked(
        renormalize_rows(acc),
        StochasticKind::RowStochastic,
    ))
}

/// `P = P(0) P(1) ... P(T)` over the snapshots, each regularized with
/// `self_loop_weight` before normalization.
pub fn temporal_transition_matrix(
    tg: &TemporalGraph,
    self_loop_weight: f64,
    teleport: Option<f64>,
) -> Result<StochasticMatrix> {
    product(&snapshot_transitions(tg, self_loop_weight, teleport)?)
}
