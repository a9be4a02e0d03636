//! Weighted graphs, temporal graphs and degree vectors.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Sparse nonnegative weighted adjacency over `n` vertices.
///
/// Stored weights are strictly positive. An undirected graph always has a
/// symmetric entry set.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: CsrMatrix,
    directed: bool,
}

impl WeightedGraph {
    /// Builds a graph from an edge list.
    ///
    /// Duplicate `(i, j)` weights are summed and zero weights dropped. For an
    /// undirected graph a missing reverse edge is added with the same weight;
    /// when both orientations are listed with different totals, the two are
    /// averaged.
    pub fn new(n: usize, edges: &[(usize, usize, f64)], directed: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("a graph needs at least one vertex".into()));
        }
        validate_edges(n, edges)?;
        let a = CsrMatrix::from_triplets(n, n, edges);
        let adjacency = if directed { a } else { symmetrize(&a) };
        Ok(WeightedGraph {
            adjacency,
            directed,
        })
    }

    /// Wraps an adjacency matrix. For `directed == false` the matrix must be
    /// symmetric.
    pub fn from_adjacency(adjacency: CsrMatrix, directed: bool) -> Result<Self> {
        if !adjacency.is_square() || adjacency.nrows() == 0 {
            return Err(Error::InvalidArgument("adjacency must be square and non-empty".into()));
        }
        if let Some((i, j, w)) = adjacency.triplets().find(|&(_, _, w)| !(w > 0.0)) {
            return Err(Error::NegativeWeight { i, j, weight: w });
        }
        if !directed {
            let asym = adjacency.max_asymmetry();
            if asym > 0.0 {
                return Err(Error::NotSymmetric { asymmetry: asym });
            }
        }
        Ok(WeightedGraph {
            adjacency,
            directed,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn num_entries(&self) -> usize {
        self.adjacency.nnz()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.triplets()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency.get(i, j)
    }

    /// Out-neighbours of `i` with weights.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency.row_iter(i)
    }

    /// Adds `w` to every diagonal entry.
    pub fn add_self_loops(&self, w: f64) -> Result<Self> {
        if !(w >= 0.0) {
            return Err(Error::NegativeWeight { i: 0, j: 0, weight: w });
        }
        if w == 0.0 {
            return Ok(self.clone());
        }
        let n = self.n();
        let mut triplets: Vec<(usize, usize, f64)> = self.entries().collect();
        triplets.extend((0..n).map(|i| (i, i, w)));
        Ok(WeightedGraph {
            adjacency: CsrMatrix::from_triplets(n, n, &triplets),
            directed: self.directed,
        })
    }

    pub fn out_degrees(&self) -> DegreeVector {
        DegreeVector {
            values: self.adjacency.row_sums(),
        }
    }

    pub fn in_degrees(&self) -> Vec<f64> {
        self.adjacency.col_sums()
    }

    /// Multiplies every weight by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {c}")));
        }
        let adjacency = self.adjacency.scale_rows(&vec![c; self.n()]);
        Ok(WeightedGraph {
            adjacency,
            directed: self.directed,
        })
    }

    /// Relabels vertex `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::LengthMismatch { left: perm.len(), right: n });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let triplets: Vec<_> = self.entries().map(|(i, j, w)| (perm[i], perm[j], w)).collect();
        Ok(WeightedGraph {
            adjacency: CsrMatrix::from_triplets(n, n, &triplets),
            directed: self.directed,
        })
    }
}

fn symmetrize(a: &CsrMatrix) -> CsrMatrix {
    let t = a.transpose();
    let n = a.nrows();
    let rows = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            let (ca, va) = a.row(i);
            let (ct, vt) = t.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < ct.len() {
                if q == ct.len() || (p < ca.len() && ca[p] < ct[q]) {
                    row.push((ca[p], va[p]));
                    p += 1;
                } else if p == ca.len() || ct[q] < ca[p] {
                    row.push((ct[q], vt[q]));
                    q += 1;
                } else {
                    let w = if va[p] == vt[q] { va[p] } else { 0.5 * (va[p] + vt[q]) };
                    row.push((ca[p], w));
                    p += 1;
                    q += 1;
                }
            }
            row
        })
        .collect();
    CsrMatrix::from_sorted_rows(n, rows)
}

fn validate_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<()> {
    for &(i, j, w) in edges {
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange { index: i.max(j), n });
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::NegativeWeight { i, j, weight: w });
        }
    }
    Ok(())
}

/// Shorthand for [`WeightedGraph::new`].
pub fn build_graph(n: usize, edges: &[(usize, usize, f64)], directed: bool) -> Result<WeightedGraph> {
    WeightedGraph::new(n, edges, directed)
}

/// Out-degrees `o(v_i) = sum_j a_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector {
    pub values: Vec<f64>,
}

impl DegreeVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// First vertex with zero degree, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.values.iter().position(|&d| d <= 0.0)
    }
}

/// An ordered, non-empty sequence of snapshots over a fixed vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    snapshots: Vec<WeightedGraph>,
    times: Option<Vec<i64>>,
}

impl TemporalGraph {
    pub fn new(snapshots: Vec<WeightedGraph>) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::InvalidArgument("a temporal graph needs at least one snapshot".into()))?;
        let n = first.n();
        for (index, s) in snapshots.iter().enumerate() {
            if s.n() != n {
                return Err(Error::InconsistentVertexCount {
                    index,
                    expected: n,
                    found: s.n(),
                });
            }
        }
        Ok(TemporalGraph {
            snapshots,
            times: None,
        })
    }

    pub fn with_times(mut self, times: Vec<i64>) -> Result<Self> {
        if times.len() != self.snapshots.len() {
            return Err(Error::LengthMismatch {
                left: times.len(),
                right: self.snapshots.len(),
            });
        }
        self.times = Some(times);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.snapshots[0].n()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn snapshots(&self) -> &[WeightedGraph] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> &WeightedGraph {
        &self.snapshots[t]
    }

    pub fn times(&self) -> Option<&[i64]> {
        self.times.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undirected_edges_are_mirrored() {
        let g = build_graph(2, &[(0, 1, 1.0)], false).unwrap();
        let e: Vec<_> = g.entries().collect();
        assert_eq!(e, vec![(0, 1, 1.0), (1, 0, 1.0)]);
    }

    #[test]
    fn duplicates_are_summed() {
        let g = build_graph(2, &[(0, 1, 0.5), (0, 1, 0.5)], true).unwrap();
        assert_eq!(g.entries().collect::<Vec<_>>(), vec![(0, 1, 1.0)]);
    }

    #[test]
    fn negative_weight_and_bad_index_are_rejected() {
        assert!(matches!(
            build_graph(1, &[(0, 0, -1.0)], true),
            Err(Error::NegativeWeight { .. })
        ));
        assert!(matches!(
            build_graph(2, &[(0, 2, 1.0)], true),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn zero_weights_are_absent() {
        let g = build_graph(3, &[(0, 1, 0.0), (1, 2, 2.0)], true).unwrap();
        assert_eq!(g.num_entries(), 1);
    }

    #[test]
    fn self_loops_on_empty_graph_give_identity() {
        let g = build_graph(3, &[], true).unwrap().add_self_loops(1.0).unwrap();
        assert_eq!(g.adjacency().to_dense(), nalgebra::DMatrix::identity(3, 3));
        assert!(g.add_self_loops(-0.5).is_err());
        assert_eq!(g.add_self_loops(0.0).unwrap(), g);
    }

    #[test]
    fn degrees() {
        let star = build_graph(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], true).unwrap();
        assert_eq!(star.out_degrees().values, vec![3.0, 0.0, 0.0, 0.0]);
        let id = build_graph(3, &[], true).unwrap().add_self_loops(1.0).unwrap();
        assert_eq!(id.out_degrees().values, vec![1.0; 3]);
    }

    #[test]
    fn listed_reverse_edges_are_not_doubled() {
        let g = build_graph(2, &[(0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)], false).unwrap();
        assert_eq!(g.weight(0, 1), 2.0);
        assert_eq!(g.weight(1, 0), 2.0);
        let h = build_graph(2, &[(0, 1, 1.0), (1, 0, 3.0)], false).unwrap();
        assert_eq!(h.weight(0, 1), 2.0);
        assert_eq!(h.adjacency().max_asymmetry(), 0.0);
    }

    #[test]
    fn temporal_graph_requires_matching_sizes() {
        let a = build_graph(2, &[], true).unwrap();
        let b = build_graph(3, &[], true).unwrap();
        assert!(matches!(
            TemporalGraph::new(vec![a.clone(), b]),
            Err(Error::InconsistentVertexCount { index: 1, .. })
        ));
        assert!(TemporalGraph::new(vec![]).is_err());
        assert_eq!(TemporalGraph::new(vec![a]).unwrap().len(), 1);
    }
}
