//! Dense reference computations shared by the integration tests. They use
//! nalgebra directly and none of the crate's operators or solvers.
#![allow(dead_code)]

use coherent_graphs::graph::build_graph;
use coherent_graphs::WeightedGraph;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

pub type Edges = Vec<(usize, usize, f64)>;

pub fn dense_adjacency(g: &WeightedGraph) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(g.n(), g.n());
    for (i, j, w) in g.entries() {
        a[(i, j)] = w;
    }
    a
}

/// Row-normalized adjacency.
pub fn dense_p(a: &DMatrix<f64>) -> DMatrix<f64> {
    let mut p = a.clone();
    for mut row in p.row_iter_mut() {
        let s = row.sum();
        assert!(s > 0.0, "dangling row in oracle input");
        row /= s;
    }
    p
}

/// `P diag(nu)^-1 P^T` with `nu` the column sums of `P`.
pub fn dense_q(p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let nu: Vec<f64> = (0..n).map(|j| p.column(j).sum()).collect();
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 / nu[i] } else { 0.0 });
    p * d * p.transpose()
}

/// Eigenvalues of a symmetric matrix in descending order, with eigenvectors.
pub fn desc_eigs(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.nrows(), |r, c| e.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Two labelings describe the same partition (and the same unassigned set).
pub fn same_partition(a: &[Option<usize>], b: &[Option<usize>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut fwd = std::collections::HashMap::new();
    let mut back = std::collections::HashMap::new();
    for (x, y) in a.iter().zip(b) {
        match (x, y) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                if *fwd.entry(*x).or_insert(*y) != *y || *back.entry(*y).or_insert(*x) != *x {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// Random weighted edge lists on `2..=max_n` vertices.
pub fn edges_strategy(max_n: usize) -> impl Strategy<Value = (usize, Edges)> {
    (2..=max_n).prop_flat_map(|n| {
        let edge = (0..n, 0..n, 0.1f64..10.0);
        (Just(n), prop::collection::vec(edge, 0..(3 * n)))
    })
}

pub fn digraph_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    edges_strategy(max_n).prop_map(|(n, edges)| build_graph(n, &edges, true).unwrap())
}

pub fn undirected_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    edges_strategy(max_n).prop_map(|(n, edges)| build_graph(n, &edges, false).unwrap())
}

/// Path graph `0 - 1 - ... - (n-1)` with unit weights.
pub fn path_graph(n: usize) -> WeightedGraph {
    let edges: Edges = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
    build_graph(n, &edges, false).unwrap()
}

/// Disjoint complete graphs of the given sizes, undirected.
pub fn disjoint_cliques(sizes: &[usize]) -> (WeightedGraph, Vec<usize>) {
    let mut edges = Vec::new();
    let mut labels = Vec::new();
    let mut base = 0;
    for (c, &s) in sizes.iter().enumerate() {
        for i in 0..s {
            labels.push(c);
            for j in (i + 1)..s {
                edges.push((base + i, base + j, 1.0));
            }
        }
        base += s;
    }
    (build_graph(base, &edges, false).unwrap(), labels)
}
