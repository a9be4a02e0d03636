//! Quality measures for cluster assignments: one-step coherence, forward mass
//! evolution, confusion tables and the adjusted Rand index.
//!
//! Unassigned vertices never belong to a cluster. They are left out of
//! coherence sums, carry no initial forward mass, are skipped by the ARI and
//! are counted in a separate column of confusion tables.

use nalgebra::DMatrix;
use pathfinding::prelude::{kuhn_munkres, Matrix};
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;
use crate::error::{Error, Result};
use crate::graph::TemporalGraph;
use crate::operators::{snapshot_transitions, StochasticKind, StochasticMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLeakage {
    pub cluster: usize,
    pub size: usize,
    pub retained: f64,
    pub leaked: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub per_cluster: Vec<ClusterLeakage>,
    /// Size-weighted mean of the retained fractions.
    pub overall: f64,
}

impl LeakageReport {
    pub fn min_retained(&self) -> f64 {
        self.per_cluster.iter().map(|c| c.retained).fold(f64::INFINITY, f64::min)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{:>8} {:>6} {:>10} {:>10}\n", "cluster", "size", "retained", "leaked");
        for c in &self.per_cluster {
            out += &format!("{:>8} {:>6} {:>10.6} {:>10.6}\n", c.cluster, c.size, c.retained, c.leaked);
        }
        out += &format!("overall retained {:.6}\n", self.overall);
        out
    }
}

fn check_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

/// Per cluster `S`, the probability `1_S^T Q 1_S / |S|` that a walker started
/// uniformly in `S` is back in `S` after one forward-backward step.
pub fn coherence_ratio(q: &StochasticMatrix, assignment: &ClusterAssignment) -> Result<LeakageReport> {
    if q.kind() != StochasticKind::DoublyStochasticSymmetric {
        return Err(Error::KindMismatch {
            expected: "doubly stochastic symmetric",
        });
    }
    check_len(q.n(), assignment.n())?;
    let clusters = assignment.clusters();
    if clusters.is_empty() {
        return Err(Error::EmptyCluster(0));
    }
    let labels = &assignment.labels;
    let mut per_cluster = Vec::with_capacity(clusters.len());
    for (c, members) in clusters.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::EmptyCluster(c));
        }
        let inside: f64 = members
            .iter()
            .flat_map(|&i| q.matrix().row_iter(i))
            .filter(|&(j, _)| labels[j] == Some(c))
            .map(|(_, v)| v)
            .sum();
        let retained = (inside / members.len() as f64).clamp(0.0, 1.0);
        per_cluster.push(ClusterLeakage {
            cluster: c,
            size: members.len(),
            retained,
            leaked: 1.0 - retained,
        });
    }
    let total: usize = per_cluster.iter().map(|c| c.size).sum();
    let overall = per_cluster
        .iter()
        .map(|c| c.retained * c.size as f64)
        .sum::<f64>()
        / total as f64;
    Ok(LeakageReport { per_cluster, overall })
}

/// Time series of cluster densities pushed forward by the snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardMass {
    /// `series[t]` is `n x k`; column `c` is the density started uniformly on
    /// cluster `c` after `t` steps.
    pub series: Vec<DMatrix<f64>>,
    labels: Vec<Option<usize>>,
}

impl ForwardMass {
    pub fn steps(&self) -> usize {
        self.series.len() - 1
    }

    /// `k x k` matrix whose `(c, d)` entry is the mass started in cluster `c`
    /// that sits on members of cluster `d` at time `t`.
    pub fn cluster_mass(&self, t: usize) -> DMatrix<f64> {
        let rho = &self.series[t];
        let k = rho.ncols();
        let mut out = DMatrix::zeros(k, k);
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(d) = *l {
                for c in 0..k {
                    out[(c, d)] += rho[(i, c)];
                }
            }
        }
        out
    }

    /// Mass each cluster keeps on its own members at time `t`.
    pub fn retained(&self, t: usize) -> Vec<f64> {
        let m = self.cluster_mass(t);
        (0..m.nrows()).map(|c| m[(c, c)]).collect()
    }
}

/// Propagates `rho_{t+1}^T = rho_t^T P(t)` from uniform densities on each
/// cluster through every snapshot.
pub fn forward_mass(
    tg: &TemporalGraph,
    assignment: &ClusterAssignment,
    self_loop_weight: f64,
) -> Result<ForwardMass> {
    check_len(tg.n(), assignment.n())?;
    let transitions = snapshot_transitions(tg, self_loop_weight, None)?;
    let clusters = assignment.clusters();
    let n = tg.n();
    let k = clusters.len();
    let mut rho = DMatrix::zeros(n, k);
    for (c, members) in clusters.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::EmptyCluster(c));
        }
        for &i in members {
            rho[(i, c)] = 1.0 / members.len() as f64;
        }
    }
    let mut series = vec![rho];
    for p in &transitions {
        let prev = series.last().expect("non-empty");
        let mut next = DMatrix::zeros(n, k);
        for c in 0..k {
            let col: Vec<f64> = prev.column(c).iter().copied().collect();
            let pushed = p.matrix().tr_matvec(&col);
            next.column_mut(c).copy_from_slice(&pushed);
        }
        series.push(next);
    }
    Ok(ForwardMass {
        series,
        labels: assignment.labels.clone(),
    })
}

/// Counts of true classes (rows) against predicted clusters (columns), with a
/// final column for unassigned vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionTable {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionTable {
    pub fn num_clusters(&self) -> usize {
        self.counts.first().map_or(0, |r| r.len() - 1)
    }

    pub fn unassigned(&self) -> usize {
        self.counts.iter().map(|r| r[r.len() - 1]).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Classes matched one-to-one with clusters to maximize agreement; each
    /// entry is `(class, cluster)`. Requires no more classes than clusters,
    /// otherwise the roles are swapped internally.
    pub fn best_matching(&self) -> Vec<(usize, usize)> {
        let rows = self.counts.len();
        let cols = self.num_clusters();
        if rows == 0 || cols == 0 {
            return vec![];
        }
        let size = rows.max(cols);
        let weights = Matrix::from_fn(size, size, |(i, j)| {
            if i < rows && j < cols {
                self.counts[i][j] as i64
            } else {
                0
            }
        });
        let (_, assign) = kuhn_munkres(&weights);
        assign
            .into_iter()
            .enumerate()
            .filter(|&(i, j)| i < rows && j < cols)
            .collect()
    }

    /// Vertices whose cluster is matched to their class.
    pub fn correct(&self) -> usize {
        self.best_matching().iter().map(|&(i, j)| self.counts[i][j]).sum()
    }

    pub fn misclassified(&self) -> usize {
        self.total() - self.correct() - self.unassigned()
    }

    /// Aligned-column rendering with one row per class.
    pub fn to_text(&self) -> String {
        let label_width = self.class_names.iter().map(|s| s.len()).max().unwrap_or(0).max(5);
        let mut out = format!("{:<label_width$}", "class");
        for j in 0..self.num_clusters() {
            out += &format!(" {:>5}", j);
        }
        out += &format!(" {:>5}\n", "n/a");
        for (name, row) in self.class_names.iter().zip(&self.counts) {
            out += &format!("{name:<label_width$}");
            for c in row {
                out += &format!(" {c:>5}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn confusion_table(true_labels: &[usize], assignment: &ClusterAssignment) -> Result<ConfusionTable> {
    let names = (0..true_labels.iter().max().map_or(0, |&m| m + 1))
        .map(|c| c.to_string())
        .collect();
    confusion_table_named(true_labels, names, assignment)
}

/// As [`confusion_table`] with explicit class names; `true_labels` index into
/// `class_names`.
pub fn confusion_table_named(
    true_labels: &[usize],
    class_names: Vec<String>,
    assignment: &ClusterAssignment,
) -> Result<ConfusionTable> {
    check_len(true_labels.len(), assignment.n())?;
    if let Some(&bad) = true_labels.iter().find(|&&c| c >= class_names.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            n: class_names.len(),
        });
    }
    let clusters = assignment.k.max(assignment.num_clusters());
    let mut counts = vec![vec![0; clusters + 1]; class_names.len()];
    for (&t, l) in true_labels.iter().zip(&assignment.labels) {
        counts[t][l.unwrap_or(clusters)] += 1;
    }
    Ok(ConfusionTable { class_names, counts })
}

fn pairs(x: usize) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index over the vertices assigned in both labelings. Returns
/// 1 when both partitions are trivial in the same way (the index is undefined
/// there).
pub fn adjusted_rand_index(a: &[Option<usize>], b: &[Option<usize>]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    let both: Vec<(usize, usize)> = a
        .iter()
        .zip(b)
        .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
        .collect();
    let mut table = std::collections::HashMap::new();
    let mut rows = std::collections::HashMap::new();
    let mut cols = std::collections::HashMap::new();
    for &(x, y) in &both {
        *table.entry((x, y)).or_insert(0usize) += 1;
        *rows.entry(x).or_insert(0usize) += 1;
        *cols.entry(y).or_insert(0usize) += 1;
    }
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(both.len());
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// [`adjusted_rand_index`] for fully assigned labelings.
pub fn adjusted_rand_index_full(a: &[usize], b: &[usize]) -> Result<f64> {
    let wrap = |v: &[usize]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();
    adjusted_rand_index(&wrap(a), &wrap(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::ClusterMethod;
    use crate::graph::build_graph;
    use crate::sparse::CsrMatrix;

    fn assignment(labels: &[Option<usize>]) -> ClusterAssignment {
        let k = labels.iter().flatten().max().map_or(0, |m| m + 1);
        ClusterAssignment::new(labels.to_vec(), k, ClusterMethod::KMeans)
    }

    #[test]
    fn identity_q_retains_everything() {
        let q = StochasticMatrix::new(CsrMatrix::identity(4), StochasticKind::DoublyStochasticSymmetric).unwrap();
        let r = coherence_ratio(&q, &assignment(&[Some(0), Some(1), Some(1), None])).unwrap();
        assert!(r.per_cluster.iter().all(|c| c.retained == 1.0 && c.leaked == 0.0));
        assert_eq!(r.overall, 1.0);
    }

    #[test]
    fn single_cluster_retains_everything() {
        let q = StochasticMatrix::new(
            CsrMatrix::from_dense(&DMatrix::from_element(3, 3, 1.0 / 3.0)),
            StochasticKind::DoublyStochasticSymmetric,
        )
        .unwrap();
        let r = coherence_ratio(&q, &assignment(&[Some(0); 3])).unwrap();
        assert!((r.per_cluster[0].retained - 1.0).abs() < 1e-12);
        let split = coherence_ratio(&q, &assignment(&[Some(0), Some(1), Some(1)])).unwrap();
        assert!((split.per_cluster[0].retained - 1.0 / 3.0).abs() < 1e-12);
        assert!((split.per_cluster[1].retained - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_requires_q() {
        let p = StochasticMatrix::from_rows(&[&[0.5, 0.5], &[1.0, 0.0]]).unwrap();
        assert!(matches!(
            coherence_ratio(&p, &assignment(&[Some(0), Some(0)])),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn identity_snapshots_keep_mass_in_place() {
        let g = build_graph(3, &[], true).unwrap();
        let tg = TemporalGraph::new(vec![g.clone(), g]).unwrap();
        let fm = forward_mass(&tg, &assignment(&[Some(0), Some(1), Some(1)]), 1.0).unwrap();
        assert_eq!(fm.steps(), 2);
        assert_eq!(fm.series[0], fm.series[2]);
        assert_eq!(fm.retained(2), vec![1.0, 1.0]);
    }

    #[test]
    fn absorbing_vertex_keeps_point_mass() {
        let g = build_graph(2, &[(1, 0, 5.0)], true).unwrap();
        let tg = TemporalGraph::new(vec![g.clone(), g.clone(), g]).unwrap();
        let fm = forward_mass(&tg, &assignment(&[Some(0), None]), 1.0).unwrap();
        for rho in &fm.series {
            assert_eq!(rho[(0, 0)], 1.0);
        }
    }

    #[test]
    fn confusion_examples() {
        let t = confusion_table(&[0, 0, 1, 1], &assignment(&[Some(0), Some(0), Some(1), Some(1)])).unwrap();
        assert_eq!(t.counts, vec![vec![2, 0, 0], vec![0, 2, 0]]);
        assert_eq!(t.correct(), 4);
        let none = ClusterAssignment::new(vec![None; 4], 2, ClusterMethod::Seba);
        let t = confusion_table(&[0, 0, 1, 1], &none).unwrap();
        assert_eq!(t.unassigned(), 4);
        assert_eq!(t.correct(), 0);
        assert!(t.to_text().contains("n/a"));
        assert!(matches!(
            confusion_table(&[0], &none),
            Err(Error::LengthMismatch { left: 1, right: 4 })
        ));
    }

    #[test]
    fn confusion_matching_with_swapped_labels() {
        let t = confusion_table(
            &[0, 0, 0, 1, 1, 2],
            &assignment(&[Some(1), Some(1), Some(0), Some(0), Some(0), None]),
        )
        .unwrap();
        // canonical labels: vertex 0 starts cluster 0.
        assert_eq!(t.correct(), 4);
        assert_eq!(t.misclassified(), 1);
        assert_eq!(t.unassigned(), 1);
    }

    #[test]
    fn ari_examples() {
        let a = [0, 0, 1, 1, 2, 2];
        assert_eq!(adjusted_rand_index_full(&a, &a).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index_full(&a, &[5, 5, 3, 3, 0, 0]).unwrap(), 1.0);
        // Hand-computed: index 2, expected 1.2, max 4.5.
        let r = adjusted_rand_index_full(&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 2, 2]).unwrap();
        assert!((r - 0.8 / 3.3).abs() < 1e-12);
        assert!(adjusted_rand_index_full(&[0], &[0, 1]).is_err());
    }
}
