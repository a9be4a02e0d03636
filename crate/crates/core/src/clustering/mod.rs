//! Clustering of spectral embeddings and the end-to-end pipelines for
//! undirected, directed and time-evolving graphs.

pub mod kmeans;
pub mod seba;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    estimate_fb, gram_matrices, simulate_walks, uniform, Regularization, WalkOptions,
};
use crate::graph::{TemporalGraph, WeightedGraph};
use crate::operators::{
    forward_backward_matrix, snapshot_transitions, temporal_transition_matrix, transition_matrix,
};
use crate::spectral::{eigs_undirected_rw, top_eigs_symmetric, EigenOptions, SpectralDecomposition};

pub use kmeans::{kmeans_rows, KMeansOptions, KMeansResult};
pub use seba::{seba, SebaOptions, SebaResult};

/// Row `i` is the feature vector of vertex `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    rows: DMatrix<f64>,
}

impl Embedding {
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.ncols() == 0 || rows.nrows() == 0 {
            return Err(Error::InvalidArgument("embedding must be non-empty".into()));
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("embedding has non-finite entries".into()));
        }
        Ok(Embedding { rows })
    }

    pub fn from_spectrum(s: &SpectralDecomposition) -> Result<Self> {
        Self::new(s.eigenvectors.clone())
    }

    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn rows(&self) -> &DMatrix<f64> {
        &self.rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMethod {
    KMeans,
    Seba,
}

impl std::str::FromStr for ClusterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Ok(ClusterMethod::KMeans),
            "seba" => Ok(ClusterMethod::Seba),
            other => Err(Error::InvalidArgument(format!("unknown clustering method {other:?}"))),
        }
    }
}

/// Cluster labels per vertex; `None` marks an unassigned vertex.
///
/// Labels are canonical: clusters are numbered by their smallest member.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<Option<usize>>,
    pub k: usize,
    pub method: ClusterMethod,
    pub spectrum: Option<SpectralDecomposition>,
}

#[derive(Serialize, Deserialize)]
struct AssignmentRecord {
    k: usize,
    method: ClusterMethod,
    labels: Vec<Option<usize>>,
    eigenvalues: Vec<f64>,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<Option<usize>>, k: usize, method: ClusterMethod) -> Self {
        ClusterAssignment {
            labels: canonicalize(&labels),
            k,
            method,
            spectrum: None,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of distinct labels in use.
    pub fn num_clusters(&self) -> usize {
        self.labels.iter().flatten().max().map_or(0, |&m| m + 1)
    }

    pub fn unassigned(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.labels[i].is_none()).collect()
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.labels[i] == Some(cluster)).collect()
    }

    /// Members of every cluster, in label order.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_clusters()];
        for (i, l) in self.labels.iter().enumerate() {
            if let Some(c) = l {
                out[*c].push(i);
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.as_ref().map_or(&[], |s| &s.eigenvalues)
    }

    pub fn to_json(&self) -> Result<String> {
        let record = AssignmentRecord {
            k: self.k,
            method: self.method,
            labels: self.labels.clone(),
            eigenvalues: self.eigenvalues().to_vec(),
        };
        Ok(serde_json::to_string_pretty(&record)?)
    }

    /// Parses the JSON form. The spectrum is not restored.
    pub fn from_json(s: &str) -> Result<Self> {
        let r: AssignmentRecord = serde_json::from_str(s)?;
        Ok(ClusterAssignment::new(r.labels, r.k, r.method))
    }
}

/// Renumbers clusters by ascending smallest member index.
pub fn canonicalize(labels: &[Option<usize>]) -> Vec<Option<usize>> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            l.map(|c| {
                let next = map.len();
                *map.entry(c).or_insert(next)
            })
        })
        .collect()
}

/// k-means on the embedding rows; every vertex is assigned.
pub fn kmeans(e: &Embedding, k: usize, seed: u64, opts: &KMeansOptions) -> Result<ClusterAssignment> {
    let r = kmeans_rows(e.rows(), k, seed, opts)?;
    Ok(ClusterAssignment::new(
        r.labels.into_iter().map(Some).collect(),
        k,
        ClusterMethod::KMeans,
    ))
}

/// SEBA on the embedding columns, returning the sparse basis alongside the
/// assignment.
pub fn seba_assign(e: &Embedding, opts: &SebaOptions) -> Result<(DMatrix<f64>, ClusterAssignment)> {
    let r = seba(e.rows(), opts)?;
    let a = ClusterAssignment::new(r.labels, e.dim(), ClusterMethod::Seba);
    Ok((r.basis, a))
}

/// Parameters shared by the clustering pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOptions {
    pub method: ClusterMethod,
    pub seed: u64,
    pub kmeans: KMeansOptions,
    pub seba: SebaOptions,
    pub eigen: EigenOptions,
    /// Teleportation used when building transition matrices.
    pub teleport: Option<f64>,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            method: ClusterMethod::KMeans,
            seed: 0,
            kmeans: KMeansOptions::default(),
            seba: SebaOptions::default(),
            eigen: EigenOptions::default(),
            teleport: None,
        }
    }
}

impl ClusterOptions {
    pub fn with_method(method: ClusterMethod) -> Self {
        ClusterOptions {
            method,
            ..Default::default()
        }
    }
}

/// Clusters the rows of a spectral embedding and attaches the spectrum.
pub fn cluster_spectrum(
    spectrum: SpectralDecomposition,
    k: usize,
    opts: &ClusterOptions,
) -> Result<ClusterAssignment> {
    let e = Embedding::from_spectrum(&spectrum)?;
    let mut a = match opts.method {
        ClusterMethod::KMeans => kmeans(&e, k, opts.seed, &opts.kmeans)?,
        ClusterMethod::Seba => seba_assign(&e, &opts.seba)?.1,
    };
    a.spectrum = Some(spectrum);
    Ok(a)
}

/// Spectral clustering of an undirected graph using the top eigenvectors of
/// `P` (the bottom of `I - P`).
pub fn cluster_undirected(g: &WeightedGraph, k: usize, opts: &ClusterOptions) -> Result<ClusterAssignment> {
    if g.is_directed() {
        return Err(Error::InvalidArgument("cluster_undirected needs an undirected graph".into()));
    }
    let p = transition_matrix(g, opts.teleport)?;
    let degrees = g.out_degrees();
    let spectrum = eigs_undirected_rw(&p, &degrees, k, &opts.eigen)?;
    cluster_spectrum(spectrum, k, opts)
}

/// Spectral clustering of a directed graph using the top eigenvectors of the
/// forward-backward matrix `Q`.
pub fn cluster_directed(
    g: &WeightedGraph,
    k: usize,
    self_loop_weight: f64,
    opts: &ClusterOptions,
) -> Result<ClusterAssignment> {
    let g = g.add_self_loops(self_loop_weight)?;
    let p = transition_matrix(&g, opts.teleport)?;
    let q = forward_backward_matrix(&p)?;
    let spectrum = top_eigs_symmetric(q.matrix(), k, &opts.eigen)?;
    cluster_spectrum(spectrum, k, opts)
}

/// How the forward-backward matrix of a temporal graph is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Approach {
    /// Estimate `Q` from `walks` simulated random walks of `length` steps.
    RandomWalks {
        walks: usize,
        length: usize,
        epsilon: f64,
        seed: u64,
    },
    /// Form `Q` from the exact product of the snapshot transition matrices.
    TransitionProduct,
}

/// Coherent-set clustering of a time-evolving graph. Labels refer to the
/// initial time.
pub fn cluster_temporal(
    tg: &TemporalGraph,
    k: usize,
    approach: Approach,
    self_loop_weight: f64,
    opts: &ClusterOptions,
) -> Result<ClusterAssignment> {
    let q = match approach {
        Approach::RandomWalks {
            walks,
            length,
            epsilon,
            seed,
        } => {
            if epsilon <= 0.0 {
                return Err(Error::NonpositiveEpsilon(epsilon));
            }
            let schedule = snapshot_transitions(tg, self_loop_weight, opts.teleport)?;
            let data = simulate_walks(
                &schedule,
                walks,
                length,
                &uniform(tg.n()),
                seed,
                &WalkOptions::default(),
            )?;
            let grams = gram_matrices(&data)?;
            estimate_fb(&grams, Regularization::Tikhonov(epsilon))?
        }
        Approach::TransitionProduct => {
            let p = temporal_transition_matrix(tg, self_loop_weight, opts.teleport)?;
            forward_backward_matrix(&p)?.into_matrix()
        }
    };
    let spectrum = top_eigs_symmetric(&q, k, &opts.eigen)?;
    cluster_spectrum(spectrum, k, opts)
}

/// Position of the largest gap in a descending spectrum, ties going to the
/// smaller count.
pub fn suggest_k(eigenvalues: &[f64]) -> Result<usize> {
    if eigenvalues.len() < 2 {
        return Err(Error::TooFewEigenvalues(eigenvalues.len()));
    }
    let mut best = (1, f64::NEG_INFINITY);
    for j in 1..eigenvalues.len() {
        let gap = eigenvalues[j - 1] - eigenvalues[j];
        if gap > best.1 {
            best = (j, gap);
        }
    }
    Ok(best.0)
}
