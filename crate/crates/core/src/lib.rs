//! Spectral clustering of undirected, directed, and time-evolving graphs.
//!
//! Undirected graphs are clustered through the random-walk Laplacian
//! `L_rw = I - P`. Directed and time-evolving graphs are clustered through the
//! forward-backward Laplacian `L_fb = I - Q`, where `Q = P diag(nu)^-1 P^T` is
//! the symmetric, doubly stochastic matrix of one forward random-walk step
//! followed by one time-reversed step. Its dominant eigenvectors describe
//! coherent sets: groups of vertices whose walkers move together.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`] and [`io`]: weighted graphs, temporal graphs and file loaders.
//! - [`sparse`]: the compressed sparse row matrix used throughout.
//! - [`operators`]: transition matrices, Laplacians and `Q`.
//! - [`spectral`]: dense and Lanczos eigensolvers, the SVD route.
//! - [`estimation`]: random-walk simulation and data-driven estimators.
//! - [`clustering`]: k-means, SEBA and the end-to-end pipelines.
//! - [`benchmarks`]: generators for the benchmark graph families.
//! - [`metrics`]: leakage, forward mass, confusion tables and ARI.

// Negated comparisons such as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod clustering;
pub mod error;
pub mod estimation;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod operators;
pub mod sparse;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use graph::{DegreeVector, TemporalGraph, WeightedGraph};
pub use operators::{Laplacian, LaplacianFlavor, NuVector, StochasticKind, StochasticMatrix};
pub use sparse::CsrMatrix;
pub use spectral::SpectralDecomposition;
