//! Generators for the benchmark graph families.

pub mod double_well;
pub mod gyre;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, WeightedGraph};

pub use double_well::{rotating_double_well, well_positions, DoubleWellConfig};
pub use gyre::{box_centers, box_of, gyre_velocity, integrate_flow, quadruple_gyre_graph, GyreConfig};

/// Weight of the edges linking consecutive rings of [`three_ring_graph`].
pub const THREE_RING_LINK_WEIGHT: f64 = 0.01;

/// Three directed 4-cycles with unit weights, joined in a ring by the edges
/// 3 -> 4, 7 -> 8 and 11 -> 0 of weight 0.01. No self-loops.
pub fn three_ring_graph() -> WeightedGraph {
    let mut edges = Vec::with_capacity(15);
    for c in 0..3 {
        let base = 4 * c;
        for i in 0..4 {
            edges.push((base + i, base + (i + 1) % 4, 1.0));
        }
        edges.push((base + 3, (base + 4) % 12, THREE_RING_LINK_WEIGHT));
    }
    build_graph(12, &edges, true).expect("static construction")
}

/// Parameters of [`random_block_digraph`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub blocks: usize,
    pub block_size: usize,
    /// Probability of each ordered pair (including `i -> i`) inside a block.
    pub intra_density: f64,
    /// Edges leaving each block towards uniformly chosen other blocks.
    pub inter_edges_per_block: usize,
}

impl Default for BlockConfig {
    fn default() -> Self {
        BlockConfig {
            blocks: 10,
            block_size: 10,
            intra_density: 0.5,
            inter_edges_per_block: 2,
        }
    }
}

/// Sparse random blocks joined by a few directed edges. Returns the graph and
/// the block index of each vertex.
pub fn random_block_digraph(cfg: &BlockConfig, seed: u64) -> Result<(WeightedGraph, Vec<usize>)> {
    if cfg.blocks < 2 {
        return Err(Error::InvalidConfig("need at least two blocks".into()));
    }
    if cfg.block_size == 0 {
        return Err(Error::InvalidConfig("block size must be positive".into()));
    }
    if !(cfg.intra_density > 0.0 && cfg.intra_density <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "intra density {} outside (0, 1]",
            cfg.intra_density
        )));
    }
    let s = cfg.block_size;
    let n = cfg.blocks * s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for b in 0..cfg.blocks {
        for i in 0..s {
            for j in 0..s {
                if rng.random::<f64>() < cfg.intra_density {
                    edges.push((b * s + i, b * s + j, 1.0));
                }
            }
        }
    }
    let mut inter = std::collections::HashSet::new();
    for b in 0..cfg.blocks {
        for _ in 0..cfg.inter_edges_per_block {
            // Redraw duplicates so that every edge keeps unit weight.
            for _ in 0..64 {
                let mut target = rng.random_range(0..cfg.blocks - 1);
                if target >= b {
                    target += 1;
                }
                let from = b * s + rng.random_range(0..s);
                let to = target * s + rng.random_range(0..s);
                if inter.insert((from, to)) {
                    edges.push((from, to, 1.0));
                    break;
                }
            }
        }
    }
    let labels = (0..n).map(|v| v / s).collect();
    Ok((build_graph(n, &edges, true)?, labels))
}
