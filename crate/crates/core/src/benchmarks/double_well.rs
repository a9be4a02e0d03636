//! Rotating double-well graph: two concentric rings whose random walks drift
//! into two opposite attracting arcs that rotate over time.
//!
//! Ring position `p` holds the inner vertex `2p` and the outer vertex
//! `2p + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, TemporalGraph, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleWellConfig {
    /// Vertices per ring.
    pub ring_size: usize,
    /// Vertices per well over both rings.
    pub well_width: usize,
    /// First ring position of the first well at step 0.
    pub well_offset: usize,
    /// Steps between rotations.
    pub rotation_period: usize,
    /// Ring positions advanced per rotation.
    pub rotation_step: usize,
    pub total_steps: usize,
}

impl Default for DoubleWellConfig {
    fn default() -> Self {
        DoubleWellConfig {
            ring_size: 12,
            well_width: 6,
            well_offset: 2,
            rotation_period: 10,
            rotation_step: 1,
            total_steps: 100,
        }
    }
}

impl DoubleWellConfig {
    pub fn n(&self) -> usize {
        2 * self.ring_size
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.ring_size < 4 || !self.ring_size.is_multiple_of(2) {
            return bad("ring size must be even and at least 4");
        }
        if self.well_width < 2 || !self.well_width.is_multiple_of(2) {
            return bad("well width must be a positive even vertex count");
        }
        if self.well_width >= self.ring_size {
            return bad("wells must not cover the rings");
        }
        if self.rotation_period == 0 {
            return bad("rotation period must be positive");
        }
        if self.total_steps == 0 {
            return bad("total steps must be positive");
        }
        Ok(())
    }
}

/// Ring positions covered by the wells at step `t`.
pub fn well_positions(cfg: &DoubleWellConfig, t: usize) -> Vec<usize> {
    let r = cfg.ring_size;
    let shift = (t / cfg.rotation_period) * cfg.rotation_step;
    let start = cfg.well_offset + shift;
    let mut out: Vec<usize> = (0..cfg.well_width / 2)
        .flat_map(|j| [(start + j) % r, (start + r / 2 + j) % r])
        .collect();
    out.sort_unstable();
    out
}

fn snapshot(cfg: &DoubleWellConfig, t: usize) -> Result<WeightedGraph> {
    let r = cfg.ring_size;
    let wells = well_positions(cfg, t);
    let in_well = |p: usize| wells.binary_search(&p).is_ok();
    let distance = |p: usize| {
        wells
            .iter()
            .map(|&w| {
                let d = p.abs_diff(w);
                d.min(r - d)
            })
            .min()
            .expect("wells are non-empty")
    };

    let mut edges = Vec::new();
    for p in 0..r {
        let (inner, outer) = (2 * p, 2 * p + 1);
        edges.push((inner, outer, 1.0));
        edges.push((outer, inner, 1.0));

        let q = (p + 1) % r;
        let (dp, dq) = (distance(p), distance(q));
        let forward = (in_well(p) && in_well(q)) || dp >= dq;
        let backward = (in_well(p) && in_well(q)) || dq >= dp;
        for ring in 0..2 {
            let (a, b) = (2 * p + ring, 2 * q + ring);
            if forward {
                edges.push((a, b, 1.0));
            }
            if backward {
                edges.push((b, a, 1.0));
            }
        }
    }
    build_graph(cfg.n(), &edges, true)
}

/// Snapshot `t` is the graph governing step `t`. All weights are 1.
pub fn rotating_double_well(cfg: &DoubleWellConfig) -> Result<TemporalGraph> {
    cfg.validate()?;
    let snapshots = (0..cfg.total_steps)
        .map(|t| snapshot(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    TemporalGraph::new(snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray_vertices(cfg: &DoubleWellConfig, t: usize) -> Vec<usize> {
        let mut v: Vec<usize> = well_positions(cfg, t)
            .iter()
            .flat_map(|&p| [2 * p + 1, 2 * p + 2])
            .collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn initial_and_rotated_wells() {
        let cfg = DoubleWellConfig::default();
        let one_based: Vec<usize> = (5..=10).chain(17..=22).collect();
        assert_eq!(gray_vertices(&cfg, 0), one_based);
        assert_eq!(gray_vertices(&cfg, 9), one_based);
        let rotated: Vec<usize> = (7..=12).chain(19..=24).collect();
        assert_eq!(gray_vertices(&cfg, 10), rotated);
    }

    #[test]
    fn sizes_and_periodicity() {
        let cfg = DoubleWellConfig {
            total_steps: 130,
            ..Default::default()
        };
        let tg = rotating_double_well(&cfg).unwrap();
        assert_eq!(tg.n(), 24);
        assert_eq!(tg.len(), 130);
        assert_eq!(tg.snapshot(3), tg.snapshot(3 + 120));
    }

    #[test]
    fn well_arcs_are_undirected_and_drift_points_inward() {
        let cfg = DoubleWellConfig::default();
        let tg = rotating_double_well(&cfg).unwrap();
        let g = tg.snapshot(0);
        // Positions 2 and 3 are both in the first well.
        assert_eq!(g.weight(4, 6), 1.0);
        assert_eq!(g.weight(6, 4), 1.0);
        // Position 5 borders the well at 4: the edge points into the well.
        assert_eq!(g.weight(10, 8), 1.0);
        assert_eq!(g.weight(8, 10), 0.0);
        // Spokes are undirected.
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
    }

    #[test]
    fn rotation_preserves_degree_sequences() {
        let tg = rotating_double_well(&DoubleWellConfig::default()).unwrap();
        let sorted = |t: usize| {
            let mut d = tg.snapshot(t).out_degrees().values;
            d.sort_by(f64::total_cmp);
            d
        };
        let base = sorted(0);
        for t in 1..tg.len() {
            assert_eq!(sorted(t), base);
        }
    }

    #[test]
    fn invalid_configs() {
        let odd = DoubleWellConfig {
            ring_size: 11,
            ..Default::default()
        };
        assert!(matches!(rotating_double_well(&odd), Err(Error::InvalidConfig(_))));
        let wide = DoubleWellConfig {
            well_width: 12,
            ..Default::default()
        };
        assert!(rotating_double_well(&wide).is_err());
    }
}
