//! Box discretization of the periodically forced quadruple-gyre flow on the
//! torus `[0, 2)^2`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, TemporalGraph};

pub const DOMAIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GyreConfig {
    pub delta: f64,
    pub omega: f64,
    pub boxes_per_axis: usize,
    /// Must be a perfect square; points form a uniform lattice in each box.
    pub points_per_box: usize,
    pub tau: f64,
    pub steps: usize,
    /// RK4 substeps per `tau`.
    pub substeps: usize,
    /// Use `g(t, x, y)` for the y-velocity rather than the
    /// stream-function form `g(t, y, x)`.
    pub literal_field: bool,
}

impl Default for GyreConfig {
    fn default() -> Self {
        GyreConfig {
            delta: 0.1,
            omega: 2.0 * PI,
            boxes_per_axis: 10,
            points_per_box: 16,
            tau: 0.05,
            steps: 20,
            substeps: 10,
            literal_field: false,
        }
    }
}

impl GyreConfig {
    pub fn n(&self) -> usize {
        self.boxes_per_axis * self.boxes_per_axis
    }

    pub fn box_width(&self) -> f64 {
        DOMAIN / self.boxes_per_axis as f64
    }

    fn lattice_side(&self) -> Option<usize> {
        let s = (self.points_per_box as f64).sqrt().round() as usize;
        (s > 0 && s * s == self.points_per_box).then_some(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.delta) {
            return Err(Error::InvalidConfig(format!("delta {} outside [0, 0.5)", self.delta)));
        }
        if self.boxes_per_axis < 2 {
            return Err(Error::InvalidConfig("need at least two boxes per axis".into()));
        }
        if self.lattice_side().is_none() {
            return Err(Error::InvalidConfig(format!(
                "points per box {} is not a perfect square",
                self.points_per_box
            )));
        }
        if !(self.tau > 0.0) || self.steps == 0 || self.substeps == 0 {
            return Err(Error::InvalidConfig("tau, steps and substeps must be positive".into()));
        }
        Ok(())
    }
}

fn g(t: f64, z1: f64, z2: f64, cfg: &GyreConfig) -> f64 {
    let a = cfg.delta * (cfg.omega * t).sin();
    let f = |z: f64| a * z * z + (1.0 - 2.0 * a) * z;
    let df = 2.0 * a * z2 + 1.0 - 2.0 * a;
    PI * (PI * f(z1)).sin() * (PI * f(z2)).cos() * df
}

/// Velocity `(-g(t, x, y), g(t, y, x))`.
pub fn gyre_velocity(t: f64, x: f64, y: f64, cfg: &GyreConfig) -> (f64, f64) {
    let dy = if cfg.literal_field {
        g(t, x, y, cfg)
    } else {
        g(t, y, x, cfg)
    };
    (-g(t, x, y, cfg), dy)
}

/// Classical RK4 over `[t0, t0 + tau]` with `cfg.substeps` steps, wrapped onto
/// the torus.
pub fn integrate_flow(p: (f64, f64), t0: f64, tau: f64, cfg: &GyreConfig) -> (f64, f64) {
    let h = tau / cfg.substeps as f64;
    let (mut x, mut y) = p;
    let mut t = t0;
    for _ in 0..cfg.substeps {
        let k1 = gyre_velocity(t, x, y, cfg);
        let k2 = gyre_velocity(t + h / 2.0, x + h / 2.0 * k1.0, y + h / 2.0 * k1.1, cfg);
        let k3 = gyre_velocity(t + h / 2.0, x + h / 2.0 * k2.0, y + h / 2.0 * k2.1, cfg);
        let k4 = gyre_velocity(t + h, x + h * k3.0, y + h * k3.1, cfg);
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        t += h;
    }
    (wrap(x), wrap(y))
}

fn wrap(z: f64) -> f64 {
    let w = z.rem_euclid(DOMAIN);
    // rem_euclid can round up to the modulus itself.
    if w >= DOMAIN {
        0.0
    } else {
        w
    }
}

/// Row-major box index (`row = y`) of a point on the torus.
pub fn box_of(p: (f64, f64), cfg: &GyreConfig) -> usize {
    let b = cfg.boxes_per_axis;
    let w = cfg.box_width();
    let ix = ((wrap(p.0) / w) as usize).min(b - 1);
    let iy = ((wrap(p.1) / w) as usize).min(b - 1);
    iy * b + ix
}

pub fn box_centers(cfg: &GyreConfig) -> Vec<(f64, f64)> {
    let b = cfg.boxes_per_axis;
    let w = cfg.box_width();
    (0..b * b)
        .map(|i| (((i % b) as f64 + 0.5) * w, ((i / b) as f64 + 0.5) * w))
        .collect()
}

/// Snapshot `t` maps test points of each box from time `t tau` over `tau`;
/// edge `(i, j)` counts the points of box `i` that land in box `j`.
pub fn quadruple_gyre_graph(cfg: &GyreConfig) -> Result<(TemporalGraph, Vec<(f64, f64)>)> {
    cfg.validate()?;
    let b = cfg.boxes_per_axis;
    let n = cfg.n();
    let w = cfg.box_width();
    let side = cfg.lattice_side().expect("validated");
    let offsets: Vec<f64> = (0..side).map(|i| (i as f64 + 0.5) / side as f64 * w).collect();

    let snapshots = (0..cfg.steps)
        .map(|step| {
            let t0 = step as f64 * cfg.tau;
            let edges: Vec<(usize, usize, f64)> = (0..n)
                .into_par_iter()
                .flat_map_iter(|i| {
                    let (x0, y0) = ((i % b) as f64 * w, (i / b) as f64 * w);
                    let offsets = &offsets;
                    offsets.iter().flat_map(move |&oy| {
                        offsets.iter().map(move |&ox| {
                            let q = integrate_flow((x0 + ox, y0 + oy), t0, cfg.tau, cfg);
                            (i, box_of(q, cfg), 1.0)
                        })
                    })
                })
                .collect();
            build_graph(n, &edges, true)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((TemporalGraph::new(snapshots)?, box_centers(cfg)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn velocity_examples_at_time_zero() {
        let cfg = GyreConfig::default();
        let (u, v) = gyre_velocity(0.0, 0.5, 0.5, &cfg);
        assert!(u.abs() < 1e-15 && v.abs() < 1e-15);
        let (u, v) = gyre_velocity(0.0, 0.5, 0.25, &cfg);
        assert!((u + PI / 2f64.sqrt()).abs() < 1e-12);
        assert!(v.abs() < 1e-12);
        for x in [0.0, 1.0, 2.0] {
            assert!(gyre_velocity(0.0, x, 0.3, &cfg).0.abs() < 1e-12);
            assert!(gyre_velocity(0.0, 0.3, x, &cfg).1.abs() < 1e-12);
        }
    }

    #[test]
    fn literal_field_is_antidiagonal() {
        let cfg = GyreConfig {
            literal_field: true,
            ..Default::default()
        };
        let (u, v) = gyre_velocity(0.3, 0.7, 1.4, &cfg);
        assert_eq!(u, -v);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap(2.0), 0.0);
        assert_eq!(wrap(-0.5), 1.5);
        let cfg = GyreConfig::default();
        assert_eq!(box_of((2.0, 0.1), &cfg), 0);
        assert_eq!(box_of((0.25, 1.95), &cfg), 91);
    }

    #[test]
    fn rk4_self_convergence() {
        let base = GyreConfig::default();
        let fine = GyreConfig {
            substeps: 20,
            ..base
        };
        let p = (0.3, 0.6);
        let a = integrate_flow(p, 0.35, base.tau, &base);
        let b = integrate_flow(p, 0.35, base.tau, &fine);
        assert!((a.0 - b.0).abs() < 1e-6 && (a.1 - b.1).abs() < 1e-6);
    }

    #[test]
    fn graph_conserves_test_points() {
        let cfg = GyreConfig {
            steps: 3,
            ..Default::default()
        };
        let (tg, centers) = quadruple_gyre_graph(&cfg).unwrap();
        assert_eq!(tg.n(), 100);
        assert_eq!(tg.len(), 3);
        assert_eq!(centers.len(), 100);
        for g in tg.snapshots() {
            assert!(g.out_degrees().values.iter().all(|&d| d == 16.0));
        }
    }

    #[test]
    fn rejects_non_square_point_counts() {
        let cfg = GyreConfig {
            points_per_box: 15,
            ..Default::default()
        };
        assert!(matches!(quadruple_gyre_graph(&cfg), Err(Error::InvalidConfig(_))));
    }
}
