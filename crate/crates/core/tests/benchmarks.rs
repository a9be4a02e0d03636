use std::f64::consts::PI;

use coherent_graphs::benchmarks::{
    box_centers, box_of, gyre_velocity, integrate_flow, quadruple_gyre_graph, random_block_digraph,
    rotating_double_well, three_ring_graph, well_positions, BlockConfig, DoubleWellConfig, GyreConfig,
    THREE_RING_LINK_WEIGHT,
};
use proptest::prelude::*;

/// Stream function of the gyre flow, written out independently.
fn stream(t: f64, x: f64, y: f64, cfg: &GyreConfig) -> f64 {
    let a = cfg.delta * (cfg.omega * t).sin();
    let f = |z: f64| a * z * z + (1.0 - 2.0 * a) * z;
    (PI * f(x)).sin() * (PI * f(y)).sin()
}

fn quadrant(i: usize, b: usize) -> usize {
    usize::from(i % b >= b / 2) + 2 * usize::from(i / b >= b / 2)
}

#[test]
fn three_ring_structure() {
    let g = three_ring_graph();
    let e: Vec<_> = g.entries().collect();
    assert_eq!(e.len(), 15);
    assert_eq!(e.iter().filter(|&&(_, _, w)| w == 1.0).count(), 12);
    assert_eq!(e.iter().filter(|&&(_, _, w)| w == THREE_RING_LINK_WEIGHT).count(), 3);
    assert!(g.adjacency().max_asymmetry() > 0.0);
    assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![(1, 1.0)]);
    let d = g.add_self_loops(1.0).unwrap().out_degrees();
    assert!((d.values[3] - 2.01).abs() < 1e-15);
}

#[test]
fn block_digraph_defaults_and_edge_cases() {
    let (g, truth) = random_block_digraph(&BlockConfig::default(), 1).unwrap();
    assert_eq!(g.n(), 100);
    assert!((0..10).all(|b| truth.iter().filter(|&&t| t == b).count() == 10));
    let cross = g.entries().filter(|&(i, j, _)| truth[i] != truth[j]).count();
    assert_eq!(cross, 20);

    let isolated = BlockConfig {
        inter_edges_per_block: 0,
        ..Default::default()
    };
    let (g, truth) = random_block_digraph(&isolated, 1).unwrap();
    assert!(g.entries().all(|(i, j, _)| truth[i] == truth[j]));

    let tiny = BlockConfig {
        blocks: 2,
        block_size: 1,
        intra_density: 1.0,
        inter_edges_per_block: 0,
    };
    let (g, _) = random_block_digraph(&tiny, 0).unwrap();
    assert_eq!(g.entries().collect::<Vec<_>>(), vec![(0, 0, 1.0), (1, 1, 1.0)]);

    for bad in [
        BlockConfig { blocks: 1, ..Default::default() },
        BlockConfig { intra_density: 0.0, ..Default::default() },
    ] {
        assert!(random_block_digraph(&bad, 0).is_err());
    }
    assert_eq!(
        random_block_digraph(&BlockConfig::default(), 4).unwrap(),
        random_block_digraph(&BlockConfig::default(), 4).unwrap()
    );
}

#[test]
fn double_well_gray_vertices_match_the_figure() {
    let cfg = DoubleWellConfig::default();
    let gray = |t: usize| -> Vec<usize> {
        let mut v: Vec<usize> = well_positions(&cfg, t)
            .into_iter()
            .flat_map(|p| [2 * p + 1, 2 * p + 2])
            .collect();
        v.sort_unstable();
        v
    };
    assert_eq!(gray(0), vec![5, 6, 7, 8, 9, 10, 17, 18, 19, 20, 21, 22]);
    assert_eq!(gray(10), vec![7, 8, 9, 10, 11, 12, 19, 20, 21, 22, 23, 24]);
    assert_eq!(gray(9), gray(0));
}

#[test]
fn double_well_edges_drift_into_wells_and_rotate_periodically() {
    let cfg = DoubleWellConfig {
        total_steps: 240,
        ..Default::default()
    };
    let tg = rotating_double_well(&cfg).unwrap();
    assert_eq!(tg.n(), 24);
    for t in 0..120 {
        assert_eq!(tg.snapshot(t), tg.snapshot(t + 120));
    }
    let g = tg.snapshot(0);
    assert!(g.entries().all(|(_, _, w)| w == 1.0));
    // Spokes are undirected, well arcs are undirected.
    for p in 0..12 {
        assert!(g.weight(2 * p, 2 * p + 1) > 0.0 && g.weight(2 * p + 1, 2 * p) > 0.0);
    }
    assert!(g.weight(4, 6) > 0.0 && g.weight(6, 4) > 0.0);
    // Position 0 is two steps from the well at 2: drift runs 0 -> 1 only.
    assert!(g.weight(0, 2) > 0.0 && g.weight(2, 0) == 0.0);
    assert!(g.weight(1, 3) > 0.0 && g.weight(3, 1) == 0.0);
    // Position 6 is equidistant from both wells: both directions.
    assert!(g.weight(12, 14) > 0.0 && g.weight(12, 10) > 0.0);
    assert!(rotating_double_well(&DoubleWellConfig { ring_size: 3, ..Default::default() }).is_err());
}

#[test]
fn gyre_velocity_matches_the_stream_function() {
    let cfg = GyreConfig::default();
    let h = 1e-6;
    for &(t, x, y) in &[(0.0, 0.5, 0.25), (0.13, 0.3, 1.7), (0.4, 1.2, 0.9), (0.77, 1.9, 0.05)] {
        let (u, v) = gyre_velocity(t, x, y, &cfg);
        let dpsi_dx = (stream(t, x + h, y, &cfg) - stream(t, x - h, y, &cfg)) / (2.0 * h);
        let dpsi_dy = (stream(t, x, y + h, &cfg) - stream(t, x, y - h, &cfg)) / (2.0 * h);
        assert!((u + dpsi_dy).abs() < 1e-7, "u at {t} {x} {y}");
        assert!((v - dpsi_dx).abs() < 1e-7, "v at {t} {x} {y}");
    }
    let (u, v) = gyre_velocity(0.0, 0.5, 0.25, &cfg);
    assert!((u + PI / 2f64.sqrt()).abs() < 1e-12 && v.abs() < 1e-12);
}

#[test]
fn rk4_has_fourth_order_richardson_ratio() {
    let at = |substeps: usize| {
        let cfg = GyreConfig {
            substeps,
            ..Default::default()
        };
        integrate_flow((0.3, 0.7), 0.1, 0.5, &cfg)
    };
    let (a, b, c) = (at(5), at(10), at(20));
    let e1 = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    let e2 = ((b.0 - c.0).powi(2) + (b.1 - c.1).powi(2)).sqrt();
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn gyre_quadrants_are_closed_at_time_zero() {
    let cfg = GyreConfig::default();
    let (tg, centers) = quadruple_gyre_graph(&cfg).unwrap();
    assert_eq!(tg.len(), 20);
    assert_eq!(centers, box_centers(&cfg));
    let b = cfg.boxes_per_axis;
    let g = tg.snapshot(0);
    assert!(g.entries().all(|(i, j, _)| quadrant(i, b) == quadrant(j, b)));
    for s in tg.snapshots() {
        let out = s.out_degrees();
        assert!(out.values.iter().all(|&d| d == 16.0));
    }
}

proptest! {
    #[test]
    fn box_of_finds_the_box_center(i in 0usize..100) {
        let cfg = GyreConfig::default();
        prop_assert_eq!(box_of(box_centers(&cfg)[i], &cfg), i);
    }

    #[test]
    fn flow_stays_on_the_torus(x in 0.0f64..2.0, y in 0.0f64..2.0, t in 0.0f64..1.0) {
        let (a, b) = integrate_flow((x, y), t, 0.05, &GyreConfig::default());
        prop_assert!((0.0..2.0).contains(&a) && (0.0..2.0).contains(&b));
    }
}
