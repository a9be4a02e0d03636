mod common;

use std::fs;

use coherent_graphs::benchmarks::{rotating_double_well, DoubleWellConfig};
use coherent_graphs::io::{
    infer_day_boundaries, load_contact_data, load_edge_list, load_matrix_market, load_matrix_market_with,
    load_temporal_dir, write_edge_list, write_matrix_market, write_temporal_dir, WeightMode,
};
use coherent_graphs::{Error, TemporalGraph};
use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matrix_market_round_trip(g in digraph_strategy(30)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.mtx");
        write_matrix_market(&g, &path).unwrap();
        let back = load_matrix_market(&path).unwrap();
        prop_assert_eq!(back.n(), g.n());
        prop_assert_eq!(back.entries().collect::<Vec<_>>(), g.entries().collect::<Vec<_>>());
    }

    #[test]
    fn edge_list_round_trip(g in undirected_strategy(30)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.tsv");
        write_edge_list(&g, &path).unwrap();
        prop_assert_eq!(load_edge_list(&path, false).unwrap(), g);
    }
}

#[test]
fn temporal_dir_round_trip() {
    let cfg = DoubleWellConfig {
        total_steps: 12,
        ..Default::default()
    };
    let tg = rotating_double_well(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_temporal_dir(&tg, dir.path()).unwrap();
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let back = load_temporal_dir(dir.path()).unwrap();
    assert_eq!(back.snapshots(), tg.snapshots());
    assert_eq!(back.times().unwrap(), (0..12).collect::<Vec<i64>>());
}

#[test]
fn undirected_snapshots_keep_their_flag() {
    let (g, _) = disjoint_cliques(&[3, 3]);
    let tg = TemporalGraph::new(vec![g.clone(), g]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_temporal_dir(&tg, dir.path()).unwrap();
    let back = load_temporal_dir(dir.path()).unwrap();
    assert!(back.snapshots().iter().all(|s| !s.is_directed()));
}

#[test]
fn temporal_dir_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_temporal_dir(dir.path()), Err(Error::EmptyDirectory(_))));
    fs::write(dir.path().join("snapshot_000.tsv"), "#n=3\n0 1\n").unwrap();
    fs::write(dir.path().join("snapshot_001.tsv"), "#n=4\n0 1\n").unwrap();
    assert!(matches!(
        load_temporal_dir(dir.path()),
        Err(Error::InconsistentVertexCount { index: 1, .. })
    ));
    assert!(load_temporal_dir(dir.path().join("missing")).unwrap_err().is_io());
}

#[test]
fn absolute_weights_for_signed_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("signed.mtx");
    fs::write(
        &path,
        "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 2 -2.5\n2 3 1.0\n3 1 -0.5\n",
    )
    .unwrap();
    assert!(load_matrix_market(&path).is_err());
    let g = load_matrix_market_with(&path, WeightMode::Absolute).unwrap();
    assert_eq!(g.weight(0, 1), 2.5);
    assert_eq!(g.weight(2, 0), 0.5);
    let p = load_matrix_market_with(&path, WeightMode::Pattern).unwrap();
    assert!(p.entries().all(|(_, _, w)| w == 1.0));
}

#[test]
fn contact_log_is_split_into_days() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("contacts.dat");
    let day = 86_400;
    let log = format!(
        "20 1 2 A A\n40 1 3 A B\n60 2 1 A A\n{} 3 4 B B\n{} 1 4 A B\n{} 5 5 C C\n",
        day + 20,
        day + 40,
        2 * day + 20
    );
    fs::write(&path, log).unwrap();
    let days = infer_day_boundaries(&path, 28_800).unwrap();
    assert_eq!(days, vec![(20, 61), (day + 20, day + 41), (2 * day + 20, 2 * day + 21)]);

    let data = load_contact_data(&path, &days[..2]).unwrap();
    assert_eq!(data.ids, vec![1, 2, 3, 4, 5]);
    assert_eq!(data.classes, vec!["A", "A", "B", "B", "C"]);
    let (names, labels) = data.class_indices();
    assert_eq!(names, vec!["A", "B", "C"]);
    assert_eq!(labels, vec![0, 0, 1, 1, 2]);
    assert_eq!(data.graph.len(), 2);
    let d0 = data.graph.snapshot(0);
    assert!(!d0.is_directed());
    assert_eq!(d0.weight(0, 1), 2.0);
    assert_eq!(d0.weight(2, 0), 1.0);
    assert_eq!(data.graph.snapshot(1).weight(3, 0), 1.0);
    assert_eq!(data.graph.times().unwrap(), &[20, day + 20]);
    assert_eq!(data.index_of(4), Some(3));
}
