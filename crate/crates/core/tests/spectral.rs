mod common;

use coherent_graphs::benchmarks::{random_block_digraph, BlockConfig};
use coherent_graphs::operators::{forward_backward_matrix, nu_vector, transition_matrix};
use coherent_graphs::spectral::{
    eigs_undirected_rw, right_singular_vectors, subspace_distance, top_eigs_symmetric, EigenOptions, SolverMethod,
};
use proptest::prelude::*;

use common::*;

fn lanczos_opts() -> EigenOptions {
    EigenOptions {
        dense_threshold: 0,
        ..EigenOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dense_and_lanczos_agree(g in digraph_strategy(60)) {
        let g = g.add_self_loops(1.0).unwrap();
        let q = forward_backward_matrix(&transition_matrix(&g, None).unwrap()).unwrap();
        let k = g.n().min(4);
        let dense = top_eigs_symmetric(q.matrix(), k, &EigenOptions::default()).unwrap();
        let lanczos = top_eigs_symmetric(q.matrix(), k, &lanczos_opts()).unwrap();
        prop_assert_eq!(dense.method, SolverMethod::Dense);
        prop_assert!(matches!(lanczos.method, SolverMethod::Lanczos { .. }), "expected Lanczos");
        for (a, b) in dense.eigenvalues.iter().zip(&lanczos.eigenvalues) {
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }
        prop_assert!(lanczos.max_residual() < 1e-8);
    }

    #[test]
    fn eigenpairs_match_dense_oracle(g in digraph_strategy(40)) {
        let g = g.add_self_loops(1.0).unwrap();
        let q = forward_backward_matrix(&transition_matrix(&g, None).unwrap()).unwrap();
        let (oracle, _) = desc_eigs(&dense_q(&dense_p(&dense_adjacency(&g))));
        let k = g.n().min(5);
        let s = top_eigs_symmetric(q.matrix(), k, &EigenOptions::default()).unwrap();
        let qd = q.matrix().to_dense();
        for (c, expected) in oracle.iter().take(k).enumerate() {
            prop_assert!((s.eigenvalues[c] - expected).abs() < 1e-10);
            let v = s.eigenvectors.column(c);
            prop_assert!((&qd * v - s.eigenvalues[c] * v).amax() < 1e-9);
            prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn undirected_rw_vectors_are_eigenvectors_of_p(g in undirected_strategy(40)) {
        let g = g.add_self_loops(1.0).unwrap();
        let p = transition_matrix(&g, None).unwrap();
        let k = g.n().min(4);
        let s = eigs_undirected_rw(&p, &g.out_degrees(), k, &EigenOptions::default()).unwrap();
        let pd = p.matrix().to_dense();
        for c in 0..k {
            let v = s.eigenvectors.column(c);
            prop_assert!((&pd * v - s.eigenvalues[c] * v).amax() < 1e-10);
        }
        prop_assert!((s.eigenvalues[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn squared_singular_values_are_eigenvalues_of_q(g in digraph_strategy(40)) {
        let g = g.add_self_loops(1.0).unwrap();
        let p = transition_matrix(&g, None).unwrap();
        let q = forward_backward_matrix(&p).unwrap();
        let k = g.n().min(4);
        let svd = right_singular_vectors(&p, &nu_vector(&p), k, &EigenOptions::default()).unwrap();
        let eig = top_eigs_symmetric(q.matrix(), k, &EigenOptions::default()).unwrap();
        for (s, l) in svd.singular_values().iter().zip(&eig.eigenvalues) {
            prop_assert!((s * s - l).abs() < 1e-10, "{} vs {}", s * s, l);
        }
        let qd = q.matrix().to_dense();
        for c in 0..k {
            let v = svd.eigenvectors.column(c);
            prop_assert!((&qd * v - svd.eigenvalues[c] * v).amax() < 1e-9);
        }
    }
}

#[test]
fn lanczos_svd_route_matches_q_on_a_larger_graph() {
    let cfg = BlockConfig {
        blocks: 12,
        block_size: 60,
        intra_density: 0.1,
        inter_edges_per_block: 3,
    };
    let (g, _) = random_block_digraph(&cfg, 7).unwrap();
    let g = g.add_self_loops(1.0).unwrap();
    let p = transition_matrix(&g, None).unwrap();
    let q = forward_backward_matrix(&p).unwrap();
    let opts = EigenOptions::default();
    let eig = top_eigs_symmetric(q.matrix(), 12, &opts).unwrap();
    let svd = right_singular_vectors(&p, &nu_vector(&p), 12, &opts).unwrap();
    assert!(matches!(eig.method, SolverMethod::Lanczos { .. }));
    assert!(eig.max_residual() < 1e-8);
    for (a, b) in eig.eigenvalues.iter().zip(&svd.eigenvalues) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    let gap = eig.eigenvalues[11] - top_eigs_symmetric(q.matrix(), 13, &opts).unwrap().eigenvalues[12];
    assert!(gap > 1e-3);
    assert!(subspace_distance(&eig.eigenvectors, &svd.eigenvectors) < 1e-6);
}

#[test]
fn k_larger_than_n_is_rejected() {
    let g = path_graph(3).add_self_loops(1.0).unwrap();
    let q = forward_backward_matrix(&transition_matrix(&g, None).unwrap()).unwrap();
    assert!(top_eigs_symmetric(q.matrix(), 4, &EigenOptions::default()).is_err());
}

#[test]
fn disconnected_cliques_have_a_degenerate_top_eigenvalue() {
    let (g, _) = disjoint_cliques(&[4, 5, 6]);
    let g = g.add_self_loops(1.0).unwrap();
    let q = forward_backward_matrix(&transition_matrix(&g, None).unwrap()).unwrap();
    let s = top_eigs_symmetric(q.matrix(), 4, &EigenOptions::default()).unwrap();
    for l in &s.eigenvalues[..3] {
        assert!((l - 1.0).abs() < 1e-12);
    }
    assert!(s.degenerate_groups.iter().any(|grp| grp == &vec![0, 1, 2]));
}
