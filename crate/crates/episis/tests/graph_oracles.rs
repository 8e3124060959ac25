//! Cross-checks of the graph generators and the spectral radius against
//! independent oracles.

use episis::graph::{
    gen_erdos_renyi, gen_geometric_torus, gen_preferential_attachment, largest_connected_component,
    rewire_social, spectral_radius, Graph,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

/// Straightforward re-implementation of the documented Erdős–Rényi draw
/// order: lexicographic pair scan, one uniform draw per pair.
fn erdos_renyi_reference(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let u: f64 = rng.gen();
            if u < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

#[test]
fn er_matches_independent_reimplementation() {
    for seed in [0, 1, 7, 12345] {
        let g = gen_erdos_renyi(4, 0.5, seed).unwrap();
        assert_eq!(g.edges(), erdos_renyi_reference(4, 0.5, seed));
    }
    let g = gen_erdos_renyi(60, 0.13, 99).unwrap();
    assert_eq!(g.edges(), erdos_renyi_reference(60, 0.13, 99));
}

/// Dense symmetric eigensolver oracle for the spectral radius.
fn spectral_radius_dense(g: &Graph) -> f64 {
    let n = g.n();
    let mut a = nalgebra::DMatrix::zeros(n, n);
    for &(i, j) in g.edges() {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    nalgebra::SymmetricEigen::new(a)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn power_iteration_agrees_with_dense_solver_small_graphs() {
    let mut cases: Vec<Graph> = vec![
        Graph::complete(3).unwrap(),
        Graph::path(3).unwrap(),
        Graph::path(8).unwrap(),
        Graph::star(8).unwrap(),
        Graph::cycle(7).unwrap(),
        Graph::complete(8).unwrap(),
    ];
    for seed in 0..40 {
        let g = gen_erdos_renyi(8, 0.4, seed).unwrap();
        if g.edge_count() > 0 {
            cases.push(g);
        }
    }
    for g in &cases {
        let pi = spectral_radius(g, 1e-13, 200_000).unwrap();
        let dense = spectral_radius_dense(g);
        assert!(
            (pi - dense).abs() < 1e-8,
            "power iteration {pi} vs dense {dense} on n={}, m={}",
            g.n(),
            g.edge_count()
        );
    }
}

#[test]
fn spectral_radius_bounded_by_degrees_on_generated_instances() {
    for seed in 0..10 {
        let graphs = [
            gen_erdos_renyi(200, 0.05, seed).unwrap(),
            gen_geometric_torus(200, 0.13, seed).unwrap(),
            gen_preferential_attachment(200, 3, seed).unwrap(),
        ];
        for g in graphs {
            if g.edge_count() == 0 {
                continue;
            }
            let lam = spectral_radius(&g, 1e-10, 100_000).unwrap();
            assert!(lam >= g.mean_degree() - 1e-8);
            assert!(lam <= g.max_degree() as f64 + 1e-8);
        }
    }
}

#[test]
fn geometric_mean_degree_concentrates_over_many_seeds() {
    // expected degree n * pi * r^2 ~ 10; every seed should land in [9, 11]
    let mut within = 0;
    for seed in 0..20 {
        let d = gen_geometric_torus(1000, 0.0564, seed).unwrap().mean_degree();
        if (9.0..=11.0).contains(&d) {
            within += 1;
        }
    }
    assert_eq!(within, 20);
}

#[test]
fn er_mean_degree_concentrates_over_many_seeds() {
    let mut within = 0;
    for seed in 0..20 {
        let d = gen_erdos_renyi(1000, 0.01, seed).unwrap().mean_degree();
        if (9.0..=11.0).contains(&d) {
            within += 1;
        }
    }
    assert_eq!(within, 20);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generators_always_produce_simple_consistent_graphs(
        n in 2usize..40,
        seed in 0u64..5000,
        p in 0.05f64..0.95,
    ) {
        let g = gen_erdos_renyi(n, p, seed).unwrap();
        check_invariants(&g);

        let g = gen_geometric_torus(n, 0.3, seed).unwrap();
        check_invariants(&g);

        let m = 1 + (seed as usize % n.min(4));
        let g = gen_preferential_attachment(n.max(m), m, seed).unwrap();
        check_invariants(&g);
        prop_assert!(g.is_connected());
    }

    #[test]
    fn rewiring_preserves_edge_count_and_simplicity(
        n in 4usize..30,
        seed in 0u64..5000,
        p in 0.0f64..=1.0,
    ) {
        let contact = gen_erdos_renyi(n, 0.4, seed).unwrap();
        prop_assume!(contact.edge_count() > 0);
        let social = rewire_social(&contact, p, seed ^ 0xabcd).unwrap();
        prop_assert_eq!(social.edge_count(), contact.edge_count());
        check_invariants(&social);
    }

    #[test]
    fn edge_list_round_trips(n in 1usize..30, seed in 0u64..5000) {
        let g = gen_erdos_renyi(n.max(2), 0.3, seed).unwrap();
        let parsed = Graph::parse_edge_list(&g.to_edge_list_string()).unwrap();
        prop_assert_eq!(parsed, g);
    }

    #[test]
    fn lcc_is_connected_and_no_larger(n in 2usize..40, seed in 0u64..5000) {
        let g = gen_erdos_renyi(n, 0.08, seed).unwrap();
        let c = largest_connected_component(&g);
        prop_assert!(c.n() >= 1 && c.n() <= g.n());
        prop_assert!(c.is_connected());
    }
}

fn check_invariants(g: &Graph) {
    let mut from_adj = Vec::new();
    for i in 0..g.n() {
        assert!(!g.neighbors(i).contains(&i));
        for &j in g.neighbors(i) {
            assert!(g.neighbors(j).contains(&i));
            if i < j {
                from_adj.push((i, j));
            }
        }
    }
    from_adj.sort_unstable();
    assert_eq!(from_adj, g.edges());
}
