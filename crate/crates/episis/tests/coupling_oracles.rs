//! Monte Carlo checks that coupled draws realize the exact joint table
//! product and preserve both chain laws marginally, plus the paired
//! expectation-gap experiment on a mid-size network.

use episis::coupling::{
    coupled_step, expectation_gap, node_coupling_table, simulate_coupled, InitSpec,
};
use episis::dynamics::{
    exact_transition_matrix, ChainKind, EpidemicParams, EpidemicState, Networks,
};
use episis::graph::{gen_erdos_renyi, largest_connected_component, rewire_social, Graph};
use episis::metrics::{social_cost, PathMetric};
use episis::rng::rng_from_seed;

fn params(beta: f64, delta: f64, alpha: f64) -> EpidemicParams {
    EpidemicParams::new(beta, delta, alpha).unwrap()
}

#[test]
fn coupled_one_step_joint_distribution_matches_table_product() {
    let nets = Networks::shared(Graph::complete(2).unwrap());
    let p = params(0.4, 0.3, 0.5);
    let x = EpidemicState::from_bits(vec![false, true]);
    let y = EpidemicState::all_infected(2);

    let tables: Vec<_> = (0..2)
        .map(|i| node_coupling_table(&x, &y, &nets, &p, i).unwrap())
        .collect();
    let exact_joint = |xi: usize, yi: usize| -> f64 {
        (0..2)
            .map(|i| tables[i].prob((xi >> i) & 1 == 1, (yi >> i) & 1 == 1))
            .product()
    };

    let draws = 1_000_000;
    let mut counts = vec![vec![0u64; 4]; 4];
    let mut rng = rng_from_seed(300);
    for _ in 0..draws {
        let (nx, ny) = coupled_step(&x, &y, &nets, &p, &mut rng).unwrap();
        counts[nx.to_index()][ny.to_index()] += 1;
    }
    let mut tv = 0.0;
    for xi in 0..4 {
        for yi in 0..4 {
            let freq = counts[xi][yi] as f64 / draws as f64;
            tv += 0.5 * (freq - exact_joint(xi, yi)).abs();
        }
    }
    assert!(tv < 0.005, "joint total variation {tv}");
}

#[test]
fn coupled_marginals_match_exact_rows_one_step() {
    let contact = Graph::path(3).unwrap();
    let social = Graph::cycle(3).unwrap();
    let nets = Networks::new(contact, social).unwrap();
    let p = params(0.45, 0.35, 0.6);
    let x = EpidemicState::from_bits(vec![false, true, false]);
    let y = EpidemicState::from_bits(vec![true, true, false]);

    let kd = exact_transition_matrix(&nets, &p, ChainKind::Distancing).unwrap();
    let k = exact_transition_matrix(&nets, &p, ChainKind::Benchmark).unwrap();

    let draws = 1_000_000;
    let mut x_counts = vec![0u64; 8];
    let mut y_counts = vec![0u64; 8];
    let mut rng = rng_from_seed(301);
    for _ in 0..draws {
        let (nx, ny) = coupled_step(&x, &y, &nets, &p, &mut rng).unwrap();
        x_counts[nx.to_index()] += 1;
        y_counts[ny.to_index()] += 1;
    }
    let tv = |counts: &[u64], row: &[f64]| -> f64 {
        0.5 * counts
            .iter()
            .zip(row)
            .map(|(&c, &q)| (c as f64 / draws as f64 - q).abs())
            .sum::<f64>()
    };
    let tv_x = tv(&x_counts, kd.row(x.to_index()));
    let tv_y = tv(&y_counts, k.row(y.to_index()));
    assert!(tv_x < 0.005, "distancing marginal total variation {tv_x}");
    assert!(tv_y < 0.005, "benchmark marginal total variation {tv_y}");
}

#[test]
fn coupled_runs_preserve_each_marginal_law_along_paths() {
    // compare the time-t state distribution of each coupled component
    // against its exact chain law advanced t steps
    let nets = Networks::shared(Graph::path(3).unwrap());
    let p = params(0.5, 0.4, 0.5);
    let init = EpidemicState::all_infected(3);
    let steps = 4;

    let advance = |kind: ChainKind| -> Vec<f64> {
        let chain = exact_transition_matrix(&nets, &p, kind).unwrap();
        let mut dist = vec![0.0; chain.size()];
        dist[init.to_index()] = 1.0;
        for _ in 0..steps {
            let mut next = vec![0.0; chain.size()];
            for (s, &mass) in dist.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                for (s2, &q) in chain.row(s).iter().enumerate() {
                    next[s2] += mass * q;
                }
            }
            dist = next;
        }
        dist
    };
    let dist_law = advance(ChainKind::Distancing);
    let bench_law = advance(ChainKind::Benchmark);

    let reps = 400_000;
    let mut h_counts = vec![0u64; 8];
    let mut g_counts = vec![0u64; 8];
    let mut rng = rng_from_seed(302);
    for _ in 0..reps {
        let path = simulate_coupled(&init, &nets, &p, steps, &mut rng).unwrap();
        // runs that stop early did so at the absorbing origin
        let (h_idx, g_idx) = if path.len() > steps {
            let (h, g) = &path.pairs()[steps];
            (h.to_index(), g.to_index())
        } else {
            (0, 0)
        };
        h_counts[h_idx] += 1;
        g_counts[g_idx] += 1;
    }
    let tv = |counts: &[u64], law: &[f64]| -> f64 {
        0.5 * counts
            .iter()
            .zip(law)
            .map(|(&c, &q)| (c as f64 / reps as f64 - q).abs())
            .sum::<f64>()
    };
    assert!(tv(&h_counts, &dist_law) < 0.01);
    assert!(tv(&g_counts, &bench_law) < 0.01);
}

#[test]
fn social_cost_gap_on_er_network_is_decisively_positive() {
    let contact = largest_connected_component(&gen_erdos_renyi(200, 0.05, 50).unwrap());
    let social = rewire_social(&contact, 0.3, 51).unwrap();
    let nets = Networks::new(contact, social).unwrap();
    let p = params(0.2, 0.2, 0.5);
    let mut rng = rng_from_seed(52);
    let est = expectation_gap(
        &PathMetric::social_cost(50),
        &InitSpec::OneRandomInfected,
        &nets,
        &p,
        50,
        10_000,
        &mut rng,
    )
    .unwrap();
    assert!(est.gap > 0.0);
    assert!(
        est.gap > 3.0 * est.stderr,
        "gap {} not beyond 3 x stderr {}",
        est.gap,
        est.stderr
    );
    assert!(est.tau_sum_agreement);
    assert_eq!(est.censored_excluded, 0);
}

#[test]
fn coupled_costs_are_ordered_pathwise() {
    let contact = largest_connected_component(&gen_erdos_renyi(30, 0.2, 53).unwrap());
    let nets = Networks::shared(contact);
    let p = params(0.3, 0.3, 0.7);
    let mut rng = rng_from_seed(54);
    for _ in 0..500 {
        let path = simulate_coupled(
            &EpidemicState::all_infected(nets.n()),
            &nets,
            &p,
            40,
            &mut rng,
        )
        .unwrap();
        let h = path.h_path();
        let g = path.g_path();
        assert!(social_cost(&h, 40).unwrap() <= social_cost(&g, 40).unwrap());
        if let (Some(th), Some(tg)) = (path.absorbed_at_h(), path.absorbed_at_g()) {
            assert!(th <= tg);
        }
    }
}
