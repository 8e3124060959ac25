//! `episis fig4`: mean epidemic-spread curves (distinct nodes ever
//! infected by time t) of the distancing chain under different awareness
//! configurations, from one uniformly random initially infected node.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use episis::dynamics::{step, ChainKind, EpidemicParams, EpidemicState, Networks};
use episis::graph::rewire_social;
use episis::rng::{derive_seed, rng_from_seed, SimRng};

use crate::commands::write_artifact;
use crate::config::{Fig4Config, GraphSpec, RunConfig, config_header, thread_pool};
use crate::error::CliError;

/// Cumulative ever-infected counts at `t = 0..=horizon` for one replica.
/// The initial node is the replica stream's first draw.
pub fn spread_curve(
    networks: &Networks,
    params: &EpidemicParams,
    horizon: usize,
    rng: &mut SimRng,
) -> Vec<u64> {
    use rand::Rng;
    let n = networks.n();
    let mut state = EpidemicState::single_infected(n, rng.gen_range(0..n));
    let mut ever = vec![false; n];
    let mut curve = Vec::with_capacity(horizon + 1);
    let mut count = 0u64;
    for i in 0..n {
        if state.bit(i) {
            ever[i] = true;
            count += 1;
        }
    }
    curve.push(count);
    for _ in 0..horizon {
        if !state.is_absorbed() {
            state = step(&state, networks, params, ChainKind::Distancing, rng);
            for i in 0..n {
                if state.bit(i) && !ever[i] {
                    ever[i] = true;
                    count += 1;
                }
            }
        }
        curve.push(count);
    }
    curve
}

pub fn run(config: &Fig4Config, out_dir: &Path) -> Result<(), CliError> {
    if config.cells.is_empty() {
        return Err(CliError::validation("need at least one cell"));
    }
    if config.replicas < 2 {
        return Err(CliError::validation("need at least two replicas"));
    }
    let raw = config.graph.build()?;
    let contact = match config.graph {
        GraphSpec::File { .. } => raw,
        _ => episis::graph::largest_connected_component(&raw),
    };

    let pool = thread_pool()?;
    let mut csv = config_header(&RunConfig::Fig4(config.clone()));
    csv.push_str("alpha,rewire_p,t,mean_spread,stderr,replicas\n");

    for (cell_idx, cell) in config.cells.iter().enumerate() {
        let social = if cell.rewire_p == 0.0 {
            contact.clone()
        } else {
            rewire_social(&contact, cell.rewire_p, config.rewire_seed)?
        };
        let networks = Networks::new(contact.clone(), social)?;
        let params = EpidemicParams::new(config.beta, config.delta, cell.alpha)?;
        let cell_seed = derive_seed(config.master_seed, cell_idx as u64);

        let curves: Vec<Vec<u64>> = pool.install(|| {
            (0..config.replicas)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = rng_from_seed(derive_seed(cell_seed, rep as u64));
                    spread_curve(&networks, &params, config.horizon, &mut rng)
                })
                .collect()
        });

        let r = config.replicas as f64;
        for t in 0..=config.horizon {
            let mean = curves.iter().map(|c| c[t] as f64).sum::<f64>() / r;
            let var = curves
                .iter()
                .map(|c| (c[t] as f64 - mean).powi(2))
                .sum::<f64>()
                / (r - 1.0);
            let stderr = (var / r).sqrt();
            let _ = writeln!(
                csv,
                "{},{},{t},{mean},{stderr},{}",
                cell.alpha, cell.rewire_p, config.replicas
            );
        }
    }
    write_artifact(out_dir, "fig4.csv", &csv)?;
    println!(
        "fig4 spread curves: {} cell(s), {} replicas, horizon {}",
        config.cells.len(),
        config.replicas,
        config.horizon
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use episis::dynamics::simulate;
    use episis::metrics::epidemic_spread;
    use episis::graph::Graph;

    #[test]
    fn spread_curve_matches_metric_on_replayed_path() {
        let contact = Graph::cycle(8).unwrap();
        let networks = Networks::shared(contact);
        let params = EpidemicParams::new(0.5, 0.3, 0.5).unwrap();
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let curve = spread_curve(&networks, &params, 15, &mut rng);

            // replay the identical stream through the generic simulator
            let mut rng = rng_from_seed(seed);
            use rand::Rng;
            let init = EpidemicState::single_infected(8, rng.gen_range(0..8));
            let path = simulate(
                &init,
                &networks,
                &params,
                ChainKind::Distancing,
                15,
                &mut rng,
            );
            for t in 0..=15 {
                assert_eq!(curve[t], epidemic_spread(&path, t).unwrap(), "t = {t}");
            }
        }
    }

    #[test]
    fn spread_starts_at_one_and_is_nondecreasing() {
        let contact = Graph::complete(6).unwrap();
        let networks = Networks::shared(contact);
        let params = EpidemicParams::new(0.4, 0.4, 0.3).unwrap();
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let curve = spread_curve(&networks, &params, 25, &mut rng);
            assert_eq!(curve[0], 1);
            assert!(curve.windows(2).all(|w| w[0] <= w[1]));
            assert!(*curve.last().unwrap() <= 6);
        }
    }
}
