//! `episis simulate`: replicated single-chain runs written as path CSVs
//! with columns `t, infected_count, state_hex`.

use std::fmt::Write as _;
use std::path::Path;

use episis::dynamics::{simulate, ChainKind};
use episis::rng::{derive_seed, rng_from_seed};

use crate::commands::write_artifact;
use crate::config::{build_networks, config_header, RunConfig, SimulateConfig};
use crate::error::CliError;

pub fn parse_chain(s: &str) -> Result<ChainKind, CliError> {
    match s {
        "benchmark" => Ok(ChainKind::Benchmark),
        "distancing" => Ok(ChainKind::Distancing),
        _ => Err(CliError::validation(format!(
            "bad chain `{s}`: expected benchmark or distancing"
        ))),
    }
}

pub fn run(config: &SimulateConfig, out_dir: &Path) -> Result<(), CliError> {
    let kind = parse_chain(&config.chain)?;
    let params = config.params.to_params()?;
    let networks = build_networks(&config.graph, config.social.as_ref())?;
    let header = config_header(&RunConfig::Simulate(config.clone()));

    let mut absorbed = 0usize;
    for replica in 0..config.replicas {
        let mut rng = rng_from_seed(derive_seed(config.master_seed, replica as u64));
        let init = config.init.draw(networks.n(), &mut rng)?;
        let path = simulate(&init, &networks, &params, kind, config.horizon, &mut rng);
        absorbed += path.absorbed_at().is_some() as usize;

        let mut csv = header.clone();
        csv.push_str("t,infected_count,state_hex\n");
        for (t, state) in path.states().iter().enumerate() {
            let _ = writeln!(csv, "{t},{},{}", state.infected_count(), state.to_hex());
        }
        write_artifact(out_dir, &format!("path_{replica:04}.csv"), &csv)?;
    }
    println!(
        "{} run(s) of the {} chain, horizon {}: {absorbed} absorbed",
        config.replicas,
        kind.as_str(),
        config.horizon
    );
    Ok(())
}
