//! `episis couple`: exact marginal verification of the coupling at small
//! node counts, expectation-gap estimates for registered metrics, and
//! upper-set dominance probes, reported as JSON plus a trace CSV of
//! coupled trajectories.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use episis::coupling::{
    dominance_upper_set_probe, expectation_gap, simulate_coupled,
    verify_coupling_marginals_exact, InitSpec, UpperSetIndicator, MAX_VERIFY_NODES,
};
use episis::rng::{derive_seed, rng_from_seed};

use crate::commands::write_artifact;
use crate::config::{build_networks, config_hash_hex, config_header, CoupleConfig, InitStateSpec, RunConfig};
use crate::error::CliError;

/// Exact-verification deviations above this bound fail the command.
pub const VERIFY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Serialize)]
struct VerificationReport {
    n: usize,
    ordered_pairs: usize,
    max_abs_deviation: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct GapReport {
    metric: String,
    gap: f64,
    stderr: f64,
    replicas: usize,
    censored_excluded: usize,
    tau_sum_agreement: bool,
}

#[derive(Debug, Serialize)]
struct ProbeReport {
    indicator: String,
    mu_prob: f64,
    nu_prob: f64,
    difference: f64,
    replicas: usize,
}

#[derive(Debug, Serialize)]
struct CoupleReport {
    config_hash: String,
    marginal_verification: Option<VerificationReport>,
    gaps: Vec<GapReport>,
    probes: Vec<ProbeReport>,
}

fn to_init_spec(init: &InitStateSpec, n: usize) -> Result<InitSpec, CliError> {
    Ok(match init {
        InitStateSpec::OneRandom => InitSpec::OneRandomInfected,
        InitStateSpec::AllInfected => {
            InitSpec::Fixed(episis::dynamics::EpidemicState::all_infected(n))
        }
        InitStateSpec::Hex { hex } => {
            InitSpec::Fixed(episis::dynamics::EpidemicState::from_hex(n, hex)?)
        }
    })
}

pub fn run(config: &CoupleConfig, out_dir: &Path) -> Result<(), CliError> {
    let networks = build_networks(&config.graph, config.social.as_ref())?;
    let params = config.params.to_params()?;
    let init = to_init_spec(&config.init, networks.n())?;

    let marginal_verification = if networks.n() <= MAX_VERIFY_NODES {
        let report = verify_coupling_marginals_exact(&networks, &params)?;
        Some(VerificationReport {
            n: report.n,
            ordered_pairs: report.ordered_pairs,
            max_abs_deviation: report.max_abs_deviation,
            tolerance: VERIFY_TOLERANCE,
            passed: report.max_abs_deviation <= VERIFY_TOLERANCE,
        })
    } else {
        None
    };

    let mut gaps = Vec::with_capacity(config.metrics.len());
    for (idx, spec) in config.metrics.iter().enumerate() {
        if let Some(window) = spec.window() {
            if window > config.horizon {
                return Err(CliError::validation(format!(
                    "metric window {window} exceeds horizon {}",
                    config.horizon
                )));
            }
        }
        let mut rng = rng_from_seed(derive_seed(config.master_seed, idx as u64));
        let est = expectation_gap(
            &spec.to_metric(),
            &init,
            &networks,
            &params,
            config.horizon,
            config.replicas,
            &mut rng,
        )?;
        gaps.push(GapReport {
            metric: est.metric,
            gap: est.gap,
            stderr: est.stderr,
            replicas: est.replicas_used,
            censored_excluded: est.censored_excluded,
            tau_sum_agreement: est.tau_sum_agreement,
        });
    }

    let mut probes = Vec::with_capacity(config.probes.len());
    for (idx, spec) in config.probes.iter().enumerate() {
        if spec.metric.window().is_some_and(|w| w > config.horizon)
            || (spec.metric.window().is_none() && spec.tau > config.horizon as u64)
        {
            return Err(CliError::validation(format!(
                "probe {} exceeds horizon {}",
                idx, config.horizon
            )));
        }
        let indicator = UpperSetIndicator::metric_exceeds(spec.metric.to_metric(), spec.tau)?;
        let mut rng = rng_from_seed(derive_seed(config.master_seed, 0x1000 + idx as u64));
        let probe = dominance_upper_set_probe(
            &indicator,
            &init,
            &networks,
            &params,
            config.horizon,
            config.replicas,
            &mut rng,
        )?;
        probes.push(ProbeReport {
            indicator: probe.indicator,
            mu_prob: probe.mu_prob,
            nu_prob: probe.nu_prob,
            difference: probe.difference,
            replicas: probe.replicas,
        });
    }

    // trace CSV of a few coupled trajectories
    let mut trace = config_header(&RunConfig::Couple(config.clone()));
    trace.push_str("replica,t,h_infected,g_infected,order_ok\n");
    for replica in 0..config.trace_replicas {
        let mut rng = rng_from_seed(derive_seed(config.master_seed, 0x2000 + replica as u64));
        let start = init.draw(networks.n(), &mut rng);
        let coupled = simulate_coupled(&start, &networks, &params, config.horizon, &mut rng)?;
        for (t, (h, g)) in coupled.pairs().iter().enumerate() {
            let _ = writeln!(
                trace,
                "{replica},{t},{},{},{}",
                h.infected_count(),
                g.infected_count(),
                h.leq(g)
            );
        }
    }
    write_artifact(out_dir, "coupled_runs.csv", &trace)?;

    let report = CoupleReport {
        config_hash: config_hash_hex(&RunConfig::Couple(config.clone())),
        marginal_verification,
        gaps,
        probes,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_artifact(out_dir, "couple_report.json", &format!("{json}\n"))?;

    if let Some(v) = &report.marginal_verification {
        println!(
            "exact marginal verification: n={} pairs={} max deviation={}",
            v.n, v.ordered_pairs, v.max_abs_deviation
        );
        if !v.passed {
            return Err(CliError::Verification(format!(
                "coupling marginal deviation {} exceeds {}",
                v.max_abs_deviation, v.tolerance
            )));
        }
    } else {
        println!(
            "exact marginal verification skipped: n={} exceeds {MAX_VERIFY_NODES}",
            networks.n()
        );
    }
    for gap in &report.gaps {
        println!(
            "gap[{}] = {} (stderr {}, replicas {}, censored {})",
            gap.metric, gap.gap, gap.stderr, gap.replicas, gap.censored_excluded
        );
    }
    for probe in &report.probes {
        println!(
            "probe[{}]: mu={} nu={} difference={}",
            probe.indicator, probe.mu_prob, probe.nu_prob, probe.difference
        );
    }
    Ok(())
}
