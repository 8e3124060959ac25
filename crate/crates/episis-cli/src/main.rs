//! Batch driver for networked SIS experiments with awareness-driven
//! social distancing. Subcommands: `generate`, `simulate`, `fig3`,
//! `fig4`, `couple`. Every run is a pure function of its resolved
//! configuration, echoed into each output file.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{
    parse_cells, CellSpec, CoupleConfig, Fig3Config, Fig4Config, GenerateConfig, GraphSpec,
    InitStateSpec, MetricSpec, ParamSpec, ProbeSpec, RunConfig, SimulateConfig, SocialSpec,
    DEFAULT_GRAPH_SEED, DEFAULT_MASTER_SEED, DEFAULT_REWIRE_SEED,
};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "episis",
    version,
    about = "Networked SIS epidemics with awareness-driven social distancing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate contact/social networks and print summary statistics
    Generate(GenerateArgs),
    /// Run replicated single-chain simulations to path CSVs
    Simulate(SimulateArgs),
    /// Sweep endemic levels over the healing-to-transmission ratio
    Fig3(Fig3Args),
    /// Mean epidemic-spread curves across awareness configurations
    Fig4(Fig4Args),
    /// Verify the monotone coupling and estimate expectation gaps
    Couple(CoupleArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON run-config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for all derived replica streams
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Graph family: er, geometric, or pa
    #[arg(long)]
    family: Option<String>,
    /// Node count
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (er)
    #[arg(long)]
    p: Option<f64>,
    /// Connection radius on the unit torus (geometric)
    #[arg(long)]
    r: Option<f64>,
    /// Links per arriving node (pa)
    #[arg(long)]
    m: Option<usize>,
    /// Generator seed
    #[arg(long)]
    graph_seed: Option<u64>,
    /// Read the contact graph from an edge-list file instead
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

impl GraphArgs {
    /// Resolves the contact-graph spec from flags, falling back to the
    /// config file's spec when no graph flag was given.
    fn resolve(&self, from_config: Option<&GraphSpec>) -> Result<GraphSpec, CliError> {
        if let Some(path) = &self.graph_file {
            return Ok(GraphSpec::File {
                path: path.to_string_lossy().into_owned(),
            });
        }
        if let Some(family) = &self.family {
            let n = self.n.unwrap_or(1000);
            let seed = self.graph_seed.unwrap_or(DEFAULT_GRAPH_SEED);
            return Ok(match family.as_str() {
                "er" => GraphSpec::Er {
                    n,
                    p: self.p.unwrap_or(0.01),
                    seed,
                },
                "geometric" => GraphSpec::Geometric {
                    n,
                    r: self.r.unwrap_or(0.0564),
                    seed,
                },
                "pa" => GraphSpec::Pa {
                    n,
                    m: self.m.unwrap_or(5),
                    seed,
                },
                other => {
                    return Err(CliError::validation(format!(
                        "bad --family `{other}`: expected er, geometric, or pa"
                    )))
                }
            });
        }
        from_config
            .cloned()
            .ok_or_else(|| CliError::validation("no graph specified: pass --family/--graph-file or --config"))
    }
}

#[derive(Args, Clone)]
struct SocialArgs {
    /// Fraction of contact edges rewired into the social network
    #[arg(long)]
    rewire_p: Option<f64>,
    /// Rewiring seed
    #[arg(long)]
    rewire_seed: Option<u64>,
    /// Read the social graph from an edge-list file instead
    #[arg(long)]
    social_file: Option<PathBuf>,
}

impl SocialArgs {
    fn resolve(&self, from_config: Option<&SocialSpec>) -> Option<SocialSpec> {
        if let Some(path) = &self.social_file {
            return Some(SocialSpec::File {
                path: path.to_string_lossy().into_owned(),
            });
        }
        if let Some(p) = self.rewire_p {
            return Some(SocialSpec::Rewire {
                rewire_p: p,
                seed: self.rewire_seed.unwrap_or(DEFAULT_REWIRE_SEED),
            });
        }
        from_config.cloned()
    }
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Transmission probability
    #[arg(long)]
    beta: Option<f64>,
    /// Healing probability
    #[arg(long)]
    delta: Option<f64>,
    /// Trust weight on social-contact information
    #[arg(long)]
    alpha: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self, from_config: Option<ParamSpec>) -> ParamSpec {
        let base = from_config.unwrap_or(ParamSpec {
            beta: 0.2,
            delta: 0.2,
            alpha: 0.5,
        });
        ParamSpec {
            beta: self.beta.unwrap_or(base.beta),
            delta: self.delta.unwrap_or(base.delta),
            alpha: self.alpha.unwrap_or(base.alpha),
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    social: SocialArgs,
    /// Keep the generated graph as-is instead of reducing to the largest
    /// connected component
    #[arg(long)]
    no_reduce_lcc: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    social: SocialArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Chain to simulate: benchmark or distancing
    #[arg(long)]
    chain: Option<String>,
    /// Initial state: one-random, all-infected, or hex:<digits>
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Args)]
struct Fig3Args {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    social: SocialArgs,
    /// Trust weight used by the distancing map
    #[arg(long)]
    alpha: Option<f64>,
    /// Ratio grid points
    #[arg(long)]
    grid_points: Option<usize>,
    /// Grid extends to this multiple of the spectral radius
    #[arg(long)]
    grid_max_factor: Option<f64>,
    /// Length of each endemic-level sample run
    #[arg(long)]
    horizon: Option<usize>,
    /// Sample runs averaged per stochastic estimate
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Args)]
struct Fig4Args {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    graph: GraphArgs,
    /// Transmission probability
    #[arg(long)]
    beta: Option<f64>,
    /// Healing probability
    #[arg(long)]
    delta: Option<f64>,
    /// Awareness cells as alpha:rewire_p pairs, e.g. 1:0,1:0.9,0.5:0,0:0
    #[arg(long)]
    cells: Option<String>,
    /// Rewiring seed shared by all cells
    #[arg(long)]
    rewire_seed: Option<u64>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
}

#[derive(Args)]
struct CoupleArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    social: SocialArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Initial state: one-random, all-infected, or hex:<digits>
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    /// Coupled replicas per estimate
    #[arg(long)]
    replicas: Option<usize>,
    /// Gap metrics, e.g. absorption,social:50,spread:50
    #[arg(long)]
    metrics: Option<String>,
    /// Upper-set probes, e.g. absorption>10,social:50>25
    #[arg(long)]
    probes: Option<String>,
    /// Coupled trajectories dumped to the trace CSV
    #[arg(long)]
    trace_replicas: Option<usize>,
}

fn load_config(common: &CommonArgs) -> Result<Option<RunConfig>, CliError> {
    common
        .config
        .as_deref()
        .map(RunConfig::from_file)
        .transpose()
}

fn out_dir(common: &CommonArgs) -> Result<PathBuf, CliError> {
    common
        .out
        .clone()
        .ok_or_else(|| CliError::validation("missing --out directory"))
}

fn wrong_kind(expected: &str) -> CliError {
    CliError::validation(format!(
        "config file is for a different command; expected `{expected}`"
    ))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate(args) => {
            let file = match load_config(&args.common)? {
                Some(RunConfig::Generate(c)) => Some(c),
                Some(_) => return Err(wrong_kind("generate")),
                None => None,
            };
            let config = GenerateConfig {
                graph: args.graph.resolve(file.as_ref().map(|c| &c.graph))?,
                social: args
                    .social
                    .resolve(file.as_ref().and_then(|c| c.social.as_ref())),
                reduce_lcc: if args.no_reduce_lcc {
                    false
                } else {
                    file.as_ref().map_or(true, |c| c.reduce_lcc)
                },
            };
            commands::generate::run(&config, &out_dir(&args.common)?)
        }
        Command::Simulate(args) => {
            let file = match load_config(&args.common)? {
                Some(RunConfig::Simulate(c)) => Some(c),
                Some(_) => return Err(wrong_kind("simulate")),
                None => None,
            };
            let init = match &args.init {
                Some(s) => InitStateSpec::parse_flag(s)?,
                None => file
                    .as_ref()
                    .map(|c| c.init.clone())
                    .unwrap_or(InitStateSpec::OneRandom),
            };
            let config = SimulateConfig {
                graph: args.graph.resolve(file.as_ref().map(|c| &c.graph))?,
                social: args
                    .social
                    .resolve(file.as_ref().and_then(|c| c.social.as_ref())),
                params: args.params.resolve(file.as_ref().map(|c| c.params)),
                chain: args
                    .chain
                    .clone()
                    .or_else(|| file.as_ref().map(|c| c.chain.clone()))
                    .unwrap_or_else(|| "distancing".into()),
                init,
                horizon: args
                    .horizon
                    .or(file.as_ref().map(|c| c.horizon))
                    .unwrap_or(200),
                replicas: args
                    .replicas
                    .or(file.as_ref().map(|c| c.replicas))
                    .unwrap_or(1),
                master_seed: args
                    .common
                    .seed
                    .or(file.as_ref().map(|c| c.master_seed))
                    .unwrap_or(DEFAULT_MASTER_SEED),
            };
            commands::simulate::run(&config, &out_dir(&args.common)?)
        }
        Command::Fig3(args) => {
            let file = match load_config(&args.common)? {
                Some(RunConfig::Fig3(c)) => Some(c),
                Some(_) => return Err(wrong_kind("fig3")),
                None => None,
            };
            let config = Fig3Config {
                graph: args.graph.resolve(file.as_ref().map(|c| &c.graph))?,
                social: args
                    .social
                    .resolve(file.as_ref().and_then(|c| c.social.as_ref())),
                alpha: args
                    .alpha
                    .or(file.as_ref().map(|c| c.alpha))
                    .unwrap_or(0.5),
                grid_points: args
                    .grid_points
                    .or(file.as_ref().map(|c| c.grid_points))
                    .unwrap_or(15),
                grid_max_factor: args
                    .grid_max_factor
                    .or(file.as_ref().map(|c| c.grid_max_factor))
                    .unwrap_or(1.15),
                horizon: args
                    .horizon
                    .or(file.as_ref().map(|c| c.horizon))
                    .unwrap_or(200),
                replicas: args
                    .replicas
                    .or(file.as_ref().map(|c| c.replicas))
                    .unwrap_or(1),
                master_seed: args
                    .common
                    .seed
                    .or(file.as_ref().map(|c| c.master_seed))
                    .unwrap_or(DEFAULT_MASTER_SEED),
            };
            commands::fig3::run(&config, &out_dir(&args.common)?)
        }
        Command::Fig4(args) => {
            let file = match load_config(&args.common)? {
                Some(RunConfig::Fig4(c)) => Some(c),
                Some(_) => return Err(wrong_kind("fig4")),
                None => None,
            };
            let cells: Vec<CellSpec> = match &args.cells {
                Some(s) => parse_cells(s)?,
                None => file.as_ref().map(|c| c.cells.clone()).unwrap_or_else(|| {
                    vec![
                        CellSpec {
                            alpha: 1.0,
                            rewire_p: 0.0,
                        },
                        CellSpec {
                            alpha: 1.0,
                            rewire_p: 0.9,
                        },
                        CellSpec {
                            alpha: 0.5,
                            rewire_p: 0.0,
                        },
                        CellSpec {
                            alpha: 0.0,
                            rewire_p: 0.0,
                        },
                    ]
                }),
            };
            let config = Fig4Config {
                graph: args.graph.resolve(file.as_ref().map(|c| &c.graph))?,
                beta: args
                    .beta
                    .or(file.as_ref().map(|c| c.beta))
                    .unwrap_or(0.2),
                delta: args
                    .delta
                    .or(file.as_ref().map(|c| c.delta))
                    .unwrap_or(0.2),
                cells,
                rewire_seed: args
                    .rewire_seed
                    .or(file.as_ref().map(|c| c.rewire_seed))
                    .unwrap_or(DEFAULT_REWIRE_SEED),
                horizon: args
                    .horizon
                    .or(file.as_ref().map(|c| c.horizon))
                    .unwrap_or(100),
                replicas: args
                    .replicas
                    .or(file.as_ref().map(|c| c.replicas))
                    .unwrap_or(100),
                master_seed: args
                    .common
                    .seed
                    .or(file.as_ref().map(|c| c.master_seed))
                    .unwrap_or(DEFAULT_MASTER_SEED),
            };
            commands::fig4::run(&config, &out_dir(&args.common)?)
        }
        Command::Couple(args) => {
            let file = match load_config(&args.common)? {
                Some(RunConfig::Couple(c)) => Some(c),
                Some(_) => return Err(wrong_kind("couple")),
                None => None,
            };
            let horizon = args
                .horizon
                .or(file.as_ref().map(|c| c.horizon))
                .unwrap_or(50);
            let metrics: Vec<MetricSpec> = match &args.metrics {
                Some(s) => s
                    .split(',')
                    .map(MetricSpec::parse_flag)
                    .collect::<Result<_, _>>()?,
                None => file.as_ref().map(|c| c.metrics.clone()).unwrap_or_else(|| {
                    let w = horizon.min(50);
                    vec![
                        MetricSpec::AbsorptionTime,
                        MetricSpec::SocialCost { window: w },
                        MetricSpec::EpidemicSpread { window: w },
                    ]
                }),
            };
            let probes: Vec<ProbeSpec> = match &args.probes {
                Some(s) => s
                    .split(',')
                    .map(ProbeSpec::parse_flag)
                    .collect::<Result<_, _>>()?,
                None => file.as_ref().map(|c| c.probes.clone()).unwrap_or_else(|| {
                    vec![
                        ProbeSpec {
                            metric: MetricSpec::AbsorptionTime,
                            tau: (horizon as u64) / 4,
                        },
                        ProbeSpec {
                            metric: MetricSpec::AbsorptionTime,
                            tau: (horizon as u64) / 2,
                        },
                    ]
                }),
            };
            let init = match &args.init {
                Some(s) => InitStateSpec::parse_flag(s)?,
                None => file
                    .as_ref()
                    .map(|c| c.init.clone())
                    .unwrap_or(InitStateSpec::OneRandom),
            };
            let config = CoupleConfig {
                graph: args.graph.resolve(file.as_ref().map(|c| &c.graph))?,
                social: args
                    .social
                    .resolve(file.as_ref().and_then(|c| c.social.as_ref())),
                params: args.params.resolve(file.as_ref().map(|c| c.params)),
                init,
                horizon,
                replicas: args
                    .replicas
                    .or(file.as_ref().map(|c| c.replicas))
                    .unwrap_or(2000),
                metrics,
                probes,
                trace_replicas: args
                    .trace_replicas
                    .or(file.as_ref().map(|c| c.trace_replicas))
                    .unwrap_or(5),
                master_seed: args
                    .common
                    .seed
                    .or(file.as_ref().map(|c| c.master_seed))
                    .unwrap_or(DEFAULT_MASTER_SEED),
            };
            commands::couple::run(&config, &out_dir(&args.common)?)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
