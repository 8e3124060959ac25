//! Run configuration documents.
//!
//! Every command resolves its inputs — a JSON config file, overridden by
//! command-line flags, backed by documented defaults — into one of the
//! structs below. The resolved document is serialized back into a `#`
//! header on every output file together with its FNV-1a hash, so a file
//! identifies the exact run that produced it and identical configs yield
//! byte-identical outputs.

use serde::{Deserialize, Serialize};

use episis::dynamics::{EpidemicParams, EpidemicState, Networks};
use episis::graph::{
    gen_erdos_renyi, gen_geometric_torus, gen_preferential_attachment,
    largest_connected_component, rewire_social, Graph,
};
use episis::metrics::PathMetric;

use crate::error::CliError;

pub const DEFAULT_MASTER_SEED: u64 = 42;
pub const DEFAULT_GRAPH_SEED: u64 = 7;
pub const DEFAULT_REWIRE_SEED: u64 = 8;

/// Contact-network source.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphSpec {
    Er { n: usize, p: f64, seed: u64 },
    Geometric { n: usize, r: f64, seed: u64 },
    Pa { n: usize, m: usize, seed: u64 },
    File { path: String },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, CliError> {
        Ok(match self {
            GraphSpec::Er { n, p, seed } => gen_erdos_renyi(*n, *p, *seed)?,
            GraphSpec::Geometric { n, r, seed } => gen_geometric_torus(*n, *r, *seed)?,
            GraphSpec::Pa { n, m, seed } => gen_preferential_attachment(*n, *m, *seed)?,
            GraphSpec::File { path } => Graph::read_edge_list(path)?,
        })
    }
}

/// Social-network source; absent means the contact network doubles as the
/// social network.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SocialSpec {
    Rewire { rewire_p: f64, seed: u64 },
    File { path: String },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ParamSpec {
    pub beta: f64,
    pub delta: f64,
    pub alpha: f64,
}

impl ParamSpec {
    pub fn to_params(self) -> Result<EpidemicParams, CliError> {
        Ok(EpidemicParams::new(self.beta, self.delta, self.alpha)?)
    }
}

/// Initial infection state of a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitStateSpec {
    /// One uniformly random node infected, drawn from the replica stream.
    OneRandom,
    AllInfected,
    /// Explicit state in the documented hex encoding.
    Hex { hex: String },
}

impl InitStateSpec {
    pub fn parse_flag(s: &str) -> Result<Self, CliError> {
        match s {
            "one-random" => Ok(InitStateSpec::OneRandom),
            "all-infected" => Ok(InitStateSpec::AllInfected),
            _ => match s.strip_prefix("hex:") {
                Some(hex) => Ok(InitStateSpec::Hex { hex: hex.into() }),
                None => Err(CliError::validation(format!(
                    "bad --init `{s}`: expected one-random, all-infected, or hex:<digits>"
                ))),
            },
        }
    }

    pub fn draw(&self, n: usize, rng: &mut episis::rng::SimRng) -> Result<EpidemicState, CliError> {
        use rand::Rng;
        Ok(match self {
            InitStateSpec::OneRandom => EpidemicState::single_infected(n, rng.gen_range(0..n)),
            InitStateSpec::AllInfected => EpidemicState::all_infected(n),
            InitStateSpec::Hex { hex } => EpidemicState::from_hex(n, hex)?,
        })
    }
}

/// Integer path metric selector.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    AbsorptionTime,
    SocialCost { window: usize },
    EpidemicSpread { window: usize },
}

impl MetricSpec {
    /// Parses `absorption`, `social:<window>`, or `spread:<window>`.
    pub fn parse_flag(s: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::validation(format!(
                "bad metric `{s}`: expected absorption, social:<window>, or spread:<window>"
            ))
        };
        if s == "absorption" {
            return Ok(MetricSpec::AbsorptionTime);
        }
        let (kind, window) = s.split_once(':').ok_or_else(bad)?;
        let window: usize = window.parse().map_err(|_| bad())?;
        match kind {
            "social" => Ok(MetricSpec::SocialCost { window }),
            "spread" => Ok(MetricSpec::EpidemicSpread { window }),
            _ => Err(bad()),
        }
    }

    pub fn to_metric(&self) -> PathMetric {
        match self {
            MetricSpec::AbsorptionTime => PathMetric::absorption_time(),
            MetricSpec::SocialCost { window } => PathMetric::social_cost(*window),
            MetricSpec::EpidemicSpread { window } => PathMetric::epidemic_spread(*window),
        }
    }

    pub fn window(&self) -> Option<usize> {
        match self {
            MetricSpec::AbsorptionTime => None,
            MetricSpec::SocialCost { window } | MetricSpec::EpidemicSpread { window } => {
                Some(*window)
            }
        }
    }
}

/// An upper-set probe `{ metric > tau }`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProbeSpec {
    pub metric: MetricSpec,
    pub tau: u64,
}

impl ProbeSpec {
    /// Parses `<metric>><tau>`, e.g. `absorption>10` or `social:50>25`.
    pub fn parse_flag(s: &str) -> Result<Self, CliError> {
        let (metric, tau) = s.rsplit_once('>').ok_or_else(|| {
            CliError::validation(format!("bad probe `{s}`: expected <metric>><tau>"))
        })?;
        Ok(ProbeSpec {
            metric: MetricSpec::parse_flag(metric)?,
            tau: tau
                .parse()
                .map_err(|_| CliError::validation(format!("bad probe threshold in `{s}`")))?,
        })
    }
}

/// One awareness configuration of the spread experiment.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CellSpec {
    pub alpha: f64,
    pub rewire_p: f64,
}

/// Parses `alpha:p,alpha:p,...`.
pub fn parse_cells(s: &str) -> Result<Vec<CellSpec>, CliError> {
    s.split(',')
        .map(|cell| {
            let (alpha, p) = cell.split_once(':').ok_or_else(|| {
                CliError::validation(format!("bad cell `{cell}`: expected alpha:rewire_p"))
            })?;
            let parse = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| CliError::validation(format!("bad number in cell `{cell}`")))
            };
            Ok(CellSpec {
                alpha: parse(alpha)?,
                rewire_p: parse(p)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GenerateConfig {
    pub graph: GraphSpec,
    pub social: Option<SocialSpec>,
    /// Reduce the generated contact graph to its largest connected
    /// component before writing.
    pub reduce_lcc: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SimulateConfig {
    pub graph: GraphSpec,
    pub social: Option<SocialSpec>,
    pub params: ParamSpec,
    /// `benchmark` or `distancing`.
    pub chain: String,
    pub init: InitStateSpec,
    pub horizon: usize,
    pub replicas: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Fig3Config {
    pub graph: GraphSpec,
    pub social: Option<SocialSpec>,
    pub alpha: f64,
    /// Number of ratio grid points over `(0, grid_max_factor * lambda]`.
    pub grid_points: usize,
    pub grid_max_factor: f64,
    /// Length of each endemic-level sample run.
    pub horizon: usize,
    /// Sample runs averaged per stochastic estimate.
    pub replicas: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Fig4Config {
    pub graph: GraphSpec,
    pub beta: f64,
    pub delta: f64,
    pub cells: Vec<CellSpec>,
    pub rewire_seed: u64,
    pub horizon: usize,
    pub replicas: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoupleConfig {
    pub graph: GraphSpec,
    pub social: Option<SocialSpec>,
    pub params: ParamSpec,
    pub init: InitStateSpec,
    pub horizon: usize,
    pub replicas: usize,
    pub metrics: Vec<MetricSpec>,
    pub probes: Vec<ProbeSpec>,
    /// Coupled trajectories dumped to the trace CSV.
    pub trace_replicas: usize,
    pub master_seed: u64,
}

/// The single-document run configuration, tagged by command.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Generate(GenerateConfig),
    Simulate(SimulateConfig),
    Fig3(Fig3Config),
    Fig4(Fig4Config),
    Couple(CoupleConfig),
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// The provenance header written at the top of every CSV/JSON artifact.
pub fn config_header(config: &RunConfig) -> String {
    let json = config.to_json();
    format!(
        "# config_hash={:016x}\n# config={json}\n",
        fnv1a64(json.as_bytes())
    )
}

pub fn config_hash_hex(config: &RunConfig) -> String {
    format!("{:016x}", fnv1a64(config.to_json().as_bytes()))
}

/// Materializes the contact and social networks of a run. Generated
/// contact graphs are reduced to their largest connected component
/// (spectral thresholds assume connectivity); file graphs are taken
/// as-is.
pub fn build_networks(
    graph: &GraphSpec,
    social: Option<&SocialSpec>,
) -> Result<Networks, CliError> {
    let raw = graph.build()?;
    let contact = match graph {
        GraphSpec::File { .. } => raw,
        _ => largest_connected_component(&raw),
    };
    let social_graph = match social {
        None => contact.clone(),
        Some(SocialSpec::Rewire { rewire_p, seed }) => {
            if *rewire_p == 0.0 {
                contact.clone()
            } else {
                rewire_social(&contact, *rewire_p, *seed)?
            }
        }
        Some(SocialSpec::File { path }) => Graph::read_edge_list(path)?,
    };
    Ok(Networks::new(contact, social_graph)?)
}

/// Worker-pool size: `EPISIS_THREADS` when set, otherwise the rayon
/// default.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var("EPISIS_THREADS") {
        let threads: usize = value.parse().map_err(|_| {
            CliError::validation(format!("EPISIS_THREADS must be a positive integer, got `{value}`"))
        })?;
        if threads == 0 {
            return Err(CliError::validation(
                "EPISIS_THREADS must be a positive integer, got `0`",
            ));
        }
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| CliError::validation(format!("worker pool: {e}")))
}
