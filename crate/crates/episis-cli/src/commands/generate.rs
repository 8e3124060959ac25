//! `episis generate`: write contact (and optionally social) graphs in the
//! edge-list format and print their summary statistics.

use std::fmt::Write as _;
use std::path::Path;

use episis::graph::{
    largest_connected_component, rewire_social, spectral_radius, Graph,
    DEFAULT_SPECTRAL_MAX_ITER, DEFAULT_SPECTRAL_TOL,
};
use serde::Serialize;

use crate::config::{config_hash_hex, GenerateConfig, GraphSpec, RunConfig, SocialSpec};
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct GraphSummary {
    pub n: usize,
    pub edges: usize,
    pub mean_degree: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Serialize)]
struct Summary {
    config_hash: String,
    contact: GraphSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    social: Option<GraphSummary>,
}

pub fn summarize(g: &Graph) -> Result<GraphSummary, CliError> {
    Ok(GraphSummary {
        n: g.n(),
        edges: g.edge_count(),
        mean_degree: g.mean_degree(),
        lambda_max: spectral_radius(g, DEFAULT_SPECTRAL_TOL, DEFAULT_SPECTRAL_MAX_ITER)?,
    })
}

pub fn run(config: &GenerateConfig, out_dir: &Path) -> Result<(), CliError> {
    let raw = config.graph.build()?;
    let contact = if config.reduce_lcc && !matches!(config.graph, GraphSpec::File { .. }) {
        largest_connected_component(&raw)
    } else {
        raw
    };

    std::fs::create_dir_all(out_dir)?;
    contact.write_edge_list(out_dir.join("contact.edges"))?;

    let social = match &config.social {
        None => None,
        Some(SocialSpec::Rewire { rewire_p, seed }) => Some(if *rewire_p == 0.0 {
            contact.clone()
        } else {
            rewire_social(&contact, *rewire_p, *seed)?
        }),
        Some(SocialSpec::File { path }) => Some(Graph::read_edge_list(path)?),
    };
    if let Some(social) = &social {
        social.write_edge_list(out_dir.join("social.edges"))?;
    }

    let summary = Summary {
        config_hash: config_hash_hex(&RunConfig::Generate(config.clone())),
        contact: summarize(&contact)?,
        social: social.as_ref().map(|g| summarize(g)).transpose()?,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(out_dir.join("summary.json"), format!("{json}\n"))?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "contact: n={} edges={} mean_degree={} lambda_max={}",
        summary.contact.n,
        summary.contact.edges,
        summary.contact.mean_degree,
        summary.contact.lambda_max
    );
    if let Some(social) = &summary.social {
        let _ = writeln!(
            text,
            "social:  n={} edges={} mean_degree={} lambda_max={}",
            social.n, social.edges, social.mean_degree, social.lambda_max
        );
    }
    print!("{text}");
    Ok(())
}
