//! Experiment runner behind the `congest` binary: load or generate a graph,
//! run one of the distributed algorithms on the simulator, verify the output
//! against the sequential oracles, and emit a machine-readable report with
//! bound-conformance verdicts.

pub mod experiment;
pub mod report;
pub mod sweep;

use std::collections::BTreeSet;
use std::path::PathBuf;

use congest_core::engine::Bandwidth;
use congest_core::graph::{Digraph, GeneratorKind};
use congest_core::numeric::SigmaMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    ApspUnweighted,
    BcUnweighted,
    ApspDag,
    BcDag,
    SourceDetection,
    HkSsp,
}

impl Algorithm {
    pub fn parse(name: &str) -> Option<Algorithm> {
        Some(match name {
            "apsp-unweighted" => Algorithm::ApspUnweighted,
            "bc-unweighted" => Algorithm::BcUnweighted,
            "apsp-dag" => Algorithm::ApspDag,
            "bc-dag" => Algorithm::BcDag,
            "source-detection" => Algorithm::SourceDetection,
            "hk-ssp" => Algorithm::HkSsp,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::ApspUnweighted => "apsp-unweighted",
            Algorithm::BcUnweighted => "bc-unweighted",
            Algorithm::ApspDag => "apsp-dag",
            Algorithm::BcDag => "bc-dag",
            Algorithm::SourceDetection => "source-detection",
            Algorithm::HkSsp => "hk-ssp",
        }
    }

    pub fn needs_dag(&self) -> bool {
        matches!(self, Algorithm::ApspDag | Algorithm::BcDag)
    }
}

/// Generator invocation parsed from `kind:n:p[:wmax]`.
#[derive(Clone, Debug)]
pub struct GenSpec {
    pub kind: GeneratorKind,
    pub kind_name: String,
    pub n: usize,
    pub p: f64,
    pub wmax: Option<u64>,
}

impl GenSpec {
    pub fn parse(text: &str) -> Result<GenSpec, String> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() < 3 || parts.len() > 4 {
            return Err(format!("generator spec {text:?} is not kind:n:p[:wmax]"));
        }
        let kind = GeneratorKind::parse(parts[0])
            .ok_or_else(|| format!("unknown generator kind {:?}", parts[0]))?;
        let n = parts[1]
            .parse()
            .map_err(|_| format!("bad vertex count {:?}", parts[1]))?;
        let p = parts[2]
            .parse()
            .map_err(|_| format!("bad edge probability {:?}", parts[2]))?;
        let wmax = match parts.get(3) {
            Some(tok) => Some(
                tok.parse()
                    .map_err(|_| format!("bad maximum weight {tok:?}"))?,
            ),
            None => None,
        };
        Ok(GenSpec {
            kind,
            kind_name: parts[0].to_string(),
            n,
            p,
            wmax,
        })
    }
}

#[derive(Clone, Debug)]
pub enum GraphSource {
    File(PathBuf),
    Generated(GenSpec),
    Fixture(String),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub source: GraphSource,
    pub know_n: bool,
    pub finalizer: bool,
    pub bandwidth: Bandwidth,
    pub sigma_mode: SigmaMode,
    pub verify: bool,
    pub seed: u64,
    /// 1-based vertex ids for the bounded-hop variants.
    pub sources: Vec<u64>,
    pub hop_bound: Option<u64>,
    pub result_bound: Option<usize>,
    /// Include wall-clock time in the report (off by default so that reruns
    /// with identical configs are byte-identical).
    pub timing: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad file contents, or an incompatible algorithm/graph
    /// pairing; exit code 2.
    Usage(String),
    /// Filesystem trouble; exit code 2.
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub fn parse_bandwidth(text: &str) -> Result<Bandwidth, String> {
    if text == "account" {
        return Ok(Bandwidth::Account);
    }
    if let Some(bits) = text.strip_prefix("enforce:") {
        let bits = bits
            .parse()
            .map_err(|_| format!("bad bit budget {bits:?}"))?;
        return Ok(Bandwidth::Enforce { bits });
    }
    Err(format!(
        "bandwidth must be account or enforce:BITS, got {text:?}"
    ))
}

pub fn load_graph(config: &ExperimentConfig) -> Result<Digraph, CliError> {
    match &config.source {
        GraphSource::File(path) => {
            let text = std::fs::read_to_string(path)?;
            congest_core::graph::parse_edge_list(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
        GraphSource::Generated(spec) => {
            congest_core::graph::generate(spec.kind, spec.n, spec.p, spec.wmax, config.seed)
                .map_err(|e| CliError::Usage(e.to_string()))
        }
        GraphSource::Fixture(name) => {
            congest_core::graph::fixture(name).map_err(|e| CliError::Usage(e.to_string()))
        }
    }
}

/// Resolves the 1-based source ids of the bounded-hop variants to internal
/// indices.
pub fn resolve_sources(g: &Digraph, ids: &[u64]) -> Result<BTreeSet<usize>, CliError> {
    let mut set = BTreeSet::new();
    for &id in ids {
        let v = g
            .ids()
            .iter()
            .position(|&x| x == id)
            .ok_or_else(|| CliError::Usage(format!("no vertex with id {id}")))?;
        set.insert(v);
    }
    Ok(set)
}
