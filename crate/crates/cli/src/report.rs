//! JSON report assembly: config echo, graph statistics, run metrics, bound
//! verdicts, and results with exact values rendered losslessly (path counts
//! as decimal strings, centrality as `p/q` rationals plus a 15-significant-
//! digit decimal).

use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use congest_core::engine::RunMetrics;
use congest_core::graph::{Digraph, GraphClassReport};
use congest_core::numeric::Sigma;
use congest_core::unweighted::{BcOutput, DistributedApsp};

use crate::ExperimentConfig;

/// One bound-conformance row: the formula, its concrete value, the measured
/// value, and the verdict.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub bound: String,
    pub bound_value: u64,
    pub measured: u64,
    pub pass: bool,
}

impl Verdict {
    pub fn check(bound: impl Into<String>, bound_value: u64, measured: u64) -> Verdict {
        Verdict {
            bound: bound.into(),
            bound_value,
            measured,
            pass: measured <= bound_value,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "bound": self.bound,
            "bound_value": self.bound_value,
            "measured": self.measured,
            "pass": self.pass,
        })
    }
}

pub fn config_json(config: &ExperimentConfig) -> Value {
    let source = match &config.source {
        crate::GraphSource::File(path) => json!({"file": path.display().to_string()}),
        crate::GraphSource::Generated(spec) => json!({
            "generator": spec.kind_name,
            "n": spec.n,
            "p": spec.p,
            "wmax": spec.wmax,
        }),
        crate::GraphSource::Fixture(name) => json!({"fixture": name}),
    };
    let bandwidth = match config.bandwidth {
        congest_core::engine::Bandwidth::Account => json!("account"),
        congest_core::engine::Bandwidth::Enforce { bits } => json!(format!("enforce:{bits}")),
    };
    json!({
        "algorithm": config.algorithm.name(),
        "graph": source,
        "know_n": config.know_n,
        "finalizer": config.finalizer,
        "bandwidth": bandwidth,
        "sigma": match config.sigma_mode {
            congest_core::numeric::SigmaMode::Exact => "exact",
            congest_core::numeric::SigmaMode::Float => "float",
        },
        "verify": config.verify,
        "seed": config.seed,
    })
}

pub fn graph_json(g: &Digraph, report: &GraphClassReport) -> Value {
    json!({
        "n": g.n(),
        "m": g.m(),
        "weighted": g.is_weighted(),
        "strongly_connected": report.strongly_connected,
        "weakly_connected": report.weakly_connected,
        "is_dag": report.is_dag,
        "directed_diameter": finite_or_inf(report.directed_diameter),
        "undirected_diameter": finite_or_inf(report.undirected_diameter),
        "longest_path": report.longest_path,
    })
}

pub fn finite_or_inf(x: Option<u64>) -> Value {
    match x {
        Some(v) => json!(v),
        None => json!("inf"),
    }
}

pub fn metrics_json(metrics: &RunMetrics) -> Value {
    json!({
        "rounds_elapsed": metrics.rounds_elapsed,
        "total_messages": metrics.total_messages,
        "total_payloads": metrics.total_payloads,
        "max_bundle_bits": metrics.max_bundle_bits,
        "max_triple_sends_per_pair": metrics.max_triple_sends_per_pair(),
        "violations": metrics.violations.iter().map(|v| json!({
            "round": v.round,
            "from": v.from + 1,
            "to": v.to + 1,
            "bits": v.bits,
            "payload_count": v.payload_count,
        })).collect::<Vec<_>>(),
    })
}

/// Distance matrix with `"inf"` for unreachable pairs, path counts as decimal
/// strings, predecessor sets as 1-based id lists.
pub fn apsp_json(out: &DistributedApsp) -> Value {
    let n = out.dist.len();
    let dist: Vec<Vec<Value>> = (0..n)
        .map(|s| (0..n).map(|v| finite_or_inf(out.dist[s][v])).collect())
        .collect();
    let sigma: Vec<Vec<Value>> = (0..n)
        .map(|s| {
            (0..n)
                .map(|v| match &out.sigma[s][v] {
                    Sigma::Exact(x) => json!(x.to_string()),
                    Sigma::Float(x) => json!(format!("{x}")),
                })
                .collect()
        })
        .collect();
    let preds: Vec<Vec<Value>> = (0..n)
        .map(|s| {
            (0..n)
                .map(|v| {
                    json!(out.preds[s][v]
                        .iter()
                        .map(|&u| u + 1)
                        .collect::<Vec<usize>>())
                })
                .collect()
        })
        .collect();
    json!({"distances": dist, "sigma": sigma, "predecessors": preds})
}

/// Centrality as exact `p/q` strings with a 15-significant-digit decimal, or
/// plain decimals in float mode.
pub fn bc_json(bc: &BcOutput) -> Value {
    match bc {
        BcOutput::Exact(values) => Value::Array(
            values
                .iter()
                .map(|q| {
                    json!({
                        "exact": format!("{}/{}", q.numer(), q.denom()),
                        "decimal": format!("{:.14e}", q.to_f64().unwrap_or(f64::NAN)),
                    })
                })
                .collect(),
        ),
        BcOutput::Float(values) => Value::Array(
            values
                .iter()
                .map(|x| json!({"decimal": format!("{:.14e}", x)}))
                .collect(),
        ),
    }
}

pub struct ReportParts {
    pub config: Value,
    pub graph: Value,
    pub metrics: Value,
    pub verdicts: Vec<Verdict>,
    pub results: Value,
    pub oracle_match: Option<bool>,
    pub wall_clock_ms: Option<u128>,
}

pub fn assemble(parts: ReportParts) -> Value {
    let mut map = Map::new();
    map.insert("config".into(), parts.config);
    map.insert("graph".into(), parts.graph);
    map.insert("metrics".into(), parts.metrics);
    map.insert(
        "verdicts".into(),
        Value::Array(parts.verdicts.iter().map(Verdict::to_json).collect()),
    );
    map.insert("results".into(), parts.results);
    if let Some(matched) = parts.oracle_match {
        map.insert("oracle_match".into(), json!(matched));
    }
    if let Some(ms) = parts.wall_clock_ms {
        map.insert("wall_clock_ms".into(), json!(ms));
    }
    Value::Object(map)
}
