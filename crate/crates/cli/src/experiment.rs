//! One experiment end to end: graph, run, verdicts, verification, report.
//!
//! Bound verdicts always use graph parameters (diameter, longest path) from
//! the sequential oracles, never from the distributed run, so a distributed
//! bug cannot mask a bound violation.

use std::time::Instant;

use num_traits::ToPrimitive;
use serde_json::{json, Value};

use congest_core::dag::{run_dag_apsp, run_dag_bc, DagConfig};
use congest_core::graph::{classify, Digraph, GraphClassReport};
use congest_core::numeric::{Sigma, SigmaMode};
use congest_core::oracle;
use congest_core::unweighted::{
    hk_ssp, run_bc, run_directed_apsp, source_detection, BcOutput, DetectionArtifacts,
    DistributedApsp, DriverError, UnweightedConfig,
};

use crate::report::{self, ReportParts, Verdict};
use crate::{Algorithm, CliError, ExperimentConfig};

pub struct Outcome {
    pub report: Value,
    /// False when verification or any verdict failed.
    pub all_pass: bool,
    /// True when an enforce-mode violation aborted the run; the violation is
    /// recorded in the report's metrics.
    pub aborted: bool,
}

/// Catches an enforce-mode abort so it lands in the report instead of being
/// treated as a usage error.
fn catch_bandwidth<T>(
    result: Result<T, DriverError>,
) -> Result<Result<T, congest_core::engine::RunMetrics>, CliError> {
    use congest_core::engine::EngineError;
    match result {
        Ok(value) => Ok(Ok(value)),
        Err(DriverError::Engine(EngineError::Bandwidth { metrics, .. })) => Ok(Err(metrics)),
        Err(DriverError::Engine(other)) => Err(CliError::Usage(format!("engine: {other}"))),
        Err(other) => Err(CliError::Usage(other.to_string())),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let g = crate::load_graph(config)?;
    let class = classify(&g);
    if config.algorithm.needs_dag() && !class.is_dag {
        return Err(CliError::Usage(format!(
            "{} requires a dag input",
            config.algorithm.name()
        )));
    }
    if matches!(
        config.algorithm,
        Algorithm::ApspUnweighted | Algorithm::BcUnweighted
    ) && g.is_weighted()
    {
        return Err(CliError::Usage(format!(
            "{} requires an unweighted input",
            config.algorithm.name()
        )));
    }

    let unweighted_config = UnweightedConfig {
        know_n: config.know_n,
        finalizer: config.finalizer,
        sigma_mode: config.sigma_mode,
        bandwidth: config.bandwidth,
        engine: Default::default(),
    };
    let dag_config = DagConfig {
        know_n: config.know_n,
        sigma_mode: config.sigma_mode,
        bandwidth: config.bandwidth,
        engine: Default::default(),
    };

    let map_driver = |e: DriverError| match e {
        DriverError::Engine(engine) => CliError::Usage(format!("engine: {engine}")),
        other => CliError::Usage(other.to_string()),
    };

    let mut aborted = false;
    let (metrics, verdicts, results, oracle_match) = match config.algorithm {
        Algorithm::ApspUnweighted => {
            match catch_bandwidth(run_directed_apsp(&g, &unweighted_config))? {
                Ok(art) => {
                    let mut verdicts = unweighted_verdicts(&g, &class, config, &art.metrics, 1);
                    verdicts.push(Verdict::check(
                        "per-(node,source) triple sends <= 1",
                        1,
                        art.metrics.max_triple_sends_per_pair(),
                    ));
                    let oracle_match = config
                        .verify
                        .then(|| apsp_matches(&g, &art.output, config.sigma_mode));
                    (
                        art.metrics.clone(),
                        verdicts,
                        report::apsp_json(&art.output),
                        oracle_match,
                    )
                }
                Err(metrics) => {
                    aborted = true;
                    (metrics, Vec::new(), Value::Null, None)
                }
            }
        }
        Algorithm::BcUnweighted => match catch_bandwidth(run_bc(&g, &unweighted_config))? {
            Ok(art) => {
                let mut verdicts = unweighted_verdicts(&g, &class, config, &art.metrics, 2);
                verdicts.push(Verdict::check(
                    "per-(node,source) triple sends <= 1",
                    1,
                    art.metrics.max_triple_sends_per_pair(),
                ));
                let oracle_match = config.verify.then(|| bc_matches(&g, &art.bc));
                (
                    art.metrics.clone(),
                    verdicts,
                    report::bc_json(&art.bc),
                    oracle_match,
                )
            }
            Err(metrics) => {
                aborted = true;
                (metrics, Vec::new(), Value::Null, None)
            }
        },
        Algorithm::ApspDag => match catch_bandwidth(run_dag_apsp(&g, &dag_config))? {
            Ok(art) => {
                let verdicts = dag_verdicts(&g, &class, config, &art.metrics, 1);
                let oracle_match = config
                    .verify
                    .then(|| apsp_matches(&g, &art.output, config.sigma_mode));
                (
                    art.metrics.clone(),
                    verdicts,
                    report::apsp_json(&art.output),
                    oracle_match,
                )
            }
            Err(metrics) => {
                aborted = true;
                (metrics, Vec::new(), Value::Null, None)
            }
        },
        Algorithm::BcDag => match catch_bandwidth(run_dag_bc(&g, &dag_config))? {
            Ok(art) => {
                let verdicts = dag_verdicts(&g, &class, config, &art.metrics, 2);
                let oracle_match = config.verify.then(|| bc_matches(&g, &art.bc));
                (
                    art.metrics.clone(),
                    verdicts,
                    report::bc_json(&art.bc),
                    oracle_match,
                )
            }
            Err(metrics) => {
                aborted = true;
                (metrics, Vec::new(), Value::Null, None)
            }
        },
        Algorithm::SourceDetection | Algorithm::HkSsp => {
            let sources = crate::resolve_sources(&g, &config.sources)?;
            if sources.is_empty() {
                return Err(CliError::Usage(
                    "source-detection and hk-ssp need --sources".into(),
                ));
            }
            let h = config
                .hop_bound
                .ok_or_else(|| CliError::Usage("--hop-bound is required".into()))?;
            let source_list: Vec<usize> = sources.iter().copied().collect();
            let (art, verdict, expected): (DetectionArtifacts, Verdict, Vec<Vec<(u64, usize)>>) =
                if config.algorithm == Algorithm::SourceDetection {
                    let r = config
                        .result_bound
                        .ok_or_else(|| CliError::Usage("--result-bound is required".into()))?;
                    let art = source_detection(&g, &sources, h, r, &unweighted_config)
                        .map_err(map_driver)?;
                    let verdict =
                        Verdict::check("rounds <= r+h", r as u64 + h, art.metrics.rounds_elapsed);
                    let expected = oracle::source_detection_oracle(&g, &source_list, h, r);
                    (art, verdict, expected)
                } else {
                    let art = hk_ssp(&g, &sources, h, &unweighted_config).map_err(map_driver)?;
                    let verdict = Verdict::check(
                        "rounds <= k+h",
                        sources.len() as u64 + h,
                        art.metrics.rounds_elapsed,
                    );
                    let mut expected: Vec<Vec<(u64, usize)>> =
                        oracle::hk_ssp_oracle(&g, &source_list, h)
                            .into_iter()
                            .map(|m| m.into_iter().map(|(s, d)| (d, s)).collect::<Vec<_>>())
                            .collect();
                    for row in &mut expected {
                        row.sort_unstable();
                    }
                    (art, verdict, expected)
                };
            let oracle_match = config.verify.then(|| {
                let mut got = art.lists.clone();
                for row in &mut got {
                    row.sort_unstable();
                }
                let mut want = expected.clone();
                for row in &mut want {
                    row.sort_unstable();
                }
                got == want
            });
            let results = json!(art
                .lists
                .iter()
                .map(|row| row
                    .iter()
                    .map(|&(d, s)| json!({"distance": d, "source": s + 1}))
                    .collect::<Vec<_>>())
                .collect::<Vec<_>>());
            (art.metrics.clone(), vec![verdict], results, oracle_match)
        }
    };

    let all_pass = verdicts.iter().all(|v| v.pass) && oracle_match != Some(false) && !aborted;
    let report = report::assemble(ReportParts {
        config: report::config_json(config),
        graph: report::graph_json(&g, &class),
        metrics: report::metrics_json(&metrics),
        verdicts,
        results,
        oracle_match,
        wall_clock_ms: config.timing.then(|| started.elapsed().as_millis()),
    });
    Ok(Outcome {
        report,
        all_pass,
        aborted,
    })
}

/// Verdict rows for the unweighted algorithms; `factor` is 1 for APSP and 2
/// for BC (the BC phase doubles rounds and messages).
fn unweighted_verdicts(
    g: &Digraph,
    class: &GraphClassReport,
    config: &ExperimentConfig,
    metrics: &congest_core::engine::RunMetrics,
    factor: u64,
) -> Vec<Verdict> {
    let (n, m) = (g.n() as u64, g.m() as u64);
    let mut verdicts = Vec::new();
    let mn = if factor == 2 { "2mn" } else { "mn" };
    if config.know_n && !config.finalizer {
        verdicts.push(Verdict::check(
            format!("rounds <= {}n (known n)", 2 * factor),
            2 * factor * n,
            metrics.rounds_elapsed,
        ));
        verdicts.push(Verdict::check(
            format!("messages <= {mn} (known n)"),
            factor * m * n,
            metrics.total_messages,
        ));
    }
    if !config.know_n && config.finalizer {
        if let Some(d) = class.directed_diameter {
            let label = if factor == 2 {
                "rounds <= 2(n+5D) (unknown n, finalizer)"
            } else {
                "rounds <= n+5D (unknown n, finalizer)"
            };
            verdicts.push(Verdict::check(
                label,
                factor * (n + 5 * d),
                metrics.rounds_elapsed,
            ));
        }
        verdicts.push(Verdict::check(
            format!("messages <= {mn}+4m (unknown n, finalizer)"),
            factor * m * n + 4 * m,
            metrics.total_messages,
        ));
    }
    verdicts
}

/// Verdict rows for the dag algorithms; `factor` 1 for APSP, 2 for BC.
fn dag_verdicts(
    g: &Digraph,
    class: &GraphClassReport,
    config: &ExperimentConfig,
    metrics: &congest_core::engine::RunMetrics,
    factor: u64,
) -> Vec<Verdict> {
    let (n, m) = (g.n() as u64, g.m() as u64);
    let l = class.longest_path.expect("dag algorithms require a dag");
    let mut verdicts = Vec::new();
    if config.know_n {
        if factor == 1 {
            verdicts.push(Verdict::check(
                "rounds <= n+2L",
                n + 2 * l,
                metrics.rounds_elapsed,
            ));
            verdicts.push(Verdict::check(
                "messages <= mn+m",
                m * n + m,
                metrics.total_messages,
            ));
        } else {
            verdicts.push(Verdict::check(
                "rounds <= 2n+3L",
                2 * n + 3 * l,
                metrics.rounds_elapsed,
            ));
            verdicts.push(Verdict::check(
                "messages <= 2mn+m",
                2 * m * n + m,
                metrics.total_messages,
            ));
        }
    } else {
        // No constants are published for the unknown-n case; these are the
        // configured O(n)-round / O(mn)-message envelopes.
        let c = if factor == 1 { 6 } else { 8 };
        verdicts.push(Verdict::check(
            format!("rounds <= {c}n (configured O(n) envelope)"),
            c * n,
            metrics.rounds_elapsed,
        ));
        verdicts.push(Verdict::check(
            format!("messages <= {}mn+3m+2n (configured O(mn) envelope)", factor),
            factor * m * n + 3 * m + 2 * n,
            metrics.total_messages,
        ));
    }
    verdicts
}

fn apsp_matches(g: &Digraph, out: &DistributedApsp, mode: SigmaMode) -> bool {
    let expected = oracle::apsp_with_counts(g);
    match mode {
        SigmaMode::Exact => out.to_solution().is_some_and(|s| s == expected),
        SigmaMode::Float => {
            let n = g.n();
            (0..n).all(|s| {
                (0..n).all(|v| {
                    out.dist[s][v] == expected.rows[s].dist[v]
                        && out.preds[s][v] == expected.rows[s].preds[v]
                        && sigma_close(&out.sigma[s][v], &expected.rows[s].sigma[v])
                })
            })
        }
    }
}

fn sigma_close(got: &Sigma, want: &congest_core::num_bigint::BigUint) -> bool {
    let want = want.to_f64().unwrap_or(f64::INFINITY);
    let got = got.to_f64();
    if want == 0.0 {
        got == 0.0
    } else {
        ((got - want) / want).abs() <= 1e-9
    }
}

fn bc_matches(g: &Digraph, bc: &BcOutput) -> bool {
    let expected = oracle::brandes_bc(g);
    match bc {
        BcOutput::Exact(values) => values == &expected,
        BcOutput::Float(values) => expected.iter().zip(values).all(|(e, f)| {
            let e = e.to_f64().unwrap_or(f64::NAN);
            if e == 0.0 {
                *f == 0.0
            } else {
                ((f - e) / e).abs() <= 1e-9
            }
        }),
    }
}
