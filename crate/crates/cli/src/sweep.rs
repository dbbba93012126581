//! Corpus sweeps: one generator family crossed with a seed range, one CSV row
//! per instance with measured rounds, messages, bound slack, and oracle
//! agreement. Instances are independent deterministic runs, so they execute
//! concurrently when the parallel feature is active.

use std::io::Write;

use congest_core::dag::{run_dag_apsp, run_dag_bc, DagConfig};
use congest_core::graph::{classify, generate, Digraph, GeneratorKind};
use congest_core::oracle;
use congest_core::unweighted::{run_bc, run_directed_apsp, BcOutput, UnweightedConfig};

use crate::{Algorithm, CliError, ExperimentConfig};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Parsed form of `kind=K,n=LO..HI,p=P,seeds=LO..HI[,wmax=W]`.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub kind: GeneratorKind,
    pub kind_name: String,
    pub n_range: (usize, usize),
    pub p: f64,
    pub seed_range: (u64, u64),
    pub wmax: Option<u64>,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<SweepSpec, String> {
        let mut kind = None;
        let mut kind_name = String::new();
        let mut n_range = None;
        let mut p = None;
        let mut seed_range = None;
        let mut wmax = None;
        for field in text.split(',') {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| format!("field {field:?} is not key=value"))?;
            match key {
                "kind" => {
                    kind = Some(
                        GeneratorKind::parse(value)
                            .ok_or_else(|| format!("unknown generator kind {value:?}"))?,
                    );
                    kind_name = value.to_string();
                }
                "n" => n_range = Some(parse_range(value)?),
                "p" => {
                    p = Some(
                        value
                            .parse()
                            .map_err(|_| format!("bad probability {value:?}"))?,
                    )
                }
                "seeds" => {
                    let (lo, hi) = parse_range(value)?;
                    seed_range = Some((lo as u64, hi as u64));
                }
                "wmax" => {
                    wmax = Some(
                        value
                            .parse()
                            .map_err(|_| format!("bad maximum weight {value:?}"))?,
                    )
                }
                other => return Err(format!("unknown sweep field {other:?}")),
            }
        }
        Ok(SweepSpec {
            kind: kind.ok_or("sweep needs kind=")?,
            kind_name,
            n_range: n_range.ok_or("sweep needs n=LO..HI")?,
            p: p.ok_or("sweep needs p=")?,
            seed_range: seed_range.ok_or("sweep needs seeds=LO..HI")?,
            wmax,
        })
    }
}

/// Inclusive `LO..HI` (a bare number is a singleton range). `LO > HI` is an
/// empty range: the sweep then emits only the CSV header.
fn parse_range(text: &str) -> Result<(usize, usize), String> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo = lo.parse().map_err(|_| format!("bad range start {lo:?}"))?;
        let hi = hi.parse().map_err(|_| format!("bad range end {hi:?}"))?;
        Ok((lo, hi))
    } else {
        let v: usize = text.parse().map_err(|_| format!("bad range {text:?}"))?;
        Ok((v, v))
    }
}

pub const CSV_HEADER: &str =
    "kind,n,m,seed,d,l,rounds,messages,round_bound,round_slack,message_bound,message_slack,oracle_match";

struct Row {
    kind: String,
    n: usize,
    m: usize,
    seed: u64,
    d: Option<u64>,
    l: Option<u64>,
    rounds: u64,
    messages: u64,
    round_bound: Option<u64>,
    message_bound: Option<u64>,
    oracle_match: bool,
}

impl Row {
    fn render(&self) -> String {
        let opt = |x: Option<u64>| x.map_or("inf".to_string(), |v| v.to_string());
        let slack = |bound: Option<u64>, measured: u64| {
            bound.map_or(String::new(), |b| (b as i64 - measured as i64).to_string())
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.n,
            self.m,
            self.seed,
            opt(self.d),
            self.l.map_or(String::new(), |v| v.to_string()),
            self.rounds,
            self.messages,
            self.round_bound.map_or(String::new(), |v| v.to_string()),
            slack(self.round_bound, self.rounds),
            self.message_bound.map_or(String::new(), |v| v.to_string()),
            slack(self.message_bound, self.messages),
            self.oracle_match,
        )
    }
}

/// Runs the sweep, writing rows to `out` as they complete. Any instance
/// failure aborts with the rows so far already flushed.
pub fn corpus_sweep(
    spec: &SweepSpec,
    config: &ExperimentConfig,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    writeln!(out, "{CSV_HEADER}")?;
    let mut cases = Vec::new();
    for n in spec.n_range.0..=spec.n_range.1 {
        for seed in spec.seed_range.0..=spec.seed_range.1 {
            cases.push((n, seed));
        }
    }
    let run_one = |&(n, seed): &(usize, u64)| -> Result<Row, String> {
        let g = generate(spec.kind, n, spec.p, spec.wmax, seed).map_err(|e| e.to_string())?;
        run_instance(&g, seed, &spec.kind_name, config).map_err(|e| e.to_string())
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Row, String>> = cases.par_iter().map(run_one).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Row, String>> = cases.iter().map(run_one).collect();

    let mut all_pass = true;
    for result in results {
        match result {
            Ok(row) => {
                all_pass &= row.oracle_match;
                if let (Some(b), r) = (row.round_bound, row.rounds) {
                    all_pass &= r <= b;
                }
                if let (Some(b), m) = (row.message_bound, row.messages) {
                    all_pass &= m <= b;
                }
                writeln!(out, "{}", row.render())?;
            }
            Err(message) => {
                out.flush()?;
                return Err(CliError::Usage(format!("sweep instance failed: {message}")));
            }
        }
    }
    out.flush()?;
    Ok(all_pass)
}

fn run_instance(
    g: &Digraph,
    seed: u64,
    kind_name: &str,
    config: &ExperimentConfig,
) -> Result<Row, CliError> {
    let class = classify(g);
    let (n, m) = (g.n() as u64, g.m() as u64);
    let unweighted = UnweightedConfig {
        know_n: config.know_n,
        finalizer: config.finalizer,
        sigma_mode: config.sigma_mode,
        bandwidth: config.bandwidth,
        engine: Default::default(),
    };
    let dag = DagConfig {
        know_n: config.know_n,
        sigma_mode: config.sigma_mode,
        bandwidth: config.bandwidth,
        engine: Default::default(),
    };
    let map = |e: congest_core::unweighted::DriverError| CliError::Usage(e.to_string());

    let (metrics, oracle_match, round_bound, message_bound) = match config.algorithm {
        Algorithm::ApspUnweighted => {
            let art = run_directed_apsp(g, &unweighted).map_err(map)?;
            let matched = art
                .output
                .to_solution()
                .is_some_and(|s| s == oracle::apsp_with_counts(g));
            let bounds = unweighted_bounds(&class, n, m, config, 1);
            (art.metrics, matched, bounds.0, bounds.1)
        }
        Algorithm::BcUnweighted => {
            let art = run_bc(g, &unweighted).map_err(map)?;
            let matched = matches!(&art.bc, BcOutput::Exact(bc) if bc == &oracle::brandes_bc(g));
            let bounds = unweighted_bounds(&class, n, m, config, 2);
            (art.metrics, matched, bounds.0, bounds.1)
        }
        Algorithm::ApspDag => {
            let art = run_dag_apsp(g, &dag).map_err(map)?;
            let matched = art
                .output
                .to_solution()
                .is_some_and(|s| s == oracle::apsp_with_counts(g));
            let l = class.longest_path.expect("dag sweep needs dag family");
            let bounds = if config.know_n {
                (Some(n + 2 * l), Some(m * n + m))
            } else {
                (Some(6 * n), Some(m * n + 3 * m + 2 * n))
            };
            (art.metrics, matched, bounds.0, bounds.1)
        }
        Algorithm::BcDag => {
            let art = run_dag_bc(g, &dag).map_err(map)?;
            let matched = matches!(&art.bc, BcOutput::Exact(bc) if bc == &oracle::brandes_bc(g));
            let l = class.longest_path.expect("dag sweep needs dag family");
            let bounds = if config.know_n {
                (Some(2 * n + 3 * l), Some(2 * m * n + m))
            } else {
                (Some(8 * n), Some(2 * m * n + 3 * m + 2 * n))
            };
            (art.metrics, matched, bounds.0, bounds.1)
        }
        Algorithm::SourceDetection | Algorithm::HkSsp => {
            return Err(CliError::Usage(
                "sweep supports apsp-unweighted, bc-unweighted, apsp-dag, bc-dag".into(),
            ))
        }
    };
    Ok(Row {
        kind: kind_name.to_string(),
        n: g.n(),
        m: g.m(),
        seed,
        d: class.directed_diameter,
        l: class.longest_path,
        rounds: metrics.rounds_elapsed,
        messages: metrics.total_messages,
        round_bound,
        message_bound,
        oracle_match,
    })
}

fn unweighted_bounds(
    class: &congest_core::graph::GraphClassReport,
    n: u64,
    m: u64,
    config: &ExperimentConfig,
    factor: u64,
) -> (Option<u64>, Option<u64>) {
    if config.know_n && !config.finalizer {
        (Some(2 * factor * n), Some(factor * m * n))
    } else if !config.know_n && config.finalizer {
        let rounds = class.directed_diameter.map(|d| factor * (n + 5 * d));
        (rounds, Some(factor * m * n + 4 * m))
    } else {
        (None, None)
    }
}
