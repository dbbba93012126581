//! Node programs and drivers for unweighted directed APSP, betweenness
//! centrality, and the bounded-hop source-detection variants.

pub mod pipeline;
pub mod program;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_rational::BigRational;
use thiserror::Error;

use crate::accum::{AccumProgram, SourceFacts};
use crate::engine::{
    run_synchronous, Bandwidth, EngineError, EngineOptions, RunMetrics, RunOutcome,
};
use crate::graph::Digraph;
use crate::numeric::{Dependency, Sigma, SigmaMode};
use crate::oracle::{ApspSolution, SsspRow};
use pipeline::{ListPolicy, NodeTrace};
use program::{ApspProgram, ApspProgramConfig};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("graph must be weakly connected when n is unknown")]
    NotWeaklyConnected,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Settings for one APSP/BC run.
#[derive(Clone, Debug)]
pub struct UnweightedConfig {
    pub know_n: bool,
    pub finalizer: bool,
    pub sigma_mode: SigmaMode,
    pub bandwidth: Bandwidth,
    pub engine: EngineOptions,
}

impl Default for UnweightedConfig {
    fn default() -> Self {
        UnweightedConfig {
            know_n: true,
            finalizer: false,
            sigma_mode: SigmaMode::Exact,
            bandwidth: Bandwidth::Account,
            engine: EngineOptions::default(),
        }
    }
}

/// Distributed all-pairs output, indexed `[source][vertex]` like the oracle
/// table but carrying mode-dependent path counts.
#[derive(Clone, Debug)]
pub struct DistributedApsp {
    pub dist: Vec<Vec<Option<u64>>>,
    pub sigma: Vec<Vec<Sigma>>,
    pub preds: Vec<Vec<BTreeSet<usize>>>,
}

impl DistributedApsp {
    /// Exact-mode view as an oracle-shaped solution for direct comparison.
    pub fn to_solution(&self) -> Option<ApspSolution> {
        let n = self.dist.len();
        let mut rows = Vec::with_capacity(n);
        for s in 0..n {
            let mut sigma = Vec::with_capacity(n);
            for v in 0..n {
                match &self.sigma[s][v] {
                    Sigma::Exact(x) => sigma.push(x.clone()),
                    Sigma::Float(_) => return None,
                }
            }
            rows.push(SsspRow {
                dist: self.dist[s].clone(),
                sigma,
                preds: self.preds[s].clone(),
            });
        }
        Some(ApspSolution { rows })
    }
}

/// Everything a forward APSP run produces.
pub struct ApspArtifacts {
    pub output: DistributedApsp,
    /// Send timestamps, `tau[source][vertex]`.
    pub tau: Vec<Vec<Option<u64>>>,
    /// Diameter computed by the finalizer, when it completed.
    pub diameter: Option<u64>,
    pub metrics: RunMetrics,
    pub traces: Vec<NodeTrace>,
    /// Per-node diameter values for checking agreement.
    pub diameters_learned: Vec<Option<u64>>,
}

fn safety_cap(n: usize) -> u64 {
    6 * n as u64 + 20
}

/// Runs the pipelined directed APSP algorithm.
///
/// With `know_n` false the graph must be weakly connected; the run then
/// counts vertices over a tree from the smallest-id node before the 2n cap
/// can engage. With the finalizer enabled, strongly connected graphs
/// terminate once the diameter has been convergecast and rebroadcast.
pub fn run_directed_apsp(
    g: &Digraph,
    config: &UnweightedConfig,
) -> Result<ApspArtifacts, DriverError> {
    if !config.know_n {
        let report = crate::graph::classify(g);
        if !report.weakly_connected {
            return Err(DriverError::NotWeaklyConnected);
        }
    }
    let n = g.n();
    let program_config = ApspProgramConfig {
        known_n: config.know_n.then_some(n as u64),
        finalizer: config.finalizer,
        sigma_mode: config.sigma_mode,
        root: g.min_id_vertex(),
        policy: ListPolicy::Full,
        sources: None,
        round_limit: None,
    };
    let programs = ApspProgram::build(g, &program_config);
    let outcome = run_synchronous(g, programs, safety_cap(n), config.bandwidth, &config.engine)?;
    Ok(collect_artifacts(g, outcome))
}

fn collect_artifacts(g: &Digraph, outcome: RunOutcome<ApspProgram>) -> ApspArtifacts {
    let n = g.n();
    let mut dist = vec![vec![None; n]; n];
    let mut sigma = vec![vec![Sigma::Exact(BigUint::from(0u32)); n]; n];
    let mut preds = vec![vec![BTreeSet::new(); n]; n];
    let mut tau = vec![vec![None; n]; n];
    let mut traces = Vec::with_capacity(n);
    let mut diameters = Vec::with_capacity(n);
    for (v, p) in outcome.programs.into_iter().enumerate() {
        for e in p.list().entries() {
            dist[e.source][v] = Some(e.dist);
            sigma[e.source][v] = e.sigma.clone();
            preds[e.source][v] = e.preds.clone();
            tau[e.source][v] = e.sent_round;
        }
        diameters.push(p.learned_diameter());
        traces.push(p.trace.clone());
    }
    let diameter = diameters.iter().flatten().next().copied();
    ApspArtifacts {
        output: DistributedApsp { dist, sigma, preds },
        tau,
        diameter,
        metrics: outcome.metrics,
        traces,
        diameters_learned: diameters,
    }
}

/// Betweenness output in the active numeric mode.
#[derive(Clone, Debug, PartialEq)]
pub enum BcOutput {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl BcOutput {
    pub fn len(&self) -> usize {
        match self {
            BcOutput::Exact(v) => v.len(),
            BcOutput::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            BcOutput::Exact(v) => v
                .iter()
                .map(|q| num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN))
                .collect(),
            BcOutput::Float(v) => v.clone(),
        }
    }
}

pub struct BcArtifacts {
    pub bc: BcOutput,
    pub metrics: RunMetrics,
    pub forward: ApspArtifacts,
    pub accum_rounds: u64,
}

/// Runs APSP and then the time-reversed accumulation phase; the result is the
/// exact betweenness vector (or its float-mode approximation).
pub fn run_bc(g: &Digraph, config: &UnweightedConfig) -> Result<BcArtifacts, DriverError> {
    let forward = run_directed_apsp(g, config)?;
    let forward_end = forward.metrics.rounds_elapsed;
    let (bc, accum_metrics) = accumulation_phase(
        g,
        config.sigma_mode,
        forward_end,
        |s, v| {
            forward.tau[s][v].map(|tau| SourceFacts {
                tau,
                sigma: forward.output.sigma[s][v].clone(),
                preds: forward.output.preds[s][v].iter().copied().collect(),
            })
        },
        config.bandwidth,
        &config.engine,
    )?;
    let mut metrics = forward.metrics.clone();
    metrics.absorb(&accum_metrics);
    Ok(BcArtifacts {
        bc,
        metrics,
        forward,
        accum_rounds: accum_metrics.rounds_elapsed,
    })
}

/// Shared accumulation driver: builds one program per node from the forward
/// facts and runs the reversed schedule to completion.
pub(crate) fn accumulation_phase(
    g: &Digraph,
    mode: SigmaMode,
    forward_end: u64,
    facts_for: impl Fn(usize, usize) -> Option<SourceFacts>,
    bandwidth: Bandwidth,
    engine: &EngineOptions,
) -> Result<(BcOutput, RunMetrics), DriverError> {
    let n = g.n();
    let programs: Vec<AccumProgram> = (0..n)
        .map(|v| {
            let mut facts = BTreeMap::new();
            for s in 0..n {
                if let Some(f) = facts_for(s, v) {
                    facts.insert(s, f);
                }
            }
            AccumProgram::new(v, mode, forward_end, facts)
        })
        .collect();
    let outcome = run_synchronous(g, programs, forward_end + 2, bandwidth, engine)?;
    let bc = match mode {
        SigmaMode::Exact => BcOutput::Exact(
            outcome
                .programs
                .iter()
                .map(|p| match p.centrality() {
                    Dependency::Exact(q) => q,
                    Dependency::Float(_) => unreachable!(),
                })
                .collect(),
        ),
        SigmaMode::Float => BcOutput::Float(
            outcome
                .programs
                .iter()
                .map(|p| match p.centrality() {
                    Dependency::Float(x) => x,
                    Dependency::Exact(_) => unreachable!(),
                })
                .collect(),
        ),
    };
    Ok((bc, outcome.metrics))
}

/// Result of the bounded-hop variants: per node the retained
/// `(distance, source)` pairs in list order.
pub struct DetectionArtifacts {
    pub lists: Vec<Vec<(u64, usize)>>,
    pub metrics: RunMetrics,
}

/// Bounded-hop source detection: every node learns its up to `r` nearest
/// sources within `h` hops, in `r + h` rounds.
pub fn source_detection(
    g: &Digraph,
    sources: &BTreeSet<usize>,
    h: u64,
    r: usize,
    config: &UnweightedConfig,
) -> Result<DetectionArtifacts, DriverError> {
    if sources.is_empty() {
        return Err(DriverError::InvalidParameters("empty source set".into()));
    }
    if h < 1 {
        return Err(DriverError::InvalidParameters("h must be >= 1".into()));
    }
    if r > sources.len() {
        return Err(DriverError::InvalidParameters(
            "r must be at most |S|".into(),
        ));
    }
    let limit = r as u64 + h;
    run_variant(
        g,
        sources,
        ListPolicy::HopBounded { h, keep: Some(r) },
        limit,
        config,
    )
}

/// Bounded-hop multi-source shortest paths: distances from every source in
/// `S` within `h` hops, in `|S| + h` rounds.
pub fn hk_ssp(
    g: &Digraph,
    sources: &BTreeSet<usize>,
    h: u64,
    config: &UnweightedConfig,
) -> Result<DetectionArtifacts, DriverError> {
    if sources.is_empty() {
        return Err(DriverError::InvalidParameters("empty source set".into()));
    }
    if h < 1 {
        return Err(DriverError::InvalidParameters("h must be >= 1".into()));
    }
    let limit = sources.len() as u64 + h;
    run_variant(
        g,
        sources,
        ListPolicy::HopBounded { h, keep: None },
        limit,
        config,
    )
}

fn run_variant(
    g: &Digraph,
    sources: &BTreeSet<usize>,
    policy: ListPolicy,
    round_limit: u64,
    config: &UnweightedConfig,
) -> Result<DetectionArtifacts, DriverError> {
    let program_config = ApspProgramConfig {
        known_n: Some(g.n() as u64),
        finalizer: false,
        sigma_mode: config.sigma_mode,
        root: g.min_id_vertex(),
        policy,
        sources: Some(sources.clone()),
        round_limit: Some(round_limit),
    };
    let programs = ApspProgram::build(g, &program_config);
    let outcome = run_synchronous(g, programs, round_limit, config.bandwidth, &config.engine)?;
    let lists = outcome
        .programs
        .iter()
        .map(|p| {
            p.list()
                .entries()
                .iter()
                .map(|e| (e.dist, e.source))
                .collect()
        })
        .collect();
    Ok(DetectionArtifacts {
        lists,
        metrics: outcome.metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixture, generate, GeneratorKind};
    use crate::oracle;

    fn exact_config(know_n: bool, finalizer: bool) -> UnweightedConfig {
        UnweightedConfig {
            know_n,
            finalizer,
            ..UnweightedConfig::default()
        }
    }

    #[test]
    fn p3_known_n_matches_oracle_within_two_n() {
        let g = fixture("p3").unwrap();
        let art = run_directed_apsp(&g, &exact_config(true, false)).unwrap();
        assert!(art.metrics.rounds_elapsed <= 6);
        let solution = art.output.to_solution().unwrap();
        assert_eq!(solution, oracle::apsp_with_counts(&g));
    }

    #[test]
    fn four_cycle_finalizer_broadcasts_diameter() {
        let g = generate(GeneratorKind::Cycle, 4, 0.0, None, 0).unwrap();
        let art = run_directed_apsp(&g, &exact_config(false, true)).unwrap();
        assert_eq!(art.diameter, Some(3));
        for d in &art.diameters_learned {
            assert_eq!(*d, Some(3));
        }
        assert!(art.metrics.rounds_elapsed <= 4 + 5 * 3);
        let solution = art.output.to_solution().unwrap();
        assert_eq!(solution, oracle::apsp_with_counts(&g));
    }

    #[test]
    fn one_triple_send_per_source() {
        let g = generate(GeneratorKind::RandomDigraph, 12, 0.3, None, 2).unwrap();
        let art = run_directed_apsp(&g, &exact_config(true, false)).unwrap();
        assert!(art.metrics.max_triple_sends_per_pair() <= 1);
    }

    #[test]
    fn bc_matches_brandes_on_fixtures() {
        for name in ["p3", "diamond"] {
            let g = fixture(name).unwrap();
            let art = run_bc(&g, &exact_config(true, false)).unwrap();
            let BcOutput::Exact(bc) = art.bc else {
                panic!()
            };
            assert_eq!(bc, oracle::brandes_bc(&g), "{name}");
        }
        let g = generate(GeneratorKind::Cycle, 4, 0.0, None, 0).unwrap();
        let art = run_bc(&g, &exact_config(true, false)).unwrap();
        let BcOutput::Exact(bc) = art.bc else {
            panic!()
        };
        assert_eq!(bc, oracle::brandes_bc(&g));
        let three = BigRational::from_integer(3.into());
        assert!(bc.iter().all(|b| *b == three));
    }

    #[test]
    fn bc_message_budget_known_n() {
        // Known n, no finalizer: forward phase sends at most mn bundles and
        // the accumulation at most another mn.
        for seed in 0..5 {
            let g = generate(GeneratorKind::RandomStronglyConnected, 12, 0.25, None, seed).unwrap();
            let (n, m) = (g.n() as u64, g.m() as u64);
            let art = run_bc(&g, &exact_config(true, false)).unwrap();
            assert!(art.metrics.total_messages <= 2 * m * n);
            assert!(art.metrics.rounds_elapsed <= 4 * n);
        }
    }

    #[test]
    fn detection_examples() {
        let g = fixture("p3").unwrap();
        let config = exact_config(true, false);
        let art = source_detection(&g, &BTreeSet::from([0]), 1, 1, &config).unwrap();
        assert_eq!(art.lists[1], vec![(1, 0)]);
        assert!(art.lists[2].is_empty());
        assert!(art.metrics.rounds_elapsed <= 1 + 1);

        let art = source_detection(&g, &BTreeSet::from([0, 1]), 2, 1, &config).unwrap();
        assert_eq!(art.lists[2], vec![(1, 1)]);

        // With S = V, h = D and r = n this is full APSP.
        let g = generate(GeneratorKind::Cycle, 4, 0.0, None, 0).unwrap();
        let art = source_detection(&g, &BTreeSet::from([0, 1, 2, 3]), 3, 4, &config).unwrap();
        let full = run_directed_apsp(&g, &config).unwrap();
        for v in 0..4 {
            let mut expect: Vec<(u64, usize)> = (0..4)
                .filter_map(|s| full.output.dist[s][v].map(|d| (d, s)))
                .collect();
            expect.sort_unstable();
            assert_eq!(art.lists[v], expect);
        }
    }

    #[test]
    fn variant_rejects_bad_parameters() {
        let g = fixture("p3").unwrap();
        let config = exact_config(true, false);
        assert!(source_detection(&g, &BTreeSet::new(), 1, 0, &config).is_err());
        assert!(source_detection(&g, &BTreeSet::from([0]), 0, 1, &config).is_err());
        assert!(source_detection(&g, &BTreeSet::from([0]), 1, 2, &config).is_err());
    }

    #[test]
    fn remaining_config_combinations() {
        // Finalizer with known n: no counting phase, diameter still learned.
        let g = generate(GeneratorKind::Cycle, 4, 0.0, None, 0).unwrap();
        let art = run_directed_apsp(&g, &exact_config(true, true)).unwrap();
        assert_eq!(art.diameter, Some(3));
        assert_eq!(
            art.output.to_solution().unwrap(),
            oracle::apsp_with_counts(&g)
        );

        // Unknown n without the finalizer on a weakly connected graph: the
        // counting phase enables the 2n cap.
        let g = fixture("p3").unwrap();
        let art = run_directed_apsp(&g, &exact_config(false, false)).unwrap();
        assert_eq!(
            art.output.to_solution().unwrap(),
            oracle::apsp_with_counts(&g)
        );
        assert!(art.metrics.rounds_elapsed <= 2 * 3 + 3);
    }

    #[test]
    fn float_mode_tracks_exact_mode() {
        let g = generate(GeneratorKind::RandomStronglyConnected, 15, 0.3, None, 4).unwrap();
        let exact = run_bc(&g, &exact_config(true, false)).unwrap();
        let float = run_bc(
            &g,
            &UnweightedConfig {
                sigma_mode: SigmaMode::Float,
                ..exact_config(true, false)
            },
        )
        .unwrap();
        let BcOutput::Exact(exact) = exact.bc else {
            panic!()
        };
        let BcOutput::Float(float) = float.bc else {
            panic!()
        };
        for (e, f) in exact.iter().zip(&float) {
            let e = num_traits::ToPrimitive::to_f64(e).unwrap();
            if e == 0.0 {
                assert_eq!(*f, 0.0);
            } else {
                assert!(((f - e) / e).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn permuted_evaluation_is_equivalent() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let g = generate(GeneratorKind::RandomStronglyConnected, 12, 0.3, None, 17).unwrap();
        let baseline = run_bc(&g, &exact_config(false, true)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let mut order: Vec<usize> = (0..g.n()).collect();
        order.shuffle(&mut rng);
        let permuted = run_bc(
            &g,
            &UnweightedConfig {
                engine: crate::engine::EngineOptions {
                    eval_order: crate::engine::EvalOrder::Permuted(order),
                },
                ..exact_config(false, true)
            },
        )
        .unwrap();
        assert_eq!(baseline.bc, permuted.bc);
        assert_eq!(baseline.metrics, permuted.metrics);
    }

    #[test]
    fn parallel_evaluation_is_equivalent() {
        let g = generate(GeneratorKind::RandomStronglyConnected, 14, 0.3, None, 9).unwrap();
        let sequential = run_bc(&g, &exact_config(false, true)).unwrap();
        let parallel = run_bc(
            &g,
            &UnweightedConfig {
                engine: crate::engine::EngineOptions {
                    eval_order: crate::engine::EvalOrder::Parallel,
                },
                ..exact_config(false, true)
            },
        )
        .unwrap();
        assert_eq!(sequential.bc, parallel.bc);
        assert_eq!(sequential.metrics, parallel.metrics);
    }

    #[test]
    fn know_n_false_requires_weak_connectivity() {
        let mut g = Digraph::new(4, false, crate::graph::GraphKind::Directed);
        g.add_edge(0, 1, 1).unwrap();
        // vertices 2 and 3 are isolated
        assert!(matches!(
            run_directed_apsp(&g, &exact_config(false, false)),
            Err(DriverError::NotWeaklyConnected)
        ));
    }
}
