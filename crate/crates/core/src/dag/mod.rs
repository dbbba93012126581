//! Weighted-dag algorithms: longest-length-tree construction, id-and-level
//! scheduled APSP, and betweenness centrality via the time-reversed
//! accumulation, plus the virtual-source and id-relabeling preprocessing.

pub mod llt;
pub mod ncomp;
pub mod relabel;
pub mod sssp;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::accum::SourceFacts;
use crate::engine::{run_synchronous, Bandwidth, EngineOptions, RunMetrics};
use crate::graph::{Digraph, GraphKind};
use crate::numeric::{Sigma, SigmaMode};
use crate::unweighted::{accumulation_phase, BcOutput, DistributedApsp, DriverError};
use llt::{collect_llt, LltProgram, LltResult};
use sssp::DagSsspProgram;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("input graph is not a dag")]
    NotADag,
    #[error("vertex ids must be exactly 1..=n; run the relabeling phase first")]
    IdSpace,
    #[error("vertex {0} is unreachable from the source")]
    Unreachable(usize),
}

#[derive(Clone, Debug)]
pub struct DagConfig {
    pub know_n: bool,
    pub sigma_mode: SigmaMode,
    pub bandwidth: Bandwidth,
    pub engine: EngineOptions,
}

impl Default for DagConfig {
    fn default() -> Self {
        DagConfig {
            know_n: true,
            sigma_mode: SigmaMode::Exact,
            bandwidth: Bandwidth::Account,
            engine: EngineOptions::default(),
        }
    }
}

/// Adds an auxiliary root connected to every in-degree-0 vertex when the dag
/// has more than one source; single-source dags are returned unchanged.
///
/// The auxiliary vertex gets id 0 (ordering it before every real id) and
/// weight-1 edges; callers strip it from all outputs.
pub fn add_virtual_source(g: &Digraph) -> Result<(Digraph, Option<usize>), DagError> {
    if g.topological_order().is_none() {
        return Err(DagError::NotADag);
    }
    let sources: Vec<usize> = (0..g.n()).filter(|&v| g.in_degree(v) == 0).collect();
    if sources.len() <= 1 {
        return Ok((g.clone(), None));
    }
    let n = g.n();
    let mut ids = vec![0u64];
    ids.extend(g.ids().iter().copied());
    let mut out = Digraph::new(n + 1, g.is_weighted(), GraphKind::Dag)
        .with_ids(ids)
        .map_err(|_| DagError::IdSpace)?;
    for s in &sources {
        out.add_edge(0, s + 1, 1).expect("fresh vertex");
    }
    for (u, v, w) in g.edges() {
        out.add_edge(u + 1, v + 1, w).expect("copied edge");
    }
    Ok((out, Some(0)))
}

/// Runs the delayed flood from `source` and reports levels, parents, and the
/// round count (excluding the source's initial broadcast, which precedes the
/// per-round loop).
pub fn llt_build(
    g: &Digraph,
    source: usize,
    config: &DagConfig,
) -> Result<(LltResult, RunMetrics), DriverError> {
    if g.topological_order().is_none() {
        return Err(DriverError::InvalidParameters(
            DagError::NotADag.to_string(),
        ));
    }
    let programs = LltProgram::build(g, &[source]);
    let outcome = run_synchronous(
        g,
        programs,
        g.n() as u64 + 2,
        config.bandwidth,
        &config.engine,
    )?;
    let result = collect_llt(outcome.programs, outcome.metrics.rounds_elapsed)
        .map_err(|v| DriverError::InvalidParameters(DagError::Unreachable(v).to_string()))?;
    Ok((result, outcome.metrics))
}

pub struct DagApspArtifacts {
    pub output: DistributedApsp,
    /// `tau[source][vertex]`: the round the vertex transmitted for the source.
    pub tau: Vec<Vec<Option<u64>>>,
    pub levels: Vec<u64>,
    pub metrics: RunMetrics,
    /// Rounds of the scheduled phase alone (the accumulation horizon).
    pub schedule_rounds: u64,
    /// `(round, source, sender, scheduled_round)` per delivery.
    pub arrival_log: Vec<(u64, usize, usize, u64)>,
    /// Per node, `(round, source)` per transmission.
    pub send_logs: Vec<Vec<(u64, usize)>>,
}

fn validate_dag_input(g: &Digraph, know_n: bool) -> Result<(), DriverError> {
    if g.topological_order().is_none() {
        return Err(DriverError::InvalidParameters(
            DagError::NotADag.to_string(),
        ));
    }
    for (v, &id) in g.ids().iter().enumerate() {
        if id != v as u64 + 1 {
            return Err(DriverError::InvalidParameters(
                DagError::IdSpace.to_string(),
            ));
        }
    }
    if !know_n && !crate::graph::classify(g).weakly_connected {
        return Err(DriverError::NotWeaklyConnected);
    }
    Ok(())
}

/// Weighted-dag APSP: a longest-length-tree phase fixes per-node levels, then
/// every source's shortest-path tree unfolds on the fixed schedule
/// `round = ID_source + level(vertex)`.
///
/// Multiple in-degree-0 vertices all start at level 0, which is the
/// virtual-source construction with the auxiliary root elided (an explicit
/// in-engine root would add its own rounds to every schedule).
pub fn run_dag_apsp(g: &Digraph, config: &DagConfig) -> Result<DagApspArtifacts, DriverError> {
    validate_dag_input(g, config.know_n)?;
    let n = g.n();
    let mut metrics = RunMetrics::default();

    if !config.know_n {
        // Counting phase: the result n is implicit in every program below.
        let outcome = run_synchronous(
            g,
            ncomp::NCompProgram::build(g),
            6 * n as u64 + 8,
            config.bandwidth,
            &config.engine,
        )?;
        debug_assert!(outcome
            .programs
            .iter()
            .all(|p| p.learned_n() == Some(n as u64)));
        metrics.absorb(&outcome.metrics);
    }

    // Phase 1: levels from every in-degree-0 vertex.
    let seeds: Vec<usize> = (0..n).filter(|&v| g.in_degree(v) == 0).collect();
    let outcome = run_synchronous(
        g,
        LltProgram::build(g, &seeds),
        n as u64 + 2,
        config.bandwidth,
        &config.engine,
    )?;
    let llt = collect_llt(outcome.programs, outcome.metrics.rounds_elapsed)
        .expect("every dag vertex is reachable from the in-degree-0 set");
    let mut llt_metrics = outcome.metrics;
    llt_metrics.rounds_elapsed = llt.rounds;
    metrics.absorb(&llt_metrics);

    // Phase 2: scheduled shortest paths.
    let programs = DagSsspProgram::build(g, &llt.levels, config.sigma_mode);
    let max_level = llt.levels.iter().copied().max().unwrap_or(0);
    let outcome = run_synchronous(
        g,
        programs,
        n as u64 + max_level + 2,
        config.bandwidth,
        &config.engine,
    )?;
    let schedule_rounds = outcome.metrics.rounds_elapsed;
    metrics.absorb(&outcome.metrics);

    let mut dist = vec![vec![None; n]; n];
    let mut sigma = vec![vec![Sigma::zero(config.sigma_mode); n]; n];
    let mut preds = vec![vec![BTreeSet::new(); n]; n];
    let mut tau = vec![vec![None; n]; n];
    let mut arrival_log = Vec::new();
    let mut send_logs = Vec::new();
    for (v, p) in outcome.programs.into_iter().enumerate() {
        for (s, r) in &p.results {
            dist[*s][v] = Some(r.dist);
            sigma[*s][v] = r.sigma.clone();
            preds[*s][v] = r.preds.clone();
            tau[*s][v] = Some(r.tau);
        }
        for (round, source, sender) in p.arrival_log {
            let scheduled = source as u64 + 1 + llt.levels[v];
            arrival_log.push((round, source, sender, scheduled));
        }
        send_logs.push(p.send_log);
    }
    Ok(DagApspArtifacts {
        output: DistributedApsp { dist, sigma, preds },
        tau,
        levels: llt.levels,
        metrics,
        schedule_rounds,
        arrival_log,
        send_logs,
    })
}

pub struct DagBcArtifacts {
    pub bc: BcOutput,
    pub metrics: RunMetrics,
    pub forward: DagApspArtifacts,
    pub accum_rounds: u64,
}

/// Weighted-dag betweenness: the scheduled APSP followed by the
/// time-reversed accumulation over the recorded timestamps.
pub fn run_dag_bc(g: &Digraph, config: &DagConfig) -> Result<DagBcArtifacts, DriverError> {
    let forward = run_dag_apsp(g, config)?;
    let horizon = forward.schedule_rounds;
    let (bc, accum_metrics) = accumulation_phase(
        g,
        config.sigma_mode,
        horizon,
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
    Ok(DagBcArtifacts {
        bc,
        metrics,
        forward,
        accum_rounds: accum_metrics.rounds_elapsed,
    })
}

/// Id-to-index map sanity helper for tests and the CLI.
pub fn ids_are_canonical(g: &Digraph) -> bool {
    g.ids()
        .iter()
        .enumerate()
        .all(|(v, &id)| id == v as u64 + 1)
}

pub use relabel::{relabel_ids, RelabelResult};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixture, generate, GeneratorKind};
    use crate::oracle;

    #[test]
    fn virtual_source_cases() {
        // Two isolated chains -> auxiliary root with 2 outgoing edges.
        let mut g = Digraph::new(4, false, GraphKind::Dag);
        g.add_edge(0, 1, 1).unwrap();
        g.add_edge(2, 3, 1).unwrap();
        let (aug, s) = add_virtual_source(&g).unwrap();
        assert_eq!(s, Some(0));
        assert_eq!(aug.n(), 5);
        assert_eq!(aug.out_degree(0), 2);
        assert_eq!(aug.id_of(0), 0);

        // Single source: unchanged.
        let g = fixture("diamond").unwrap();
        let (aug, s) = add_virtual_source(&g).unwrap();
        assert_eq!(s, None);
        assert_eq!(aug, g);

        // Exactly three sources (v1, v4, v7) get one auxiliary edge each.
        let mut g = Digraph::new(7, false, GraphKind::Dag);
        g.add_edge(0, 1, 1).unwrap();
        g.add_edge(0, 4, 1).unwrap();
        g.add_edge(3, 2, 1).unwrap();
        g.add_edge(6, 5, 1).unwrap();
        let (aug, s) = add_virtual_source(&g).unwrap();
        assert_eq!(s, Some(0));
        let targets: Vec<usize> = aug.out_neighbors(0).iter().map(|&(t, _)| t).collect();
        assert_eq!(targets, vec![1, 4, 7]); // shifted indices of v1, v4, v7

        // Cyclic input rejected.
        let cycle = generate(GeneratorKind::Cycle, 4, 0.0, None, 0).unwrap();
        assert_eq!(add_virtual_source(&cycle).unwrap_err(), DagError::NotADag);
    }

    #[test]
    fn llt_diamond_two_rounds() {
        let g = fixture("diamond").unwrap();
        let (result, _) = llt_build(&g, 0, &DagConfig::default()).unwrap();
        assert_eq!(result.levels, vec![0, 1, 1, 2]);
        assert_eq!(result.rounds, 2);
        assert_eq!(result.parents[0], None);
        assert_eq!(result.parents[3], Some(1));
    }

    #[test]
    fn llt_fig1_levels_and_rounds() {
        let g = fixture("fig1-llt").unwrap();
        let (result, _) = llt_build(&g, 0, &DagConfig::default()).unwrap();
        assert_eq!(result.levels[4], 4); // u
        assert_eq!(result.levels[5], 5); // v
        assert_eq!(result.levels[8], 8); // w
        assert_eq!(result.rounds, 8);
        assert_eq!(result.levels, oracle::llt_levels_oracle(&g, 0).unwrap());
    }

    #[test]
    fn llt_unreachable_detected() {
        let mut g = Digraph::new(3, false, GraphKind::Dag);
        g.add_edge(0, 1, 1).unwrap();
        // vertex 2 unreachable from 0
        assert!(llt_build(&g, 0, &DagConfig::default()).is_err());
    }

    #[test]
    fn llt_random_dags_match_oracle() {
        let g = generate(GeneratorKind::RandomDag, 12, 0.3, None, 3).unwrap();
        let levels = oracle::llt_levels_multi_source(&g).unwrap();
        let art = run_dag_apsp(&g, &DagConfig::default()).unwrap();
        assert_eq!(art.levels, levels);
    }

    #[test]
    fn llt_levels_strictly_increase_along_edges() {
        for seed in 0..20 {
            let g = generate(GeneratorKind::RandomDag, 14, 0.35, Some(10), seed).unwrap();
            let art = run_dag_apsp(&g, &DagConfig::default()).unwrap();
            for (u, v, _) in g.edges() {
                assert!(
                    art.levels[u] < art.levels[v],
                    "seed {seed}: edge ({u},{v}) does not increase level"
                );
            }
        }
    }

    #[test]
    fn dag_bc_on_unit_weight_path() {
        let g = fixture("p3").unwrap();
        let art = run_dag_bc(&g, &DagConfig::default()).unwrap();
        let BcOutput::Exact(bc) = art.bc else {
            panic!()
        };
        assert_eq!(bc, oracle::brandes_bc(&g));
        assert_eq!(bc[1], num_rational::BigRational::from_integer(1.into()));
    }

    #[test]
    fn dag_apsp_matches_dijkstra() {
        for seed in [3u64, 5, 8] {
            let g = generate(GeneratorKind::RandomDag, 12, 0.3, Some(10), seed).unwrap();
            let art = run_dag_apsp(&g, &DagConfig::default()).unwrap();
            let solution = art.output.to_solution().unwrap();
            assert_eq!(solution, oracle::apsp_with_counts(&g), "seed {seed}");
            let l = oracle::longest_path_l(&g).unwrap();
            let (n, m) = (g.n() as u64, g.m() as u64);
            assert!(art.metrics.rounds_elapsed <= n + 2 * l);
            assert!(art.metrics.total_messages <= m * n + m);
        }
    }

    #[test]
    fn dag_apsp_unknown_n() {
        let g = fixture("diamond").unwrap();
        let config = DagConfig {
            know_n: false,
            ..DagConfig::default()
        };
        let art = run_dag_apsp(&g, &config).unwrap();
        let solution = art.output.to_solution().unwrap();
        assert_eq!(solution, oracle::apsp_with_counts(&g));
        let (n, m) = (g.n() as u64, g.m() as u64);
        assert!(art.metrics.rounds_elapsed <= 6 * n);
        assert!(art.metrics.total_messages <= 2 * m * n + 2 * n);
    }

    #[test]
    fn fig1_departure_times() {
        let g = fixture("fig1-llt").unwrap();
        let art = run_dag_apsp(&g, &DagConfig::default()).unwrap();
        // Transmissions for sources u (id 5) and v (id 6) are scheduled at w
        // (level 8) in rounds 5 + 8 and 6 + 8.
        assert_eq!(art.tau[4][8], Some(5 + 8));
        assert_eq!(art.tau[5][8], Some(6 + 8));
        // The shortcut edges really are the shortest routes: u~w goes direct
        // (weight 4 beats both detours of 5) while v~w ties its detour.
        assert_eq!(art.output.dist[4][8], Some(4));
        assert_eq!(art.output.sigma[4][8].as_exact().unwrap(), &1u32.into());
        assert_eq!(art.output.dist[5][8], Some(3));
        assert_eq!(art.output.sigma[5][8].as_exact().unwrap(), &2u32.into());
    }

    #[test]
    fn schedule_invariants() {
        let g = generate(GeneratorKind::RandomDag, 14, 0.35, Some(10), 7).unwrap();
        let art = run_dag_apsp(&g, &DagConfig::default()).unwrap();
        // Every delivery lands no later than the receiver's scheduled round.
        for &(round, _, _, scheduled) in &art.arrival_log {
            assert!(round <= scheduled);
        }
        // At most one source transmitted per node per round.
        for log in &art.send_logs {
            let mut rounds: Vec<u64> = log.iter().map(|&(r, _)| r).collect();
            rounds.sort_unstable();
            rounds.dedup();
            assert_eq!(rounds.len(), log.len());
        }
    }

    #[test]
    fn dag_bc_matches_brandes() {
        let g = fixture("diamond").unwrap();
        let art = run_dag_bc(&g, &DagConfig::default()).unwrap();
        let BcOutput::Exact(bc) = art.bc else {
            panic!()
        };
        assert_eq!(bc, oracle::brandes_bc(&g));

        let g = generate(GeneratorKind::RandomDag, 12, 0.3, Some(10), 3).unwrap();
        let art = run_dag_bc(&g, &DagConfig::default()).unwrap();
        let BcOutput::Exact(bc) = art.bc else {
            panic!()
        };
        assert_eq!(bc, oracle::brandes_bc(&g));
        let l = oracle::longest_path_l(&g).unwrap();
        let (n, m) = (g.n() as u64, g.m() as u64);
        assert!(art.metrics.rounds_elapsed <= 2 * n + 3 * l);
        assert!(art.metrics.total_messages <= 2 * m * n + m);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cycle = generate(GeneratorKind::Cycle, 4, 0.0, None, 0).unwrap();
        assert!(run_dag_apsp(&cycle, &DagConfig::default()).is_err());
        let g = fixture("p3").unwrap().with_ids(vec![5, 9, 2]).unwrap();
        assert!(run_dag_apsp(&g, &DagConfig::default()).is_err());
    }
}
