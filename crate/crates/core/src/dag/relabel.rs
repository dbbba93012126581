//! Simulated id-relabeling preprocessing for graphs whose distinct ids are
//! not `1..=n`: every id is flooded to every node over the bidirectional
//! channels with the usual pipelined list, the smallest-id node assigns ranks
//! in ascending id order, and the assignment table is pipelined down its
//! tree one pair per round.

use std::collections::BTreeMap;

use crate::engine::{
    run_synchronous, Bandwidth, EngineOptions, MessageBundle, NodeProgram, Outbox, Payload,
    RunMetrics,
};
use crate::graph::{Digraph, GraphError};
use crate::numeric::{Sigma, SigmaMode};
use crate::tree::TreeProtocol;
use crate::unweighted::DriverError;

/// Phase 1: pipelined flood of `(hops, id)` entries over every channel. The
/// entries ride as ordinary pipeline triples whose source field carries the
/// original id.
struct CollectProgram {
    channels: Vec<usize>,
    /// Lexicographically sorted (hops, id) with send markers.
    list: Vec<(u64, u64, bool)>,
}

impl CollectProgram {
    fn ids(&self) -> Vec<u64> {
        self.list.iter().map(|&(_, id, _)| id).collect()
    }
}

impl NodeProgram for CollectProgram {
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
        for (_, bundle) in inbox {
            for payload in &bundle.payloads {
                let Payload::ApspTriple { dist, source, .. } = payload else {
                    continue;
                };
                let id = *source as u64;
                let hops = dist + 1;
                match self.list.iter().position(|&(_, x, _)| x == id) {
                    None => {
                        let pos = self.list.partition_point(|&(h, x, _)| (h, x) < (hops, id));
                        self.list.insert(pos, (hops, id, false));
                    }
                    Some(i) if self.list[i].0 > hops => {
                        let sent = self.list[i].2;
                        self.list.remove(i);
                        let pos = self.list.partition_point(|&(h, x, _)| (h, x) < (hops, id));
                        self.list.insert(pos, (hops, id, sent));
                    }
                    _ => {}
                }
            }
        }
        let mut fire: Option<usize> = None;
        for (i, &(hops, _, sent)) in self.list.iter().enumerate() {
            if !sent && hops + (i as u64 + 1) == round {
                fire = Some(i);
                break;
            }
        }
        let mut out: Outbox = Vec::new();
        if let Some(i) = fire {
            self.list[i].2 = true;
            let (hops, id, _) = self.list[i];
            let payload = Payload::ApspTriple {
                dist: hops,
                source: id as usize,
                sigma: Sigma::one(SigmaMode::Exact),
                hops: None,
            };
            out = self
                .channels
                .iter()
                .map(|&t| (t, vec![payload.clone()]))
                .collect();
        }
        out
    }

    fn halted(&self) -> bool {
        false
    }
}

/// Phase 2: the root streams `(original id, new id)` pairs down the tree,
/// one per round per tree edge.
struct TablecastProgram {
    tree: TreeProtocol,
    expected: usize,
    queue: std::collections::VecDeque<(u64, u64)>,
    received: Vec<(u64, u64)>,
    children_final: bool,
}

impl NodeProgram for TablecastProgram {
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
        for (sender, bundle) in inbox {
            for payload in &bundle.payloads {
                if let Payload::ApspTriple { dist, source, .. } = payload {
                    let pair = (*source as u64, *dist);
                    self.received.push(pair);
                    self.queue.push_back(pair);
                } else {
                    self.tree.on_payload(round, *sender, payload);
                }
            }
        }
        let mut out = BTreeMap::new();
        self.tree.actions(round, &mut out);
        if self.tree.children_known() {
            self.children_final = true;
            if self.tree.children.is_empty() {
                self.queue.clear();
            } else if let Some((orig, new)) = self.queue.pop_front() {
                let payload = Payload::ApspTriple {
                    dist: new,
                    source: orig as usize,
                    sigma: Sigma::one(SigmaMode::Exact),
                    hops: None,
                };
                for &c in &self.tree.children.clone() {
                    out.entry(c).or_default().push(payload.clone());
                }
            }
        }
        out.into_iter().collect()
    }

    fn halted(&self) -> bool {
        self.received.len() >= self.expected && self.queue.is_empty() && self.children_final
    }
}

pub struct RelabelResult {
    pub graph: Digraph,
    /// original id -> new id (1-based rank in ascending id order).
    pub mapping: BTreeMap<u64, u64>,
    pub metrics: RunMetrics,
}

/// Relabels arbitrary distinct ids to `1..=n` by ascending id order,
/// simulating the distributed broadcast-and-assign scheme and counting its
/// rounds and messages.
pub fn relabel_ids(g: &Digraph) -> Result<RelabelResult, DriverError> {
    let n = g.n();
    let report = crate::graph::classify(g);
    if !report.weakly_connected {
        return Err(DriverError::NotWeaklyConnected);
    }
    let mut metrics = RunMetrics::default();

    // Phase 1: collect all ids everywhere (pipelined, undirected flood).
    let collect: Vec<CollectProgram> = (0..n)
        .map(|v| CollectProgram {
            channels: g.undirected_neighbors(v),
            list: vec![(0, g.id_of(v), false)],
        })
        .collect();
    let outcome = run_synchronous(
        g,
        collect,
        2 * n as u64 + 2,
        Bandwidth::Account,
        &EngineOptions::default(),
    )?;
    metrics.absorb(&outcome.metrics);
    let all_ids = outcome.programs[g.min_id_vertex()].ids();
    assert_eq!(all_ids.len(), n, "flood failed to collect every id");
    let mut sorted = all_ids.clone();
    sorted.sort_unstable();
    let mapping: BTreeMap<u64, u64> = sorted
        .iter()
        .enumerate()
        .map(|(i, &orig)| (orig, i as u64 + 1))
        .collect();

    // Phase 2: stream the table down a tree from the smallest-id node.
    let root = g.min_id_vertex();
    let table: Vec<(u64, u64)> = mapping.iter().map(|(&o, &r)| (o, r)).collect();
    let programs: Vec<TablecastProgram> = (0..n)
        .map(|v| TablecastProgram {
            tree: TreeProtocol::new(v, root, g.undirected_neighbors(v), false, Some(n as u64)),
            expected: if v == root { 0 } else { n },
            queue: if v == root {
                table.iter().copied().collect()
            } else {
                Default::default()
            },
            received: Vec::new(),
            children_final: false,
        })
        .collect();
    let outcome = run_synchronous(
        g,
        programs,
        (3 * n + 8) as u64,
        Bandwidth::Account,
        &EngineOptions::default(),
    )?;
    metrics.absorb(&outcome.metrics);
    for (v, p) in outcome.programs.iter().enumerate() {
        if v != root {
            let mut got = p.received.clone();
            got.sort_unstable();
            assert_eq!(got.len(), n, "tablecast incomplete at node {v}");
        }
    }

    // Apply the mapping: vertex with rank k becomes index k-1.
    let mut new_index = vec![0usize; n];
    for v in 0..n {
        new_index[v] = (mapping[&g.id_of(v)] - 1) as usize;
    }
    let mut relabeled = Digraph::new(n, g.is_weighted(), g.kind());
    for (u, v, w) in g.edges() {
        relabeled
            .add_edge(new_index[u], new_index[v], w)
            .map_err(|e: GraphError| DriverError::InvalidParameters(e.to_string()))?;
    }
    let relabeled = parse_normalize(relabeled);
    Ok(RelabelResult {
        graph: relabeled,
        mapping,
        metrics,
    })
}

fn parse_normalize(g: Digraph) -> Digraph {
    // Round-trip through the canonical text form to sort adjacency.
    crate::graph::parse_edge_list(&g.to_edge_list()).expect("relabeled graph is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind, GraphKind};

    #[test]
    fn relabels_by_sorted_rank() {
        let mut g = Digraph::new(3, false, GraphKind::Dag);
        g.add_edge(0, 1, 1).unwrap();
        g.add_edge(1, 2, 1).unwrap();
        let g = g.with_ids(vec![5, 9, 2]).unwrap();
        let out = relabel_ids(&g).unwrap();
        assert_eq!(out.mapping, BTreeMap::from([(2, 1), (5, 2), (9, 3)]));
        // Old index 0 (id 5) -> new id 2; edges follow the reindexing.
        assert_eq!(out.graph.ids(), &[1, 2, 3]);
        assert!(out.graph.has_edge(1, 2)); // id5 -> id9 became 2 -> 3
        assert!(out.graph.has_edge(2, 0)); // id9 -> id2 became 3 -> 1
        assert!(out.metrics.rounds_elapsed <= 6 * 3 + 8);
    }

    #[test]
    fn identity_when_already_canonical() {
        let g = generate(GeneratorKind::Path, 4, 0.0, None, 0).unwrap();
        let out = relabel_ids(&g).unwrap();
        assert_eq!(out.graph, g);
        let identity: Vec<(u64, u64)> = out.mapping.into_iter().collect();
        assert_eq!(identity, vec![(1, 1), (2, 2), (3, 3), (4, 4)]);
    }

    #[test]
    fn relabeled_graph_feeds_the_scheduled_apsp() {
        let base = generate(GeneratorKind::RandomDag, 9, 0.4, Some(7), 21).unwrap();
        if !crate::graph::classify(&base).weakly_connected {
            panic!("seed 21 should give a weakly connected dag");
        }
        let shuffled = base
            .clone()
            .with_ids(vec![12, 3, 44, 7, 90, 31, 2, 65, 18])
            .unwrap();
        assert!(crate::dag::run_dag_apsp(&shuffled, &Default::default()).is_err());
        let out = relabel_ids(&shuffled).unwrap();
        let art = crate::dag::run_dag_apsp(&out.graph, &Default::default()).unwrap();
        let expected = crate::oracle::apsp_with_counts(&out.graph);
        assert_eq!(art.output.to_solution().unwrap(), expected);
    }

    #[test]
    fn random_ids_sorted_rank() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let base = generate(GeneratorKind::RandomDag, 10, 0.4, None, 12).unwrap();
        let report = crate::graph::classify(&base);
        if !report.weakly_connected {
            return; // this seed happens to be connected; guard anyway
        }
        let mut ids: Vec<u64> = (1..=1000).collect();
        ids.shuffle(&mut rng);
        ids.truncate(10);
        let g = base.clone().with_ids(ids.clone()).unwrap();
        let out = relabel_ids(&g).unwrap();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        for (rank, orig) in sorted.iter().enumerate() {
            assert_eq!(out.mapping[orig], rank as u64 + 1);
        }
    }
}
