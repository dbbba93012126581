//! Level-and-id scheduled shortest paths on weighted dags.
//!
//! Node `y` processes source `x` at the absolute round `ID_x + level(y)`. By
//! then every in-neighbor's value for `x` has arrived (any `x ~> y` path has
//! at most `level(y) - level(x)` edges and departs `x` at `ID_x + level(x)`),
//! so a single minimum over the buffered values is the exact distance. Ids
//! are distinct, so each node transmits for at most one source per round.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{MessageBundle, NodeProgram, Outbox, Payload};
use crate::graph::Digraph;
use crate::numeric::{Sigma, SigmaMode};

/// Finalized per-source facts at one node.
#[derive(Clone, Debug)]
pub struct SourceResult {
    pub dist: u64,
    pub sigma: Sigma,
    pub preds: BTreeSet<usize>,
    pub tau: u64,
}

pub struct DagSsspProgram {
    me: usize,
    /// External id (ids are exactly 1..=n, so id == index + 1).
    my_id: u64,
    n: u64,
    level: u64,
    out_nbrs: Vec<usize>,
    in_weights: BTreeMap<usize, u64>,
    mode: SigmaMode,
    buffers: BTreeMap<usize, Vec<(usize, u64, Sigma)>>,
    pub results: BTreeMap<usize, SourceResult>,
    /// `(round, source, sender)` per received payload, for the schedule
    /// tightness check.
    pub arrival_log: Vec<(u64, usize, usize)>,
    /// `(round, source)` per transmission, for the one-source-per-round
    /// check.
    pub send_log: Vec<(u64, usize)>,
    halted: bool,
}

impl DagSsspProgram {
    pub fn build(g: &Digraph, levels: &[u64], mode: SigmaMode) -> Vec<DagSsspProgram> {
        (0..g.n())
            .map(|v| DagSsspProgram {
                me: v,
                my_id: g.id_of(v),
                n: g.n() as u64,
                level: levels[v],
                out_nbrs: g.out_neighbors(v).iter().map(|&(t, _)| t).collect(),
                in_weights: g.in_neighbors(v).iter().map(|&(u, w)| (u, w)).collect(),
                mode,
                buffers: BTreeMap::new(),
                results: BTreeMap::new(),
                arrival_log: Vec::new(),
                send_log: Vec::new(),
                halted: false,
            })
            .collect()
    }
}

impl NodeProgram for DagSsspProgram {
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
        for (sender, bundle) in inbox {
            for payload in &bundle.payloads {
                let Payload::DagSsspTriple {
                    source,
                    dist,
                    sigma,
                } = payload
                else {
                    debug_assert!(false, "unexpected payload in scheduled phase");
                    continue;
                };
                self.arrival_log.push((round, *source, *sender));
                self.buffers
                    .entry(*source)
                    .or_default()
                    .push((*sender, *dist, sigma.clone()));
            }
        }

        let mut out: Outbox = Vec::new();
        // The source scheduled now: ids are 1..=n, so id r - level names one.
        if round > self.level && round - self.level <= self.n {
            let source = (round - self.level - 1) as usize;
            let result = if source == self.me {
                debug_assert_eq!(self.my_id + self.level, round);
                Some(SourceResult {
                    dist: 0,
                    sigma: Sigma::one(self.mode),
                    preds: BTreeSet::new(),
                    tau: round,
                })
            } else {
                self.buffers.remove(&source).map(|arrivals| {
                    let best = arrivals
                        .iter()
                        .map(|&(u, d, _)| d + self.in_weights[&u])
                        .min()
                        .expect("nonempty buffer");
                    let mut preds = BTreeSet::new();
                    let mut sigma = Sigma::zero(self.mode);
                    for (u, d, s) in &arrivals {
                        if d + self.in_weights[u] == best && preds.insert(*u) {
                            sigma.add_assign(s);
                        }
                    }
                    SourceResult {
                        dist: best,
                        sigma,
                        preds,
                        tau: round,
                    }
                })
            };
            if let Some(result) = result {
                if !self.out_nbrs.is_empty() {
                    self.send_log.push((round, source));
                    let payload = Payload::DagSsspTriple {
                        source,
                        dist: result.dist,
                        sigma: result.sigma.clone(),
                    };
                    for &t in &self.out_nbrs {
                        out.push((t, vec![payload.clone()]));
                    }
                }
                self.results.insert(source, result);
            }
        }
        if round >= self.n + self.level {
            self.halted = true;
        }
        out
    }

    fn halted(&self) -> bool {
        self.halted
    }
}
