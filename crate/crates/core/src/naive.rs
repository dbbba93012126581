//! Naive concurrent BFS with per-node start times, as scheduled by a
//! pebble-traversal: each node forwards the first arrival of every wave in
//! the round it lands. Two waves landing together at one node must share a
//! channel in the same round, which is exactly the congestion the pipelined
//! algorithm avoids.

use std::collections::BTreeMap;

use crate::engine::{MessageBundle, NodeProgram, Outbox, Payload};
use crate::graph::Digraph;
use crate::numeric::{Sigma, SigmaMode};

pub struct NaiveBfsProgram {
    me: usize,
    out_nbrs: Vec<usize>,
    start_round: Option<u64>,
    known: BTreeMap<usize, u64>,
    round_limit: u64,
    halted: bool,
}

impl NaiveBfsProgram {
    /// `starts[v]` is the round in which vertex `v` launches its own wave
    /// (`None` for vertices that never do).
    pub fn build(g: &Digraph, starts: &[Option<u64>], round_limit: u64) -> Vec<NaiveBfsProgram> {
        (0..g.n())
            .map(|v| NaiveBfsProgram {
                me: v,
                out_nbrs: g.out_neighbors(v).iter().map(|&(t, _)| t).collect(),
                start_round: starts[v],
                known: BTreeMap::new(),
                round_limit,
                halted: false,
            })
            .collect()
    }

    pub fn distances(&self) -> &BTreeMap<usize, u64> {
        &self.known
    }
}

impl NodeProgram for NaiveBfsProgram {
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
        let mut forwards: Vec<(usize, u64)> = Vec::new();
        for (_, bundle) in inbox {
            for payload in &bundle.payloads {
                let Payload::ApspTriple { dist, source, .. } = payload else {
                    continue;
                };
                if !self.known.contains_key(source) {
                    self.known.insert(*source, dist + 1);
                    forwards.push((*source, dist + 1));
                }
            }
        }
        if self.start_round == Some(round) {
            self.known.insert(self.me, 0);
            forwards.push((self.me, 0));
        }
        self.halted = round >= self.round_limit;
        if forwards.is_empty() || self.out_nbrs.is_empty() {
            return Vec::new();
        }
        let payloads: Vec<Payload> = forwards
            .into_iter()
            .map(|(source, dist)| Payload::ApspTriple {
                dist,
                source,
                sigma: Sigma::one(SigmaMode::Exact),
                hops: None,
            })
            .collect();
        self.out_nbrs
            .iter()
            .map(|&t| (t, payloads.clone()))
            .collect()
    }

    fn halted(&self) -> bool {
        self.halted
    }
}

/// Pebble-style start schedule for the congestion fixture: the chain floods
/// early and the two late waves from v and w meet at u4 and must depart it in
/// the same round.
pub fn congestion_fixture_starts(n: usize) -> Vec<Option<u64>> {
    assert_eq!(n, 8, "schedule is specific to the 8-vertex fixture");
    let mut starts = vec![None; n];
    starts[0] = Some(1); // s
    starts[1] = Some(3); // u1
    starts[2] = Some(5); // u2
    starts[3] = Some(7); // u3
    starts[4] = Some(9); // u4
    starts[5] = Some(11); // u5
    starts[6] = Some(22); // v
    starts[7] = Some(25); // w
    starts
}
