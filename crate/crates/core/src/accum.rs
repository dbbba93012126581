//! Time-reversed dependency accumulation.
//!
//! After a forward phase in which node `v` transmitted its finalized entry
//! for source `s` in round `τ_sv`, the clock resets and `v` sends its
//! accumulation value for `s` in round `R − τ_sv + 1`. Successors in the
//! shortest-path dag of `s` transmitted strictly later in the forward phase,
//! so their values arrive before `v`'s own send round and the backward
//! recursion needs no coordination. At a fixed node the forward timestamps
//! are pairwise distinct, so each round carries at most one source's value.

use std::collections::BTreeMap;

use crate::engine::{MessageBundle, NodeProgram, Outbox, Payload};
use crate::numeric::{Dependency, Sigma, SigmaMode};

/// Forward-phase facts one node needs per source: send timestamp, path
/// count, and shortest-path predecessors.
#[derive(Clone, Debug)]
pub struct SourceFacts {
    pub tau: u64,
    pub sigma: Sigma,
    pub preds: Vec<usize>,
}

pub struct AccumProgram {
    me: usize,
    mode: SigmaMode,
    /// round -> source scheduled in that round.
    schedule: BTreeMap<u64, usize>,
    facts: BTreeMap<usize, SourceFacts>,
    delta: BTreeMap<usize, Dependency>,
    last_send_round: u64,
    halted: bool,
}

impl AccumProgram {
    /// `forward_end` is the recorded termination round of the forward phase.
    pub fn new(
        me: usize,
        mode: SigmaMode,
        forward_end: u64,
        facts: BTreeMap<usize, SourceFacts>,
    ) -> AccumProgram {
        let mut schedule = BTreeMap::new();
        let mut last_send_round = 0;
        for (&source, f) in &facts {
            assert!(f.tau <= forward_end, "timestamp past the forward horizon");
            let round = forward_end - f.tau + 1;
            let clash = schedule.insert(round, source);
            assert!(
                clash.is_none(),
                "two sources share accumulation round {round} at node {me}"
            );
            if !f.preds.is_empty() {
                last_send_round = last_send_round.max(round);
            }
        }
        AccumProgram {
            me,
            mode,
            schedule,
            facts,
            delta: BTreeMap::new(),
            last_send_round,
            halted: false,
        }
    }

    /// Dependency of each source on this node, excluding the node's own row.
    pub fn dependencies(&self) -> BTreeMap<usize, Dependency> {
        self.delta
            .iter()
            .filter(|(&s, _)| s != self.me)
            .map(|(&s, d)| (s, d.clone()))
            .collect()
    }

    /// The centrality score: the sum of dependencies over sources `s ≠ me`.
    pub fn centrality(&self) -> Dependency {
        let mut total = Dependency::zero(self.mode);
        for (&s, d) in &self.delta {
            if s != self.me {
                total.add(d);
            }
        }
        total
    }
}

impl NodeProgram for AccumProgram {
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
        for (_, bundle) in inbox {
            for payload in &bundle.payloads {
                let Payload::AccumValue { source, value } = payload else {
                    debug_assert!(false, "unexpected payload in accumulation phase");
                    continue;
                };
                let facts = self
                    .facts
                    .get(source)
                    .expect("accumulation value for an unreachable source");
                self.delta
                    .entry(*source)
                    .or_insert_with(|| Dependency::zero(self.mode))
                    .add_scaled(&facts.sigma, value);
            }
        }
        let mut out: Outbox = Vec::new();
        if let Some(&source) = self.schedule.get(&round) {
            let facts = &self.facts[&source];
            if !facts.preds.is_empty() {
                let delta = self
                    .delta
                    .entry(source)
                    .or_insert_with(|| Dependency::zero(self.mode));
                let value = Dependency::accumulation_message(delta, &facts.sigma);
                for &p in &facts.preds {
                    out.push((
                        p,
                        vec![Payload::AccumValue {
                            source,
                            value: value.clone(),
                        }],
                    ));
                }
            }
        }
        if round >= self.last_send_round {
            self.halted = true;
        }
        out
    }

    fn halted(&self) -> bool {
        self.halted
    }
}
