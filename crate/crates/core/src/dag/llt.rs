//! Longest-length-tree construction by delayed flooding: a node announces its
//! level only after hearing from every in-neighbor, so the announced level is
//! the longest-path length from the source set.

use crate::engine::{MessageBundle, NodeProgram, Outbox, Payload};
use crate::graph::Digraph;

pub struct LltProgram {
    indeg: usize,
    out_nbrs: Vec<usize>,
    is_seed: bool,
    pub level: u64,
    pub parent: Option<usize>,
    received: usize,
    pub finalize_round: Option<u64>,
    halted: bool,
}

impl LltProgram {
    /// One program per node; `seeds` start at level 0 in round 1.
    pub fn build(g: &Digraph, seeds: &[usize]) -> Vec<LltProgram> {
        (0..g.n())
            .map(|v| LltProgram {
                indeg: g.in_degree(v),
                out_nbrs: g.out_neighbors(v).iter().map(|&(t, _)| t).collect(),
                is_seed: seeds.contains(&v),
                level: 0,
                parent: None,
                received: 0,
                finalize_round: None,
                halted: false,
            })
            .collect()
    }

    pub fn finalized(&self) -> bool {
        self.finalize_round.is_some()
    }
}

impl NodeProgram for LltProgram {
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
        for (sender, bundle) in inbox {
            for payload in &bundle.payloads {
                let Payload::LltLevel { level } = payload else {
                    debug_assert!(false, "unexpected payload in tree phase");
                    continue;
                };
                if level + 1 > self.level {
                    self.level = level + 1;
                    self.parent = Some(*sender);
                }
                self.received += 1;
            }
        }
        let fires = if self.is_seed {
            round == 1
        } else {
            self.finalize_round.is_none() && self.indeg > 0 && self.received == self.indeg
        };
        let mut out: Outbox = Vec::new();
        if fires {
            self.finalize_round = Some(round);
            self.halted = true;
            if !self.out_nbrs.is_empty() {
                let payload = Payload::LltLevel { level: self.level };
                out = self
                    .out_nbrs
                    .iter()
                    .map(|&t| (t, vec![payload.clone()]))
                    .collect();
            }
        }
        out
    }

    fn halted(&self) -> bool {
        self.halted
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LltResult {
    pub levels: Vec<u64>,
    pub parents: Vec<Option<usize>>,
    /// Rounds after the sources' initial broadcast; equals the longest path
    /// length when every vertex is covered.
    pub rounds: u64,
    pub engine_rounds: u64,
}

/// Nodes a single-source build leaves unfinalized are unreachable.
pub fn collect_llt<I: IntoIterator<Item = LltProgram>>(
    programs: I,
    engine_rounds: u64,
) -> Result<LltResult, usize> {
    let mut levels = Vec::new();
    let mut parents = Vec::new();
    for (v, p) in programs.into_iter().enumerate() {
        if !p.finalized() {
            return Err(v);
        }
        levels.push(p.level);
        parents.push(p.parent);
    }
    Ok(LltResult {
        levels,
        parents,
        rounds: engine_rounds.saturating_sub(1),
        engine_rounds,
    })
}
