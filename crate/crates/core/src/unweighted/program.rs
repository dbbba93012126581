//! The node program for pipelined directed APSP with shortest-path counts and
//! predecessors, plus the diameter finalizer that terminates the run early on
//! strongly connected graphs.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{MessageBundle, NodeProgram, Outbox, Payload};
use crate::graph::Digraph;
use crate::numeric::SigmaMode;
use crate::tree::TreeProtocol;
use crate::unweighted::pipeline::{
    InsertEvent, ListPolicy, NodeTrace, PipelineList, ReceiveEffect, SendEvent,
};

/// Convergecast/broadcast state for the diameter finalizer.
#[derive(Clone, Debug, Default)]
struct FinalizerState {
    /// The once-only flag guarding the upward report.
    fired: bool,
    child_dstar: BTreeMap<usize, u64>,
    learned_diameter: Option<u64>,
    forward_diameter: Option<u64>,
    done: bool,
}

#[derive(Clone, Debug)]
pub struct ApspProgramConfig {
    /// `Some(n)` when the vertex count is known a priori.
    pub known_n: Option<u64>,
    pub finalizer: bool,
    pub sigma_mode: SigmaMode,
    /// Root for the tree protocols (the smallest-id vertex).
    pub root: usize,
    pub policy: ListPolicy,
    /// Restricts initial list seeding to these sources (bounded-hop
    /// variants); `None` seeds every node with its own entry.
    pub sources: Option<BTreeSet<usize>>,
    /// Hard stop for the bounded-hop variants (`r + h` or `k + h`).
    pub round_limit: Option<u64>,
}

pub struct ApspProgram {
    me: usize,
    out_nbrs: Vec<usize>,
    list: PipelineList,
    tree: Option<TreeProtocol>,
    fin: FinalizerState,
    finalizer_enabled: bool,
    policy: ListPolicy,
    round_limit: Option<u64>,
    n_known: Option<u64>,
    n_learn_round: Option<u64>,
    halted: bool,
    pub trace: NodeTrace,
}

impl ApspProgram {
    pub fn build(g: &Digraph, config: &ApspProgramConfig) -> Vec<ApspProgram> {
        (0..g.n())
            .map(|v| {
                let is_source = config.sources.as_ref().is_none_or(|s| s.contains(&v));
                let with_hops = matches!(config.policy, ListPolicy::HopBounded { .. });
                let tree_enabled = config.finalizer || config.known_n.is_none();
                ApspProgram {
                    me: v,
                    out_nbrs: g.out_neighbors(v).iter().map(|&(t, _)| t).collect(),
                    list: PipelineList::seeded(v, is_source, config.sigma_mode, with_hops),
                    tree: tree_enabled.then(|| {
                        TreeProtocol::new(
                            v,
                            config.root,
                            g.undirected_neighbors(v),
                            config.known_n.is_none(),
                            config.known_n,
                        )
                    }),
                    fin: FinalizerState::default(),
                    finalizer_enabled: config.finalizer,
                    policy: config.policy,
                    round_limit: config.round_limit,
                    n_known: config.known_n,
                    n_learn_round: config.known_n.map(|_| 0),
                    halted: false,
                    trace: NodeTrace::default(),
                }
            })
            .collect()
    }

    pub fn list(&self) -> &PipelineList {
        &self.list
    }

    pub fn learned_diameter(&self) -> Option<u64> {
        self.fin.learned_diameter
    }

    pub fn known_n(&self) -> Option<u64> {
        self.n_known
    }

    fn finalizer_step(&mut self, round: u64, out: &mut BTreeMap<usize, Vec<Payload>>) {
        if self.fin.done {
            return;
        }
        // A received diameter is rebroadcast down the tree; the node then
        // stops.
        if let Some(d) = self.fin.forward_diameter.take() {
            if let Some(tree) = &self.tree {
                for &c in &tree.children {
                    out.entry(c)
                        .or_default()
                        .push(Payload::DiameterDown { diameter: d });
                }
            }
            self.fin.done = true;
            return;
        }
        if self.fin.fired {
            return;
        }
        let Some(n) = self.n_known else { return };
        let Some(tree) = &self.tree else { return };
        if self.list.len() as u64 != n || !tree.children_known() {
            return;
        }
        let lmax = self.list.max_dist_plus_rank().unwrap_or(0);
        if round < lmax {
            return;
        }
        let all_reported = tree
            .children
            .iter()
            .all(|c| self.fin.child_dstar.contains_key(c));
        if !all_reported {
            return;
        }
        // A leaf that had n in time fires in the exact round its last entry
        // is transmitted; internal nodes legitimately wait for child reports.
        if tree.children.is_empty() && self.n_learn_round.unwrap_or(u64::MAX) <= lmax {
            debug_assert_eq!(
                round, lmax,
                "finalizer missed its exact round at {}",
                self.me
            );
        }
        let own = self.list.max_dist().unwrap_or(0);
        let dstar = self.fin.child_dstar.values().copied().fold(own, u64::max);
        self.fin.fired = true;
        if self.me == tree.root {
            self.fin.learned_diameter = Some(dstar);
            let children: Vec<usize> = tree.children.iter().copied().collect();
            for c in children {
                out.entry(c)
                    .or_default()
                    .push(Payload::DiameterDown { diameter: dstar });
            }
            self.fin.done = true;
        } else if let Some(p) = tree.parent {
            out.entry(p)
                .or_default()
                .push(Payload::FinalizerUp { dist: dstar });
        }
    }
}

impl NodeProgram for ApspProgram {
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
        // Receive: triples update the list, tree and finalizer payloads their
        // own state. Inbox is sorted by sender, so processing is
        // deterministic.
        for (sender, bundle) in inbox {
            for payload in &bundle.payloads {
                match payload {
                    Payload::ApspTriple {
                        dist,
                        source,
                        sigma,
                        hops,
                    } => {
                        let effect = self.list.receive_rule(
                            *sender,
                            *dist,
                            *source,
                            sigma.clone(),
                            *hops,
                            self.policy,
                        );
                        match effect {
                            ReceiveEffect::Inserted { rank } | ReceiveEffect::Replaced { rank } => {
                                self.trace.inserts.push(InsertEvent {
                                    round,
                                    source: *source,
                                    dist: dist + 1,
                                    rank,
                                });
                            }
                            _ => {}
                        }
                    }
                    Payload::FinalizerUp { dist } => {
                        self.fin.child_dstar.insert(*sender, *dist);
                    }
                    Payload::DiameterDown { diameter } => {
                        if self.fin.learned_diameter.is_none() {
                            self.fin.learned_diameter = Some(*diameter);
                            self.fin.forward_diameter = Some(*diameter);
                        }
                    }
                    other => {
                        if let Some(tree) = &mut self.tree {
                            let handled = tree.on_payload(round, *sender, other);
                            debug_assert!(handled, "unexpected payload {other:?}");
                        }
                    }
                }
            }
        }
        if let ListPolicy::HopBounded { keep: Some(r), .. } = self.policy {
            self.list.truncate_to(r);
        }
        if let Some(tree) = &self.tree {
            if self.n_known.is_none() {
                if let Some(n) = tree.n_known {
                    self.n_known = Some(n);
                    self.n_learn_round = tree.n_learn_round;
                }
            }
        }

        let mut out: BTreeMap<usize, Vec<Payload>> = BTreeMap::new();

        // Pipeline send rule.
        self.trace.snapshots.push(self.list.snapshot(round));
        if let Some((dist, source, sigma, hops)) = self.list.send_rule(round) {
            self.trace.sends.push(SendEvent {
                round,
                source,
                dist,
            });
            let triple = Payload::ApspTriple {
                dist,
                source,
                sigma,
                hops,
            };
            for &t in &self.out_nbrs {
                out.entry(t).or_default().push(triple.clone());
            }
        }

        // Tree protocol (token wave, counting, n broadcast).
        if let Some(tree) = &mut self.tree {
            tree.actions(round, &mut out);
            if self.n_known.is_none() {
                if let Some(n) = tree.n_known {
                    self.n_known = Some(n);
                    self.n_learn_round = tree.n_learn_round;
                }
            }
        }

        // Diameter finalizer.
        if self.finalizer_enabled {
            self.finalizer_step(round, &mut out);
        }

        // Halting: diameter received and rebroadcast, the 2n cap once n is
        // known, or the variant round limit. A node whose list is complete
        // keeps waiting for the diameter broadcast instead of capping, so the
        // finalizer finishes even when n + 5D exceeds 2n.
        if self.fin.done {
            self.halted = true;
        }
        if let Some(n) = self.n_known {
            if round >= 2 * n && self.tree.as_ref().is_none_or(|t| t.counting_finished()) {
                // On a strongly connected graph the diameter broadcast lands
                // by round 5n (report round <= max(n+D, 3Du+4) plus two tree
                // sweeps, with D, Du <= n-1); waiting longer is pointless.
                let awaiting_diameter = self.finalizer_enabled
                    && !self.fin.done
                    && self.list.len() as u64 == n
                    && round < 5 * n;
                if !awaiting_diameter {
                    self.halted = true;
                }
            }
        }
        if let Some(limit) = self.round_limit {
            if round >= limit {
                self.halted = true;
            }
        }

        out.into_iter().collect()
    }

    fn halted(&self) -> bool {
        self.halted
    }
}
