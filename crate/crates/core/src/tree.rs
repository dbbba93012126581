//! Tree-building over the bidirectional channels, with convergecast counting
//! and broadcast of the vertex total.
//!
//! The root floods a token; each node adopts the first sender (smallest index
//! on ties) as parent and rebroadcasts once, carrying its parent choice so
//! that parents learn their children without extra messages. A node has seen
//! every possible child announcement once all neighbor tokens are in.
//!
//! When counting is enabled, subtree sizes convergecast to the root and the
//! total flows back down the tree.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::Payload;

#[derive(Clone, Debug)]
pub struct TreeProtocol {
    pub me: usize,
    pub root: usize,
    und_nbrs: Vec<usize>,
    counting: bool,
    pub depth: Option<u64>,
    pub parent: Option<usize>,
    token_emitted: bool,
    heard: BTreeSet<usize>,
    pub children: BTreeSet<usize>,
    child_counts: BTreeMap<usize, u64>,
    count_sent: bool,
    pub n_known: Option<u64>,
    pub n_learn_round: Option<u64>,
    forward_n: Option<u64>,
}

impl TreeProtocol {
    pub fn new(
        me: usize,
        root: usize,
        und_nbrs: Vec<usize>,
        counting: bool,
        n0: Option<u64>,
    ) -> Self {
        TreeProtocol {
            me,
            root,
            und_nbrs,
            counting,
            depth: (me == root).then_some(0),
            parent: None,
            token_emitted: false,
            heard: BTreeSet::new(),
            children: BTreeSet::new(),
            child_counts: BTreeMap::new(),
            count_sent: false,
            n_known: n0,
            n_learn_round: n0.map(|_| 0),
            forward_n: None,
        }
    }

    /// All neighbor tokens heard, so the children set is final.
    pub fn children_known(&self) -> bool {
        self.heard.len() == self.und_nbrs.len() && self.depth.is_some()
    }

    /// Handles a tree payload; returns false if the payload is not ours.
    pub fn on_payload(&mut self, round: u64, sender: usize, payload: &Payload) -> bool {
        match payload {
            Payload::BfsToken { depth, parent } => {
                self.heard.insert(sender);
                if *parent == Some(self.me) {
                    self.children.insert(sender);
                }
                if self.depth.is_none() {
                    self.depth = Some(depth + 1);
                    self.parent = Some(sender);
                }
                true
            }
            Payload::ConvergecastCount { size } => {
                self.child_counts.insert(sender, *size);
                true
            }
            Payload::NBroadcast { n } => {
                if self.n_known.is_none() {
                    self.n_known = Some(*n);
                    self.n_learn_round = Some(round);
                    self.forward_n = Some(*n);
                }
                true
            }
            _ => false,
        }
    }

    /// Emits this round's tree sends into `out`.
    pub fn actions(&mut self, round: u64, out: &mut BTreeMap<usize, Vec<Payload>>) {
        // Token: the root fires in round 1; everyone else right after
        // adopting a depth.
        if !self.token_emitted {
            let fire = if self.me == self.root {
                round == 1
            } else {
                self.depth.is_some()
            };
            if fire {
                self.token_emitted = true;
                let token = Payload::BfsToken {
                    depth: self.depth.unwrap(),
                    parent: self.parent,
                };
                for &u in &self.und_nbrs {
                    out.entry(u).or_default().push(token.clone());
                }
            }
        }
        if self.counting && !self.count_sent && self.children_known() {
            let all_counted = self
                .children
                .iter()
                .all(|c| self.child_counts.contains_key(c));
            if all_counted {
                self.count_sent = true;
                let total = 1 + self.child_counts.values().sum::<u64>();
                if self.me == self.root {
                    if self.n_known.is_none() {
                        self.n_known = Some(total);
                        self.n_learn_round = Some(round);
                        self.forward_n = Some(total);
                    }
                } else if let Some(p) = self.parent {
                    out.entry(p)
                        .or_default()
                        .push(Payload::ConvergecastCount { size: total });
                }
            }
        }
        if let Some(n) = self.forward_n.take() {
            for &c in &self.children {
                out.entry(c).or_default().push(Payload::NBroadcast { n });
            }
        }
    }

    /// True once the counting protocol has nothing left to do at this node.
    pub fn counting_finished(&self) -> bool {
        !self.counting || (self.n_known.is_some() && self.forward_n.is_none())
    }
}
