//! Standalone vertex-counting phase for runs that start without `n`: a token
//! wave from the smallest-id node over the bidirectional channels, subtree
//! counts back up, and the total broadcast down.

use crate::engine::{MessageBundle, NodeProgram, Outbox};
use crate::graph::Digraph;
use crate::tree::TreeProtocol;

pub struct NCompProgram {
    tree: TreeProtocol,
}

impl NCompProgram {
    pub fn build(g: &Digraph) -> Vec<NCompProgram> {
        let root = g.min_id_vertex();
        (0..g.n())
            .map(|v| NCompProgram {
                tree: TreeProtocol::new(v, root, g.undirected_neighbors(v), true, None),
            })
            .collect()
    }

    pub fn learned_n(&self) -> Option<u64> {
        self.tree.n_known
    }
}

impl NodeProgram for NCompProgram {
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
        for (sender, bundle) in inbox {
            for payload in &bundle.payloads {
                let handled = self.tree.on_payload(round, *sender, payload);
                debug_assert!(handled, "unexpected payload in counting phase");
            }
        }
        let mut out = std::collections::BTreeMap::new();
        self.tree.actions(round, &mut out);
        out.into_iter().collect()
    }

    fn halted(&self) -> bool {
        self.tree.counting_finished()
    }
}
