//! The pipelined distance list and its send/receive rules.
//!
//! Each node keeps an ordered list of `(distance, source)` entries in
//! lexicographic order. An entry is transmitted in the unique round equal to
//! its distance plus its current 1-based rank; insertions always land below
//! the send frontier, so every entry is sent exactly once per source.

use std::collections::BTreeSet;

use crate::numeric::{Sigma, SigmaMode};

/// One pipelined entry with its path count, predecessor set, and send round.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub dist: u64,
    pub source: usize,
    pub sigma: Sigma,
    pub preds: BTreeSet<usize>,
    pub sent_round: Option<u64>,
    /// Hop count for the bounded-hop variants (equal to `dist` on unweighted
    /// graphs, carried explicitly in the payload).
    pub hops: Option<u64>,
}

/// Retention policy: the full all-pairs pipeline, or the bounded-hop variants
/// that keep only relevant entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ListPolicy {
    Full,
    /// Keep entries within `h` hops; `keep` limits the list to the `keep`
    /// lexicographically smallest entries (source detection) when set.
    HopBounded {
        h: u64,
        keep: Option<usize>,
    },
}

/// What a received triple did to the list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReceiveEffect {
    /// New source: inserted at `rank`.
    Inserted { rank: usize },
    /// Equal distance: path count and predecessor merged.
    Merged,
    /// Strictly smaller distance: entry replaced, re-ranked at `rank`.
    Replaced { rank: usize },
    /// Larger or equal-but-worse distance, or hop bound exceeded.
    Ignored,
}

/// Insert/send events recorded for the pipeline invariant checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsertEvent {
    /// Engine round during which the insertion was processed. The triggering
    /// message was sent in round `round - 1`.
    pub round: u64,
    pub source: usize,
    pub dist: u64,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SendEvent {
    pub round: u64,
    pub source: usize,
    pub dist: u64,
}

/// Per-round list snapshot: `(source, dist, rank)` per entry, taken at send
/// time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundSnapshot {
    pub round: u64,
    pub entries: Vec<(usize, u64, usize)>,
}

#[derive(Clone, Debug, Default)]
pub struct NodeTrace {
    pub inserts: Vec<InsertEvent>,
    pub sends: Vec<SendEvent>,
    pub snapshots: Vec<RoundSnapshot>,
}

/// The ordered list `L_v`.
#[derive(Clone, Debug, Default)]
pub struct PipelineList {
    entries: Vec<Entry>,
}

impl PipelineList {
    /// A list seeded with the node's own zero entry (sources only in the
    /// bounded-hop variants).
    pub fn seeded(me: usize, is_source: bool, mode: SigmaMode, with_hops: bool) -> Self {
        let mut list = PipelineList::default();
        if is_source {
            list.entries.push(Entry {
                dist: 0,
                source: me,
                sigma: Sigma::one(mode),
                preds: BTreeSet::new(),
                sent_round: None,
                hops: with_hops.then_some(0),
            });
        }
        list
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry_for(&self, source: usize) -> Option<&Entry> {
        self.entries.iter().find(|e| e.source == source)
    }

    /// 1-based rank of the entry for `source`.
    pub fn rank_of(&self, source: usize) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.source == source)
            .map(|i| i + 1)
    }

    /// Largest `dist + rank` over all entries (the last send round if the
    /// list stays unchanged).
    pub fn max_dist_plus_rank(&self) -> Option<u64> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| e.dist + (i + 1) as u64)
            .max()
    }

    pub fn max_dist(&self) -> Option<u64> {
        self.entries.iter().map(|e| e.dist).max()
    }

    /// The send rule: in round `r` transmit the entry whose distance plus
    /// current rank equals `r`, if any. At most one entry can qualify; two
    /// would indicate a broken pipeline invariant.
    pub fn send_rule(&mut self, round: u64) -> Option<(u64, usize, Sigma, Option<u64>)> {
        let mut hit: Option<usize> = None;
        for (i, e) in self.entries.iter().enumerate() {
            if e.dist + (i + 1) as u64 == round {
                assert!(
                    hit.is_none(),
                    "two entries satisfy the send rule in round {round}"
                );
                hit = Some(i);
            }
        }
        let i = hit?;
        let e = &mut self.entries[i];
        debug_assert!(e.sent_round.is_none(), "entry sent twice");
        e.sent_round = Some(round);
        Some((e.dist, e.source, e.sigma.clone(), e.hops))
    }

    /// The receive rule for a triple `(dist_su, source, sigma_su)` heard from
    /// in-neighbor `from`: insert for an unseen source, merge path counts on
    /// an equal distance, replace on a strictly smaller one.
    pub fn receive_rule(
        &mut self,
        from: usize,
        dist_su: u64,
        source: usize,
        sigma_su: Sigma,
        hops_su: Option<u64>,
        policy: ListPolicy,
    ) -> ReceiveEffect {
        let new_dist = dist_su + 1;
        let new_hops = hops_su.map(|h| h + 1);
        if let ListPolicy::HopBounded { h, .. } = policy {
            if new_hops.unwrap_or(new_dist) > h {
                return ReceiveEffect::Ignored;
            }
        }
        match self.entries.iter().position(|e| e.source == source) {
            None => {
                let rank = self.insert_sorted(Entry {
                    dist: new_dist,
                    source,
                    sigma: sigma_su,
                    preds: BTreeSet::from([from]),
                    sent_round: None,
                    hops: new_hops,
                });
                ReceiveEffect::Inserted { rank }
            }
            Some(i) if self.entries[i].dist == new_dist => {
                let e = &mut self.entries[i];
                e.sigma.add_assign(&sigma_su);
                e.preds.insert(from);
                ReceiveEffect::Merged
            }
            Some(i) if self.entries[i].dist > new_dist => {
                self.entries.remove(i);
                let rank = self.insert_sorted(Entry {
                    dist: new_dist,
                    source,
                    sigma: sigma_su,
                    preds: BTreeSet::from([from]),
                    sent_round: None,
                    hops: new_hops,
                });
                ReceiveEffect::Replaced { rank }
            }
            Some(_) => ReceiveEffect::Ignored,
        }
    }

    /// Drops entries beyond the retention limit (source-detection variant).
    pub fn truncate_to(&mut self, keep: usize) {
        self.entries.truncate(keep);
    }

    fn insert_sorted(&mut self, entry: Entry) -> usize {
        let pos = self
            .entries
            .partition_point(|e| (e.dist, e.source) < (entry.dist, entry.source));
        self.entries.insert(pos, entry);
        pos + 1
    }

    pub fn snapshot(&self, round: u64) -> RoundSnapshot {
        RoundSnapshot {
            round,
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| (e.source, e.dist, i + 1))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma(x: u32) -> Sigma {
        Sigma::Exact(x.into())
    }

    #[test]
    fn self_entry_sent_in_round_one() {
        let mut list = PipelineList::seeded(0, true, SigmaMode::Exact, false);
        let (d, s, sg, _) = list.send_rule(1).unwrap();
        assert_eq!((d, s), (0, 0));
        assert_eq!(sg, sigma(1));
        assert_eq!(list.entry_for(0).unwrap().sent_round, Some(1));
    }

    #[test]
    fn p3_middle_node_sends_in_round_three() {
        // v2 on the path v1->v2->v3: own entry plus (1, v1).
        let mut list = PipelineList::seeded(1, true, SigmaMode::Exact, false);
        assert_eq!(
            list.receive_rule(0, 0, 0, sigma(1), None, ListPolicy::Full),
            ReceiveEffect::Inserted { rank: 2 }
        );
        assert!(list.send_rule(2).is_none());
        let (d, s, _, _) = list.send_rule(3).unwrap();
        assert_eq!((d, s), (1, 0));
    }

    #[test]
    fn p3_end_node_sends_in_round_five() {
        let mut list = PipelineList::seeded(2, true, SigmaMode::Exact, false);
        list.receive_rule(1, 0, 1, sigma(1), None, ListPolicy::Full);
        list.receive_rule(1, 1, 0, sigma(1), None, ListPolicy::Full);
        let (d, s, _, _) = list.send_rule(5).unwrap();
        assert_eq!((d, s), (2, 0));
    }

    #[test]
    fn receive_cases() {
        let mut list = PipelineList::seeded(9, false, SigmaMode::Exact, false);
        // First arrival inserts.
        assert_eq!(
            list.receive_rule(7, 0, 0, sigma(1), None, ListPolicy::Full),
            ReceiveEffect::Inserted { rank: 1 }
        );
        // Equal distance merges counts and predecessors.
        let mut list = PipelineList::default();
        list.receive_rule(4, 1, 5, sigma(3), None, ListPolicy::Full);
        assert_eq!(
            list.receive_rule(6, 1, 5, sigma(2), None, ListPolicy::Full),
            ReceiveEffect::Merged
        );
        let e = list.entry_for(5).unwrap();
        assert_eq!(e.sigma, sigma(5));
        assert_eq!(e.preds, BTreeSet::from([4, 6]));
        // Strictly smaller distance replaces and resets.
        let mut list = PipelineList::default();
        list.receive_rule(4, 2, 5, sigma(3), None, ListPolicy::Full);
        assert_eq!(
            list.receive_rule(6, 1, 5, sigma(4), None, ListPolicy::Full),
            ReceiveEffect::Replaced { rank: 1 }
        );
        let e = list.entry_for(5).unwrap();
        assert_eq!((e.dist, e.sigma.clone()), (2, sigma(4)));
        assert_eq!(e.preds, BTreeSet::from([6]));
        // Larger distance ignored.
        assert_eq!(
            list.receive_rule(7, 5, 5, sigma(9), None, ListPolicy::Full),
            ReceiveEffect::Ignored
        );
    }

    #[test]
    fn lexicographic_order_maintained() {
        let mut list = PipelineList::seeded(3, true, SigmaMode::Exact, false);
        list.receive_rule(0, 1, 5, sigma(1), None, ListPolicy::Full);
        list.receive_rule(0, 1, 2, sigma(1), None, ListPolicy::Full);
        list.receive_rule(0, 0, 7, sigma(1), None, ListPolicy::Full);
        let order: Vec<(u64, usize)> = list.entries().iter().map(|e| (e.dist, e.source)).collect();
        assert_eq!(order, vec![(0, 3), (1, 7), (2, 2), (2, 5)]);
    }

    #[test]
    fn hop_bound_discards() {
        let mut list = PipelineList::default();
        assert_eq!(
            list.receive_rule(
                0,
                1,
                4,
                sigma(1),
                Some(1),
                ListPolicy::HopBounded { h: 1, keep: None }
            ),
            ReceiveEffect::Ignored
        );
        assert_eq!(
            list.receive_rule(
                0,
                0,
                4,
                sigma(1),
                Some(0),
                ListPolicy::HopBounded { h: 1, keep: None }
            ),
            ReceiveEffect::Inserted { rank: 1 }
        );
    }
}
