//! Deterministic round-synchronous executor with per-channel bandwidth
//! accounting.
//!
//! Every graph edge provides a bidirectional channel pair; each direction
//! carries at most one message bundle per round. Payloads sent in round `r`
//! become readable in round `r+1`. Within a round all outboxes are computed
//! before any delivery, so results are independent of node evaluation order.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Digraph;
use crate::numeric::{dist_bits, id_bits, Dependency, Sigma};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maximum logical payloads per bundle. The pipelined APSP round worst case
/// is a distance triple, a tree token, a finalizer value, and a counting
/// token riding together.
pub const C_BUNDLE: usize = 4;

/// One tagged logical payload.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// Pipelined distance announcement `(d_sv, s, sigma_sv)`, optionally with
    /// a hop counter for the bounded-hop variants.
    ApspTriple {
        dist: u64,
        source: usize,
        sigma: Sigma,
        hops: Option<u64>,
    },
    /// Tree-construction token: the sender's depth and chosen parent, so
    /// receivers learn their children without extra messages.
    BfsToken { depth: u64, parent: Option<usize> },
    /// Subtree size reported to the tree parent.
    ConvergecastCount { size: u64 },
    /// Total vertex count broadcast down the tree.
    NBroadcast { n: u64 },
    /// Maximum finalized distance reported to the tree parent.
    FinalizerUp { dist: u64 },
    /// Network diameter broadcast down the tree; receiving it halts a node.
    DiameterDown { diameter: u64 },
    /// Time-reversed accumulation value `(1 + delta) / sigma` for one source.
    AccumValue { source: usize, value: Dependency },
    /// Scheduled weighted-DAG announcement `(x, delta(x,y), sigma_xy)`.
    DagSsspTriple {
        source: usize,
        dist: u64,
        sigma: Sigma,
    },
    /// Longest-length-tree level announcement.
    LltLevel { level: u64 },
}

/// Bit cost of one payload on a graph with `n` vertices and max weight `wmax`.
///
/// Vertex ids cost `ceil(log2 n)` bits, distances `ceil(log2(n*wmax+1))`,
/// exact path counts their true binary length, float path counts and float
/// accumulation values the fixed float width. Hop counters cost their own
/// binary length (at most the bit length of the hop bound).
pub fn payload_bits(p: &Payload, n: usize, wmax: u64) -> u64 {
    let id = id_bits(n);
    let dist = dist_bits(n, wmax);
    match p {
        Payload::ApspTriple { sigma, hops, .. } => {
            let hop_bits = hops.map_or(0, |h| crate::numeric::ceil_log2(h + 2));
            id + dist + sigma.bits(n) + hop_bits
        }
        Payload::BfsToken { .. } => dist + id,
        Payload::ConvergecastCount { .. } => dist,
        Payload::NBroadcast { .. } => dist,
        Payload::FinalizerUp { .. } => dist,
        Payload::DiameterDown { .. } => dist,
        Payload::AccumValue { value, .. } => id + value.bits(n),
        Payload::DagSsspTriple { sigma, .. } => id + dist + sigma.bits(n),
        Payload::LltLevel { .. } => dist,
    }
}

/// The per-channel per-round transmission: an ordered list of payloads.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MessageBundle {
    pub payloads: Vec<Payload>,
}

impl MessageBundle {
    pub fn bits(&self, n: usize, wmax: u64) -> u64 {
        self.payloads.iter().map(|p| payload_bits(p, n, wmax)).sum()
    }
}

/// Behavior contract a node executes each round: read the previous round's
/// deliveries, update local state, and emit this round's sends.
pub trait NodeProgram: Send {
    /// `inbox` holds one bundle per sending neighbor, sorted by sender index.
    /// The returned outbox maps neighbor targets to payload lists; targets
    /// must be channel neighbors.
    fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox;

    /// A halted program stops sending; its future inboxes are discarded.
    fn halted(&self) -> bool;
}

pub type Outbox = Vec<(usize, Vec<Payload>)>;

/// Bandwidth handling: record only, or abort on oversized bundles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bandwidth {
    Account,
    Enforce { bits: u64 },
}

/// A bundle that exceeded the enforced budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BandwidthViolation {
    pub round: u64,
    pub from: usize,
    pub to: usize,
    pub bits: u64,
    pub payload_count: usize,
}

/// Evidence collected by a run.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RunMetrics {
    pub rounds_elapsed: u64,
    /// Count of nonempty bundles (one directed channel, one round).
    pub total_messages: u64,
    pub total_payloads: u64,
    pub max_bundle_bits: u64,
    /// Rounds in which a node emitted a distance triple for a source.
    pub triple_sends: BTreeMap<(usize, usize), u64>,
    pub violations: Vec<BandwidthViolation>,
}

impl RunMetrics {
    /// Folds another phase's metrics into this one (rounds add up).
    pub fn absorb(&mut self, other: &RunMetrics) {
        self.rounds_elapsed += other.rounds_elapsed;
        self.total_messages += other.total_messages;
        self.total_payloads += other.total_payloads;
        self.max_bundle_bits = self.max_bundle_bits.max(other.max_bundle_bits);
        for (&k, &v) in &other.triple_sends {
            *self.triple_sends.entry(k).or_insert(0) += v;
        }
        self.violations.extend(other.violations.iter().cloned());
    }

    pub fn max_triple_sends_per_pair(&self) -> u64 {
        self.triple_sends.values().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("program count {got} does not match vertex count {want}")]
    ProgramCount { got: usize, want: usize },
    #[error("node {from} sent to non-neighbor {to} in round {round}")]
    InvalidTarget { from: usize, to: usize, round: u64 },
    #[error("bandwidth violation in round {}", .violations[0].round)]
    Bandwidth {
        violations: Vec<BandwidthViolation>,
        metrics: RunMetrics,
    },
}

/// Node evaluation order within a round. All orders produce identical
/// results; the permuted form exists to test exactly that.
#[derive(Clone, Debug, Default)]
pub enum EvalOrder {
    #[default]
    Indexed,
    Permuted(Vec<usize>),
    /// Evaluate hooks concurrently (requires the `parallel` feature to have
    /// any effect); deliveries stay barrier-synchronized and ordered.
    Parallel,
}

#[derive(Clone, Debug, Default)]
pub struct EngineOptions {
    pub eval_order: EvalOrder,
}

pub struct RunOutcome<P> {
    pub programs: Vec<P>,
    pub metrics: RunMetrics,
}

/// Runs `programs` in lockstep over `g` for at most `max_rounds` rounds,
/// stopping early once every program reports halted.
pub fn run_synchronous<P: NodeProgram>(
    g: &Digraph,
    programs: Vec<P>,
    max_rounds: u64,
    bandwidth: Bandwidth,
    options: &EngineOptions,
) -> Result<RunOutcome<P>, EngineError> {
    let n = g.n();
    if programs.len() != n {
        return Err(EngineError::ProgramCount {
            got: programs.len(),
            want: n,
        });
    }
    let mut programs = programs;
    let neighbors: Vec<Vec<usize>> = (0..n).map(|v| g.undirected_neighbors(v)).collect();
    let wmax = g.max_weight();
    let mut metrics = RunMetrics::default();
    let mut pending: Vec<Vec<(usize, MessageBundle)>> = vec![Vec::new(); n];

    for round in 1..=max_rounds {
        if programs.iter().all(|p| p.halted()) {
            break;
        }
        let inboxes = std::mem::replace(&mut pending, vec![Vec::new(); n]);
        let outboxes = evaluate_round(&mut programs, round, &inboxes, options);

        // Deliver in index order; accounting is sequential and deterministic.
        let mut round_violations = Vec::new();
        for from in 0..n {
            let Some(outbox) = &outboxes[from] else {
                continue;
            };
            let mut seen_sources: Vec<usize> = Vec::new();
            for (to, payloads) in outbox {
                if payloads.is_empty() {
                    continue;
                }
                if !neighbors[from].contains(to) {
                    return Err(EngineError::InvalidTarget {
                        from,
                        to: *to,
                        round,
                    });
                }
                let bundle = MessageBundle {
                    payloads: payloads.clone(),
                };
                let bits = bundle.bits(n, wmax);
                metrics.total_messages += 1;
                metrics.total_payloads += bundle.payloads.len() as u64;
                metrics.max_bundle_bits = metrics.max_bundle_bits.max(bits);
                for p in &bundle.payloads {
                    if let Payload::ApspTriple { source, .. }
                    | Payload::DagSsspTriple { source, .. } = p
                    {
                        if !seen_sources.contains(source) {
                            seen_sources.push(*source);
                            *metrics.triple_sends.entry((from, *source)).or_insert(0) += 1;
                        }
                    }
                }
                if let Bandwidth::Enforce { bits: budget } = bandwidth {
                    if bits > budget || bundle.payloads.len() > C_BUNDLE {
                        round_violations.push(BandwidthViolation {
                            round,
                            from,
                            to: *to,
                            bits,
                            payload_count: bundle.payloads.len(),
                        });
                    }
                }
                pending[*to].push((from, bundle));
            }
        }
        metrics.rounds_elapsed = round;
        if !round_violations.is_empty() {
            metrics.violations = round_violations.clone();
            return Err(EngineError::Bandwidth {
                violations: round_violations,
                metrics,
            });
        }
    }
    Ok(RunOutcome { programs, metrics })
}

fn evaluate_round<P: NodeProgram>(
    programs: &mut [P],
    round: u64,
    inboxes: &[Vec<(usize, MessageBundle)>],
    options: &EngineOptions,
) -> Vec<Option<Outbox>> {
    let n = programs.len();
    match &options.eval_order {
        EvalOrder::Indexed => {
            let mut out: Vec<Option<Outbox>> = (0..n).map(|_| None).collect();
            for (i, p) in programs.iter_mut().enumerate() {
                if !p.halted() {
                    out[i] = Some(p.on_round(round, &inboxes[i]));
                }
            }
            out
        }
        EvalOrder::Permuted(order) => {
            assert_eq!(order.len(), n, "permutation must cover every node");
            let mut out: Vec<Option<Outbox>> = (0..n).map(|_| None).collect();
            for &i in order {
                if !programs[i].halted() {
                    out[i] = Some(programs[i].on_round(round, &inboxes[i]));
                }
            }
            out
        }
        EvalOrder::Parallel => {
            #[cfg(feature = "parallel")]
            {
                programs
                    .par_iter_mut()
                    .zip(inboxes.par_iter())
                    .map(|(p, inbox)| (!p.halted()).then(|| p.on_round(round, inbox)))
                    .collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                let mut out: Vec<Option<Outbox>> = (0..n).map(|_| None).collect();
                for (i, p) in programs.iter_mut().enumerate() {
                    if !p.halted() {
                        out[i] = Some(p.on_round(round, &inboxes[i]));
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind};
    use crate::numeric::SigmaMode;

    /// Never sends, never halts.
    struct Silent;
    impl NodeProgram for Silent {
        fn on_round(&mut self, _round: u64, _inbox: &[(usize, MessageBundle)]) -> Outbox {
            Vec::new()
        }
        fn halted(&self) -> bool {
            false
        }
    }

    /// Floods a token once from a root along outgoing edges, recording the
    /// round in which the token first arrived.
    struct Flood {
        me: usize,
        root: usize,
        out: Vec<usize>,
        received_round: Option<u64>,
        fired: bool,
    }
    impl NodeProgram for Flood {
        fn on_round(&mut self, round: u64, inbox: &[(usize, MessageBundle)]) -> Outbox {
            if self.received_round.is_none() {
                let got = (self.me == self.root && round == 1)
                    || inbox.iter().any(|(_, b)| {
                        b.payloads
                            .iter()
                            .any(|p| matches!(p, Payload::BfsToken { .. }))
                    });
                if got {
                    self.received_round = Some(round);
                }
            }
            if let (Some(depth), false) = (self.received_round, self.fired) {
                self.fired = true;
                let token = Payload::BfsToken {
                    depth,
                    parent: None,
                };
                return self.out.iter().map(|&t| (t, vec![token.clone()])).collect();
            }
            Vec::new()
        }
        fn halted(&self) -> bool {
            self.fired
        }
    }

    fn flood_programs(g: &Digraph, root: usize) -> Vec<Flood> {
        (0..g.n())
            .map(|v| Flood {
                me: v,
                root,
                out: g.out_neighbors(v).iter().map(|&(t, _)| t).collect(),
                received_round: None,
                fired: false,
            })
            .collect()
    }

    #[test]
    fn silent_programs_run_to_max_rounds() {
        let g = generate(GeneratorKind::Cycle, 4, 0.0, None, 0).unwrap();
        let programs = (0..4).map(|_| Silent).collect();
        let out = run_synchronous(
            &g,
            programs,
            5,
            Bandwidth::Account,
            &EngineOptions::default(),
        )
        .unwrap();
        assert_eq!(out.metrics.rounds_elapsed, 5);
        assert_eq!(out.metrics.total_messages, 0);
    }

    #[test]
    fn flood_reaches_cycle_within_diameter() {
        // Hand-simulated 4-cycle: the token leaves v0 in round 1 and needs
        // D = 3 hops, so the last node processes it in round 4.
        let g = generate(GeneratorKind::Cycle, 4, 0.0, None, 0).unwrap();
        let out = run_synchronous(
            &g,
            flood_programs(&g, 0),
            10,
            Bandwidth::Account,
            &EngineOptions::default(),
        )
        .unwrap();
        let rounds: Vec<u64> = out
            .programs
            .iter()
            .map(|p| p.received_round.unwrap())
            .collect();
        assert_eq!(rounds, vec![1, 2, 3, 4]);
        let dist = g.bfs_directed(0);
        for v in 0..4 {
            assert_eq!(rounds[v] - 1, dist[v].unwrap());
        }
    }

    #[test]
    fn lockstep_causality_probe() {
        // A payload sent in round r must not be readable before round r+1.
        let g = generate(GeneratorKind::Path, 2, 0.0, None, 0).unwrap();
        let out = run_synchronous(
            &g,
            flood_programs(&g, 0),
            5,
            Bandwidth::Account,
            &EngineOptions::default(),
        )
        .unwrap();
        assert_eq!(out.programs[0].received_round, Some(1));
        assert_eq!(out.programs[1].received_round, Some(2));
    }

    #[test]
    fn evaluation_order_independence() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let g = generate(GeneratorKind::RandomStronglyConnected, 12, 0.3, None, 5).unwrap();
        let baseline = run_synchronous(
            &g,
            flood_programs(&g, 0),
            40,
            Bandwidth::Account,
            &EngineOptions::default(),
        )
        .unwrap();
        let base_rounds: Vec<_> = baseline.programs.iter().map(|p| p.received_round).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut order: Vec<usize> = (0..g.n()).collect();
            order.shuffle(&mut rng);
            let out = run_synchronous(
                &g,
                flood_programs(&g, 0),
                40,
                Bandwidth::Account,
                &EngineOptions {
                    eval_order: EvalOrder::Permuted(order),
                },
            )
            .unwrap();
            let rounds: Vec<_> = out.programs.iter().map(|p| p.received_round).collect();
            assert_eq!(rounds, base_rounds);
            assert_eq!(out.metrics, baseline.metrics);
        }
        let par = run_synchronous(
            &g,
            flood_programs(&g, 0),
            40,
            Bandwidth::Account,
            &EngineOptions {
                eval_order: EvalOrder::Parallel,
            },
        )
        .unwrap();
        assert_eq!(par.metrics, baseline.metrics);
    }

    #[test]
    fn determinism_bit_identical() {
        let g = generate(GeneratorKind::RandomStronglyConnected, 10, 0.25, None, 3).unwrap();
        let a = run_synchronous(
            &g,
            flood_programs(&g, 0),
            40,
            Bandwidth::Account,
            &EngineOptions::default(),
        )
        .unwrap();
        let b = run_synchronous(
            &g,
            flood_programs(&g, 0),
            40,
            Bandwidth::Account,
            &EngineOptions::default(),
        )
        .unwrap();
        assert_eq!(a.metrics, b.metrics);
    }

    #[test]
    fn enforce_mode_reports_violations() {
        struct TwoPayloads {
            out: Vec<usize>,
            done: bool,
        }
        impl NodeProgram for TwoPayloads {
            fn on_round(&mut self, _round: u64, _inbox: &[(usize, MessageBundle)]) -> Outbox {
                self.done = true;
                let p = Payload::ApspTriple {
                    dist: 1,
                    source: 0,
                    sigma: Sigma::one(SigmaMode::Exact),
                    hops: None,
                };
                self.out
                    .iter()
                    .map(|&t| (t, vec![p.clone(), p.clone()]))
                    .collect()
            }
            fn halted(&self) -> bool {
                self.done
            }
        }
        let g = generate(GeneratorKind::Path, 2, 0.0, None, 0).unwrap();
        let programs = (0..2)
            .map(|v| TwoPayloads {
                out: g.out_neighbors(v).iter().map(|&(t, _)| t).collect(),
                done: false,
            })
            .collect::<Vec<_>>();
        let one_triple = payload_bits(
            &Payload::ApspTriple {
                dist: 1,
                source: 0,
                sigma: Sigma::one(SigmaMode::Exact),
                hops: None,
            },
            2,
            1,
        );
        let Err(err) = run_synchronous(
            &g,
            programs,
            3,
            Bandwidth::Enforce { bits: one_triple },
            &EngineOptions::default(),
        ) else {
            panic!("expected a bandwidth violation");
        };
        match err {
            EngineError::Bandwidth { violations, .. } => {
                assert_eq!(violations.len(), 1);
                assert_eq!(violations[0].from, 0);
                assert_eq!(violations[0].to, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn payload_bit_accounting() {
        // One triple on an 8-vertex unweighted graph: 3 id bits, 4 distance
        // bits (ceil log2(8+1)), and the count's binary length.
        let triple = |sigma: Sigma| Payload::ApspTriple {
            dist: 3,
            source: 5,
            sigma,
            hops: None,
        };
        assert_eq!(
            payload_bits(&triple(Sigma::one(SigmaMode::Exact)), 8, 1),
            3 + 4 + 1
        );
        let big = Sigma::Exact(num_bigint::BigUint::from(1u8) << 100);
        assert_eq!(payload_bits(&triple(big), 8, 1), 3 + 4 + 101);
        // Float mode: fixed width regardless of magnitude.
        let f = payload_bits(&triple(Sigma::Float(2f64.powi(100))), 8, 1);
        assert_eq!(f, 3 + 4 + crate::numeric::float_sigma_bits(8));
        assert_eq!(f, payload_bits(&triple(Sigma::Float(1.0)), 8, 1));
    }

    #[test]
    fn message_count_bounded_by_rounds_times_channels() {
        let g = generate(GeneratorKind::RandomStronglyConnected, 8, 0.4, None, 1).unwrap();
        let out = run_synchronous(
            &g,
            flood_programs(&g, 0),
            20,
            Bandwidth::Account,
            &EngineOptions::default(),
        )
        .unwrap();
        assert!(out.metrics.total_messages <= out.metrics.rounds_elapsed * 2 * g.m() as u64);
    }
}
