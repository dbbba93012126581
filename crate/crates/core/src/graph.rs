//! Directed-graph data model, generators, named fixtures, and edge-list I/O.
//!
//! Vertices are indexed `0..n` internally and carry external ids, `1..=n` by
//! default. Self-loops and parallel edges are rejected: the simulator counts
//! one channel pair per edge, so multiplicity would distort message accounting.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed edge line {line}: {reason}")]
    MalformedEdge { line: usize, reason: String },
    #[error("vertex id {id} out of range 1..={n}")]
    VertexOutOfRange { id: u64, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u64),
    #[error("duplicate edge {0} -> {1}")]
    DuplicateEdge(u64, u64),
    #[error("nonpositive weight on edge {0} -> {1}")]
    NonpositiveWeight(u64, u64),
    #[error("weight given in unweighted mode on edge {0} -> {1}")]
    WeightInUnweighted(u64, u64),
    #[error("missing weight in weighted mode on edge {0} -> {1}")]
    MissingWeight(u64, u64),
    #[error("edge count mismatch: header says {expected}, found {found}")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error("graph declared as dag contains a cycle")]
    DeclaredDagCyclic,
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("unknown fixture name: {0}")]
    UnknownFixture(String),
    #[error("duplicate vertex id {0}")]
    DuplicateId(u64),
}

/// Declared kind in the edge-list header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Directed,
    Dag,
}

impl GraphKind {
    fn token(self) -> &'static str {
        match self {
            GraphKind::Directed => "directed",
            GraphKind::Dag => "dag",
        }
    }
}

/// A directed graph with optional positive integer edge weights.
///
/// Immutable after construction; adjacency is kept in both directions so
/// `Γ_in` and `Γ_out` are O(1) views.
#[derive(Clone, Debug, PartialEq)]
pub struct Digraph {
    n: usize,
    m: usize,
    weighted: bool,
    kind: GraphKind,
    ids: Vec<u64>,
    out: Vec<Vec<(usize, u64)>>,
    inc: Vec<Vec<(usize, u64)>>,
}

impl Digraph {
    pub fn new(n: usize, weighted: bool, kind: GraphKind) -> Self {
        Digraph {
            n,
            m: 0,
            weighted,
            kind,
            ids: (1..=n as u64).collect(),
            out: vec![Vec::new(); n],
            inc: vec![Vec::new(); n],
        }
    }

    /// Replaces the default `1..=n` ids. Ids must be distinct and positive.
    pub fn with_ids(mut self, ids: Vec<u64>) -> Result<Self, GraphError> {
        assert_eq!(ids.len(), self.n);
        let mut seen = BTreeSet::new();
        for &id in &ids {
            if !seen.insert(id) {
                return Err(GraphError::DuplicateId(id));
            }
        }
        self.ids = ids;
        Ok(self)
    }

    /// Adds edge `u -> v` (internal indices) with weight `w` (1 if unweighted).
    pub fn add_edge(&mut self, u: usize, v: usize, w: u64) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(self.ids[u]));
        }
        if w == 0 {
            return Err(GraphError::NonpositiveWeight(self.ids[u], self.ids[v]));
        }
        if self.out[u].iter().any(|&(t, _)| t == v) {
            return Err(GraphError::DuplicateEdge(self.ids[u], self.ids[v]));
        }
        self.out[u].push((v, w));
        self.inc[v].push((u, w));
        self.m += 1;
        Ok(())
    }

    /// Sorts adjacency lists; call once after construction for determinism.
    fn normalize(&mut self) {
        for list in self.out.iter_mut().chain(self.inc.iter_mut()) {
            list.sort_unstable();
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn id_of(&self, v: usize) -> u64 {
        self.ids[v]
    }

    /// Internal index of the vertex with the smallest external id.
    pub fn min_id_vertex(&self) -> usize {
        (0..self.n)
            .min_by_key(|&v| self.ids[v])
            .expect("empty graph")
    }

    /// Outgoing neighbors `Γ_out(v)` with edge weights.
    pub fn out_neighbors(&self, v: usize) -> &[(usize, u64)] {
        &self.out[v]
    }

    /// Incoming neighbors `Γ_in(v)` with edge weights.
    pub fn in_neighbors(&self, v: usize) -> &[(usize, u64)] {
        &self.inc[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.inc[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].iter().any(|&(t, _)| t == v)
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<u64> {
        self.out[u].iter().find(|&&(t, _)| t == v).map(|&(_, w)| w)
    }

    /// Largest edge weight (1 for unweighted graphs or graphs with no edges).
    pub fn max_weight(&self) -> u64 {
        self.out
            .iter()
            .flatten()
            .map(|&(_, w)| w)
            .max()
            .unwrap_or(1)
            .max(1)
    }

    /// Neighbors of `v` in the underlying undirected graph, deduplicated and
    /// sorted. These are the communication channels of `v`.
    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        let mut set: BTreeSet<usize> = self.out[v].iter().map(|&(t, _)| t).collect();
        set.extend(self.inc[v].iter().map(|&(u, _)| u));
        set.into_iter().collect()
    }

    /// Number of undirected edges (antiparallel pairs count once).
    pub fn undirected_edge_count(&self) -> usize {
        let mut count = 0;
        for u in 0..self.n {
            for &(v, _) in &self.out[u] {
                if u < v || !self.has_edge(v, u) {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (0..self.n).flat_map(move |u| self.out[u].iter().map(move |&(v, w)| (u, v, w)))
    }

    /// Kahn's algorithm; `Some(order)` iff acyclic.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg: Vec<usize> = (0..self.n).map(|v| self.in_degree(v)).collect();
        let mut queue: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.n);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            order.push(v);
            for &(w, _) in &self.out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push(w);
                }
            }
        }
        (order.len() == self.n).then_some(order)
    }

    /// Unweighted BFS distances over directed edges.
    pub fn bfs_directed(&self, s: usize) -> Vec<Option<u64>> {
        self.bfs_impl(s, false)
    }

    /// Unweighted BFS distances over the underlying undirected graph.
    pub fn bfs_undirected(&self, s: usize) -> Vec<Option<u64>> {
        self.bfs_impl(s, true)
    }

    fn bfs_impl(&self, s: usize, undirected: bool) -> Vec<Option<u64>> {
        let mut dist = vec![None; self.n];
        dist[s] = Some(0);
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            let next: Vec<usize> = if undirected {
                self.undirected_neighbors(v)
            } else {
                self.out[v].iter().map(|&(t, _)| t).collect()
            };
            for w in next {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Canonical edge-list rendering: header line, then edges sorted by
    /// `(u, v)` in 1-based ids.
    pub fn to_edge_list(&self) -> String {
        let mut text = String::new();
        let _ = writeln!(
            text,
            "{} {} {} {}",
            self.n,
            self.m,
            self.kind.token(),
            if self.weighted {
                "weighted"
            } else {
                "unweighted"
            }
        );
        let mut edges: Vec<(usize, usize, u64)> = self.edges().collect();
        edges.sort_unstable();
        for (u, v, w) in edges {
            if self.weighted {
                let _ = writeln!(text, "{} {} {}", u + 1, v + 1, w);
            } else {
                let _ = writeln!(text, "{} {}", u + 1, v + 1);
            }
        }
        text
    }
}

/// Class report computed by exhaustive search from every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphClassReport {
    pub strongly_connected: bool,
    pub weakly_connected: bool,
    pub is_dag: bool,
    /// `None` means infinite (not strongly connected).
    pub directed_diameter: Option<u64>,
    /// `None` means infinite (not weakly connected).
    pub undirected_diameter: Option<u64>,
    /// Longest path in edges; present only for DAGs.
    pub longest_path: Option<u64>,
}

/// Parses the edge-list format: `"n m directed|dag weighted|unweighted"`
/// followed by `m` lines `"u v [w]"` with 1-based ids.
pub fn parse_edge_list(text: &str) -> Result<Digraph, GraphError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| GraphError::MalformedHeader("empty input".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(GraphError::MalformedHeader(header.into()));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| GraphError::MalformedHeader(header.into()))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| GraphError::MalformedHeader(header.into()))?;
    let kind = match fields[2] {
        "directed" => GraphKind::Directed,
        "dag" => GraphKind::Dag,
        _ => return Err(GraphError::MalformedHeader(header.into())),
    };
    let weighted = match fields[3] {
        "weighted" => true,
        "unweighted" => false,
        _ => return Err(GraphError::MalformedHeader(header.into())),
    };

    let mut g = Digraph::new(n, weighted, kind);
    let mut found = 0;
    for (lineno, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let parse_id = |tok: &str| -> Result<usize, GraphError> {
            let id: u64 = tok.parse().map_err(|_| GraphError::MalformedEdge {
                line: lineno + 2,
                reason: format!("bad vertex id {tok:?}"),
            })?;
            if id < 1 || id > n as u64 {
                return Err(GraphError::VertexOutOfRange { id, n });
            }
            Ok((id - 1) as usize)
        };
        let (u, v, w) = match (parts.len(), weighted) {
            (2, false) => (parse_id(parts[0])?, parse_id(parts[1])?, 1),
            (2, true) => {
                let u = parse_id(parts[0])?;
                let v = parse_id(parts[1])?;
                return Err(GraphError::MissingWeight(g.ids[u], g.ids[v]));
            }
            (3, false) => {
                let u = parse_id(parts[0])?;
                let v = parse_id(parts[1])?;
                return Err(GraphError::WeightInUnweighted(g.ids[u], g.ids[v]));
            }
            (3, true) => {
                let u = parse_id(parts[0])?;
                let v = parse_id(parts[1])?;
                let w: u64 = parts[2].parse().map_err(|_| GraphError::MalformedEdge {
                    line: lineno + 2,
                    reason: format!("bad weight {:?}", parts[2]),
                })?;
                if w == 0 {
                    return Err(GraphError::NonpositiveWeight(g.ids[u], g.ids[v]));
                }
                (u, v, w)
            }
            _ => {
                return Err(GraphError::MalformedEdge {
                    line: lineno + 2,
                    reason: format!("expected {} fields", if weighted { 3 } else { 2 }),
                })
            }
        };
        g.add_edge(u, v, w)?;
        found += 1;
    }
    if found != m {
        return Err(GraphError::EdgeCountMismatch { expected: m, found });
    }
    if kind == GraphKind::Dag && g.topological_order().is_none() {
        return Err(GraphError::DeclaredDagCyclic);
    }
    g.normalize();
    Ok(g)
}

/// Computes connectivity, acyclicity, and diameters by BFS from every vertex.
pub fn classify(g: &Digraph) -> GraphClassReport {
    let n = g.n();
    if n == 0 {
        return GraphClassReport {
            strongly_connected: true,
            weakly_connected: true,
            is_dag: true,
            directed_diameter: Some(0),
            undirected_diameter: Some(0),
            longest_path: Some(0),
        };
    }
    let mut strongly = true;
    let mut dmax = 0;
    for s in 0..n {
        let dist = g.bfs_directed(s);
        for d in &dist {
            match d {
                Some(d) => dmax = dmax.max(*d),
                None => strongly = false,
            }
        }
    }
    let mut weakly = true;
    let mut dumax = 0;
    for s in 0..n {
        let dist = g.bfs_undirected(s);
        for d in &dist {
            match d {
                Some(d) => dumax = dumax.max(*d),
                None => weakly = false,
            }
        }
    }
    let topo = g.topological_order();
    let longest_path = topo.as_ref().map(|order| {
        let mut level = vec![0u64; n];
        let mut best = 0;
        for &v in order {
            for &(w, _) in g.out_neighbors(v) {
                level[w] = level[w].max(level[v] + 1);
                best = best.max(level[w]);
            }
        }
        best
    });
    GraphClassReport {
        strongly_connected: strongly,
        weakly_connected: weakly,
        is_dag: topo.is_some(),
        directed_diameter: strongly.then_some(dmax),
        undirected_diameter: weakly.then_some(dumax),
        longest_path,
    }
}

/// Generator families. All generators are deterministic for a fixed seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    RandomDigraph,
    RandomStronglyConnected,
    RandomDag,
    Cycle,
    Path,
    Complete,
}

impl GeneratorKind {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "random-digraph" => GeneratorKind::RandomDigraph,
            "random-strongly-connected" => GeneratorKind::RandomStronglyConnected,
            "random-dag" => GeneratorKind::RandomDag,
            "cycle" => GeneratorKind::Cycle,
            "path" => GeneratorKind::Path,
            "complete" => GeneratorKind::Complete,
            _ => return None,
        })
    }
}

pub fn generate(
    kind: GeneratorKind,
    n: usize,
    p: f64,
    wmax: Option<u64>,
    seed: u64,
) -> Result<Digraph, GraphError> {
    if n < 1 {
        return Err(GraphError::InvalidParameters("n must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidParameters("p must be in [0, 1]".into()));
    }
    if wmax.is_some() && kind != GeneratorKind::RandomDag {
        return Err(GraphError::InvalidParameters(
            "wmax applies only to random-dag".into(),
        ));
    }
    if let Some(w) = wmax {
        if w == 0 {
            return Err(GraphError::InvalidParameters("wmax must be >= 1".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = match kind {
        GeneratorKind::RandomDigraph => {
            let mut g = Digraph::new(n, false, GraphKind::Directed);
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(p) {
                        g.add_edge(u, v, 1)?;
                    }
                }
            }
            g
        }
        GeneratorKind::RandomStronglyConnected => {
            if n < 2 {
                return Err(GraphError::InvalidParameters(
                    "strongly connected generator needs n >= 2".into(),
                ));
            }
            let mut g = Digraph::new(n, false, GraphKind::Directed);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for i in 0..n {
                g.add_edge(perm[i], perm[(i + 1) % n], 1)?;
            }
            for u in 0..n {
                for v in 0..n {
                    if u != v && !g.has_edge(u, v) && rng.gen_bool(p) {
                        g.add_edge(u, v, 1)?;
                    }
                }
            }
            g
        }
        GeneratorKind::RandomDag => {
            let weighted = wmax.is_some();
            let mut g = Digraph::new(n, weighted, GraphKind::Dag);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut rank = vec![0usize; n];
            for (i, &v) in perm.iter().enumerate() {
                rank[v] = i;
            }
            for a in 0..n {
                for b in (a + 1)..n {
                    if rng.gen_bool(p) {
                        let (u, v) = if rank[a] < rank[b] { (a, b) } else { (b, a) };
                        let w = match wmax {
                            Some(wm) => rng.gen_range(1..=wm),
                            None => 1,
                        };
                        g.add_edge(u, v, w)?;
                    }
                }
            }
            g
        }
        GeneratorKind::Cycle => {
            if n < 2 {
                return Err(GraphError::InvalidParameters("cycle needs n >= 2".into()));
            }
            let mut g = Digraph::new(n, false, GraphKind::Directed);
            for v in 0..n {
                g.add_edge(v, (v + 1) % n, 1)?;
            }
            g
        }
        GeneratorKind::Path => {
            let mut g = Digraph::new(n, false, GraphKind::Dag);
            for v in 0..n.saturating_sub(1) {
                g.add_edge(v, v + 1, 1)?;
            }
            g
        }
        GeneratorKind::Complete => {
            let mut g = Digraph::new(n, false, GraphKind::Directed);
            for u in 0..n {
                for v in 0..n {
                    if u != v {
                        g.add_edge(u, v, 1)?;
                    }
                }
            }
            g
        }
    };
    g.normalize();
    Ok(g)
}

/// Named fixture graphs used across the test suites.
///
/// `fig1-llt`: a weighted DAG whose longest source-to-sink path has 8 edges.
/// Layout (1-based ids): s=1, chain 2..4, u=5, v=6, chain 7..8, w=9, with
/// shortcut edges u->w and v->w. Levels: l(u)=4, l(v)=5, l(w)=8.
///
/// `fig2-congestion`: 8 vertices s=1, u1..u5=2..6, v=7, w=8 where two
/// concurrently scheduled floods meet at u4.
pub fn fixture(name: &str) -> Result<Digraph, GraphError> {
    let build = |n: usize,
                 weighted: bool,
                 kind: GraphKind,
                 edges: &[(usize, usize, u64)]|
     -> Result<Digraph, GraphError> {
        let mut g = Digraph::new(n, weighted, kind);
        for &(u, v, w) in edges {
            g.add_edge(u - 1, v - 1, w)?;
        }
        g.normalize();
        Ok(g)
    };
    match name {
        "p3" => build(3, false, GraphKind::Dag, &[(1, 2, 1), (2, 3, 1)]),
        "diamond" => build(
            4,
            false,
            GraphKind::Dag,
            &[(1, 2, 1), (1, 3, 1), (2, 4, 1), (3, 4, 1)],
        ),
        "fig2-congestion" => build(
            8,
            false,
            GraphKind::Dag,
            &[
                (1, 2, 1), // s -> u1
                (2, 3, 1), // u1 -> u2
                (3, 4, 1), // u2 -> u3
                (4, 5, 1), // u3 -> u4
                (5, 6, 1), // u4 -> u5
                (1, 7, 1), // s -> v
                (7, 2, 1), // v -> u1
                (1, 8, 1), // s -> w
                (8, 5, 1), // w -> u4
            ],
        ),
        "fig1-llt" => build(
            9,
            true,
            GraphKind::Dag,
            &[
                (1, 2, 3), // s -> c1
                (2, 3, 1),
                (3, 4, 2),
                (4, 5, 1), // c3 -> u      level(u) = 4
                (5, 6, 2), // u -> v       level(v) = 5
                (6, 7, 1), // v -> d1
                (7, 8, 1),
                (8, 9, 1), // d2 -> w      level(w) = 8
                (5, 9, 4), // u -> w  shortest u~w
                (6, 9, 3), // v -> w  ties v->d1->d2->w
            ],
        ),
        _ => Err(GraphError::UnknownFixture(name.into())),
    }
}
