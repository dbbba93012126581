//! Sequential reference implementations used as ground truth for every
//! distributed output: BFS/Dijkstra shortest paths with exact path counts and
//! predecessor sets, Brandes' betweenness centrality, brute-force path
//! enumeration, and DAG level computations.
//!
//! All arithmetic is exact: path counts are big integers, dependencies and
//! centrality scores exact rationals.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::Digraph;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph is not a dag")]
    NotADag,
    #[error("vertex {0} unreachable from the source")]
    Unreachable(usize),
    #[error("graph too large for enumeration: n = {0} exceeds {1}")]
    SizeLimit(usize, usize),
}

/// One source row: distance, exact path count, and predecessor set per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsspRow {
    pub dist: Vec<Option<u64>>,
    pub sigma: Vec<BigUint>,
    pub preds: Vec<BTreeSet<usize>>,
}

/// Full all-pairs table, indexed `[source][vertex]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApspSolution {
    pub rows: Vec<SsspRow>,
}

impl ApspSolution {
    pub fn dist(&self, s: usize, v: usize) -> Option<u64> {
        self.rows[s].dist[v]
    }

    pub fn sigma(&self, s: usize, v: usize) -> &BigUint {
        &self.rows[s].sigma[v]
    }

    pub fn preds(&self, s: usize, v: usize) -> &BTreeSet<usize> {
        &self.rows[s].preds[v]
    }
}

/// Shortest paths with counts from one source: BFS when the graph is
/// unweighted, Dijkstra otherwise. Unreachable vertices get `(∞, 0, ∅)`.
pub fn sssp_with_counts(g: &Digraph, s: usize) -> SsspRow {
    if g.is_weighted() {
        dijkstra_with_counts(g, s)
    } else {
        bfs_with_counts(g, s)
    }
}

fn bfs_with_counts(g: &Digraph, s: usize) -> SsspRow {
    let n = g.n();
    let mut dist: Vec<Option<u64>> = vec![None; n];
    let mut sigma = vec![BigUint::zero(); n];
    let mut preds = vec![BTreeSet::new(); n];
    dist[s] = Some(0);
    sigma[s] = BigUint::one();
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &(w, _) in g.out_neighbors(v) {
            match dist[w] {
                None => {
                    dist[w] = Some(dv + 1);
                    sigma[w] = sigma[v].clone();
                    preds[w].insert(v);
                    queue.push_back(w);
                }
                Some(dw) if dw == dv + 1 => {
                    let add = sigma[v].clone();
                    sigma[w] += add;
                    preds[w].insert(v);
                }
                _ => {}
            }
        }
    }
    SsspRow { dist, sigma, preds }
}

fn dijkstra_with_counts(g: &Digraph, s: usize) -> SsspRow {
    let n = g.n();
    let mut dist: Vec<Option<u64>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap: BinaryHeap<std::cmp::Reverse<(u64, usize)>> = BinaryHeap::new();
    dist[s] = Some(0);
    heap.push(std::cmp::Reverse((0, s)));
    while let Some(std::cmp::Reverse((d, v))) = heap.pop() {
        if settled[v] || dist[v] != Some(d) {
            continue;
        }
        settled[v] = true;
        for &(w, weight) in g.out_neighbors(v) {
            let cand = d + weight;
            if dist[w].is_none_or(|dw| cand < dw) {
                dist[w] = Some(cand);
                heap.push(std::cmp::Reverse((cand, w)));
            }
        }
    }
    // Predecessors and counts follow from final distances; counts accumulate
    // in distance order, which is a valid topological order of the SP dag.
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for v in 0..n {
        if let Some(dv) = dist[v] {
            for &(u, w) in g.in_neighbors(v) {
                if dist[u] == Some(dv.saturating_sub(w)) && dv >= w {
                    preds[v].insert(u);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| dist[v].is_some()).collect();
    order.sort_by_key(|&v| (dist[v].unwrap(), v));
    let mut sigma = vec![BigUint::zero(); n];
    sigma[s] = BigUint::one();
    for &v in &order {
        if v == s {
            continue;
        }
        let mut total = BigUint::zero();
        for &u in &preds[v] {
            total += &sigma[u];
        }
        sigma[v] = total;
    }
    SsspRow { dist, sigma, preds }
}

/// All-pairs table; rows are independent and computed in parallel when the
/// `parallel` feature is active.
pub fn apsp_with_counts(g: &Digraph) -> ApspSolution {
    #[cfg(feature = "parallel")]
    let rows = (0..g.n())
        .into_par_iter()
        .map(|s| sssp_with_counts(g, s))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let rows = (0..g.n()).map(|s| sssp_with_counts(g, s)).collect();
    ApspSolution { rows }
}

/// Brandes' algorithm with exact rational dependency accumulation.
///
/// Vertices are processed in non-increasing distance order with a vertex-id
/// tiebreak; the recursion only depends on the SP dag topology, so any valid
/// order gives identical results.
pub fn brandes_bc(g: &Digraph) -> Vec<BigRational> {
    let n = g.n();
    let per_source = |s: usize| -> Vec<BigRational> {
        let row = sssp_with_counts(g, s);
        let mut order: Vec<usize> = (0..n).filter(|&v| row.dist[v].is_some()).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(row.dist[v].unwrap()), v));
        let mut delta = vec![BigRational::zero(); n];
        let mut bc = vec![BigRational::zero(); n];
        for &w in &order {
            let sigma_w = BigRational::from_integer(BigInt::from(row.sigma[w].clone()));
            for &v in &row.preds[w] {
                let sigma_v = BigRational::from_integer(BigInt::from(row.sigma[v].clone()));
                let add = sigma_v / sigma_w.clone() * (BigRational::one() + delta[w].clone());
                delta[v] += add;
            }
            if w != s {
                bc[w] += delta[w].clone();
            }
        }
        bc
    };
    let fold = |mut acc: Vec<BigRational>, part: Vec<BigRational>| {
        for (a, p) in acc.iter_mut().zip(part) {
            *a += p;
        }
        acc
    };
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(per_source)
            .reduce(|| vec![BigRational::zero(); n], fold)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n)
            .map(per_source)
            .fold(vec![BigRational::zero(); n], fold)
    }
}

const ENUMERATION_LIMIT: usize = 15;

/// All shortest-path counts by exhaustive simple-path enumeration.
/// Independent of the BFS/Dijkstra route; usable up to `n = 15`.
pub fn sigma_bruteforce(g: &Digraph) -> Result<Vec<Vec<BigUint>>, OracleError> {
    if g.n() > ENUMERATION_LIMIT {
        return Err(OracleError::SizeLimit(g.n(), ENUMERATION_LIMIT));
    }
    let n = g.n();
    let mut sigma = vec![vec![BigUint::zero(); n]; n];
    for (s, row) in sigma.iter_mut().enumerate() {
        let paths = enumerate_shortest_paths(g, s);
        for (t, list) in paths.iter().enumerate() {
            row[t] = BigUint::from(list.len());
        }
        row[s] = BigUint::one();
    }
    Ok(sigma)
}

/// For each target, every minimum-weight path from `s` as a vertex sequence.
///
/// Weight-ordered path expansion: paths pop in nondecreasing weight, so the
/// first arrival at a vertex is shortest. With positive weights every prefix
/// of a shortest path is itself shortest, so only shortest prefixes are
/// extended and the search size stays proportional to the path counts.
fn enumerate_shortest_paths(g: &Digraph, s: usize) -> Vec<Vec<Vec<usize>>> {
    let n = g.n();
    let mut best: Vec<Option<u64>> = vec![None; n];
    let mut paths: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    let mut heap: BinaryHeap<std::cmp::Reverse<(u64, Vec<usize>)>> = BinaryHeap::new();
    heap.push(std::cmp::Reverse((0, vec![s])));
    while let Some(std::cmp::Reverse((weight, path))) = heap.pop() {
        let v = *path.last().unwrap();
        if path.len() > 1 {
            match best[v] {
                Some(b) if weight > b => continue,
                Some(b) if weight == b => paths[v].push(path.clone()),
                _ => {
                    best[v] = Some(weight);
                    paths[v] = vec![path.clone()];
                }
            }
        }
        for &(w, ew) in g.out_neighbors(v) {
            if !path.contains(&w) {
                let mut next = path.clone();
                next.push(w);
                heap.push(std::cmp::Reverse((weight + ew, next)));
            }
        }
    }
    paths
}

/// Betweenness centrality straight from the definition
/// `BC(v) = Σ_{s≠v,t≠v} σ_st(v) / σ_st` over enumerated shortest paths.
pub fn bc_definition_bruteforce(g: &Digraph) -> Result<Vec<BigRational>, OracleError> {
    if g.n() > ENUMERATION_LIMIT {
        return Err(OracleError::SizeLimit(g.n(), ENUMERATION_LIMIT));
    }
    let n = g.n();
    let mut bc = vec![BigRational::zero(); n];
    for s in 0..n {
        let paths = enumerate_shortest_paths(g, s);
        for (t, st_paths) in paths.iter().enumerate() {
            if t == s || st_paths.is_empty() {
                continue;
            }
            let total = BigRational::from_integer(BigInt::from(st_paths.len()));
            for (v, score) in bc.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                let through = st_paths
                    .iter()
                    .filter(|p| p[1..p.len() - 1].contains(&v))
                    .count();
                if through > 0 {
                    *score += BigRational::from_integer(BigInt::from(through)) / total.clone();
                }
            }
        }
    }
    Ok(bc)
}

/// Longest number of edges on any `s -> v` path, by topological-order DP.
/// Errors if the graph is cyclic or some vertex is unreachable from `s`.
pub fn llt_levels_oracle(g: &Digraph, s: usize) -> Result<Vec<u64>, OracleError> {
    let order = g.topological_order().ok_or(OracleError::NotADag)?;
    let reach = reachable_from(g, &[s]);
    if let Some(v) = (0..g.n()).find(|&v| !reach[v]) {
        return Err(OracleError::Unreachable(v));
    }
    Ok(levels_along(g, &order))
}

/// Levels when every in-degree-0 vertex acts as a source (the virtual-source
/// view with the auxiliary root elided).
pub fn llt_levels_multi_source(g: &Digraph) -> Result<Vec<u64>, OracleError> {
    let order = g.topological_order().ok_or(OracleError::NotADag)?;
    Ok(levels_along(g, &order))
}

fn levels_along(g: &Digraph, order: &[usize]) -> Vec<u64> {
    let mut level = vec![0u64; g.n()];
    for &v in order {
        for &(w, _) in g.out_neighbors(v) {
            level[w] = level[w].max(level[v] + 1);
        }
    }
    level
}

fn reachable_from(g: &Digraph, sources: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; g.n()];
    let mut queue: VecDeque<usize> = sources.iter().copied().collect();
    for &s in sources {
        seen[s] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &(w, _) in g.out_neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Maximum finite pairwise distance; `None` when not strongly connected.
pub fn directed_diameter(g: &Digraph) -> Option<u64> {
    let mut best = 0;
    for s in 0..g.n() {
        let row = sssp_with_counts(g, s);
        for d in &row.dist {
            best = best.max((*d)?);
        }
    }
    Some(best)
}

/// Maximum edge count of any path; errors on cyclic input.
pub fn longest_path_l(g: &Digraph) -> Result<u64, OracleError> {
    let order = g.topological_order().ok_or(OracleError::NotADag)?;
    let mut level = vec![0u64; g.n()];
    let mut best = 0;
    for &v in &order {
        for &(w, _) in g.out_neighbors(v) {
            level[w] = level[w].max(level[v] + 1);
            best = best.max(level[w]);
        }
    }
    Ok(best)
}

/// Truncated-BFS oracle for bounded-hop source detection: for each vertex the
/// up to `r` lexicographically smallest `(distance, source)` pairs within `h`
/// hops.
pub fn source_detection_oracle(
    g: &Digraph,
    sources: &[usize],
    h: u64,
    r: usize,
) -> Vec<Vec<(u64, usize)>> {
    let mut all: Vec<Vec<(u64, usize)>> = vec![Vec::new(); g.n()];
    for &s in sources {
        let row = bfs_with_counts(g, s);
        for (v, d) in row.dist.iter().enumerate() {
            if let Some(d) = d {
                if *d <= h {
                    all[v].push((*d, s));
                }
            }
        }
    }
    for list in &mut all {
        list.sort_unstable();
        list.truncate(r);
    }
    all
}

/// Truncated-BFS oracle for the bounded-hop multi-source problem: distances
/// from every source within `h` hops.
pub fn hk_ssp_oracle(g: &Digraph, sources: &[usize], h: u64) -> Vec<BTreeMap<usize, u64>> {
    let mut all: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); g.n()];
    for &s in sources {
        let row = bfs_with_counts(g, s);
        for (v, d) in row.dist.iter().enumerate() {
            if let Some(d) = d {
                if *d <= h {
                    all[v].insert(s, *d);
                }
            }
        }
    }
    all
}
