//! Host graphs, digraphs, seeded binomial random models, and edge-list I/O.
//!
//! Random generation draws one uniform per vertex pair in a fixed pair order,
//! so two graphs generated with the same seed and different densities are
//! monotonically coupled: the sparser edge set is a subset of the denser one.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

/// A seeded, labelled random stream. Identical `(seed, label)` pairs always
/// reproduce identical draws; distinct labels off one master seed behave as
/// independent streams (used for the independent edge exposures).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomSeed {
    pub seed: u64,
    pub label: String,
}

impl RandomSeed {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        RandomSeed { seed, label: label.into() }
    }

    /// Derived stream: same master seed, label extended by `suffix`.
    pub fn derive(&self, suffix: &str) -> RandomSeed {
        RandomSeed { seed: self.seed, label: format!("{}/{}", self.label, suffix) }
    }

    /// Deterministic, platform-independent RNG for this (seed, label).
    pub fn rng(&self) -> ChaCha12Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        // Fold the label bytes into the remaining key material.
        for (i, b) in self.label.bytes().enumerate() {
            let slot = 8 + (i % 24);
            key[slot] = key[slot].rotate_left(3) ^ b;
        }
        key[31] ^= self.label.len() as u8;
        ChaCha12Rng::from_seed(key)
    }
}

impl fmt::Display for RandomSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.seed, self.label)
    }
}

/// Direction selector for neighborhood queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Undirected,
}

/// Common adjacency access for undirected and directed hosts, letting the
/// routing kernels run unchanged over both.
pub trait Host {
    fn vertex_count(&self) -> usize;
    /// Successors (undirected: neighbors). Sorted ascending.
    fn out_neighbors(&self, v: u32) -> &[u32];
    /// Predecessors (undirected: neighbors). Sorted ascending.
    fn in_neighbors(&self, v: u32) -> &[u32];
    /// Is there an arc u -> v (undirected: an edge {u, v})?
    fn has_arc(&self, u: u32, v: u32) -> bool;
    fn is_directed(&self) -> bool;
}

/// Undirected host graph on vertices `0..n`, sorted neighbor sets.
///
/// No self-loops, adjacency is symmetric, every listed neighbor is `< n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostGraph {
    n: usize,
    adj: Vec<Vec<u32>>,
}

/// Directed host graph with mutually consistent out- and in-adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostDigraph {
    n: usize,
    out_adj: Vec<Vec<u32>>,
    in_adj: Vec<Vec<u32>>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexRange { vertex: u32, n: usize },
    #[error("duplicate edge {0} {1}")]
    DuplicateEdge(u32, u32),
}

/// Structured parse failure for the edge-list format, carrying the 1-based
/// line number of the offending line.
#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
}

impl HostGraph {
    /// Empty graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        HostGraph { n, adj: vec![Vec::new(); n] }
    }

    /// Builds from an edge list, enforcing the type invariants.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let mut g = HostGraph::empty(n);
        for &(u, v) in edges {
            g.check_pair(u, v)?;
            g.adj[u as usize].push(v);
            g.adj[v as usize].push(u);
        }
        g.sort_dedup_checked()?;
        Ok(g)
    }

    fn check_pair(&self, u: u32, v: u32) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for w in [u, v] {
            if w as usize >= self.n {
                return Err(GraphError::VertexRange { vertex: w, n: self.n });
            }
        }
        Ok(())
    }

    fn sort_dedup_checked(&mut self) -> Result<(), GraphError> {
        for v in 0..self.n {
            self.adj[v].sort_unstable();
            for w in self.adj[v].windows(2) {
                if w[0] == w[1] {
                    return Err(GraphError::DuplicateEdge(v as u32, w[0]));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as sorted `(u, v)` pairs with `u < v`, lexicographic.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n as u32 {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Union of edge sets (vertex counts must agree).
    pub fn union(&self, other: &HostGraph) -> HostGraph {
        assert_eq!(self.n, other.n, "union requires equal vertex counts");
        let mut adj = Vec::with_capacity(self.n);
        for v in 0..self.n {
            let mut merged: Vec<u32> =
                self.adj[v].iter().chain(other.adj[v].iter()).copied().collect();
            merged.sort_unstable();
            merged.dedup();
            adj.push(merged);
        }
        HostGraph { n: self.n, adj }
    }

    /// The directed graph with an arc in both directions per edge.
    pub fn symmetric_closure(&self) -> HostDigraph {
        HostDigraph { n: self.n, out_adj: self.adj.clone(), in_adj: self.adj.clone() }
    }

    /// Complete graph, mostly for tests and tiny oracles.
    pub fn complete(n: usize) -> Self {
        let mut adj = Vec::with_capacity(n);
        for v in 0..n as u32 {
            adj.push((0..n as u32).filter(|&u| u != v).collect());
        }
        HostGraph { n, adj }
    }
}

impl Host for HostGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }
    fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }
    fn in_neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }
    fn has_arc(&self, u: u32, v: u32) -> bool {
        self.has_edge(u, v)
    }
    fn is_directed(&self) -> bool {
        false
    }
}

impl HostDigraph {
    pub fn empty(n: usize) -> Self {
        HostDigraph { n, out_adj: vec![Vec::new(); n], in_adj: vec![Vec::new(); n] }
    }

    pub fn from_arcs(n: usize, arcs: &[(u32, u32)]) -> Result<Self, GraphError> {
        let mut d = HostDigraph::empty(n);
        for &(u, v) in arcs {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for w in [u, v] {
                if w as usize >= n {
                    return Err(GraphError::VertexRange { vertex: w, n });
                }
            }
            d.out_adj[u as usize].push(v);
            d.in_adj[v as usize].push(u);
        }
        for v in 0..n {
            d.out_adj[v].sort_unstable();
            d.in_adj[v].sort_unstable();
            for w in d.out_adj[v].windows(2) {
                if w[0] == w[1] {
                    return Err(GraphError::DuplicateEdge(v as u32, w[0]));
                }
            }
        }
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn out(&self, v: u32) -> &[u32] {
        &self.out_adj[v as usize]
    }

    pub fn incoming(&self, v: u32) -> &[u32] {
        &self.in_adj[v as usize]
    }

    pub fn arc_count(&self) -> usize {
        self.out_adj.iter().map(Vec::len).sum()
    }
}

impl Host for HostDigraph {
    fn vertex_count(&self) -> usize {
        self.n
    }
    fn out_neighbors(&self, v: u32) -> &[u32] {
        &self.out_adj[v as usize]
    }
    fn in_neighbors(&self, v: u32) -> &[u32] {
        &self.in_adj[v as usize]
    }
    fn has_arc(&self, u: u32, v: u32) -> bool {
        self.out_adj[u as usize].binary_search(&v).is_ok()
    }
    fn is_directed(&self) -> bool {
        true
    }
}

/// G(n, p): each unordered pair is an edge independently with probability
/// `p`, decided by one uniform draw per pair in lexicographic pair order.
pub fn random_graph(n: usize, p: f64, seed: &RandomSeed) -> Result<HostGraph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadProbability(p));
    }
    let mut rng = seed.rng();
    let threshold = pair_threshold(p);
    let mut adj = vec![Vec::new(); n];
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if keep_draw(rng.next_u32(), p, threshold) {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Ok(HostGraph { n, adj })
}

/// D(n, p): every ordered pair (u, v), u != v, is an arc independently with
/// probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: &RandomSeed) -> Result<HostDigraph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadProbability(p));
    }
    let mut rng = seed.rng();
    let threshold = pair_threshold(p);
    let mut out_adj = vec![Vec::new(); n];
    let mut in_adj = vec![Vec::new(); n];
    for u in 0..n as u32 {
        for v in 0..n as u32 {
            if u == v {
                continue;
            }
            if keep_draw(rng.next_u32(), p, threshold) {
                out_adj[u as usize].push(v);
                in_adj[v as usize].push(u);
            }
        }
    }
    for v in 0..n {
        out_adj[v].sort_unstable();
        in_adj[v].sort_unstable();
    }
    Ok(HostDigraph { n, out_adj, in_adj })
}

/// Keep-threshold for a u32 uniform draw: keep iff draw < threshold.
/// p = 1 maps to u32::MAX plus saturation handling below.
pub(crate) fn pair_threshold(p: f64) -> u32 {
    if p >= 1.0 {
        return u32::MAX;
    }
    (p * 4294967296.0).floor() as u32
}

// p = 1 has threshold u32::MAX which misses the single draw u32::MAX itself;
// the error is 2^-32 per pair, except certainty must be exact.
pub(crate) fn keep_draw(draw: u32, p: f64, threshold: u32) -> bool {
    if p >= 1.0 {
        return true;
    }
    draw < threshold
}

/// `N(X, Y)` in the chosen direction: the vertices of `Y \ X` seeing some
/// vertex of `X`. The source set is always excluded, matching the convention
/// that a neighborhood of X never contains X itself.
pub fn neighbors_into<H: Host>(
    g: &H,
    x: &BTreeSet<u32>,
    y: &BTreeSet<u32>,
    direction: Direction,
) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for &v in x {
        let lists: &[&[u32]] = match direction {
            Direction::Out => &[g.out_neighbors(v)],
            Direction::In => &[g.in_neighbors(v)],
            Direction::Undirected => &[g.out_neighbors(v), g.in_neighbors(v)],
        };
        for list in lists {
            for &w in *list {
                if y.contains(&w) && !x.contains(&w) {
                    out.insert(w);
                }
            }
        }
    }
    out
}

/// e(X, Y): directed hosts count ordered arcs from X into Y; undirected hosts
/// count each edge with one end in X and the other in Y once.
pub fn edges_between<H: Host>(g: &H, x: &BTreeSet<u32>, y: &BTreeSet<u32>) -> usize {
    let mut count = 0usize;
    if g.is_directed() {
        for &u in x {
            for &v in g.out_neighbors(u) {
                if y.contains(&v) {
                    count += 1;
                }
            }
        }
    } else {
        for &u in x {
            for &v in g.out_neighbors(u) {
                if !y.contains(&v) {
                    continue;
                }
                // {u, v} also qualifies with the roles swapped iff v is in X
                // and u in Y; it would then be visited from both ends, so only
                // the visit from the smaller endpoint counts.
                if x.contains(&v) && y.contains(&u) && u > v {
                    continue;
                }
                count += 1;
            }
        }
    }
    count
}

/// Reads the `n m` header plus `m` lines `u v` into a host graph.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<HostGraph, EdgeListError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();

    let header = lines
        .next()
        .ok_or(EdgeListError::Parse { line: 1, message: "missing header".into() })??;
    let mut it = header.split_whitespace();
    let n: usize = parse_field(it.next(), 1, "vertex count")?;
    let m: usize = parse_field(it.next(), 1, "edge count")?;
    if it.next().is_some() {
        return Err(EdgeListError::Parse { line: 1, message: "trailing tokens in header".into() });
    }

    let mut g = HostGraph::empty(n);
    let mut read_edges = 0usize;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let u: u32 = parse_field(it.next(), line_no, "u")?;
        let v: u32 = parse_field(it.next(), line_no, "v")?;
        if it.next().is_some() {
            return Err(EdgeListError::Parse {
                line: line_no,
                message: "trailing tokens".into(),
            });
        }
        g.check_pair(u, v).map_err(|source| EdgeListError::Graph { line: line_no, source })?;
        if g.has_unsorted_edge(u, v) {
            return Err(EdgeListError::Graph {
                line: line_no,
                source: GraphError::DuplicateEdge(u, v),
            });
        }
        g.adj[u as usize].push(v);
        g.adj[v as usize].push(u);
        read_edges += 1;
    }
    if read_edges != m {
        return Err(EdgeListError::Parse {
            line: 1,
            message: format!("header promises {m} edges, file has {read_edges}"),
        });
    }
    for list in &mut g.adj {
        list.sort_unstable();
    }
    Ok(g)
}

impl HostGraph {
    fn has_unsorted_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].contains(&v)
    }
}

fn parse_field<T: std::str::FromStr>(
    token: Option<&str>,
    line: usize,
    what: &str,
) -> Result<T, EdgeListError> {
    let token =
        token.ok_or_else(|| EdgeListError::Parse { line, message: format!("missing {what}") })?;
    token
        .parse()
        .map_err(|_| EdgeListError::Parse { line, message: format!("bad {what}: {token:?}") })
}

/// Writes the header line then edges sorted lexicographically, `u < v`.
pub fn write_edge_list(g: &HostGraph, path: impl AsRef<Path>) -> Result<(), EdgeListError> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let edges = g.edges();
    writeln!(w, "{} {}", g.n(), edges.len())?;
    for (u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_probability_gives_empty_graph() {
        let g = random_graph(5, 0.0, &RandomSeed::new(1, "t")).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn certainty_gives_complete_graph() {
        let g = random_graph(5, 1.0, &RandomSeed::new(1, "t")).unwrap();
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn digraph_extremes() {
        let d = random_digraph(4, 1.0, &RandomSeed::new(7, "t")).unwrap();
        assert_eq!(d.arc_count(), 12);
        let d = random_digraph(4, 0.0, &RandomSeed::new(7, "t")).unwrap();
        assert_eq!(d.arc_count(), 0);
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(random_graph(5, 1.5, &RandomSeed::new(1, "t")).is_err());
        assert!(random_graph(5, -0.1, &RandomSeed::new(1, "t")).is_err());
    }

    #[test]
    fn edge_count_matches_binomial_moments() {
        // Binomial over C(200, 2) pairs at p = 1/2: per-seed mean 9950,
        // sd ~ 70.5. The mean over 100 seeds has sd ~ 7.05; allow 4 of those.
        let mut total = 0f64;
        for s in 0..100 {
            let g = random_graph(200, 0.5, &RandomSeed::new(s, "moments")).unwrap();
            total += g.edge_count() as f64;
        }
        let mean = total / 100.0;
        let sd_of_mean = (19900.0 * 0.25f64).sqrt() / 10.0;
        assert!((mean - 9950.0).abs() < 4.0 * sd_of_mean, "mean {mean}");
    }

    #[test]
    fn arc_count_matches_binomial_moments() {
        let mut total = 0f64;
        for s in 0..100 {
            let d = random_digraph(100, 0.3, &RandomSeed::new(s, "moments")).unwrap();
            total += d.arc_count() as f64;
        }
        let mean = total / 100.0;
        let sd_of_mean = (9900.0 * 0.3 * 0.7f64).sqrt() / 10.0;
        assert!((mean - 2970.0).abs() < 4.0 * sd_of_mean, "mean {mean}");
    }

    #[test]
    fn generator_is_deterministic() {
        let a = random_graph(60, 0.37, &RandomSeed::new(99, "det")).unwrap();
        let b = random_graph(60, 0.37, &RandomSeed::new(99, "det")).unwrap();
        assert_eq!(a, b);
        let c = random_graph(60, 0.37, &RandomSeed::new(99, "other")).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn neighbors_into_on_path() {
        let g = HostGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let x: BTreeSet<u32> = [0].into();
        let y: BTreeSet<u32> = [1, 2].into();
        let got = neighbors_into(&g, &x, &y, Direction::Undirected);
        assert_eq!(got, [1u32].into());
    }

    #[test]
    fn neighbors_into_empty_sources() {
        let g = HostGraph::complete(6);
        let got = neighbors_into(&g, &BTreeSet::new(), &(0..6).collect(), Direction::Undirected);
        assert!(got.is_empty());
    }

    #[test]
    fn neighbors_into_matches_brute_force_on_k6() {
        let g = HostGraph::complete(6);
        let x: BTreeSet<u32> = [0, 1].into();
        let y: BTreeSet<u32> = [2, 3, 4].into();
        let got = neighbors_into(&g, &x, &y, Direction::Undirected);
        let mut brute = BTreeSet::new();
        for &cand in &y {
            if !x.contains(&cand) && x.iter().any(|&s| g.has_edge(s, cand)) {
                brute.insert(cand);
            }
        }
        assert_eq!(got, brute);
        assert_eq!(got, [2u32, 3, 4].into());
    }

    #[test]
    fn edges_between_k4() {
        let g = HostGraph::complete(4);
        assert_eq!(edges_between(&g, &[0u32, 1].into(), &[2u32, 3].into()), 4);
        let e = HostGraph::empty(4);
        assert_eq!(edges_between(&e, &[0u32, 1].into(), &[2u32, 3].into()), 0);
    }

    fn edges_between_oracle(g: &HostGraph, x: &BTreeSet<u32>, y: &BTreeSet<u32>) -> usize {
        let mut c = 0;
        for (u, v) in g.edges() {
            if (x.contains(&u) && y.contains(&v)) || (x.contains(&v) && y.contains(&u)) {
                c += 1;
            }
        }
        c
    }

    proptest! {
        #[test]
        fn edges_between_matches_quadratic_scan(seed in 0u64..500, xa in 0u32..30, xb in 0u32..30) {
            let g = random_graph(30, 0.4, &RandomSeed::new(seed, "eb")).unwrap();
            let x: BTreeSet<u32> = (0..30).filter(|v| (v * 7 + xa) % 3 == 0).collect();
            let y: BTreeSet<u32> = (0..30).filter(|v| (v * 5 + xb) % 4 <= 1).collect();
            prop_assert_eq!(edges_between(&g, &x, &y), edges_between_oracle(&g, &x, &y));
        }

        #[test]
        fn monotone_coupling(seed in 0u64..200) {
            let s = RandomSeed::new(seed, "coupling");
            let lo = random_graph(40, 0.2, &s).unwrap();
            let hi = random_graph(40, 0.6, &s).unwrap();
            for (u, v) in lo.edges() {
                prop_assert!(hi.has_edge(u, v));
            }
        }

        #[test]
        fn neighbors_into_contained_in_targets(seed in 0u64..200) {
            let g = random_graph(25, 0.3, &RandomSeed::new(seed, "ni")).unwrap();
            let x: BTreeSet<u32> = (0..8).collect();
            let y: BTreeSet<u32> = (5..20).collect();
            let got = neighbors_into(&g, &x, &y, Direction::Undirected);
            for v in &got {
                prop_assert!(y.contains(v) && !x.contains(v));
            }
            let degree_sum: usize = x.iter().map(|&v| g.degree(v)).sum();
            prop_assert!(got.len() <= degree_sum);
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.edges");
        std::fs::write(&path, "3 2\n1 2\n0 1\n").unwrap();
        let g = read_edge_list(&path).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);

        let out = dir.path().join("out.edges");
        write_edge_list(&g, &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text, "3 2\n0 1\n1 2\n");
        // Round trip is the normalized form: reading back reproduces g.
        assert_eq!(read_edge_list(&out).unwrap(), g);
    }

    #[test]
    fn edge_list_rejects_loops_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("loop.edges");
        std::fs::write(&path, "2 1\n0 0\n").unwrap();
        match read_edge_list(&path) {
            Err(EdgeListError::Graph { line: 2, source: GraphError::SelfLoop(0) }) => {}
            other => panic!("expected loop rejection, got {other:?}"),
        }
    }

    #[test]
    fn edge_list_rejects_out_of_range_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("range.edges");
        std::fs::write(&p1, "2 1\n0 5\n").unwrap();
        assert!(matches!(
            read_edge_list(&p1),
            Err(EdgeListError::Graph { line: 2, source: GraphError::VertexRange { .. } })
        ));
        let p2 = dir.path().join("dup.edges");
        std::fs::write(&p2, "3 2\n0 1\n1 0\n").unwrap();
        assert!(matches!(
            read_edge_list(&p2),
            Err(EdgeListError::Graph { line: 3, source: GraphError::DuplicateEdge(..) })
        ));
        let p3 = dir.path().join("malformed.edges");
        std::fs::write(&p3, "3 1\n0 x\n").unwrap();
        assert!(matches!(read_edge_list(&p3), Err(EdgeListError::Parse { line: 2, .. })));
    }
}
