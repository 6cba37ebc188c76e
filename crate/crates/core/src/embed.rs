//! The embedding pipeline: exposure layers, cycle factors, the bounded-family
//! embedder, and the two large-girth phases.
//!
//! A target graph splits into its small components and its long cycles. The
//! small components embed by greedy cycle search plus a cycle factor for the
//! dominant length. Long cycles either decompose into constant-length
//! segments routed by the spanning connector (when short cycles do not
//! dominate), or the whole graph is first rebuilt out of cycles of one short
//! length and the long cycles are stitched back together through an auxiliary
//! digraph whose vertices stand for those short cycles.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorb::spanning::{connect_pairs_spanning, SpanningParams};
use crate::absorb::AbsorbError;
use crate::connect::{connect_pairs, ConnectError, ConnectionRequest, ConnectorParams};
use crate::cycles::{
    balanced_sum_representation, classify, reduce_long_cycles, split_small_components,
    sum_representation, validate_spec, ConstantsProfile, CycleSpec, FamilyClass,
    LongCycleReduction, PartitionError, ReductionError, SpecError,
};
use crate::expansion::{split_expanding, SplitError};
use crate::graph::{keep_draw, pair_threshold, Host, HostDigraph, HostGraph, RandomSeed};
use crate::matching::maximum_matching;

/// Independent edge exposures whose union is distributed as one G(n, p)
/// sample: four layers at rate q with (1 - q)^4 = 1 - p, the first split
/// once more into two coupled sub-layers at rate q1 with (1 - q1)^2 = 1 - q
/// for the two-step bounded embedder.
#[derive(Debug, Clone)]
pub struct ExposureLayers {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub seed: RandomSeed,
    pub g1a: HostGraph,
    pub g1b: HostGraph,
    pub g2: HostGraph,
    pub g4: HostGraph,
    pub g5: HostGraph,
}

pub const LAYER_LABELS: [&str; 5] = ["G1a", "G1b", "G2", "G4", "G5"];

#[derive(Debug, Error)]
pub enum LayerError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
}

/// Exposes the coupled layers: one uniform draw per (pair, layer) off five
/// labelled streams in a fixed pair order, so a union recomputed from the
/// same streams is identical and a denser p yields supersets per layer.
pub fn make_layers(n: usize, p: f64, seed: &RandomSeed) -> Result<ExposureLayers, LayerError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LayerError::BadProbability(p));
    }
    let q = 1.0 - (1.0 - p).powf(0.25);
    let q1 = 1.0 - (1.0 - q).sqrt();
    let qs = [q1, q1, q, q, q];
    let mut rngs: Vec<_> =
        LAYER_LABELS.iter().map(|label| seed.derive(&format!("layer/{label}")).rng()).collect();
    let thresholds: Vec<u32> = qs.iter().map(|&x| pair_threshold(x)).collect();
    let mut adj: Vec<Vec<Vec<u32>>> = (0..5).map(|_| vec![Vec::new(); n]).collect();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            for layer in 0..5 {
                let draw = rngs[layer].next_u32();
                if keep_draw(draw, qs[layer], thresholds[layer]) {
                    adj[layer][u as usize].push(v);
                    adj[layer][v as usize].push(u);
                }
            }
        }
    }
    let mut graphs: Vec<HostGraph> = adj
        .into_iter()
        .map(|a| {
            let edges: Vec<(u32, u32)> = a
                .iter()
                .enumerate()
                .flat_map(|(u, list)| {
                    list.iter().filter(move |&&v| (u as u32) < v).map(move |&v| (u as u32, v))
                })
                .collect();
            HostGraph::from_edges(n, &edges).expect("generator emits valid edges")
        })
        .collect();
    let g5 = graphs.pop().unwrap();
    let g4 = graphs.pop().unwrap();
    let g2 = graphs.pop().unwrap();
    let g1b = graphs.pop().unwrap();
    let g1a = graphs.pop().unwrap();
    Ok(ExposureLayers { n, p, q, seed: seed.clone(), g1a, g1b, g2, g4, g5 })
}

impl ExposureLayers {
    pub fn g1(&self) -> HostGraph {
        self.g1a.union(&self.g1b)
    }

    pub fn g3(&self) -> HostGraph {
        self.g4.union(&self.g5)
    }

    /// Union of all exposures; distributed as G(n, p).
    pub fn union(&self) -> HostGraph {
        self.g1a.union(&self.g1b).union(&self.g2).union(&self.g4).union(&self.g5)
    }

    /// The coupled G(n, p) sample recomputed from the same per-pair streams:
    /// a pair is an edge iff any of its five layer draws kept it. The union
    /// of the layers is always a subset (in fact equal as a set).
    pub fn coupled_sample(&self) -> HostGraph {
        let q1 = 1.0 - (1.0 - self.q).sqrt();
        let qs = [q1, q1, self.q, self.q, self.q];
        let mut rngs: Vec<_> = LAYER_LABELS
            .iter()
            .map(|label| self.seed.derive(&format!("layer/{label}")).rng())
            .collect();
        let thresholds: Vec<u32> = qs.iter().map(|&x| pair_threshold(x)).collect();
        let mut edges = Vec::new();
        for u in 0..self.n as u32 {
            for v in (u + 1)..self.n as u32 {
                let mut any = false;
                for layer in 0..5 {
                    let draw = rngs[layer].next_u32();
                    if keep_draw(draw, qs[layer], thresholds[layer]) {
                        any = true;
                    }
                }
                if any {
                    edges.push((u, v));
                }
            }
        }
        HostGraph::from_edges(self.n, &edges).expect("valid edges")
    }

    /// Splits a concrete host graph into exposure layers whose union is the
    /// host exactly: per edge, layer coins at the layer rates are redrawn
    /// until at least one keeps the edge.
    pub fn split_host(host: &HostGraph, p: f64, seed: &RandomSeed) -> Result<Self, LayerError> {
        if !(0.0..=1.0).contains(&p) || p == 0.0 {
            return Err(LayerError::BadProbability(p));
        }
        let q = 1.0 - (1.0 - p).powf(0.25);
        let q1 = 1.0 - (1.0 - q).sqrt();
        let qs = [q1, q1, q, q, q];
        let mut rng = seed.derive("split-host").rng();
        let n = host.n();
        let mut layer_edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); 5];
        for (u, v) in host.edges() {
            loop {
                let mut any = false;
                let mut pattern = [false; 5];
                for layer in 0..5 {
                    if rng.gen::<f64>() < qs[layer] {
                        pattern[layer] = true;
                        any = true;
                    }
                }
                if any {
                    for layer in 0..5 {
                        if pattern[layer] {
                            layer_edges[layer].push((u, v));
                        }
                    }
                    break;
                }
            }
        }
        let mut graphs: Vec<HostGraph> = layer_edges
            .into_iter()
            .map(|e| HostGraph::from_edges(n, &e).expect("host edges are valid"))
            .collect();
        let g5 = graphs.pop().unwrap();
        let g4 = graphs.pop().unwrap();
        let g2 = graphs.pop().unwrap();
        let g1b = graphs.pop().unwrap();
        let g1a = graphs.pop().unwrap();
        Ok(ExposureLayers { n, p, q, seed: seed.clone(), g1a, g1b, g2, g4, g5 })
    }

    /// Is the edge present in any exposure layer?
    pub fn contains_edge(&self, u: u32, v: u32) -> bool {
        self.provenance_of(u, v).is_some()
    }

    /// Which layer contributes a given edge, searched in label order.
    pub fn provenance_of(&self, u: u32, v: u32) -> Option<&'static str> {
        let layers: [&HostGraph; 5] = [&self.g1a, &self.g1b, &self.g2, &self.g4, &self.g5];
        for (g, label) in layers.iter().zip(LAYER_LABELS) {
            if g.has_edge(u, v) {
                return Some(label);
            }
        }
        None
    }
}

/// An injective assignment of the target graph's vertices to host vertices.
/// Target vertices are numbered consecutively along each cycle, cycles in the
/// spec's canonical (sorted) order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Embedding {
    pub spec: CycleSpec,
    pub assignment: Vec<u32>,
}

impl Embedding {
    /// (start offset, length) per cycle, in spec order.
    pub fn cycle_ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.spec.lengths.len());
        let mut offset = 0usize;
        for &len in &self.spec.lengths {
            out.push((offset, len as usize));
            offset += len as usize;
        }
        out
    }

    /// Host image of each target edge, in canonical order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (start, len) in self.cycle_ranges() {
            match len {
                0 | 1 => {}
                2 => out.push((self.assignment[start], self.assignment[start + 1])),
                _ => {
                    for i in 0..len {
                        let a = self.assignment[start + i];
                        let b = self.assignment[start + (i + 1) % len];
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    /// Serialized form with one layer label per used edge.
    pub fn to_json(&self, layers: Option<&ExposureLayers>) -> serde_json::Value {
        let provenance: Vec<serde_json::Value> = match layers {
            Some(layers) => self
                .edges()
                .iter()
                .map(|&(u, v)| match layers.provenance_of(u, v) {
                    Some(label) => serde_json::json!(label),
                    None => serde_json::Value::Null,
                })
                .collect(),
            None => Vec::new(),
        };
        serde_json::json!({
            "spec": self.spec,
            "assignment": self.assignment,
            "edge_provenance": provenance,
        })
    }
}

/// First violation found when checking an embedding, if any.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedViolation {
    #[error("assignment has {got} entries for {expected} target vertices")]
    WrongSize { got: usize, expected: usize },
    #[error("host vertex {0} used twice")]
    NotInjective(u32),
    #[error("host vertex {0} out of range")]
    OutOfRange(u32),
    #[error("missing host edge {0} - {1}")]
    MissingEdge(u32, u32),
}

/// Checks injectivity, adjacency of consecutive images, and cycle closure.
/// The realized cycle length multiset equals the spec's by construction of
/// the canonical numbering, which this validates edge by edge.
pub fn verify_embedding<H: Host>(
    host: &H,
    spec: &CycleSpec,
    emb: &Embedding,
) -> Result<(), EmbedViolation> {
    if emb.assignment.len() != spec.n {
        return Err(EmbedViolation::WrongSize { got: emb.assignment.len(), expected: spec.n });
    }
    let mut seen = BTreeSet::new();
    for &v in &emb.assignment {
        if v as usize >= host.vertex_count() {
            return Err(EmbedViolation::OutOfRange(v));
        }
        if !seen.insert(v) {
            return Err(EmbedViolation::NotInjective(v));
        }
    }
    for &(u, v) in &emb.edges() {
        if !host.has_arc(u, v) {
            return Err(EmbedViolation::MissingEdge(u, v));
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("invalid spec: {0}")]
    Spec(#[from] SpecError),
    #[error("invalid layers: {0}")]
    Layer(#[from] LayerError),
    #[error("cycle factor: {0}")]
    Factor(#[from] FactorError),
    #[error("greedy cycle search failed for length {len} with {residual} vertices left")]
    GreedyCycle { len: u64, residual: usize },
    #[error("phase {phase}: workspace split failed: {source}")]
    PhaseSplit {
        phase: &'static str,
        #[source]
        source: SplitError,
    },
    #[error("segment decomposition failed for cycle of length {len}: {source}")]
    Segments {
        len: u64,
        #[source]
        source: PartitionError,
    },
    #[error("long-cycle reduction failed: {0}")]
    Reduction(#[from] ReductionError),
    #[error("spanning connector failed on class {class}: {source}")]
    Spanning {
        class: usize,
        #[source]
        source: AbsorbError,
    },
    #[error("auxiliary connector failed: {0}")]
    Aux(#[from] ConnectError),
    #[error("auxiliary digraph: {0}")]
    AuxStructure(String),
    #[error("phase 2 guard failed: segment class {class} mass {got} below n/4K = {bound}")]
    MassGuard { class: usize, got: u64, bound: u64 },
    #[error("cycle {index}: anchor counts infeasible (t_i = {t_i}, beta_i = {beta_i})")]
    AnchorCounts { index: usize, t_i: u64, beta_i: u64 },
    #[error("embedding failed verification: {0}")]
    Verify(#[from] EmbedViolation),
    #[error("all {attempts} attempts failed; last error: {last}")]
    Exhausted { attempts: u32, last: Box<EmbedError> },
}

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("cycle length {s} does not divide |S| = {size}")]
    Divisibility { s: u64, size: usize },
    #[error("no perfect matching on the factor set: {unmatched} vertices unmatched")]
    NoPerfectMatching { unmatched: usize },
    #[error("packing budget exhausted with {residual} vertices uncovered")]
    BudgetExhausted { residual: usize },
}

/// Phases of the pipeline, reported by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Bounded,
    Phase1,
    Phase2,
    Phase3,
    Done,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Phase::Bounded => "bounded",
            Phase::Phase1 => "phase1",
            Phase::Phase2 => "phase2",
            Phase::Phase3 => "phase3",
            Phase::Done => "done",
        };
        f.write_str(s)
    }
}

/// Result of a pipeline run: the embedding plus retry accounting and notes
/// (anchor skips, stall rescues, and similar diagnostics).
#[derive(Debug, Clone)]
pub struct EmbedReport {
    pub embedding: Embedding,
    pub phase: Phase,
    pub retries: u32,
    pub notes: Vec<String>,
}

/// Partitions `s_set` into cycles of length `s` inside the host: trivial for
/// length 1, a perfect matching (blossom) for length 2, randomized greedy
/// packing with swap repairs, an exact endgame, and restarts for length 3 up.
pub fn find_cycle_factor<H: Host>(
    host: &H,
    s_set: &[u32],
    s: u64,
    profile: &ConstantsProfile,
    seed: &RandomSeed,
) -> Result<Vec<Vec<u32>>, FactorError> {
    if s == 0 || s_set.len() as u64 % s != 0 {
        return Err(FactorError::Divisibility { s, size: s_set.len() });
    }
    if s == 1 {
        return Ok(s_set.iter().map(|&v| vec![v]).collect());
    }
    if s == 2 {
        // Compress to the induced subgraph and run the blossom matcher.
        let index: BTreeMap<u32, u32> =
            s_set.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let adj: Vec<Vec<u32>> = s_set
            .iter()
            .map(|&v| {
                host.out_neighbors(v).iter().filter_map(|u| index.get(u)).copied().collect()
            })
            .collect();
        let mate = maximum_matching(s_set.len(), &adj);
        let unmatched = mate.iter().filter(|m| m.is_none()).count();
        if unmatched > 0 {
            return Err(FactorError::NoPerfectMatching { unmatched });
        }
        let mut out = Vec::with_capacity(s_set.len() / 2);
        for (i, m) in mate.iter().enumerate() {
            let j = m.unwrap() as usize;
            if i < j {
                out.push(vec![s_set[i], s_set[j]]);
            }
        }
        return Ok(out);
    }

    let mut budget = profile.cycle_search_budget * (s_set.len() as u64).max(1);
    for restart in 0..=profile.factor_restarts {
        let mut rng = seed.derive(&format!("factor/{restart}")).rng();
        match try_pack(host, s_set, s, &mut rng, &mut budget) {
            Some(cycles) => return Ok(cycles),
            None => {
                if budget == 0 {
                    break;
                }
            }
        }
    }
    Err(FactorError::BudgetExhausted { residual: s_set.len() })
}

/// One randomized packing pass with swap repairs and an exact endgame.
fn try_pack<H: Host>(
    host: &H,
    s_set: &[u32],
    s: u64,
    rng: &mut impl Rng,
    budget: &mut u64,
) -> Option<Vec<Vec<u32>>> {
    let n = host.vertex_count();
    let mut remaining: Vec<bool> = vec![false; n];
    for &v in s_set {
        remaining[v as usize] = true;
    }
    let mut free: Vec<u32> = s_set.to_vec();
    free.shuffle(rng);
    let mut cycles: Vec<Vec<u32>> = Vec::new();
    let mut stuck = 0u32;
    while let Some(&v) = free.last() {
        if *budget == 0 {
            return None;
        }
        if !remaining[v as usize] {
            free.pop();
            continue;
        }
        if let Some(cycle) = cycle_through(host, v, s, &remaining, rng, budget) {
            for &u in &cycle {
                remaining[u as usize] = false;
            }
            cycles.push(cycle);
            free.pop();
            stuck = 0;
            continue;
        }
        stuck += 1;
        // Insertion rotation: steal an edge (a, b) of a committed cycle with
        // v adjacent to both ends; v joins, the displaced vertex re-enters
        // the pool. Keeps the packing size and lets the walk mix.
        if s == 3 && !cycles.is_empty() && stuck <= 400 {
            let mut inserted = false;
            for _ in 0..160 {
                if *budget == 0 {
                    return None;
                }
                *budget -= 1;
                let idx = rng.gen_range(0..cycles.len());
                let c = &cycles[idx];
                let rot = rng.gen_range(0..3);
                let (a, b, out) = (c[rot], c[(rot + 1) % 3], c[(rot + 2) % 3]);
                if host.has_arc(v, a) && host.has_arc(v, b) {
                    cycles[idx] = vec![v, a, b];
                    remaining[v as usize] = false;
                    remaining[out as usize] = true;
                    free.pop();
                    free.push(out);
                    inserted = true;
                    break;
                }
            }
            if inserted {
                continue;
            }
        }
        // Release repair: free committed cycles touching v and retry.
        let mut released = false;
        if stuck <= 100 && !cycles.is_empty() {
            let releases = 1 + (stuck / 25) as usize;
            let mut count = 0;
            for _ in 0..24 {
                if cycles.is_empty() || count == releases {
                    break;
                }
                let idx = rng.gen_range(0..cycles.len());
                let touches =
                    cycles[idx].iter().any(|&u| host.has_arc(v, u) || host.has_arc(u, v));
                if touches {
                    let cycle = cycles.swap_remove(idx);
                    for &u in &cycle {
                        remaining[u as usize] = true;
                        free.push(u);
                    }
                    count += 1;
                    released = true;
                }
            }
        }
        if !released {
            // Exact endgame on a small residue, otherwise give up this pass.
            let residue: Vec<u32> =
                s_set.iter().copied().filter(|&u| remaining[u as usize]).collect();
            if residue.len() as u64 <= 3 * s + 6 {
                if let Some(rest) = exact_factor(host, &residue, s, budget) {
                    cycles.extend(rest);
                    return Some(cycles);
                }
            }
            return None;
        }
    }
    Some(cycles)
}

/// Randomized search for one cycle of exact length through `v`: depth-first
/// for short lengths, rotation-based path growing for long ones.
fn cycle_through<H: Host>(
    host: &H,
    v: u32,
    len: u64,
    remaining: &[bool],
    rng: &mut impl Rng,
    budget: &mut u64,
) -> Option<Vec<u32>> {
    if len >= 12 {
        for _ in 0..4 {
            if *budget == 0 {
                return None;
            }
            if let Some(cycle) = rotation_cycle_through(host, v, len, remaining, rng, budget) {
                return Some(cycle);
            }
        }
        return None;
    }
    for _ in 0..6 {
        if *budget == 0 {
            return None;
        }
        let mut path = vec![v];
        let mut used: BTreeSet<u32> = [v].into();
        if extend_cycle(host, v, len, remaining, rng, budget, &mut path, &mut used) {
            return Some(path);
        }
    }
    None
}

/// Grows a path from `v` to the target number of vertices, rotating the far
/// end when extension stalls, then rotates until the ends close into a
/// cycle. The start vertex never moves, so the cycle passes through `v`.
fn rotation_cycle_through<H: Host>(
    host: &H,
    v: u32,
    len: u64,
    remaining: &[bool],
    rng: &mut impl Rng,
    budget: &mut u64,
) -> Option<Vec<u32>> {
    let len = len as usize;
    let mut path = vec![v];
    let mut on_path = vec![false; host.vertex_count()];
    on_path[v as usize] = true;
    let mut rotations_left = 24 * len as u64;

    let rotate = |path: &mut Vec<u32>,
                  on_path: &[bool],
                  host: &H,
                  rng: &mut dyn rand::RngCore|
     -> bool {
        // End-neighbors lying on the path pivot the suffix.
        let end = *path.last().unwrap();
        let k = path.len();
        let candidates: Vec<usize> = (0..k.saturating_sub(2))
            .filter(|&i| {
                on_path[path[i] as usize] && host.has_arc(end, path[i]) && host.has_arc(path[i], end)
            })
            .collect();
        if candidates.is_empty() {
            return false;
        }
        let i = candidates[rng.gen_range(0..candidates.len())];
        path[i + 1..].reverse();
        true
    };

    loop {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let end = *path.last().unwrap();
        if path.len() == len {
            if host.has_arc(end, v) && host.has_arc(v, end) {
                return Some(path);
            }
            if rotations_left == 0 {
                return None;
            }
            rotations_left -= 1;
            if !rotate(&mut path, &on_path, host, rng) {
                return None;
            }
            continue;
        }
        // Extend by a random fresh neighbor of the end.
        let fresh: Vec<u32> = host
            .out_neighbors(end)
            .iter()
            .copied()
            .filter(|&u| remaining[u as usize] && !on_path[u as usize] && host.has_arc(u, end))
            .collect();
        if let Some(&next) = fresh.as_slice().choose(rng) {
            on_path[next as usize] = true;
            path.push(next);
            continue;
        }
        if rotations_left == 0 {
            return None;
        }
        rotations_left -= 1;
        if !rotate(&mut path, &on_path, host, rng) {
            return None;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn extend_cycle<H: Host>(
    host: &H,
    root: u32,
    len: u64,
    remaining: &[bool],
    rng: &mut impl Rng,
    budget: &mut u64,
    path: &mut Vec<u32>,
    used: &mut BTreeSet<u32>,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let cur = *path.last().unwrap();
    if path.len() as u64 == len {
        return host.has_arc(cur, root);
    }
    let nbrs = host.out_neighbors(cur);
    let mut order: Vec<u32> = nbrs
        .iter()
        .copied()
        .filter(|&u| remaining[u as usize] && !used.contains(&u))
        .collect();
    order.shuffle(rng);
    order.truncate(12);
    for u in order {
        path.push(u);
        used.insert(u);
        if extend_cycle(host, root, len, remaining, rng, budget, path, used) {
            return true;
        }
        path.pop();
        used.remove(&u);
    }
    false
}

/// Complete backtracking factor search for tiny residues.
fn exact_factor<H: Host>(
    host: &H,
    residue: &[u32],
    s: u64,
    budget: &mut u64,
) -> Option<Vec<Vec<u32>>> {
    if residue.is_empty() {
        return Some(Vec::new());
    }
    if *budget == 0 {
        return None;
    }
    let v = *residue.iter().min().unwrap();
    // Enumerate cycles of length s through v inside the residue.
    let mut cycles_out: Option<Vec<Vec<u32>>> = None;
    let rest_set: BTreeSet<u32> = residue.iter().copied().collect();
    let mut path = vec![v];
    let mut used: BTreeSet<u32> = [v].into();
    fn rec<H: Host>(
        host: &H,
        root: u32,
        s: u64,
        rest: &BTreeSet<u32>,
        path: &mut Vec<u32>,
        used: &mut BTreeSet<u32>,
        budget: &mut u64,
        on_cycle: &mut impl FnMut(&[u32], &mut u64) -> bool,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let cur = *path.last().unwrap();
        if path.len() as u64 == s {
            if host.has_arc(cur, root) {
                return on_cycle(path, budget);
            }
            return false;
        }
        for &u in host.out_neighbors(cur) {
            if u > root && rest.contains(&u) && !used.contains(&u) {
                path.push(u);
                used.insert(u);
                if rec(host, root, s, rest, path, used, budget, on_cycle) {
                    return true;
                }
                path.pop();
                used.remove(&u);
            }
        }
        false
    }
    let mut on_cycle = |cycle: &[u32], budget: &mut u64| -> bool {
        let chosen: Vec<u32> = cycle.to_vec();
        let next: Vec<u32> =
            residue.iter().copied().filter(|u| !chosen.contains(u)).collect();
        if let Some(mut rest_cycles) = exact_factor(host, &next, s, budget) {
            rest_cycles.insert(0, chosen);
            cycles_out = Some(rest_cycles);
            true
        } else {
            false
        }
    };
    rec(host, v, s, &rest_set, &mut path, &mut used, budget, &mut on_cycle);
    cycles_out
}

/// Embeds a spec whose cycles all have length at most K, two host layers:
/// greedy cycle search for everything except the dominant length in the
/// first, then a cycle factor for the dominant length in the second.
pub fn embed_bounded(
    layer_a: &HostGraph,
    layer_b: &HostGraph,
    spec: &CycleSpec,
    profile: &ConstantsProfile,
    seed: &RandomSeed,
) -> Result<Embedding, EmbedError> {
    validate_spec(spec, profile.ell)?;
    let n = layer_a.n();
    // Dominant length: maximize s * X_s, ties toward the smaller length.
    let mut mass: BTreeMap<u64, u64> = BTreeMap::new();
    for &len in &spec.lengths {
        *mass.entry(len).or_insert(0) += len;
    }
    let s_star = mass
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&s, _)| s)
        .expect("nonempty spec");

    let mut rng = seed.derive("bounded").rng();
    let mut remaining: Vec<bool> = vec![true; n];
    let mut remaining_count = n;
    let mut found: BTreeMap<u64, Vec<Vec<u32>>> = BTreeMap::new();
    let mut budget = profile.cycle_search_budget * (spec.n as u64).max(1);

    // Greedy pass, longest cycles first.
    let mut others: Vec<u64> =
        spec.lengths.iter().copied().filter(|&len| len != s_star).collect();
    others.sort_unstable_by(|a, b| b.cmp(a));
    for len in others {
        if len >= 3 {
            let mut done = false;
            for _ in 0..60 {
                let v = loop {
                    let cand = rng.gen_range(0..n) as u32;
                    if remaining[cand as usize] {
                        break cand;
                    }
                };
                if let Some(cycle) =
                    cycle_through(layer_a, v, len, &remaining, &mut rng, &mut budget)
                {
                    for &u in &cycle {
                        remaining[u as usize] = false;
                    }
                    remaining_count -= cycle.len();
                    found.entry(len).or_default().push(cycle);
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(EmbedError::GreedyCycle { len, residual: remaining_count });
            }
        } else if len == 2 {
            // A remaining edge of the first layer, from a random start.
            let mut done = false;
            let offset = rng.gen_range(0..n) as u32;
            'edge: for step in 0..n as u32 {
                let u = (offset + step) % n as u32;
                if !remaining[u as usize] {
                    continue;
                }
                for &v in layer_a.neighbors(u) {
                    if remaining[v as usize] {
                        remaining[u as usize] = false;
                        remaining[v as usize] = false;
                        remaining_count -= 2;
                        found.entry(2).or_default().push(vec![u, v]);
                        done = true;
                        break 'edge;
                    }
                }
            }
            if !done {
                return Err(EmbedError::GreedyCycle { len: 2, residual: remaining_count });
            }
        } else {
            // Isolated vertices wait for the end; nothing to search.
        }
    }
    // Isolated non-dominant vertices take the smallest leftovers after the
    // factor set is carved out. Count what the factor needs first.
    let s_count = spec.count_of(s_star);
    let factor_size = s_star as usize * s_count;
    let isolated_needed =
        if s_star == 1 { 0 } else { spec.lengths.iter().filter(|&&l| l == 1).count() };

    let mut leftovers: Vec<u32> =
        (0..n as u32).filter(|&v| remaining[v as usize]).collect();
    if leftovers.len() < isolated_needed + factor_size {
        return Err(EmbedError::GreedyCycle { len: s_star, residual: leftovers.len() });
    }
    if leftovers.len() == isolated_needed + factor_size && s_star > 1 {
        // Spanning case: the second layer must factor the leftover set
        // exactly (up to the isolated images, a retryable random carve).
        leftovers.shuffle(&mut rng);
        let isolated_images: Vec<u32> = leftovers.drain(..isolated_needed).collect();
        let factor =
            find_cycle_factor(layer_b, &leftovers, s_star, profile, &seed.derive("factor"))?;
        found.entry(s_star).or_default().extend(factor);
        if isolated_needed > 0 {
            found.entry(1).or_default().extend(isolated_images.into_iter().map(|v| vec![v]));
        }
    } else if spec.count_of(s_star) >= 8 && s_star > 1 {
        // Slack case with a heavy dominant class: carve a random exact-size
        // subset and let the factor machinery place it (its repair moves
        // handle the tail, which one-at-a-time greedy search cannot).
        leftovers.shuffle(&mut rng);
        let factor_set: Vec<u32> = leftovers.drain(..factor_size).collect();
        let factor =
            find_cycle_factor(layer_b, &factor_set, s_star, profile, &seed.derive("factor"))?;
        found.entry(s_star).or_default().extend(factor);
        let isolated_total = spec.lengths.iter().filter(|&&l| l == 1).count();
        found
            .entry(1)
            .or_default()
            .extend(leftovers.into_iter().take(isolated_total).map(|v| vec![v]));
    } else {
        // Slack case: the dominant-length cycles are found greedily in the
        // second layer like any other length.
        let s_count = spec.count_of(s_star);
        if s_star >= 3 {
            for _ in 0..s_count {
                let mut done = false;
                for _ in 0..60 {
                    let v = loop {
                        let cand = rng.gen_range(0..n) as u32;
                        if remaining[cand as usize] {
                            break cand;
                        }
                    };
                    if let Some(cycle) =
                        cycle_through(layer_b, v, s_star, &remaining, &mut rng, &mut budget)
                    {
                        for &u in &cycle {
                            remaining[u as usize] = false;
                        }
                        found.entry(s_star).or_default().push(cycle);
                        done = true;
                        break;
                    }
                }
                if !done {
                    return Err(EmbedError::GreedyCycle {
                        len: s_star,
                        residual: remaining.iter().filter(|&&r| r).count(),
                    });
                }
            }
        } else if s_star == 2 {
            for _ in 0..s_count {
                let mut done = false;
                let offset = rng.gen_range(0..n) as u32;
                'edge2: for step in 0..n as u32 {
                    let u = (offset + step) % n as u32;
                    if !remaining[u as usize] {
                        continue;
                    }
                    for &v in layer_b.neighbors(u) {
                        if remaining[v as usize] {
                            remaining[u as usize] = false;
                            remaining[v as usize] = false;
                            found.entry(2).or_default().push(vec![u, v]);
                            done = true;
                            break 'edge2;
                        }
                    }
                }
                if !done {
                    return Err(EmbedError::GreedyCycle {
                        len: 2,
                        residual: remaining.iter().filter(|&&r| r).count(),
                    });
                }
            }
        }
        let mut pool: Vec<u32> = (0..n as u32).filter(|&v| remaining[v as usize]).collect();
        pool.shuffle(&mut rng);
        let isolated_total = spec.lengths.iter().filter(|&&l| l == 1).count();
        found
            .entry(1)
            .or_default()
            .extend(pool.into_iter().take(isolated_total).map(|v| vec![v]));
    }

    assemble_embedding(spec, found)
}

fn assemble_embedding(
    spec: &CycleSpec,
    mut found: BTreeMap<u64, Vec<Vec<u32>>>,
) -> Result<Embedding, EmbedError> {
    let mut assignment = Vec::with_capacity(spec.n);
    for &len in &spec.lengths {
        let pool = found.get_mut(&len).expect("every length was embedded");
        let cycle = pool.pop().expect("count bookkeeping");
        debug_assert_eq!(cycle.len() as u64, len);
        assignment.extend(cycle);
    }
    Ok(Embedding { spec: spec.clone(), assignment })
}

/// Embeds an H1-class spec: components up to K^(1/3) by the bounded
/// embedder, every longer cycle decomposed into segments of two consecutive
/// lengths and routed by two spanning-connector calls whose workspaces
/// together cover everything outside the anchors.
pub fn embed_h1(
    layers: &ExposureLayers,
    spec: &CycleSpec,
    profile: &ConstantsProfile,
    seed: &RandomSeed,
    notes: &mut Vec<String>,
) -> Result<Embedding, EmbedError> {
    let n = layers.n;
    let cutoff = profile.cube_root_big_k();
    let (_, s_prime) = split_small_components(spec, profile);
    let long_lengths: Vec<u64> =
        spec.lengths.iter().copied().filter(|&l| l > cutoff).collect();

    // Phase 1 on the small part.
    let small_emb = if s_prime.n > 0 {
        Some(embed_bounded(&layers.g1a, &layers.g1b, &s_prime, profile, &seed.derive("phase1"))?)
    } else {
        None
    };
    let occupied: BTreeSet<u32> = small_emb
        .as_ref()
        .map(|e| e.assignment.iter().copied().collect())
        .unwrap_or_default();

    if long_lengths.is_empty() {
        let emb = small_emb.expect("spec is nonempty");
        return Ok(emb);
    }

    // Segment decomposition per long cycle.
    let seg = profile.spanning_segment;
    let mut reps: Vec<Vec<u64>> = Vec::with_capacity(long_lengths.len());
    for &len in &long_lengths {
        let parts = balanced_sum_representation(len, seg)
            .map_err(|source| EmbedError::Segments { len, source })?;
        reps.push(parts);
    }
    let t_total: usize = reps.iter().map(Vec::len).sum();

    // Anchors: the t smallest unoccupied vertices; skipping occupied ones is
    // logged per the fixed-copy interaction question.
    let mut anchors: Vec<u32> = Vec::with_capacity(t_total);
    let mut skipped = 0usize;
    for v in 0..n as u32 {
        if anchors.len() == t_total {
            break;
        }
        if occupied.contains(&v) {
            skipped += 1;
            continue;
        }
        anchors.push(v);
    }
    if skipped > 0 {
        notes.push(format!("anchor selection skipped {skipped} occupied vertices"));
    }
    if anchors.len() < t_total {
        return Err(EmbedError::GreedyCycle { len: seg, residual: anchors.len() });
    }

    // Per-cycle anchor blocks and the rotation pairing.
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    {
        let mut it = anchors.iter().copied();
        for rep in &reps {
            blocks.push((&mut it).take(rep.len()).collect());
        }
    }
    let anchor_set: BTreeSet<u32> = anchors.iter().copied().collect();
    let mut workspace: Vec<u32> = (0..n as u32)
        .filter(|v| !occupied.contains(v) && !anchor_set.contains(v))
        .collect();
    // Host slack beyond the target size stays out of the exact-cover
    // workspace and simply goes unused.
    let interiors_needed: usize =
        reps.iter().flatten().map(|&a| (a - 1) as usize).sum();
    if workspace.len() < interiors_needed {
        return Err(EmbedError::GreedyCycle { len: seg, residual: workspace.len() });
    }
    workspace.truncate(interiors_needed);

    // Two length classes.
    let mut class_pairs: [Vec<(u32, u32)>; 2] = [Vec::new(), Vec::new()];
    let mut class_sizes = [0u64; 2];
    let mut slot_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); 2]; // (cycle, j)
    for (i, rep) in reps.iter().enumerate() {
        for (j, &alpha) in rep.iter().enumerate() {
            let a = blocks[i][j];
            let b = blocks[i][(j + 1) % rep.len()];
            let class = (alpha - seg) as usize;
            class_pairs[class].push((a, b));
            class_sizes[class] += alpha - 1;
            slot_of[class].push((i, j));
        }
    }
    debug_assert_eq!(class_sizes[0] + class_sizes[1], workspace.len() as u64);
    // The lemma's mass guard: both classes must carry real weight.
    let bound = n as u64 / (4 * profile.big_k);
    for (class, &size) in class_sizes.iter().enumerate() {
        if size < bound {
            return Err(EmbedError::MassGuard { class, got: size, bound });
        }
    }

    let split = split_expanding(
        &layers.g2,
        &workspace,
        &[class_sizes[0] as usize, class_sizes[1] as usize],
        profile.expand_d,
        &seed.derive("phase2-split"),
        profile.split_retries,
    )
    .map_err(|source| EmbedError::PhaseSplit { phase: "phase2", source })?;

    let sp = SpanningParams::from_profile(profile);
    let mut segment_paths: Vec<Vec<Option<Vec<u32>>>> =
        reps.iter().map(|rep| vec![None; rep.len()]).collect();
    for class in 0..2 {
        if class_pairs[class].is_empty() {
            continue;
        }
        let bundle = connect_pairs_spanning(
            &layers.g2,
            &class_pairs[class],
            seg + class as u64,
            &split[class],
            &sp,
            &seed.derive(&format!("phase2-class{class}")),
        )
        .map_err(|source| EmbedError::Spanning { class, source })?;
        for (slot, path) in bundle.paths.into_iter().enumerate() {
            let (i, j) = slot_of[class][slot];
            segment_paths[i][j] = Some(path);
        }
    }

    // Stitch each cycle: concatenate its segment paths, dropping the shared
    // anchors.
    let mut found: BTreeMap<u64, Vec<Vec<u32>>> = BTreeMap::new();
    if let Some(small) = &small_emb {
        for (start, len) in small.cycle_ranges() {
            found
                .entry(len as u64)
                .or_default()
                .push(small.assignment[start..start + len].to_vec());
        }
    }
    for (i, rep) in reps.iter().enumerate() {
        let mut cycle: Vec<u32> = Vec::with_capacity(long_lengths[i] as usize);
        for j in 0..rep.len() {
            let path = segment_paths[i][j].as_ref().expect("all segments routed");
            cycle.extend(&path[..path.len() - 1]);
        }
        debug_assert_eq!(cycle.len() as u64, long_lengths[i]);
        found.entry(long_lengths[i]).or_default().push(cycle);
    }
    assemble_embedding(spec, found)
}

/// One vertex of the auxiliary digraph: a chosen edge on an embedded short
/// cycle, or a designated isolated vertex.
#[derive(Debug, Clone)]
pub enum AuxNode {
    /// (s, t) plus the full host cycle, stored s-first in traversal order so
    /// that walking the vector visits s, ..., t without the (s, t) edge.
    Cycle { s: u32, t: u32, traversal: Vec<u32> },
    Isolated(u32),
}

/// The Phase-3 auxiliary digraph: one vertex per embedded u-cycle (through a
/// fixed edge each) plus the designated isolated vertices, arcs decided by
/// the two late exposure layers.
#[derive(Debug)]
pub struct AuxiliaryDigraph {
    pub nodes: Vec<AuxNode>,
    pub digraph: HostDigraph,
    /// How many leading nodes are cycles (set Z); the rest are isolated (A).
    pub z_count: usize,
}

/// Builds the digraph from the embedded reduced copy.
///
/// Arc rules: between cycle nodes z = st and z' = s't', an arc z -> z' iff
/// t s' is an edge of the first layer; between a cycle node and an isolated
/// vertex v, z -> v iff t v and v -> z iff v s, both in the first layer;
/// between isolated u < v (host order), u -> v reads the first layer and
/// v -> u the second, keeping the two directions independent.
pub fn build_auxiliary_digraph(
    g4: &HostGraph,
    g5: &HostGraph,
    u_cycles: &[Vec<u32>],
    isolated: &[u32],
) -> Result<AuxiliaryDigraph, EmbedError> {
    let mut nodes: Vec<AuxNode> = Vec::with_capacity(u_cycles.len() + isolated.len());
    for cycle in u_cycles {
        if cycle.is_empty() {
            return Err(EmbedError::AuxStructure("empty cycle in the phase-1 copy".into()));
        }
        let u = cycle.len();
        if u == 1 {
            let v = cycle[0];
            nodes.push(AuxNode::Cycle { s: v, t: v, traversal: vec![v] });
            continue;
        }
        // s = smallest host vertex on the cycle, t = its smaller cycle
        // neighbor; the traversal runs s .. t the long way around.
        let pos = (0..u).min_by_key(|&i| cycle[i]).unwrap();
        let s = cycle[pos];
        let left = cycle[(pos + u - 1) % u];
        let right = cycle[(pos + 1) % u];
        let (t, forward) = if u == 2 {
            (cycle[(pos + 1) % u], true)
        } else if right <= left {
            (right, false)
        } else {
            (left, true)
        };
        let mut traversal = Vec::with_capacity(u);
        if forward {
            // t is the predecessor: walk forward from s to t.
            for i in 0..u {
                traversal.push(cycle[(pos + i) % u]);
            }
        } else {
            // t is the successor: walk backwards from s.
            for i in 0..u {
                traversal.push(cycle[(pos + u - i) % u]);
            }
        }
        debug_assert_eq!(traversal[0], s);
        debug_assert_eq!(*traversal.last().unwrap(), t);
        nodes.push(AuxNode::Cycle { s, t, traversal });
    }
    let z_count = nodes.len();
    for &v in isolated {
        nodes.push(AuxNode::Isolated(v));
    }

    let count = nodes.len();
    let mut arcs: Vec<(u32, u32)> = Vec::new();
    for i in 0..count {
        for j in 0..count {
            if i == j {
                continue;
            }
            let arc = match (&nodes[i], &nodes[j]) {
                (AuxNode::Cycle { t, .. }, AuxNode::Cycle { s, .. }) => g4.has_edge(*t, *s),
                (AuxNode::Cycle { t, .. }, AuxNode::Isolated(v)) => g4.has_edge(*t, *v),
                (AuxNode::Isolated(v), AuxNode::Cycle { s, .. }) => g4.has_edge(*v, *s),
                (AuxNode::Isolated(a), AuxNode::Isolated(b)) => {
                    if a < b {
                        g4.has_edge(*a, *b)
                    } else {
                        g5.has_edge(*a, *b)
                    }
                }
            };
            if arc {
                arcs.push((i as u32, j as u32));
            }
        }
    }
    let digraph = HostDigraph::from_arcs(count, &arcs)
        .map_err(|e| EmbedError::AuxStructure(format!("arc construction: {e}")))?;
    Ok(AuxiliaryDigraph { nodes, digraph, z_count })
}

/// Embeds an H2-class spec: the reduced copy (long cycles cut into u-cycles
/// and isolated vertices) embeds first; the auxiliary digraph then hosts one
/// non-spanning connecting call whose paths, expanded back through the
/// u-cycles, stitch the long cycles together.
pub fn embed_h2(
    layers: &ExposureLayers,
    spec: &CycleSpec,
    profile: &ConstantsProfile,
    seed: &RandomSeed,
    notes: &mut Vec<String>,
) -> Result<Embedding, EmbedError> {
    let reduction = reduce_long_cycles(spec, profile)?;
    let u = reduction.u;
    let phase1 =
        embed_bounded(&layers.g1a, &layers.g1b, &reduction.reduced, profile, &seed.derive("phase1"))?;

    // Collect the embedded u-cycles and isolated vertices.
    let mut u_cycles: Vec<Vec<u32>> = Vec::new();
    let mut isolated_all: Vec<u32> = Vec::new();
    let mut native: BTreeMap<u64, Vec<Vec<u32>>> = BTreeMap::new();
    for (start, len) in phase1.cycle_ranges() {
        let verts = phase1.assignment[start..start + len].to_vec();
        if len as u64 == u {
            u_cycles.push(verts);
        } else if len == 1 {
            isolated_all.push(verts[0]);
        } else {
            native.entry(len as u64).or_default().push(verts);
        }
    }
    // When u = 1 the u-cycles and the isolated vertices coincide; the cycle
    // role wins and designated anchors come out of the same pool.
    let beta_total: u64 = reduction.entries.iter().map(|e| e.beta).sum();
    isolated_all.sort_unstable();
    if u == 1 {
        u_cycles = isolated_all.iter().map(|&v| vec![v]).collect();
    }
    if (isolated_all.len() as u64) < beta_total {
        return Err(EmbedError::AuxStructure(format!(
            "phase-1 copy has {} isolated vertices, the reduction needs {beta_total}",
            isolated_all.len()
        )));
    }
    let designated: Vec<u32> = isolated_all[..beta_total as usize].to_vec();
    if u == 1 {
        // The designated vertices must not double as cycle nodes.
        let designated_set: BTreeSet<u32> = designated.iter().copied().collect();
        u_cycles.retain(|c| !designated_set.contains(&c[0]));
    }

    // Order cycle nodes by their smallest host vertex for the fixed ordering.
    u_cycles.sort_unstable_by_key(|c| *c.iter().min().unwrap());
    let aux = build_auxiliary_digraph(&layers.g4, &layers.g5, &u_cycles, &designated)?;

    // Segment decompositions: sum of alpha_ij = gamma_i + beta_i with parts
    // in {M - 1, M}.
    let m_base = profile.aux_segment;
    let mut reps: Vec<Vec<u64>> = Vec::new();
    for entry in &reduction.entries {
        let z = entry.gamma + entry.beta;
        let parts = sum_representation(z, m_base - 1)
            .map_err(|source| EmbedError::Segments { len: entry.original_len, source })?;
        reps.push(parts);
    }

    // Anchor labels: per cycle, beta_i designated vertices then t_i - beta_i
    // of the smallest cycle nodes.
    let z_prime_total: u64 = reps
        .iter()
        .zip(&reduction.entries)
        .map(|(rep, e)| rep.len() as u64 - e.beta)
        .sum::<u64>();
    if (aux.z_count as u64) < z_prime_total {
        return Err(EmbedError::AuxStructure(format!(
            "auxiliary digraph has {} cycle nodes, anchors need {z_prime_total}",
            aux.z_count
        )));
    }
    for (i, (rep, e)) in reps.iter().zip(&reduction.entries).enumerate() {
        let t_i = rep.len() as u64;
        if t_i < 2 || t_i <= e.beta {
            return Err(EmbedError::AnchorCounts { index: i, t_i, beta_i: e.beta });
        }
    }

    let mut a_cursor = 0usize; // into designated (node ids aux.z_count..)
    let mut z_cursor = 0usize; // into cycle nodes 0..
    let mut cycle_anchor_nodes: Vec<Vec<u32>> = Vec::new();
    for (rep, e) in reps.iter().zip(&reduction.entries) {
        let t_i = rep.len();
        let beta = e.beta as usize;
        let mut nodes_i = Vec::with_capacity(t_i);
        for _ in 0..beta {
            nodes_i.push((aux.z_count + a_cursor) as u32);
            a_cursor += 1;
        }
        for _ in 0..(t_i - beta) {
            nodes_i.push(z_cursor as u32);
            z_cursor += 1;
        }
        cycle_anchor_nodes.push(nodes_i);
    }
    let anchors_used = z_cursor;

    // One non-spanning connecting call inside the digraph.
    let mut pairs = Vec::new();
    let mut lengths = Vec::new();
    for (i, rep) in reps.iter().enumerate() {
        let nodes_i = &cycle_anchor_nodes[i];
        for (j, &alpha) in rep.iter().enumerate() {
            pairs.push((nodes_i[j], nodes_i[(j + 1) % nodes_i.len()]));
            lengths.push(alpha);
        }
    }
    let workspace: Vec<u32> = (anchors_used..aux.z_count).map(|i| i as u32).collect();
    let request = ConnectionRequest { pairs: pairs.clone(), lengths, workspace };
    let mut cp = ConnectorParams::from_profile(profile);
    cp = cp.with_band(cp.min_len.min(m_base - 1), cp.max_len.max(m_base));
    let bundle = connect_pairs(&aux.digraph, &request, &cp, &seed.derive("phase3"))?;

    // Expand each digraph cycle back into a host cycle.
    let mut found: BTreeMap<u64, Vec<Vec<u32>>> = native;
    let mut consumed_nodes: BTreeSet<u32> = BTreeSet::new();
    let mut path_cursor = 0usize;
    for (i, rep) in reps.iter().enumerate() {
        let mut host_cycle: Vec<u32> = Vec::new();
        for _ in 0..rep.len() {
            let path = &bundle.paths[path_cursor];
            path_cursor += 1;
            // Skip the final node: it opens the next segment.
            for &node in &path[..path.len() - 1] {
                consumed_nodes.insert(node);
                match &aux.nodes[node as usize] {
                    AuxNode::Cycle { traversal, .. } => host_cycle.extend(traversal),
                    AuxNode::Isolated(v) => host_cycle.push(*v),
                }
            }
        }
        let entry = &reduction.entries[i];
        let expected = entry.original_len;
        if host_cycle.len() as u64 != expected {
            return Err(EmbedError::AuxStructure(format!(
                "reconstructed cycle has {} vertices, expected {expected}",
                host_cycle.len()
            )));
        }
        // The bookkeeping identity, in exact integers: with sum(alpha_j + 1)
        // = gamma + beta + t, the host cycle spans (sum - t - beta) u + beta.
        let sum_alpha_plus_one: u64 = rep.iter().map(|&a| a + 1).sum();
        let t_i = rep.len() as u64;
        debug_assert_eq!(
            (sum_alpha_plus_one - t_i - entry.beta) * u + entry.beta,
            expected
        );
        found.entry(expected).or_default().push(host_cycle);
    }
    notes.push(format!(
        "phase3: u = {u}, |Z| = {}, |A| = {beta_total}, {} segment paths",
        aux.z_count,
        bundle.paths.len()
    ));

    // Unconsumed cycle nodes stay as native u-cycles; unconsumed designated
    // vertices would be a ledger bug (every designated vertex is an anchor).
    for (id, node) in aux.nodes.iter().enumerate() {
        if consumed_nodes.contains(&(id as u32)) {
            continue;
        }
        match node {
            AuxNode::Cycle { traversal, .. } => {
                found.entry(u).or_default().push(traversal.clone());
            }
            AuxNode::Isolated(v) => {
                return Err(EmbedError::AuxStructure(format!(
                    "designated isolated vertex {v} was never absorbed"
                )));
            }
        }
    }
    // Isolated vertices of the target spec; for u = 1 they already arrived
    // as unconsumed cycle nodes.
    if u != 1 {
        for &v in &isolated_all[beta_total as usize..] {
            found.entry(1).or_default().push(vec![v]);
        }
    }

    assemble_embedding(spec, found)
}

/// Full dispatch: bounded specs go straight to the two-layer embedder, the
/// rest classify into the segment route or the auxiliary-digraph route.
/// Phase failures retry with fresh derived seeds, never a changed spec.
pub fn embed(
    layers: &ExposureLayers,
    spec: &CycleSpec,
    profile: &ConstantsProfile,
    seed: &RandomSeed,
) -> Result<EmbedReport, EmbedError> {
    validate_spec(spec, profile.ell)?;
    let mut notes = Vec::new();
    let mut last: Option<EmbedError> = None;
    let attempts = profile.phase_retries.max(1);
    for attempt in 0..attempts {
        let attempt_seed = seed.derive(&format!("attempt/{attempt}"));
        let result = if spec.lengths.iter().all(|&l| l <= profile.big_k) {
            embed_bounded(&layers.g1a, &layers.g1b, spec, profile, &attempt_seed)
                .map(|e| (e, Phase::Bounded))
        } else {
            match classify(spec, profile) {
                FamilyClass::H1 => embed_h1(layers, spec, profile, &attempt_seed, &mut notes)
                    .map(|e| (e, Phase::Phase2)),
                FamilyClass::H2 => embed_h2(layers, spec, profile, &attempt_seed, &mut notes)
                    .map(|e| (e, Phase::Phase3)),
            }
        };
        match result {
            Ok((embedding, phase)) => {
                audit_against_layers(layers, spec, &embedding)?;
                if attempt > 0 {
                    notes.push(format!("succeeded after {attempt} retries"));
                }
                return Ok(EmbedReport { embedding, phase, retries: attempt, notes });
            }
            Err(e) => last = Some(e),
        }
    }
    Err(EmbedError::Exhausted { attempts, last: Box::new(last.unwrap()) })
}

/// Injectivity plus edge-provenance audit: every edge the embedding uses
/// must come from some exposure layer. Equivalent to verifying against the
/// union without materializing it.
pub fn audit_against_layers(
    layers: &ExposureLayers,
    spec: &CycleSpec,
    emb: &Embedding,
) -> Result<(), EmbedViolation> {
    if emb.assignment.len() != spec.n {
        return Err(EmbedViolation::WrongSize { got: emb.assignment.len(), expected: spec.n });
    }
    let mut seen = BTreeSet::new();
    for &v in &emb.assignment {
        if (v as usize) >= layers.n {
            return Err(EmbedViolation::OutOfRange(v));
        }
        if !seen.insert(v) {
            return Err(EmbedViolation::NotInjective(v));
        }
    }
    for &(u, v) in &emb.edges() {
        if !layers.contains_edge(u, v) {
            return Err(EmbedViolation::MissingEdge(u, v));
        }
    }
    Ok(())
}

/// The reduction plan re-exported for harness reporting.
pub fn plan_reduction(
    spec: &CycleSpec,
    profile: &ConstantsProfile,
) -> Result<LongCycleReduction, ReductionError> {
    reduce_long_cycles(spec, profile)
}
