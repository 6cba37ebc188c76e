//! Absorber gadgets, the flexible bipartite template, and robust sets.
//!
//! A non-spanning connector covers at most a constant fraction of its
//! workspace. To cover a workspace exactly, leftover vertices are swallowed
//! by absorbers: path gadgets with two traversals, one spanning the gadget
//! and one spanning the gadget plus a designated extra vertex. A robust set
//! chains absorbers along a bipartite template so that, after the fact, any
//! half of a flexible vertex pool can be absorbed exactly. The spanning
//! connector built on top lives in [`crate::absorb::spanning`].

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connect::{connect_pairs, ConnectError, ConnectionRequest, ConnectorParams};
use crate::expansion::{star_matching_with_demands, SplitError, StarError};
use crate::graph::{Direction, Host, RandomSeed};
use crate::matching::DeficientSet;

pub mod spanning;

pub use spanning::{connect_pairs_spanning, SpanningParams};

/// Gadget size for fan-out `k`.
pub fn absorber_size(k: u64) -> u64 {
    18 * k * k + 2
}

#[derive(Debug, Error)]
pub enum AbsorbError {
    #[error("template side sizes need 3 | n0 and n0 > 0, got n0 = {0}")]
    BadTemplateSize(usize),
    #[error("template certification failed after {attempts} attempts: {witness}")]
    TemplateNotCertified { attempts: u32, witness: DeficientSet },
    #[error("template query: {0}")]
    TemplateQuery(DeficientSet),
    #[error("anchor matching failed: {0}")]
    Anchors(#[from] StarError),
    #[error("workspace split failed: {0}")]
    Split(#[from] SplitError),
    #[error("connector failed at stage {stage}: {source}")]
    Connector {
        stage: &'static str,
        #[source]
        source: ConnectError,
    },
    #[error("chain for index {index} needs path length at least {needed}, got {len}")]
    ChainInfeasible { index: usize, needed: u64, len: u64 },
    #[error("workspace too small at stage {stage}: have {got}, need about {need}")]
    PoolTooSmall { stage: &'static str, got: usize, need: usize },
    #[error("query subset must be {expected} pool vertices, got {got}")]
    BadQuerySubset { expected: usize, got: usize },
    #[error("query subset contains {0}, which is not in the flexible pool")]
    NotInPool(u32),
    #[error("counting condition violated: t (l - 1) = {expected} but |W| = {got}")]
    CountingCondition { expected: u64, got: usize },
    #[error("spanning instance with {pairs} pairs and |W| = {workspace} is below the absorber pipeline threshold and above the exact-search cutoff")]
    SpanningTooSmall { pairs: usize, workspace: usize },
    #[error("exact cover search exhausted its budget")]
    ExactCoverBudget,
    #[error("exact cover search found no tiling")]
    ExactCoverInfeasible,
    #[error("saturation stalled with {remaining} segments open, target window [{lo}, {hi}]: {cause}")]
    SaturationStalled {
        remaining: usize,
        lo: usize,
        hi: usize,
        #[source]
        cause: ConnectError,
    },
    #[error("spanning leftover window is empty (m_min {m_min} > m_max {m_max}); adjust segment or leftover parameters")]
    EmptyLeftoverWindow { m_min: usize, m_max: usize },
    #[error("internal ledger mismatch at {stage}: expected {expected}, got {got}")]
    LedgerMismatch { stage: &'static str, expected: u64, got: u64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache decode error: {0}")]
    Decode(#[from] serde_json::Error),
}

/// Bipartite template on parts X (size n0) and Y + Z (each 2 n0 / 3), max
/// degree at most 40, verified so that every Z' of size n0 / 3 admits a
/// perfect matching between X and Y + Z'.
///
/// Right vertices are numbered 0..(4 n0 / 3): Y first, then Z.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlexibleBipartiteTemplate {
    pub n0: usize,
    pub seed: u64,
    pub x_adj: Vec<Vec<u32>>,
}

impl FlexibleBipartiteTemplate {
    pub fn y_count(&self) -> usize {
        2 * self.n0 / 3
    }
    pub fn z_count(&self) -> usize {
        2 * self.n0 / 3
    }
    pub fn right_count(&self) -> usize {
        4 * self.n0 / 3
    }

    pub fn max_degree(&self) -> usize {
        let x_max = self.x_adj.iter().map(Vec::len).max().unwrap_or(0);
        x_max.max(self.right_degrees().into_iter().max().unwrap_or(0))
    }

    pub fn max_left_degree(&self) -> usize {
        self.x_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut right = vec![0usize; self.right_count()];
        for adj in &self.x_adj {
            for &r in adj {
                right[r as usize] += 1;
            }
        }
        right
    }

    /// Perfect matching between X and Y + Z' for the given Z' (ids relative
    /// to Z, i.e. in 0..z_count). Returns the matched right id per x.
    pub fn match_against(&self, z_prime: &[u32]) -> Result<Vec<u32>, DeficientSet> {
        let y = self.y_count() as u32;
        let right = self.right_count();
        let mut present = vec![false; right];
        for r in 0..y {
            present[r as usize] = true;
        }
        for &z in z_prime {
            present[(y + z) as usize] = true;
        }
        // Kuhn's algorithm straight over the template adjacency.
        let mut owner: Vec<i32> = vec![-1; right];
        let mut seen: Vec<u32> = vec![u32::MAX; right];
        fn try_x(
            x: usize,
            x_adj: &[Vec<u32>],
            present: &[bool],
            owner: &mut [i32],
            seen: &mut [u32],
            tick: u32,
        ) -> bool {
            for &r in &x_adj[x] {
                let r = r as usize;
                if !present[r] || seen[r] == tick {
                    continue;
                }
                seen[r] = tick;
                if owner[r] < 0
                    || try_x(owner[r] as usize, x_adj, present, owner, seen, tick)
                {
                    owner[r] = x as i32;
                    return true;
                }
            }
            false
        }
        for x in 0..self.n0 {
            if !try_x(x, &self.x_adj, &present, &mut owner, &mut seen, x as u32) {
                // Hall witness: lefts reachable by alternating search from x.
                let mut in_set = vec![false; self.n0];
                let mut right_seen = vec![false; right];
                let mut queue = vec![x];
                in_set[x] = true;
                while let Some(v) = queue.pop() {
                    for &r in &self.x_adj[v] {
                        let r = r as usize;
                        if !present[r] || right_seen[r] {
                            continue;
                        }
                        right_seen[r] = true;
                        if owner[r] >= 0 && !in_set[owner[r] as usize] {
                            in_set[owner[r] as usize] = true;
                            queue.push(owner[r] as usize);
                        }
                    }
                }
                let set: Vec<usize> = (0..self.n0).filter(|&v| in_set[v]).collect();
                let demand = set.len() as u64;
                let neighborhood = right_seen.iter().filter(|&&b| b).count() as u64;
                return Err(DeficientSet { set, demand, neighborhood });
            }
        }
        let mut matched = vec![0u32; self.n0];
        for (r, &o) in owner.iter().enumerate() {
            if o >= 0 {
                matched[o as usize] = r as u32;
            }
        }
        Ok(matched)
    }

    /// Checks the robust-matching property. Exhaustive whenever the number of
    /// Z' subsets is small enough to enumerate (in particular for n0 <= 12),
    /// otherwise `trials` sampled subsets.
    pub fn verify(&self, trials: u64, seed: u64) -> Result<(), DeficientSet> {
        let z = self.z_count() as u32;
        let take = self.n0 as u32 / 3;
        if subset_count(z as u64, take as u64) <= 250_000 {
            let mut subset: Vec<u32> = Vec::new();
            fn rec(
                t: &FlexibleBipartiteTemplate,
                z: u32,
                take: u32,
                start: u32,
                subset: &mut Vec<u32>,
            ) -> Result<(), DeficientSet> {
                if subset.len() == take as usize {
                    t.match_against(subset)?;
                    return Ok(());
                }
                for v in start..z {
                    subset.push(v);
                    rec(t, z, take, v + 1, subset)?;
                    subset.pop();
                }
                Ok(())
            }
            rec(self, z, take, 0, &mut subset)
        } else {
            let mut rng = RandomSeed::new(seed, "template-verify").rng();
            let mut pool: Vec<u32> = (0..z).collect();
            for _ in 0..trials {
                pool.shuffle(&mut rng);
                let mut subset = pool[..take as usize].to_vec();
                subset.sort_unstable();
                self.match_against(&subset)?;
            }
            Ok(())
        }
    }
}

fn subset_count(n: u64, k: u64) -> u64 {
    let mut c = 1u64;
    for i in 0..k {
        c = c.saturating_mul(n - i) / (i + 1);
        if c > 1 << 40 {
            return u64::MAX;
        }
    }
    c
}

/// Builds a certified template by rejection sampling: random bounded-degree
/// bipartite graphs verified and retried until one certifies. Left degrees
/// start small (chains through the template stay short) and escalate on
/// repeated failure, never past 40.
pub fn build_flexible_template(
    n0: usize,
    seed: u64,
    verification_trials: u64,
) -> Result<FlexibleBipartiteTemplate, AbsorbError> {
    if n0 == 0 || n0 % 3 != 0 {
        return Err(AbsorbError::BadTemplateSize(n0));
    }
    if let Some(t) = memory_cache_get(n0, seed) {
        return Ok(t);
    }
    let side = 2 * n0 / 3;
    let right = 2 * side;
    let mut rng = RandomSeed::new(seed, &format!("template/{n0}")).rng();
    let max_attempts = 800u32;
    let mut last_witness: Option<DeficientSet> = None;
    for attempt in 0..max_attempts {
        let degree = (4 + (attempt / 40) as usize).min(40).min(right);
        let mut x_adj: Vec<Vec<u32>> = Vec::with_capacity(n0);
        let mut right_deg = vec![0usize; right];
        let mut ok = true;
        for _ in 0..n0 {
            let mut picks: Vec<u32> = Vec::with_capacity(degree);
            // At least two Y-neighbors keep singletons immune to the choice
            // of Z'; the rest spread over all of Y + Z.
            let mut ys: Vec<u32> =
                (0..side as u32).filter(|&y| right_deg[y as usize] < 40).collect();
            ys.shuffle(&mut rng);
            for &y in ys.iter().take(2.min(degree)) {
                picks.push(y);
            }
            let mut rest: Vec<u32> = (0..right as u32)
                .filter(|&r| !picks.contains(&r) && right_deg[r as usize] < 40)
                .collect();
            rest.shuffle(&mut rng);
            for &r in rest.iter().take(degree.saturating_sub(picks.len())) {
                picks.push(r);
            }
            if picks.len() < degree.min(right) {
                ok = false;
                break;
            }
            for &r in &picks {
                right_deg[r as usize] += 1;
            }
            picks.sort_unstable();
            x_adj.push(picks);
        }
        if !ok {
            continue;
        }
        let candidate = FlexibleBipartiteTemplate { n0, seed, x_adj };
        debug_assert!(candidate.max_degree() <= 40);
        match candidate.verify(verification_trials, seed.wrapping_add(attempt as u64)) {
            Ok(()) => {
                memory_cache_put(n0, seed, &candidate);
                return Ok(candidate);
            }
            Err(w) => last_witness = Some(w),
        }
    }
    Err(AbsorbError::TemplateNotCertified {
        attempts: max_attempts,
        witness: last_witness.unwrap_or(DeficientSet { set: vec![], demand: 0, neighborhood: 0 }),
    })
}

fn memory_cache() -> &'static Mutex<HashMap<(usize, u64), FlexibleBipartiteTemplate>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), FlexibleBipartiteTemplate>>> =
        OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn memory_cache_get(n0: usize, seed: u64) -> Option<FlexibleBipartiteTemplate> {
    memory_cache().lock().unwrap().get(&(n0, seed)).cloned()
}

fn memory_cache_put(n0: usize, seed: u64, t: &FlexibleBipartiteTemplate) {
    memory_cache().lock().unwrap().insert((n0, seed), t.clone());
}

/// On-disk template cache, one JSON file per (n0, seed).
pub struct TemplateCache {
    dir: PathBuf,
}

impl TemplateCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        TemplateCache { dir: dir.into() }
    }

    fn path_for(&self, n0: usize, seed: u64) -> PathBuf {
        self.dir.join(format!("template_{n0}_{seed}.json"))
    }

    pub fn get_or_build(
        &self,
        n0: usize,
        seed: u64,
        trials: u64,
    ) -> Result<FlexibleBipartiteTemplate, AbsorbError> {
        let path = self.path_for(n0, seed);
        if path.exists() {
            let t: FlexibleBipartiteTemplate =
                serde_json::from_str(&std::fs::read_to_string(&path)?)?;
            memory_cache_put(n0, seed, &t);
            return Ok(t);
        }
        let t = build_flexible_template(n0, seed, trials)?;
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(&path, serde_json::to_string(&t)?)?;
        Ok(t)
    }
}

pub fn save_template(
    t: &FlexibleBipartiteTemplate,
    path: impl AsRef<Path>,
) -> Result<(), AbsorbError> {
    std::fs::write(path, serde_json::to_string(t)?)?;
    Ok(())
}

pub fn load_template(path: impl AsRef<Path>) -> Result<FlexibleBipartiteTemplate, AbsorbError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// A path gadget for vertex `v`: two traversals between the same ends, one
/// spanning the gadget set R and one spanning R plus v.
#[derive(Debug, Clone)]
pub struct Absorber {
    pub v: u32,
    pub ends: (u32, u32),
    pub path_without: Vec<u32>,
    pub path_with: Vec<u32>,
}

impl Absorber {
    pub fn size(&self) -> usize {
        self.path_without.len()
    }
    pub fn gadget_set(&self) -> BTreeSet<u32> {
        self.path_without.iter().copied().collect()
    }
}

/// Checks both traversals: genuine host paths, shared ends, vertex sets
/// exactly R and R + {v}.
pub fn verify_absorber<H: Host>(host: &H, a: &Absorber) -> Result<(), String> {
    for (name, path) in [("without", &a.path_without), ("with", &a.path_with)] {
        if path.first() != Some(&a.ends.0) || path.last() != Some(&a.ends.1) {
            return Err(format!("path_{name} ends mismatch"));
        }
        for p in path.windows(2) {
            if !host.has_arc(p[0], p[1]) {
                return Err(format!("path_{name}: missing edge {} - {}", p[0], p[1]));
            }
        }
        let distinct: BTreeSet<u32> = path.iter().copied().collect();
        if distinct.len() != path.len() {
            return Err(format!("path_{name} repeats a vertex"));
        }
    }
    let r: BTreeSet<u32> = a.path_without.iter().copied().collect();
    if r.contains(&a.v) {
        return Err("absorbable vertex lies inside R".into());
    }
    let mut r_plus = r.clone();
    r_plus.insert(a.v);
    let with_set: BTreeSet<u32> = a.path_with.iter().copied().collect();
    if with_set != r_plus {
        return Err("path_with does not span R + {v}".into());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct AbsorberParams {
    pub k: u64,
    pub per_vertex: usize,
}

impl AbsorberParams {
    pub fn new(k: u64) -> Self {
        AbsorberParams { k, per_vertex: 40 }
    }
}

/// Batched pair connection: respects the per-call workspace load bound by
/// chunking the request, consumed vertices leaving `free` immediately.
pub(crate) fn connect_batched<H: Host>(
    host: &H,
    pairs: &[(u32, u32)],
    lengths: &[u64],
    free: &mut BTreeSet<u32>,
    cp: &ConnectorParams,
    seed: &RandomSeed,
    stage: &'static str,
) -> Result<Vec<Vec<u32>>, AbsorbError> {
    let mut out: Vec<Option<Vec<u32>>> = vec![None; pairs.len()];
    let mut cursor = 0usize;
    let mut call = 0u32;
    while cursor < pairs.len() {
        let budget = (free.len() as u64) * 7 / 10;
        let mut total = 0u64;
        let mut end = cursor;
        while end < pairs.len() && total + lengths[end] <= budget {
            // Chains may reuse an endpoint as source of one pair and sink of
            // another, but within one call sources must be distinct, as must
            // sinks.
            let dup = pairs[cursor..end]
                .iter()
                .any(|&(x, y)| x == pairs[end].0 || y == pairs[end].1);
            if dup {
                break;
            }
            total += lengths[end];
            end += 1;
        }
        if end == cursor {
            return Err(AbsorbError::Connector {
                stage,
                source: ConnectError::WorkspaceOverloaded {
                    total: lengths[cursor],
                    workspace: free.len(),
                },
            });
        }
        let request = ConnectionRequest {
            pairs: pairs[cursor..end].to_vec(),
            lengths: lengths[cursor..end].to_vec(),
            workspace: free.iter().copied().collect(),
        };
        let bundle = connect_pairs(host, &request, cp, &seed.derive(&format!("{stage}/{call}")))
            .map_err(|source| AbsorbError::Connector { stage, source })?;
        for (offset, path) in bundle.paths.into_iter().enumerate() {
            for &v in &path[1..path.len() - 1] {
                free.remove(&v);
            }
            out[cursor + offset] = Some(path);
        }
        cursor = end;
        call += 1;
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Builds `per_vertex` pairwise edge-disjoint absorbers of size 18k^2 + 2 for
/// every target vertex, inside the workspace `w`.
pub fn build_absorbers<H: Host>(
    host: &H,
    targets: &[u32],
    w: &[u32],
    params: &AbsorberParams,
    cp: &ConnectorParams,
    seed: &RandomSeed,
) -> Result<Vec<Vec<Absorber>>, AbsorbError> {
    build_absorbers_with_counts(
        host,
        targets,
        &vec![params.per_vertex; targets.len()],
        w,
        params.k,
        cp,
        seed,
    )
}

/// Per-target gadget counts; the uniform public entry point wraps this.
///
/// The workspace splits into an anchor pool, a spine pool, and a rung pool,
/// sized to the request: an anchor star of 2 * count leaves per target gives
/// one anchor pair per gadget; a spine path of length 6k + 1 per gadget
/// routes through the spine pool; 3k rungs of length 6k - 1 per gadget
/// through the rung pool provide the two traversals.
pub(crate) fn build_absorbers_with_counts<H: Host>(
    host: &H,
    targets: &[u32],
    counts: &[usize],
    w: &[u32],
    k: u64,
    cp: &ConnectorParams,
    seed: &RandomSeed,
) -> Result<Vec<Vec<Absorber>>, AbsorbError> {
    let gadgets_total: usize = counts.iter().sum();
    let anchor_need: usize = 2 * gadgets_total;
    let spine_mass = (gadgets_total as u64 * (6 * k)) as usize;
    let rung_mass = (gadgets_total as u64 * (3 * k) * (6 * k - 2)) as usize;
    let slack = (w.len() / 24).max(16);
    let need = anchor_need * 2 + spine_mass + rung_mass + 3 * slack;
    if w.len() < need {
        return Err(AbsorbError::PoolTooSmall { stage: "absorbers", got: w.len(), need });
    }
    // Anchor pool gets room for Hall slack; spine and rung pools take their
    // masses plus the remaining extra, split proportionally.
    let anchor_pool = anchor_need * 2 + slack;
    let rest = w.len() - anchor_pool;
    let extra = rest - spine_mass - rung_mass;
    let spine_pool = spine_mass + extra * spine_mass.max(1) / (spine_mass + rung_mass).max(1);
    let sizes = [anchor_pool, spine_pool, rest - spine_pool];
    let parts = split_expanding_sizes(host, w, &sizes, cp, &seed.derive("absorber-split"))?;
    let (w1, w2, w3) = (&parts[0], &parts[1], &parts[2]);
    let demands: Vec<u32> = counts.iter().map(|&c| 2 * c as u32).collect();
    let anchor_leaves =
        star_matching_with_demands(host, targets, &demands, w1, Direction::Undirected)?;

    // Spine paths, one per gadget, batched.
    let spine_len = 6 * k + 1;
    let mut spine_pairs = Vec::with_capacity(gadgets_total);
    for (t, leaves) in anchor_leaves.iter().enumerate() {
        for j in 0..counts[t] {
            spine_pairs.push((leaves[2 * j], leaves[2 * j + 1]));
        }
    }
    let wide = cp.with_band(1, u64::MAX);
    let mut free2: BTreeSet<u32> = w2.iter().copied().collect();
    let spines = connect_batched(
        host,
        &spine_pairs,
        &vec![spine_len; spine_pairs.len()],
        &mut free2,
        &wide,
        &seed.derive("spines"),
        "absorber spine",
    )?;

    // Rung paths: 3k per gadget, x_i to y_i along the spine labeling
    // x_0 x_1 .. x_{3k} y_0 y_{3k} .. y_1.
    let rung_len = 6 * k - 1;
    let mut rung_pairs = Vec::with_capacity(gadgets_total * 3 * k as usize);
    for spine in &spines {
        for i in 1..=3 * k as usize {
            let x_i = spine[i];
            let y_i = spine[(6 * k + 2) as usize - i];
            rung_pairs.push((x_i, y_i));
        }
    }
    let mut free3: BTreeSet<u32> = w3.iter().copied().collect();
    let rungs = connect_batched(
        host,
        &rung_pairs,
        &vec![rung_len; rung_pairs.len()],
        &mut free3,
        &wide,
        &seed.derive("rungs"),
        "absorber rung",
    )?;

    let mut result = Vec::with_capacity(targets.len());
    let mut gadget_no = 0usize;
    for (t, &v) in targets.iter().enumerate() {
        let mut list = Vec::with_capacity(counts[t]);
        for _ in 0..counts[t] {
            let spine = &spines[gadget_no];
            let rung_base = gadget_no * (3 * k as usize);
            let rungs_here = &rungs[rung_base..rung_base + 3 * k as usize];
            let absorber = assemble_absorber(k, v, spine, rungs_here);
            debug_assert_eq!(absorber.size() as u64, absorber_size(k));
            debug_assert_eq!(verify_absorber(host, &absorber), Ok(()));
            list.push(absorber);
            gadget_no += 1;
        }
        result.push(list);
    }
    Ok(result)
}

/// split_expanding with precomputed sizes, wrapping the error.
fn split_expanding_sizes<H: Host>(
    host: &H,
    w: &[u32],
    sizes: &[usize],
    cp: &ConnectorParams,
    seed: &RandomSeed,
) -> Result<Vec<Vec<u32>>, AbsorbError> {
    Ok(crate::expansion::split_expanding(
        host,
        w,
        sizes,
        cp.expand_d,
        seed,
        cp.split_retries,
    )?)
}

/// Assembles the two traversals from the spine and rungs.
///
/// Both displayed traversal orders come out of one orientation rule: in the
/// plain traversal rung i runs x_i to y_i for odd i and backwards for even i;
/// in the absorbing traversal the orientations flip and the walk starts
/// x_0, v, y_1. Whether the final rung delivers the walk to x_{3k} or y_{3k}
/// (and from there to y_0) depends on the parity of k exactly as in the two
/// displayed formulas.
fn assemble_absorber(k: u64, v: u32, spine: &[u32], rungs: &[Vec<u32>]) -> Absorber {
    let kk = k as usize;
    let x0 = spine[0];
    let y0 = spine[3 * kk + 1];
    let rung = |i: usize, rev: bool| -> Vec<u32> {
        let mut p = rungs[i - 1].clone();
        if rev {
            p.reverse();
        }
        p
    };

    let mut path_without = vec![x0];
    for i in 1..=3 * kk {
        path_without.extend(rung(i, i % 2 == 0));
    }
    path_without.push(y0);

    let mut path_with = vec![x0, v];
    for i in 1..=3 * kk {
        path_with.extend(rung(i, i % 2 == 1));
    }
    path_with.push(y0);

    Absorber { v, ends: (x0, y0), path_without, path_with }
}

/// A linked system of absorbers able to cover its committed workspace plus
/// any half-size subset of the flexible pool, with one exact-length path per
/// endpoint pair.
#[derive(Debug, Clone)]
pub struct RobustSet {
    /// Flexible pool A, sorted; |A| = 2r.
    pub pool: Vec<u32>,
    /// Endpoint pairs, one per index in 0..3r.
    pub endpoints: Vec<(u32, u32)>,
    /// Committed workspace W': covered by every query together with the
    /// absorbed subset; |W'| = 3r(l - 2) - r.
    pub covered: Vec<u32>,
    /// Query paths have this many edges (the lemma's l - 1).
    pub path_len: u64,
    template: FlexibleBipartiteTemplate,
    /// Gadgets per template right id (B then A in sorted order).
    gadgets: Vec<Vec<Absorber>>,
    chains: Vec<ChainPlan>,
    r: usize,
}

#[derive(Debug, Clone)]
struct ChainPlan {
    /// (template right id, gadget slot) in traversal order.
    members: Vec<(u32, usize)>,
    /// members.len() + 1 link paths, endpoints included.
    links: Vec<Vec<u32>>,
}

impl RobustSet {
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn template(&self) -> &FlexibleBipartiteTemplate {
        &self.template
    }
}

/// Smallest workable robust-set path parameter for a template whose left
/// degrees reach `max_degree`.
pub fn min_robust_len(max_degree: u64, k: u64, link_min: u64) -> u64 {
    3 + max_degree * absorber_size(k) + (max_degree + 1) * (link_min - 1)
}

/// Builds a robust set over the pool `a` (|A| = 2r), endpoint lists of
/// length 3r, and workspace `w`; every query produces 3r disjoint paths of
/// length `l - 1` covering the committed set plus the queried half of A.
#[allow(clippy::too_many_arguments)]
pub fn build_robust_set<H: Host>(
    host: &H,
    a: &[u32],
    xs: &[u32],
    ys: &[u32],
    w: &[u32],
    l: u64,
    k: u64,
    cp: &ConnectorParams,
    seed: &RandomSeed,
    template_trials: u64,
) -> Result<RobustSet, AbsorbError> {
    assert_eq!(xs.len(), ys.len());
    assert_eq!(a.len() % 2, 0, "flexible pool must have even size 2r");
    let r = a.len() / 2;
    assert_eq!(xs.len(), 3 * r, "endpoint lists must have 3r entries");

    let template = build_flexible_template(3 * r, seed.seed, template_trials)?;
    let max_left = template.max_left_degree() as u64;
    let link_min = (5 * k).max(cp.min_len).max(1);
    let needed = min_robust_len(max_left, k, link_min);
    if l < needed {
        return Err(AbsorbError::ChainInfeasible { index: 0, needed, len: l });
    }

    // Pool sizing: B pool, gadget workspace, link workspace.
    let right_deg = template.right_degrees();
    let gadgets_total: usize = right_deg.iter().sum();
    let gsize = absorber_size(k);
    let gadget_mass = gadgets_total as u64 * (gsize + 2); // gadget + 2 anchors
    let link_mass: u64 = (0..3 * r)
        .map(|j| {
            let d = template.x_adj[j].len() as u64;
            l - 1 - 2 - d * gsize // interior budget of chain j
        })
        .sum();
    let slack = (w.len() / 24).max(16);
    let b_pool_size = 2 * r + 8;
    // Gadget workspace sizing mirrors the absorber builder's own needs.
    let anchor_need = 2 * gadgets_total;
    let gadget_pool_need = anchor_need * 2 + gadget_mass as usize + 3 * slack;
    let need = b_pool_size + gadget_pool_need + link_mass as usize + slack;
    if w.len() < need {
        return Err(AbsorbError::PoolTooSmall { stage: "robust set", got: w.len(), need });
    }
    let rest = w.len() - b_pool_size;
    let link_pool = (link_mass as usize + slack).min(rest - gadget_pool_need);
    let gadget_pool = rest - link_pool;
    let sizes = [b_pool_size, gadget_pool, link_pool];
    let parts = split_expanding_sizes(host, w, &sizes, cp, &seed.derive("robust-split"))?;
    let (w1, w2, w3) = (&parts[0], &parts[1], &parts[2]);
    let b: Vec<u32> = w1[..2 * r].to_vec();

    // Right vertices in template id order: Y ids onto B, Z ids onto A.
    let mut a_sorted = a.to_vec();
    a_sorted.sort_unstable();
    let mut right_vertices = b.clone();
    right_vertices.extend(&a_sorted);

    let gadgets = build_absorbers_with_counts(
        host,
        &right_vertices,
        &right_deg,
        w2,
        k,
        cp,
        &seed.derive("gadgets"),
    )?;

    // Injective labels: the gadget slot of right vertex v serving index j is
    // the rank of j among v's template neighbors.
    let mut slot_of: HashMap<(u32, u32), usize> = HashMap::new();
    {
        let mut neighbors_of_right: Vec<Vec<u32>> = vec![Vec::new(); template.right_count()];
        for (j, adj) in template.x_adj.iter().enumerate() {
            for &rid in adj {
                neighbors_of_right[rid as usize].push(j as u32);
            }
        }
        for (rid, js) in neighbors_of_right.iter().enumerate() {
            for (slot, &j) in js.iter().enumerate() {
                slot_of.insert((rid as u32, j), slot);
            }
        }
    }

    // Chain plans and one batched link request.
    let mut all_pairs = Vec::new();
    let mut all_lens = Vec::new();
    let mut chain_members: Vec<Vec<(u32, usize)>> = Vec::with_capacity(3 * r);
    let mut link_counts = Vec::with_capacity(3 * r);
    for j in 0..3 * r {
        let members: Vec<(u32, usize)> = template.x_adj[j]
            .iter()
            .map(|&rid| (rid, slot_of[&(rid, j as u32)]))
            .collect();
        let d = members.len() as u64;
        let interior_budget = l - 1 - 2 - d * gsize;
        let link_count = d + 1;
        let total_len = interior_budget + link_count;
        debug_assert!(total_len >= link_count * link_min);
        let base = total_len / link_count;
        let extra = (total_len % link_count) as usize;
        let mut lens = vec![base; link_count as usize];
        for len in lens.iter_mut().take(extra) {
            *len += 1;
        }
        let mut prev = xs[j];
        for (pos, &(rid, slot)) in members.iter().enumerate() {
            let gadget = &gadgets[rid as usize][slot];
            all_pairs.push((prev, gadget.ends.0));
            all_lens.push(lens[pos]);
            prev = gadget.ends.1;
        }
        all_pairs.push((prev, ys[j]));
        all_lens.push(lens[members.len()]);
        link_counts.push(members.len() + 1);
        chain_members.push(members);
    }

    let wide = cp.with_band(1, u64::MAX);
    let mut free3: BTreeSet<u32> = w3.iter().copied().collect();
    let links = connect_batched(
        host,
        &all_pairs,
        &all_lens,
        &mut free3,
        &wide,
        &seed.derive("links"),
        "robust link",
    )?;

    let mut chains = Vec::with_capacity(3 * r);
    let mut cursor = 0usize;
    for j in 0..3 * r {
        let count = link_counts[j];
        chains.push(ChainPlan {
            members: chain_members[j].clone(),
            links: links[cursor..cursor + count].to_vec(),
        });
        cursor += count;
    }

    // Committed coverage: chain interiors plus B.
    let mut covered: BTreeSet<u32> = b.iter().copied().collect();
    for chain in &chains {
        for link in &chain.links {
            covered.extend(&link[1..link.len() - 1]);
        }
        for &(rid, slot) in &chain.members {
            covered.extend(gadgets[rid as usize][slot].gadget_set());
        }
    }
    let covered: Vec<u32> = covered.into_iter().collect();
    let expected = 3 * r as u64 * (l - 2) - r as u64;
    if covered.len() as u64 != expected {
        return Err(AbsorbError::LedgerMismatch {
            stage: "robust coverage",
            expected,
            got: covered.len() as u64,
        });
    }

    Ok(RobustSet {
        pool: a_sorted,
        endpoints: xs.iter().copied().zip(ys.iter().copied()).collect(),
        covered,
        path_len: l - 1,
        template,
        gadgets,
        chains,
        r,
    })
}

/// Produces the 3r disjoint endpoint paths of length l - 1 covering exactly
/// the committed workspace plus the queried pool subset. Deterministic: the
/// same subset always yields the same paths.
pub fn query_robust_set(rs: &RobustSet, subset: &[u32]) -> Result<Vec<Vec<u32>>, AbsorbError> {
    if subset.len() != rs.r {
        return Err(AbsorbError::BadQuerySubset { expected: rs.r, got: subset.len() });
    }
    let mut z_prime = Vec::with_capacity(subset.len());
    for &v in subset {
        let pos = rs.pool.binary_search(&v).map_err(|_| AbsorbError::NotInPool(v))?;
        z_prime.push(pos as u32);
    }
    z_prime.sort_unstable();
    let matched = rs.template.match_against(&z_prime).map_err(AbsorbError::TemplateQuery)?;

    let mut paths = Vec::with_capacity(rs.chains.len());
    for (j, chain) in rs.chains.iter().enumerate() {
        let absorb_rid = matched[j];
        let mut path: Vec<u32> = vec![rs.endpoints[j].0];
        for (pos, &(rid, slot)) in chain.members.iter().enumerate() {
            path.extend(&chain.links[pos][1..]);
            let gadget = &rs.gadgets[rid as usize][slot];
            let walk = if rid == absorb_rid { &gadget.path_with } else { &gadget.path_without };
            path.extend(&walk[1..]);
        }
        path.extend(&chain.links[chain.members.len()][1..]);
        debug_assert_eq!(path.len() as u64, rs.path_len + 1);
        paths.push(path);
    }
    Ok(paths)
}

/// Test and acceptance helper: interiors of the query output, for coverage
/// comparisons against `covered` plus the absorbed subset.
pub fn query_interiors(paths: &[Vec<u32>]) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for p in paths {
        out.extend(&p[1..p.len() - 1]);
    }
    out
}
