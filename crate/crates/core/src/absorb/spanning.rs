//! The spanning connector: paths of one exact length between every endpoint
//! pair whose interiors cover the workspace exactly.
//!
//! Pipeline for an instance with t pairs, length l, and |W| = t (l - 1):
//!
//! 1. Lengths above the base length are reduced: a prefix path per pair leads
//!    to a fresh anchor, greedily chosen disjoint bridge edges chain the
//!    remainder into base-length sub-instances, and the pipeline recurses
//!    once.
//! 2. A flexible pool A of 2r vertices (r = 10 k s) is carved out, and a
//!    robust set over the first 3r pairs commits part of the rest.
//! 3. Direct chains for the remaining pairs: anchor vertices split each chain
//!    into segments, and saturation rounds of single-pair routing connect
//!    segments until s remain (a stall slightly above s is tolerated while
//!    the repair arithmetic below still balances).
//! 4. Each leftover segment is repaired through the pool: its ends match into
//!    A, leftover workspace vertices match twice into A, and short paths
//!    inside A stitch a replacement segment of the exact planned length.
//! 5. The repairs consume exactly half of A; the robust set absorbs the
//!    untouched half, covering its committed set exactly.
//!
//! Degenerate instances far below the absorber thresholds are tiled by an
//! exhaustive search instead, so tiny forced cases still work.

use std::collections::BTreeSet;

use super::{build_robust_set, query_interiors, query_robust_set, AbsorbError};
use crate::connect::{
    route_one, ConnectorParams, PathBundle, RouteCandidate, VertexSet,
};
use crate::cycles::ConstantsProfile;
use crate::graph::{Host, RandomSeed};
use crate::matching::demand_matching;

#[derive(Debug, Clone, Copy)]
pub struct SpanningParams {
    /// Fan-out parameter for gadget sizes and segment arithmetic.
    pub k: u64,
    /// Target leftover segment count s; the flexible pool gets 2r = 20 k s.
    pub leftover: usize,
    /// Lengths above this are reduced to it first (the "1000 k^2" role).
    pub base_len: u64,
    /// Direct chains are cut into segments of this length (the "10k + 2"
    /// role); the remainder is absorbed into each chain's first segment.
    pub segment: u64,
    pub template_trials: u64,
    pub exact_cover_budget: u64,
    pub connector: ConnectorParams,
}

impl SpanningParams {
    pub fn from_profile(p: &ConstantsProfile) -> Self {
        SpanningParams {
            k: p.k,
            leftover: p.spanning_leftover,
            base_len: p.spanning_segment,
            segment: 10 * p.k + 2,
            template_trials: 2_000,
            exact_cover_budget: 40_000_000,
            connector: ConnectorParams::from_profile(p),
        }
    }

    fn r(&self) -> usize {
        10 * self.k as usize * self.leftover
    }

    /// Per-repair pool consumption is segment - 1 - h where h workspace
    /// vertices are swallowed; h is capped by the requirement that the
    /// repair's sub-paths keep length at least one.
    fn h_max(&self) -> u64 {
        (self.segment - 3) / 3
    }

    /// The stall window [m_min, m_max] of leftover segment counts whose
    /// repairs can consume exactly r pool vertices.
    fn window(&self) -> (usize, usize) {
        let r = self.r() as u64;
        let m_min = r.div_ceil(self.segment - 1) as usize;
        let m_max = (r / (self.segment - 1 - self.h_max())) as usize;
        (m_min, m_max)
    }
}

/// Covers `w` exactly: one path of length `l` per endpoint pair, interiors
/// partitioning `w`. Requires t (l - 1) = |W| on the nose.
pub fn connect_pairs_spanning<H: Host>(
    host: &H,
    pairs: &[(u32, u32)],
    l: u64,
    w: &[u32],
    sp: &SpanningParams,
    seed: &RandomSeed,
) -> Result<PathBundle, AbsorbError> {
    let t = pairs.len() as u64;
    let expected = t * (l - 1);
    if expected != w.len() as u64 {
        return Err(AbsorbError::CountingCondition { expected, got: w.len() });
    }
    {
        // Endpoint discipline mirrors the plain connector's contract.
        let mut xs = BTreeSet::new();
        let mut ys = BTreeSet::new();
        let w_set: BTreeSet<u32> = w.iter().copied().collect();
        for &(x, y) in pairs {
            assert!(xs.insert(x), "duplicate spanning source {x}");
            assert!(ys.insert(y), "duplicate spanning sink {y}");
            assert!(!w_set.contains(&x) && !w_set.contains(&y), "workspace hits an endpoint");
        }
    }
    let bundle = connect_spanning_inner(host, pairs, l, w, sp, seed, 0)?;
    debug_assert!(spanning_cover_ok(pairs, l, w, &bundle));
    Ok(bundle)
}

/// Full verification of the spanning contract; pub for tests and acceptance.
pub fn spanning_cover_ok(pairs: &[(u32, u32)], l: u64, w: &[u32], bundle: &PathBundle) -> bool {
    if bundle.paths.len() != pairs.len() {
        return false;
    }
    let mut interior: BTreeSet<u32> = BTreeSet::new();
    for (i, path) in bundle.paths.iter().enumerate() {
        if path.len() as u64 != l + 1 {
            return false;
        }
        if path[0] != pairs[i].0 || *path.last().unwrap() != pairs[i].1 {
            return false;
        }
        for &v in &path[1..path.len() - 1] {
            if !interior.insert(v) {
                return false;
            }
        }
    }
    let w_set: BTreeSet<u32> = w.iter().copied().collect();
    interior == w_set
}

fn connect_spanning_inner<H: Host>(
    host: &H,
    pairs: &[(u32, u32)],
    l: u64,
    w: &[u32],
    sp: &SpanningParams,
    seed: &RandomSeed,
    depth: u32,
) -> Result<PathBundle, AbsorbError> {
    if l > sp.base_len && depth == 0 {
        return reduce_and_recurse(host, pairs, l, w, sp, seed);
    }
    let t = pairs.len();
    let r = sp.r();
    let seg = sp.segment;
    let alpha = (l / seg).max(1);
    let plain_per_chain = (alpha - 1) as usize;
    let (m_min, m_max) = sp.window();
    let viable = t >= 3 * r + 2
        && (t - 3 * r) * plain_per_chain >= m_max.max(sp.leftover)
        && l >= seg;
    if !viable {
        return exact_cover(host, pairs, l, w, sp);
    }
    if m_min > m_max {
        return Err(AbsorbError::EmptyLeftoverWindow { m_min, m_max });
    }

    // Stage 2: flexible pool and robust set. The pool takes the 2r vertices
    // richest in workspace-internal adjacency.
    let mut by_degree: Vec<(usize, u32)> = w
        .iter()
        .map(|&v| (host.out_neighbors(v).len(), v))
        .collect();
    by_degree.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut pool: Vec<u32> = by_degree[..2 * r].iter().map(|&(_, v)| v).collect();
    pool.sort_unstable();
    let pool_set: BTreeSet<u32> = pool.iter().copied().collect();
    let w3: Vec<u32> = w.iter().copied().filter(|v| !pool_set.contains(v)).collect();

    let xs3: Vec<u32> = pairs[..3 * r].iter().map(|p| p.0).collect();
    let ys3: Vec<u32> = pairs[..3 * r].iter().map(|p| p.1).collect();
    let rs = build_robust_set(
        host,
        &pool,
        &xs3,
        &ys3,
        &w3,
        l + 1,
        sp.k,
        &sp.connector,
        &seed.derive("robust"),
        sp.template_trials,
    )?;
    let committed: BTreeSet<u32> = rs.covered.iter().copied().collect();
    let mut avail = VertexSet::empty(host.vertex_count());
    for &v in &w3 {
        if !committed.contains(&v) {
            avail.insert(v);
        }
    }
    // |Z1| = (t - 3r)(l - 1) - r by the ledger.
    let z1_expected = (t - 3 * r) as u64 * (l - 1) - r as u64;
    if avail.len() as u64 != z1_expected {
        return Err(AbsorbError::LedgerMismatch {
            stage: "free workspace after robust set",
            expected: z1_expected,
            got: avail.len() as u64,
        });
    }

    // Stage 3: direct chains. Anchors are the smallest free vertices.
    let direct: Vec<usize> = (3 * r..t).collect();
    let first_len = l - (alpha - 1) * seg;
    let mut chains: Vec<Chain> = Vec::with_capacity(direct.len());
    {
        let mut anchor_iter = avail.to_vec().into_iter();
        for &pi in &direct {
            let mut anchors = Vec::with_capacity(plain_per_chain);
            for _ in 0..plain_per_chain {
                let a = anchor_iter.next().expect("anchor supply checked by ledger");
                anchors.push(a);
            }
            for &a in &anchors {
                avail.remove(a);
            }
            let mut segments = Vec::new();
            let (x, y) = pairs[pi];
            let mut prev = x;
            for (j, &a) in anchors.iter().enumerate() {
                segments.push(Segment {
                    from: prev,
                    to: a,
                    len: if j == 0 { first_len } else { seg },
                    path: None,
                });
                prev = a;
            }
            segments.push(Segment {
                from: prev,
                to: y,
                len: if anchors.is_empty() { first_len } else { seg },
                path: None,
            });
            chains.push(Chain { segments });
        }
    }

    // Saturation: first the odd-length lead segments (they may not be
    // leftover), then plain segments down into the window.
    let mut lead: Vec<(usize, usize)> = Vec::new();
    let mut plain: Vec<(usize, usize)> = Vec::new();
    for (ci, chain) in chains.iter().enumerate() {
        for (si, segment) in chain.segments.iter().enumerate() {
            if si == 0 && segment.len != seg {
                lead.push((ci, si));
            } else {
                plain.push((ci, si));
            }
        }
    }
    saturate(host, &mut chains, lead, 0, 0, &mut avail, sp, "lead segments")?;
    let target = sp.leftover.max(m_min).min(m_max);
    let open = saturate(host, &mut chains, plain, target, m_max, &mut avail, sp, "plain segments")?;

    // Stage 4: repairs. The leftover vertices distribute over the open
    // segments; each open segment swallows h of them.
    let m_star = open.len();
    let z3: Vec<u32> = avail.to_vec();
    let z3_expected = m_star as u64 * (seg - 1) - r as u64;
    if z3.len() as u64 != z3_expected {
        return Err(AbsorbError::LedgerMismatch {
            stage: "leftover workspace before repairs",
            expected: z3_expected,
            got: z3.len() as u64,
        });
    }
    let mut h_of = vec![0u64; m_star];
    {
        let mut rest = z3.len() as u64;
        for h in h_of.iter_mut() {
            let take = rest.min(sp.h_max());
            *h = take;
            rest -= take;
        }
        debug_assert_eq!(rest, 0);
    }

    // One generalized matching into the pool: segment ends once, swallowed
    // vertices twice. Ends may repeat across adjacent open segments.
    let mut pool_avail: BTreeSet<u32> = pool_set.clone();
    let mut left_vertices: Vec<u32> = Vec::new();
    let mut demands: Vec<u32> = Vec::new();
    {
        let mut demand_of: std::collections::BTreeMap<u32, u32> = Default::default();
        for (slot, &(ci, si)) in open.iter().enumerate() {
            let s = &chains[ci].segments[si];
            *demand_of.entry(s.from).or_insert(0) += 1;
            *demand_of.entry(s.to).or_insert(0) += 1;
            let _ = slot;
        }
        let mut e_cursor = 0usize;
        for (slot, _) in open.iter().enumerate() {
            for _ in 0..h_of[slot] {
                *demand_of.entry(z3[e_cursor]).or_insert(0) += 2;
                e_cursor += 1;
            }
        }
        for (v, d) in demand_of {
            left_vertices.push(v);
            demands.push(d);
        }
    }
    let pool_list: Vec<u32> = pool_avail.iter().copied().collect();
    let adj: Vec<Vec<u32>> = left_vertices
        .iter()
        .map(|&v| {
            host.out_neighbors(v)
                .iter()
                .filter(|&&u| pool_avail.contains(&u))
                .map(|&u| pool_list.binary_search(&u).unwrap() as u32)
                .collect()
        })
        .collect();
    let matched = demand_matching(pool_list.len(), &adj, &demands).map_err(|d| {
        AbsorbError::Connector {
            stage: "repair matching",
            source: crate::connect::ConnectError::Anchor(
                crate::expansion::StarError::Hall(d),
            ),
        }
    })?;
    let mut leaves_of: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
    for (i, &v) in left_vertices.iter().enumerate() {
        let leaves: Vec<u32> = matched[i].iter().map(|&id| pool_list[id as usize]).collect();
        for &leaf in &leaves {
            pool_avail.remove(&leaf);
        }
        leaves_of.insert(v, leaves);
    }
    let mut take_leaf = |v: u32| -> u32 {
        leaves_of.get_mut(&v).expect("matched vertex").pop().expect("leaf supply")
    };

    // Stitch each open segment through the pool.
    let repair_cp = sp.connector.with_band(1, u64::MAX);
    let mut pool_route = VertexSet::empty(host.vertex_count());
    for &v in &pool_avail {
        pool_route.insert(v);
    }
    let mut e_cursor = 0usize;
    for (slot, &(ci, si)) in open.iter().enumerate() {
        let h = h_of[slot];
        let (from, to, planned) = {
            let s = &chains[ci].segments[si];
            (s.from, s.to, s.len)
        };
        debug_assert_eq!(planned, seg);
        let c_leaf = take_leaf(from);
        let d_leaf = take_leaf(to);
        // Waypoints: c' then e'_1 e_1 e''_1 .. then d'.
        let mut stops: Vec<u32> = vec![c_leaf];
        let mut swallowed = Vec::new();
        for _ in 0..h {
            let e = z3[e_cursor];
            e_cursor += 1;
            let e1 = take_leaf(e);
            let e2 = take_leaf(e);
            stops.push(e1);
            swallowed.push(e);
            stops.push(e2);
        }
        stops.push(d_leaf);
        // Sub-path lengths: h + 1 paths, total seg - 2h - 2, each >= 1.
        let path_count = h + 1;
        let total = seg - 2 * h - 2;
        let base = total / path_count;
        let extra = (total % path_count) as usize;
        let mut lens = vec![base; path_count as usize];
        for len in lens.iter_mut().take(extra) {
            *len += 1;
        }
        // Assemble: from, c', [path], e', e, e'', [path], ..., d', to.
        let mut full = vec![from];
        for (pi, len) in lens.iter().enumerate() {
            let src = stops[2 * pi];
            let dst = stops[2 * pi + 1];
            if pi == 0 {
                full.push(src);
            }
            let sub = if *len == 0 {
                unreachable!("sub-path lengths are at least one")
            } else {
                route_pool_path(host, src, dst, *len, &mut pool_route, &repair_cp)?
            };
            full.extend(&sub[1..]);
            if pi < swallowed.len() {
                full.push(swallowed[pi]);
                full.push(stops[2 * pi + 2]);
            }
        }
        full.push(to);
        debug_assert_eq!(full.len() as u64, seg + 1);
        chains[ci].segments[si].path = Some(full);
    }

    // Stage 5: the untouched half of the pool is absorbed by the robust set.
    let mut a_prime: Vec<u32> = pool_route.to_vec();
    a_prime.sort_unstable();
    if a_prime.len() != r {
        return Err(AbsorbError::LedgerMismatch {
            stage: "pool remainder before absorption",
            expected: r as u64,
            got: a_prime.len() as u64,
        });
    }
    let robust_paths = query_robust_set(&rs, &a_prime)?;
    debug_assert_eq!(
        query_interiors(&robust_paths),
        committed.iter().copied().chain(a_prime.iter().copied()).collect::<BTreeSet<u32>>()
    );

    // Assemble the bundle in input order.
    let mut paths: Vec<Vec<u32>> = Vec::with_capacity(t);
    paths.extend(robust_paths);
    for chain in &chains {
        let mut full: Vec<u32> = Vec::with_capacity(l as usize + 1);
        for (si, segment) in chain.segments.iter().enumerate() {
            let p = segment.path.as_ref().expect("all segments settled");
            if si == 0 {
                full.extend(p.iter());
            } else {
                full.extend(&p[1..]);
            }
        }
        debug_assert_eq!(full.len() as u64, l + 1);
        paths.push(full);
    }
    Ok(PathBundle { paths })
}

struct Chain {
    segments: Vec<Segment>,
}

struct Segment {
    from: u32,
    to: u32,
    len: u64,
    path: Option<Vec<u32>>,
}

/// Routes open segments until at most `target` remain (0 means all must
/// connect). A stall strictly above `hi` triggers a bounded rescue that
/// un-routes recent segments and retries; a stall inside [target, hi] is
/// accepted. Returns the open segment list.
#[allow(clippy::too_many_arguments)]
fn saturate<H: Host>(
    host: &H,
    chains: &mut [Chain],
    mut pending: Vec<(usize, usize)>,
    target: usize,
    hi: usize,
    avail: &mut VertexSet,
    sp: &SpanningParams,
    _stage: &'static str,
) -> Result<Vec<(usize, usize)>, AbsorbError> {
    let mut done: Vec<(usize, usize)> = Vec::new();
    let mut rescue_budget = 24u32;
    let chunk = 6usize;
    let cp = sp.connector.with_band(1, u64::MAX);
    loop {
        if pending.len() <= target {
            return Ok(pending);
        }
        // Offer the engine a few segments at a time; sweeping every open
        // segment per call would rescan the whole adjacency for nothing.
        let mut routed = None;
        let mut last_cause = None;
        for start in (0..pending.len()).step_by(chunk) {
            let cands: Vec<RouteCandidate> = pending[start..(start + chunk).min(pending.len())]
                .iter()
                .enumerate()
                .map(|(i, &(ci, si))| {
                    let s = &chains[ci].segments[si];
                    RouteCandidate {
                        index: start + i,
                        sources: vec![s.from],
                        sinks: vec![s.to],
                        len: s.len,
                    }
                })
                .collect();
            match route_one(host, &cands, avail, &cp) {
                Ok(r) => {
                    routed = Some(r);
                    break;
                }
                Err(cause) => last_cause = Some(cause),
            }
        }
        match routed {
            Some(routed) => {
                for &v in &routed.path[1..routed.path.len() - 1] {
                    avail.remove(v);
                }
                let (ci, si) = pending.remove(routed.index);
                chains[ci].segments[si].path = Some(routed.path);
                done.push((ci, si));
            }
            None => {
                let cause = last_cause.expect("pending was nonempty");
                if target > 0 && pending.len() <= hi {
                    // Stall inside the window: the repairs can still balance.
                    return Ok(pending);
                }
                if rescue_budget > 0 && !done.is_empty() {
                    rescue_budget -= 1;
                    let (ci, si) = done.pop().unwrap();
                    let path = chains[ci].segments[si].path.take().unwrap();
                    for &v in &path[1..path.len() - 1] {
                        avail.insert(v);
                    }
                    pending.push((ci, si));
                    continue;
                }
                return Err(AbsorbError::SaturationStalled {
                    remaining: pending.len(),
                    lo: target,
                    hi,
                    cause,
                });
            }
        }
    }
}

fn route_pool_path<H: Host>(
    host: &H,
    src: u32,
    dst: u32,
    len: u64,
    pool: &mut VertexSet,
    cp: &ConnectorParams,
) -> Result<Vec<u32>, AbsorbError> {
    let cand = RouteCandidate { index: 0, sources: vec![src], sinks: vec![dst], len };
    let routed = route_one(host, &[cand], pool, cp)
        .map_err(|source| AbsorbError::Connector { stage: "repair path", source })?;
    for &v in &routed.path[1..routed.path.len() - 1] {
        pool.remove(v);
    }
    Ok(routed.path)
}

/// Reduction of a long instance to the base length: per pair a prefix path to
/// a fresh anchor, then q base-length sub-instances joined by greedily chosen
/// disjoint bridge edges.
fn reduce_and_recurse<H: Host>(
    host: &H,
    pairs: &[(u32, u32)],
    l: u64,
    w: &[u32],
    sp: &SpanningParams,
    seed: &RandomSeed,
) -> Result<PathBundle, AbsorbError> {
    let base = sp.base_len;
    // rho(q) = l - q (base + 1) + 1 decreases in q; prefer rho >= 2.
    let mut q = (l - 1) / (base + 1);
    let rho = |q: u64| l + 1 - q * (base + 1);
    if q >= 2 && rho(q) < 2 {
        q -= 1;
    }
    let q = q.max(1);
    let rho = rho(q);
    debug_assert!(rho >= 1);

    let t = pairs.len();
    let mut free: BTreeSet<u32> = w.iter().copied().collect();

    // Anchors z_i and prefix paths x_i -> z_i of length rho.
    let mut prefixes: Vec<Vec<u32>> = Vec::with_capacity(t);
    if rho == 1 {
        // The anchor must be adjacent: pick distinct neighbors via matching.
        let xs: Vec<u32> = pairs.iter().map(|p| p.0).collect();
        let pool: Vec<u32> = free.iter().copied().collect();
        let adj: Vec<Vec<u32>> = xs
            .iter()
            .map(|&x| {
                host.out_neighbors(x)
                    .iter()
                    .filter(|&&u| free.contains(&u))
                    .map(|&u| pool.binary_search(&u).unwrap() as u32)
                    .collect()
            })
            .collect();
        let matched = demand_matching(pool.len(), &adj, &vec![1; t]).map_err(|d| {
            AbsorbError::Connector {
                stage: "reduction anchors",
                source: crate::connect::ConnectError::Anchor(
                    crate::expansion::StarError::Hall(d),
                ),
            }
        })?;
        for (i, ids) in matched.iter().enumerate() {
            let z = pool[ids[0] as usize];
            free.remove(&z);
            prefixes.push(vec![pairs[i].0, z]);
        }
    } else {
        let mut anchors = Vec::with_capacity(t);
        let mut it = free.iter().copied();
        for _ in 0..t {
            anchors.push(it.next().ok_or(AbsorbError::PoolTooSmall {
                stage: "reduction anchors",
                got: free.len(),
                need: t,
            })?);
        }
        for &z in &anchors {
            free.remove(&z);
        }
        let pairs_pref: Vec<(u32, u32)> =
            pairs.iter().zip(&anchors).map(|(&(x, _), &z)| (x, z)).collect();
        let lens = vec![rho; t];
        let wide = sp.connector.with_band(1, u64::MAX);
        prefixes = super::connect_batched(
            host,
            &pairs_pref,
            &lens,
            &mut free,
            &wide,
            &seed.derive("reduction-prefix"),
            "reduction prefix",
        )?;
    }

    // Greedy disjoint bridge edges inside the remaining workspace.
    let bridges_needed = t * (q as usize - 1);
    let mut bridges: Vec<(u32, u32)> = Vec::with_capacity(bridges_needed);
    if bridges_needed > 0 {
        let mut unused: BTreeSet<u32> = free.clone();
        'search: for &u in &free {
            if !unused.contains(&u) {
                continue;
            }
            for &v in host.out_neighbors(u) {
                if v != u && unused.contains(&v) && host.has_arc(v, u) {
                    unused.remove(&u);
                    unused.remove(&v);
                    bridges.push((u, v));
                    if bridges.len() == bridges_needed {
                        break 'search;
                    }
                    break;
                }
            }
        }
        if bridges.len() < bridges_needed {
            return Err(AbsorbError::PoolTooSmall {
                stage: "reduction bridges",
                got: bridges.len(),
                need: bridges_needed,
            });
        }
        for &(u, v) in &bridges {
            free.remove(&u);
            free.remove(&v);
        }
    }

    // Sub-instance: per pair, q segments of the base length.
    let mut sub_pairs: Vec<(u32, u32)> = Vec::with_capacity(t * q as usize);
    for (i, prefix) in prefixes.iter().enumerate() {
        let z = *prefix.last().unwrap();
        let mut cur = z;
        for j in 0..q as usize {
            let next_end = if j + 1 == q as usize {
                pairs[i].1
            } else {
                bridges[i * (q as usize - 1) + j].0
            };
            sub_pairs.push((cur, next_end));
            if j + 1 < q as usize {
                cur = bridges[i * (q as usize - 1) + j].1;
            }
        }
    }
    let sub_w: Vec<u32> = free.iter().copied().collect();
    let expected = sub_pairs.len() as u64 * (base - 1);
    if expected != sub_w.len() as u64 {
        return Err(AbsorbError::LedgerMismatch {
            stage: "reduction counting",
            expected,
            got: sub_w.len() as u64,
        });
    }
    let sub_bundle =
        connect_spanning_inner(host, &sub_pairs, base, &sub_w, sp, &seed.derive("reduced"), 1)?;

    // Stitch prefix + sub-paths + bridges back into full paths.
    let mut paths = Vec::with_capacity(t);
    for i in 0..t {
        let mut full = prefixes[i].clone();
        for j in 0..q as usize {
            let sub = &sub_bundle.paths[i * q as usize + j];
            full.extend(&sub[1..]);
            if j + 1 < q as usize {
                full.push(bridges[i * (q as usize - 1) + j].1);
            }
        }
        debug_assert_eq!(full.len() as u64, l + 1);
        paths.push(full);
    }
    Ok(PathBundle { paths })
}

/// Exhaustive tiling for degenerate instances: sequential depth-first search
/// over exact-length paths with full backtracking across pairs. Sound and
/// complete up to the node budget.
fn exact_cover<H: Host>(
    host: &H,
    pairs: &[(u32, u32)],
    l: u64,
    w: &[u32],
    sp: &SpanningParams,
) -> Result<PathBundle, AbsorbError> {
    if w.len() > 64 && pairs.len() > 1 {
        return Err(AbsorbError::SpanningTooSmall { pairs: pairs.len(), workspace: w.len() });
    }
    let mut avail = VertexSet::from_slice(host.vertex_count(), w);
    let mut budget = sp.exact_cover_budget;
    let mut paths: Vec<Vec<u32>> = Vec::new();
    if cover_rec(host, pairs, l, 0, &mut avail, &mut paths, &mut budget) {
        return Ok(PathBundle { paths });
    }
    if budget == 0 {
        Err(AbsorbError::ExactCoverBudget)
    } else {
        Err(AbsorbError::ExactCoverInfeasible)
    }
}

fn cover_rec<H: Host>(
    host: &H,
    pairs: &[(u32, u32)],
    l: u64,
    i: usize,
    avail: &mut VertexSet,
    paths: &mut Vec<Vec<u32>>,
    budget: &mut u64,
) -> bool {
    if i == pairs.len() {
        return avail.len() == 0;
    }
    let (x, y) = pairs[i];
    let mut path = vec![x];
    path_rec(host, pairs, l, i, y, l, &mut path, avail, paths, budget)
}

#[allow(clippy::too_many_arguments)]
fn path_rec<H: Host>(
    host: &H,
    pairs: &[(u32, u32)],
    l: u64,
    i: usize,
    dst: u32,
    remaining: u64,
    path: &mut Vec<u32>,
    avail: &mut VertexSet,
    paths: &mut Vec<Vec<u32>>,
    budget: &mut u64,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let cur = *path.last().unwrap();
    if remaining == 1 {
        if !host.has_arc(cur, dst) {
            return false;
        }
        path.push(dst);
        paths.push(path.clone());
        if cover_rec(host, pairs, l, i + 1, avail, paths, budget) {
            return true;
        }
        paths.pop();
        path.pop();
        return false;
    }
    for idx in 0..host.out_neighbors(cur).len() {
        let v = host.out_neighbors(cur)[idx];
        if v != dst && avail.contains(v) {
            avail.remove(v);
            path.push(v);
            if path_rec(host, pairs, l, i, dst, remaining - 1, path, avail, paths, budget) {
                return true;
            }
            path.pop();
            avail.insert(v);
        }
    }
    false
}
