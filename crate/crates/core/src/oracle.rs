//! Exhaustive ground truth for small instances: complete backtracking search
//! for an embedding, quotienting away cycle symmetries, plus the induced
//! universality check over the whole bounded family.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cycles::{enumerate_bounded_family, CycleSpec};
use crate::embed::{verify_embedding, Embedding};
use crate::graph::HostGraph;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub embeddable: bool,
    pub witness: Option<Embedding>,
    pub nodes_explored: u64,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance size {n} exceeds the oracle cap {cap}")]
    CapExceeded { n: usize, cap: usize },
}

/// Complete search for an embedding of `spec` in `host`.
///
/// Symmetry pruning: each cycle is rooted at its smallest image vertex
/// (rotation), the root's successor is smaller than its predecessor
/// (reflection), and cycles of equal length carry increasing roots
/// (exchange). Returns `embeddable = false` only after exhausting the
/// quotient space, so the verdict is exact.
pub fn brute_force_embed(
    host: &HostGraph,
    spec: &CycleSpec,
    cap: usize,
) -> Result<OracleResult, OracleError> {
    if spec.n > cap || host.n() > cap {
        return Err(OracleError::CapExceeded { n: spec.n.max(host.n()), cap });
    }
    let n = host.n();
    // Groups (length, count), longest first; isolated vertices are a free
    // count check at the end.
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &len in &spec.lengths {
        *counts.entry(len).or_insert(0) += 1;
    }
    let isolated = counts.remove(&1).unwrap_or(0);
    let groups: Vec<(u64, usize)> = counts.into_iter().rev().collect();
    let needed: usize = spec.n;
    if needed > n {
        return Ok(OracleResult { embeddable: false, witness: None, nodes_explored: 0 });
    }

    struct Search<'a> {
        host: &'a HostGraph,
        groups: &'a [(u64, usize)],
        used: Vec<bool>,
        found: BTreeMap<u64, Vec<Vec<u32>>>,
        nodes: u64,
        isolated: usize,
    }

    impl Search<'_> {
        fn solve(&mut self, gi: usize, placed: usize, min_root: u32) -> bool {
            self.nodes += 1;
            if gi == self.groups.len() {
                let free = self.used.iter().filter(|&&u| !u).count();
                return free >= self.isolated;
            }
            let (len, count) = self.groups[gi];
            if placed == count {
                return self.solve(gi + 1, 0, 0);
            }
            let n = self.used.len();
            for root in (min_root as usize)..n {
                if self.used[root] {
                    continue;
                }
                if len == 2 {
                    // An edge rooted at its smaller endpoint.
                    self.nodes += 1;
                    let partners: Vec<u32> = self
                        .host
                        .neighbors(root as u32)
                        .iter()
                        .copied()
                        .filter(|&w| w as usize > root && !self.used[w as usize])
                        .collect();
                    for w in partners {
                        self.used[root] = true;
                        self.used[w as usize] = true;
                        self.found.entry(2).or_default().push(vec![root as u32, w]);
                        if self.solve(gi, placed + 1, root as u32 + 1) {
                            return true;
                        }
                        self.found.get_mut(&2).unwrap().pop();
                        self.used[root] = false;
                        self.used[w as usize] = false;
                    }
                } else {
                    self.used[root] = true;
                    let mut path = vec![root as u32];
                    if self.extend(gi, placed, len, root as u32, &mut path) {
                        return true;
                    }
                    self.used[root] = false;
                }
            }
            false
        }

        fn extend(
            &mut self,
            gi: usize,
            placed: usize,
            len: u64,
            root: u32,
            path: &mut Vec<u32>,
        ) -> bool {
            self.nodes += 1;
            if path.len() as u64 == len {
                if !self.host.has_edge(*path.last().unwrap(), root) {
                    return false;
                }
                // Reflection: the root's successor stays below its
                // predecessor.
                if path[1] > path[len as usize - 1] {
                    return false;
                }
                self.found.entry(len).or_default().push(path.clone());
                if self.solve(gi, placed + 1, root + 1) {
                    return true;
                }
                self.found.get_mut(&len).unwrap().pop();
                return false;
            }
            let cur = *path.last().unwrap();
            let candidates: Vec<u32> = self
                .host
                .neighbors(cur)
                .iter()
                .copied()
                .filter(|&w| w > root && !self.used[w as usize])
                .collect();
            for w in candidates {
                self.used[w as usize] = true;
                path.push(w);
                if self.extend(gi, placed, len, root, path) {
                    return true;
                }
                path.pop();
                self.used[w as usize] = false;
            }
            false
        }
    }

    let mut search = Search {
        host,
        groups: &groups,
        used: vec![false; n],
        found: BTreeMap::new(),
        nodes: 0,
        isolated,
    };
    if !search.solve(0, 0, 0) {
        return Ok(OracleResult {
            embeddable: false,
            witness: None,
            nodes_explored: search.nodes,
        });
    }
    // Assemble the witness: isolated images take the smallest free vertices.
    let mut found = search.found;
    let free: Vec<u32> = (0..n as u32).filter(|&v| !search.used[v as usize]).collect();
    found.entry(1).or_default().extend(free[..isolated].iter().map(|&v| vec![v]));
    let mut assignment = Vec::with_capacity(spec.n);
    for &len in &spec.lengths {
        let pool = found.get_mut(&len).expect("all lengths placed");
        assignment.extend(pool.pop().expect("count bookkeeping"));
    }
    let witness = Embedding { spec: spec.clone(), assignment };
    debug_assert_eq!(verify_embedding(host, spec, &witness), Ok(()));
    Ok(OracleResult { embeddable: true, witness: Some(witness), nodes_explored: search.nodes })
}

#[derive(Debug, Clone)]
pub struct UniversalityVerdict {
    pub universal: bool,
    pub first_failure: Option<CycleSpec>,
    pub specs_checked: usize,
}

/// Checks every spec of the bounded family on `host`: universal iff all
/// embed. Stops at the first failure.
pub fn exhaustive_universality(
    n: usize,
    ell: u64,
    host: &HostGraph,
    cap: usize,
) -> Result<UniversalityVerdict, OracleError> {
    let specs = enumerate_bounded_family(n, ell, n as u64);
    let mut checked = 0;
    for spec in specs {
        checked += 1;
        let res = brute_force_embed(host, &spec, cap)?;
        if !res.embeddable {
            return Ok(UniversalityVerdict {
                universal: false,
                first_failure: Some(spec),
                specs_checked: checked,
            });
        }
    }
    Ok(UniversalityVerdict { universal: true, first_failure: None, specs_checked: checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_graph, RandomSeed};

    fn cycle_host(n: usize) -> HostGraph {
        let edges: Vec<(u32, u32)> =
            (0..n as u32).map(|v| (v, (v + 1) % n as u32)).collect();
        HostGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn triangle_in_triangle() {
        let host = cycle_host(3);
        let res = brute_force_embed(&host, &CycleSpec::new(vec![3]), 14).unwrap();
        assert!(res.embeddable);
        let w = res.witness.unwrap();
        verify_embedding(&host, &w.spec.clone(), &w).unwrap();
    }

    #[test]
    fn no_triangle_in_c4() {
        let host = cycle_host(4);
        let res = brute_force_embed(&host, &CycleSpec::new(vec![3, 1]), 14).unwrap();
        assert!(!res.embeddable);
        assert!(res.nodes_explored > 0);
    }

    #[test]
    fn two_edges_in_p4() {
        let host = HostGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let res = brute_force_embed(&host, &CycleSpec::new(vec![2, 2]), 14).unwrap();
        assert!(res.embeddable);
        let w = res.witness.unwrap();
        // Only {01, 23} works.
        let mut images: Vec<u32> = w.assignment.clone();
        images.sort_unstable();
        assert_eq!(images, vec![0, 1, 2, 3]);
        verify_embedding(&host, &w.spec.clone(), &w).unwrap();
    }

    #[test]
    fn cap_is_enforced() {
        let host = HostGraph::complete(15);
        assert!(matches!(
            brute_force_embed(&host, &CycleSpec::new(vec![1; 15]), 14),
            Err(OracleError::CapExceeded { .. })
        ));
    }

    /// Unpruned reference: all injective assignments in spec-canonical
    /// order, no symmetry quotient beyond plain DFS.
    fn reference_embeddable(host: &HostGraph, spec: &CycleSpec) -> bool {
        fn rec(host: &HostGraph, spec: &CycleSpec, assignment: &mut Vec<u32>, used: &mut Vec<bool>) -> bool {
            if assignment.len() == spec.n {
                let emb = Embedding { spec: spec.clone(), assignment: assignment.clone() };
                return verify_embedding(host, spec, &emb).is_ok();
            }
            for v in 0..host.n() as u32 {
                if !used[v as usize] {
                    used[v as usize] = true;
                    assignment.push(v);
                    // Prune early: check edges incident to the new vertex
                    // inside completed prefixes only at the end (keep the
                    // reference dumb and obviously complete).
                    if rec(host, spec, assignment, used) {
                        return true;
                    }
                    assignment.pop();
                    used[v as usize] = false;
                }
            }
            false
        }
        rec(host, spec, &mut Vec::new(), &mut vec![false; host.n()])
    }

    #[test]
    fn oracle_agrees_with_unpruned_reference() {
        for seed in 0..12 {
            let host = random_graph(7, 0.45, &RandomSeed::new(seed, "oracle")).unwrap();
            for spec in enumerate_bounded_family(7, 3, 7) {
                let got = brute_force_embed(&host, &spec, 14).unwrap();
                let want = reference_embeddable(&host, &spec);
                assert_eq!(got.embeddable, want, "seed {seed} spec {:?}", spec.lengths);
                if let Some(w) = got.witness {
                    verify_embedding(&host, &spec, &w).unwrap();
                }
            }
        }
    }

    #[test]
    fn complete_host_is_universal() {
        let host = HostGraph::complete(8);
        let verdict = exhaustive_universality(8, 3, &host, 14).unwrap();
        assert!(verdict.universal);
        assert!(verdict.specs_checked > 0);
    }

    #[test]
    fn empty_host_fails_at_the_first_edge_spec() {
        let host = HostGraph::empty(5);
        let verdict = exhaustive_universality(5, 3, &host, 14).unwrap();
        assert!(!verdict.universal);
        let failing = verdict.first_failure.unwrap();
        // Lexicographically first spec with an edge: [1, 1, 1, 2].
        assert_eq!(failing.lengths, vec![1, 1, 1, 2]);
    }

    #[test]
    fn universality_matches_per_spec_oracle() {
        let host = random_graph(8, 0.8, &RandomSeed::new(3, "uni")).unwrap();
        let verdict = exhaustive_universality(8, 3, &host, 14).unwrap();
        let all_embed = enumerate_bounded_family(8, 3, 8)
            .into_iter()
            .all(|spec| brute_force_embed(&host, &spec, 14).unwrap().embeddable);
        assert_eq!(verdict.universal, all_embed);
    }
}
