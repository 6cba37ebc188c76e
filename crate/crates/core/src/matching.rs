//! Matching kernels: bipartite matching with per-vertex demands (augmenting
//! paths, exact, with Hall witnesses on failure) and maximum matching in
//! general graphs via blossom contraction.

use thiserror::Error;

/// A set of left vertices whose joint neighborhood is too small for their
/// total demand; returned when a demanded matching does not exist.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("deficient set of {} left vertices: demand {demand} exceeds neighborhood {neighborhood}", set.len())]
pub struct DeficientSet {
    pub set: Vec<usize>,
    pub demand: u64,
    pub neighborhood: u64,
}

/// Matches each left vertex `i` to exactly `demands[i]` distinct right
/// vertices, no right vertex used twice. `adj[i]` lists the right vertices
/// admissible for left vertex `i`.
///
/// Succeeds exactly when the generalized Hall condition holds; on failure the
/// witness is the set of left vertices reachable by alternating search from
/// the vertex whose demand could not be met.
pub fn demand_matching(
    right_count: usize,
    adj: &[Vec<u32>],
    demands: &[u32],
) -> Result<Vec<Vec<u32>>, DeficientSet> {
    assert_eq!(adj.len(), demands.len());
    let left_count = adj.len();
    // right_owner[r] = left vertex currently holding r.
    let mut right_owner: Vec<Option<usize>> = vec![None; right_count];
    // How many units each left vertex still has matched (for re-augmenting we
    // only need the owner; a left vertex can release any one of its units).
    let mut seen = vec![u32::MAX; right_count];
    let mut stamp = 0u32;

    fn try_unit(
        v: usize,
        adj: &[Vec<u32>],
        right_owner: &mut [Option<usize>],
        seen: &mut [u32],
        stamp: u32,
    ) -> bool {
        for &r in &adj[v] {
            let r = r as usize;
            if seen[r] == stamp {
                continue;
            }
            seen[r] = stamp;
            match right_owner[r] {
                None => {
                    right_owner[r] = Some(v);
                    return true;
                }
                Some(owner) => {
                    // The owner may hold several rights; stealing one unit is
                    // fine as long as the owner can recover a replacement.
                    if try_unit(owner, adj, right_owner, seen, stamp) {
                        right_owner[r] = Some(v);
                        return true;
                    }
                }
            }
        }
        false
    }

    for v in 0..left_count {
        for _ in 0..demands[v] {
            stamp += 1;
            if !try_unit(v, adj, &mut right_owner, &mut seen, stamp) {
                return Err(deficient_witness(v, adj, &right_owner, demands));
            }
        }
    }

    let mut result = vec![Vec::new(); left_count];
    for (r, owner) in right_owner.iter().enumerate() {
        if let Some(v) = owner {
            result[*v].push(r as u32);
        }
    }
    for list in &mut result {
        list.sort_unstable();
    }
    Ok(result)
}

fn deficient_witness(
    start: usize,
    adj: &[Vec<u32>],
    right_owner: &[Option<usize>],
    demands: &[u32],
) -> DeficientSet {
    // Alternating BFS from the failed vertex: every right vertex its reachable
    // lefts can see is saturated, and all owners are reachable again.
    let mut in_set = vec![false; adj.len()];
    let mut right_seen = vec![false; right_owner.len()];
    let mut queue = vec![start];
    in_set[start] = true;
    while let Some(v) = queue.pop() {
        for &r in &adj[v] {
            let r = r as usize;
            if right_seen[r] {
                continue;
            }
            right_seen[r] = true;
            if let Some(owner) = right_owner[r] {
                if !in_set[owner] {
                    in_set[owner] = true;
                    queue.push(owner);
                }
            }
        }
    }
    let set: Vec<usize> = (0..adj.len()).filter(|&v| in_set[v]).collect();
    let demand: u64 = set.iter().map(|&v| demands[v] as u64).sum();
    let neighborhood = right_seen.iter().filter(|&&b| b).count() as u64;
    DeficientSet { set, demand, neighborhood }
}

/// Maximum matching in a general graph by blossom contraction. Returns the
/// mate of each vertex, or `None` where unmatched.
pub fn maximum_matching(n: usize, adj: &[Vec<u32>]) -> Vec<Option<u32>> {
    let mut mate: Vec<i64> = vec![-1; n];
    let mut parent: Vec<i64> = vec![-1; n];
    let mut base: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    let mut blossom = vec![false; n];

    fn lca(
        mate: &[i64],
        parent: &[i64],
        base: &[usize],
        n: usize,
        mut a: usize,
        mut b: usize,
    ) -> usize {
        let mut on_path = vec![false; n];
        loop {
            a = base[a];
            on_path[a] = true;
            if mate[a] == -1 {
                break;
            }
            a = parent[mate[a] as usize] as usize;
        }
        loop {
            b = base[b];
            if on_path[b] {
                return b;
            }
            b = parent[mate[b] as usize] as usize;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn mark_path(
        mate: &[i64],
        base: &[usize],
        blossom: &mut [bool],
        parent: &mut [i64],
        mut v: usize,
        b: usize,
        mut child: usize,
    ) {
        while base[v] != b {
            blossom[base[v]] = true;
            blossom[base[mate[v] as usize]] = true;
            parent[v] = child as i64;
            child = mate[v] as usize;
            v = parent[mate[v] as usize] as usize;
        }
    }

    for root in 0..n {
        if mate[root] != -1 {
            continue;
        }
        // BFS for an augmenting path from root.
        for v in 0..n {
            parent[v] = -1;
            base[v] = v;
            used[v] = false;
        }
        used[root] = true;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(root);
        let mut finish: i64 = -1;
        'bfs: while let Some(v) = queue.pop_front() {
            for &to in &adj[v] {
                let to = to as usize;
                if base[v] == base[to] || mate[v] == to as i64 {
                    continue;
                }
                if to == root || (mate[to] != -1 && parent[mate[to] as usize] != -1) {
                    let cur_base = lca(&mate, &parent, &base, n, v, to);
                    for b in blossom.iter_mut() {
                        *b = false;
                    }
                    mark_path(&mate, &base, &mut blossom, &mut parent, v, cur_base, to);
                    mark_path(&mate, &base, &mut blossom, &mut parent, to, cur_base, v);
                    for i in 0..n {
                        if blossom[base[i]] {
                            base[i] = cur_base;
                            if !used[i] {
                                used[i] = true;
                                queue.push_back(i);
                            }
                        }
                    }
                } else if parent[to] == -1 {
                    parent[to] = v as i64;
                    if mate[to] == -1 {
                        finish = to as i64;
                        break 'bfs;
                    }
                    used[mate[to] as usize] = true;
                    queue.push_back(mate[to] as usize);
                }
            }
        }
        // Augment along parent/mate pointers.
        let mut v = finish;
        while v != -1 {
            let pv = parent[v as usize];
            let ppv = mate[pv as usize];
            mate[v as usize] = pv;
            mate[pv as usize] = v;
            v = ppv;
        }
    }

    mate.into_iter().map(|m| if m < 0 { None } else { Some(m as u32) }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demand_matching_perfect_on_complete() {
        let adj: Vec<Vec<u32>> = (0..4).map(|_| (0..4).collect()).collect();
        let m = demand_matching(4, &adj, &[1, 1, 1, 1]).unwrap();
        let mut all: Vec<u32> = m.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn demand_matching_respects_demands() {
        // One center wants 3 leaves out of 5 admissible.
        let adj = vec![vec![0, 1, 2, 3, 4]];
        let m = demand_matching(5, &adj, &[3]).unwrap();
        assert_eq!(m[0].len(), 3);
    }

    #[test]
    fn demand_matching_detects_deficiency() {
        // Two lefts each demanding 2, sharing only 3 rights.
        let adj = vec![vec![0, 1, 2], vec![0, 1, 2]];
        let err = demand_matching(3, &adj, &[2, 2]).unwrap_err();
        assert_eq!(err.set, vec![0, 1]);
        assert_eq!(err.demand, 4);
        assert_eq!(err.neighborhood, 3);
    }

    #[test]
    fn blossom_matches_even_cycle_perfectly() {
        let adj = cycle_adj(8);
        let mate = maximum_matching(8, &adj);
        assert!(mate.iter().all(Option::is_some));
        check_valid(&adj, &mate);
    }

    #[test]
    fn blossom_handles_odd_components() {
        // Triangle with a pendant: {0,1,2} triangle, 3 attached to 0.
        let adj = vec![vec![1, 2, 3], vec![0, 2], vec![0, 1], vec![0]];
        let mate = maximum_matching(4, &adj);
        check_valid(&adj, &mate);
        assert_eq!(mate.iter().filter(|m| m.is_some()).count(), 4);
        assert_eq!(mate[3], Some(0));
    }

    #[test]
    fn blossom_agrees_with_brute_force_on_small_graphs() {
        use crate::graph::{random_graph, RandomSeed};
        for seed in 0..60 {
            let g = random_graph(9, 0.35, &RandomSeed::new(seed, "blossom")).unwrap();
            let adj: Vec<Vec<u32>> = (0..9).map(|v| g.neighbors(v as u32).to_vec()).collect();
            let mate = maximum_matching(9, &adj);
            check_valid(&adj, &mate);
            let got = mate.iter().filter(|m| m.is_some()).count() / 2;
            assert_eq!(got, brute_max_matching(&g.edges(), 9), "seed {seed}");
        }
    }

    fn cycle_adj(n: usize) -> Vec<Vec<u32>> {
        (0..n)
            .map(|v| {
                let mut a =
                    vec![((v + 1) % n) as u32, ((v + n - 1) % n) as u32];
                a.sort_unstable();
                a.dedup();
                a
            })
            .collect()
    }

    fn check_valid(adj: &[Vec<u32>], mate: &[Option<u32>]) {
        for (v, m) in mate.iter().enumerate() {
            if let Some(m) = m {
                assert_eq!(mate[*m as usize], Some(v as u32));
                assert!(adj[v].contains(m));
            }
        }
    }

    fn brute_max_matching(edges: &[(u32, u32)], n: usize) -> usize {
        fn rec(edges: &[(u32, u32)], used: &mut Vec<bool>, i: usize) -> usize {
            if i == edges.len() {
                return 0;
            }
            let skip = rec(edges, used, i + 1);
            let (u, v) = edges[i];
            let mut best = skip;
            if !used[u as usize] && !used[v as usize] {
                used[u as usize] = true;
                used[v as usize] = true;
                best = best.max(1 + rec(edges, used, i + 1));
                used[u as usize] = false;
                used[v as usize] = false;
            }
            best
        }
        rec(edges, &mut vec![false; n], 0)
    }
}
