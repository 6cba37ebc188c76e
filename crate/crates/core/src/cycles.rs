//! Target-graph families: cycle-length multisets, the constants profile, the
//! bounded-family enumeration, and the integer partition lemmas used to cut
//! long cycles into short segments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A target graph of maximum degree two, represented as the multiset of its
/// cycle lengths. Length 1 is an isolated vertex, length 2 an isolated edge,
/// and every other length must be at least the family's girth bound.
///
/// Lengths are kept in canonical sorted (ascending) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleSpec {
    pub n: usize,
    #[serde(rename = "cycles")]
    pub lengths: Vec<u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("cycle lengths sum to {sum}, expected n = {n}")]
    BadSum { sum: u64, n: usize },
    #[error("cycle length {0} is zero")]
    ZeroLength(u64),
    #[error("cycle length {len} lies in the forbidden gap (2, {ell})")]
    GirthGap { len: u64, ell: u64 },
}

impl CycleSpec {
    /// Builds a spec in canonical order; does not validate against a girth.
    pub fn new(lengths: impl Into<Vec<u64>>) -> Self {
        let mut lengths = lengths.into();
        lengths.sort_unstable();
        let n = lengths.iter().sum::<u64>() as usize;
        CycleSpec { n, lengths }
    }

    /// Number of cycles of length exactly `s`.
    pub fn count_of(&self, s: u64) -> usize {
        self.lengths.iter().filter(|&&l| l == s).count()
    }

    /// Total number of vertices on cycles of length at most `cutoff`.
    pub fn mass_up_to(&self, cutoff: u64) -> u64 {
        self.lengths.iter().filter(|&&l| l <= cutoff).sum()
    }

    /// A short id string, stable across runs: lengths joined by '+'.
    pub fn id(&self) -> String {
        let parts: Vec<String> = self.lengths.iter().map(|l| l.to_string()).collect();
        format!("{}={}", self.n, parts.join("+"))
    }
}

/// Accepts iff the multiset sums to `n`, has no zero lengths, and no length
/// falls strictly between 2 and `ell`.
pub fn validate_spec(spec: &CycleSpec, ell: u64) -> Result<(), SpecError> {
    let sum: u64 = spec.lengths.iter().sum();
    if sum != spec.n as u64 {
        return Err(SpecError::BadSum { sum, n: spec.n });
    }
    for &len in &spec.lengths {
        if len == 0 {
            return Err(SpecError::ZeroLength(len));
        }
        if len > 2 && len < ell {
            return Err(SpecError::GirthGap { len, ell });
        }
    }
    Ok(())
}

/// Tunable constants for the whole pipeline.
///
/// The theoretical values grow out of any computable range (the long-cycle
/// cutoff is a double exponential in the girth), so the struct is built from
/// explicit, validated desk-scale numbers, and [`theoretical_constants`]
/// documents what the asymptotic regime would use.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsProfile {
    pub name: String,
    /// Girth parameter: every cycle length is <= 2 or >= ell.
    pub ell: u64,
    /// Fan-out parameter `k`; drives every gadget size formula.
    pub k: u64,
    /// Long-cycle cutoff `K`.
    pub big_k: u64,
    /// Segment base length for the spanning phase (the "1000k^2" role).
    pub spanning_segment: u64,
    /// Segment base length for the auxiliary-digraph phase (the "100k" role).
    pub aux_segment: u64,
    /// Connector band: requested path lengths must lie in [min, max]
    /// (the "[5k, 1000k^2]" role).
    pub min_connect_len: u64,
    pub max_connect_len: u64,
    /// Frontier size for layered reachability (the "n^{1-eps/3}" role).
    pub frontier: usize,
    /// Source-shrinking ratio per level (the "n^{eps/4}" role).
    pub divide_ratio: usize,
    /// Star size for re-anchoring leftovers (the "n^{eps/6}" role).
    pub star_size: usize,
    /// Expansion strength used in sampled verification (the "n^{eps}" role).
    pub expand_d: f64,
    /// Target leftover pair count in the spanning connector (the "s" role).
    pub spanning_leftover: usize,
    /// Workspaces at most this size are routed by exact search instead of
    /// layered reachability.
    pub exact_route_cutoff: usize,
    /// Budget for exact-mode expansion checks (number of enumerated sets).
    pub expansion_budget: u64,
    /// Retries for randomized partitions and factor searches.
    pub split_retries: u32,
    /// Node budget for each randomized cycle search.
    pub cycle_search_budget: u64,
    /// Restart budget for cycle-factor packing.
    pub factor_restarts: u32,
    /// Phase-level retry budget in the embedding pipeline.
    pub phase_retries: u32,
    /// Oracle instance cap.
    pub oracle_cap: usize,
}

/// The constants the asymptotic analysis would pick for girth `ell`; the
/// cutoff is reported as a tower exponent because it does not fit in any
/// machine integer for ell >= 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalConstants {
    pub eps: f64,
    pub k: u64,
    /// K = 2^(2^(3 ell)); this is log2(log2 K) = 3 ell.
    pub log2_log2_big_k: u64,
}

pub fn theoretical_constants(ell: u64) -> TheoreticalConstants {
    let eps = 1.0 / (3.0 * ell as f64);
    TheoreticalConstants { eps, k: 36 * ell, log2_log2_big_k: 3 * ell }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("girth parameter ell = {0} must be at least 3")]
    BadEll(u64),
    #[error("fan-out parameter k = {0} must be at least 1")]
    BadK(u64),
    #[error("long-cycle cutoff K = {big_k} must be at least k^2 = {k_sq}")]
    BadBigK { big_k: u64, k_sq: u64 },
    #[error("threshold {what} must be positive")]
    ZeroThreshold { what: &'static str },
    #[error("connector band [{min}, {max}] is empty")]
    EmptyBand { min: u64, max: u64 },
}

impl ConstantsProfile {
    /// Desk-scale defaults with the smallest workable fan-out.
    pub fn desk() -> Self {
        ConstantsProfile {
            name: "desk".into(),
            ell: 3,
            k: 1,
            big_k: 130,
            spanning_segment: 108,
            aux_segment: 5,
            min_connect_len: 3,
            max_connect_len: 4000,
            frontier: 4,
            divide_ratio: 4,
            star_size: 3,
            expand_d: 3.0,
            spanning_leftover: 2,
            exact_route_cutoff: 40,
            expansion_budget: 1 << 20,
            split_retries: 16,
            cycle_search_budget: 200_000,
            factor_restarts: 40,
            phase_retries: 4,
            oracle_cap: 14,
        }
    }

    /// Desk profile with an explicit girth and long-cycle cutoff.
    pub fn desk_with(ell: u64, big_k: u64) -> Self {
        ConstantsProfile { ell, big_k, name: format!("desk-l{ell}-K{big_k}"), ..Self::desk() }
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        if self.ell < 3 {
            return Err(ProfileError::BadEll(self.ell));
        }
        if self.k < 1 {
            return Err(ProfileError::BadK(self.k));
        }
        if self.big_k < self.k * self.k {
            return Err(ProfileError::BadBigK { big_k: self.big_k, k_sq: self.k * self.k });
        }
        for (what, v) in [
            ("spanning_segment", self.spanning_segment),
            ("aux_segment", self.aux_segment),
            ("min_connect_len", self.min_connect_len),
            ("frontier", self.frontier as u64),
            ("divide_ratio", self.divide_ratio as u64),
            ("star_size", self.star_size as u64),
        ] {
            if v == 0 {
                return Err(ProfileError::ZeroThreshold { what });
            }
        }
        if self.min_connect_len > self.max_connect_len {
            return Err(ProfileError::EmptyBand {
                min: self.min_connect_len,
                max: self.max_connect_len,
            });
        }
        Ok(())
    }

    /// Largest integer s with s^3 <= K: the short/long boundary used by the
    /// classifier and the cycle reduction.
    pub fn cube_root_big_k(&self) -> u64 {
        let mut s = 0u64;
        while (s + 1).saturating_pow(3) <= self.big_k {
            s += 1;
        }
        s
    }
}

/// Every multiset of lengths from {1, 2} plus [ell, K] summing to `n`, in
/// lexicographic order of the ascending length vector, each exactly once.
pub fn enumerate_bounded_family(n: usize, ell: u64, big_k: u64) -> Vec<CycleSpec> {
    // K below ell leaves only isolated vertices and edges as parts.
    assert!(ell >= 3, "need ell >= 3");
    let mut out = Vec::new();
    let mut acc: Vec<u64> = Vec::new();
    fn rec(remaining: u64, min_part: u64, ell: u64, big_k: u64, acc: &mut Vec<u64>, out: &mut Vec<CycleSpec>) {
        if remaining == 0 {
            out.push(CycleSpec { n: acc.iter().sum::<u64>() as usize, lengths: acc.clone() });
            return;
        }
        let mut part = min_part;
        while part <= remaining {
            if part > 2 && part < ell {
                part = ell;
                continue;
            }
            if part > big_k {
                break;
            }
            acc.push(part);
            rec(remaining - part, part, ell, big_k, acc, out);
            acc.pop();
            part += 1;
        }
    }
    rec(n as u64, 1, ell, big_k, &mut acc, &mut out);
    out
}

/// Restricted-partition counting recurrence for the same family; used as the
/// independent check on the enumeration.
pub fn bounded_family_count(n: usize, ell: u64, big_k: u64) -> u128 {
    // dp over allowed parts in increasing order, classic partition table.
    let parts: Vec<u64> =
        (1..=big_k).filter(|&p| p <= 2 || p >= ell).collect();
    let mut dp = vec![0u128; n + 1];
    dp[0] = 1;
    for &p in &parts {
        let p = p as usize;
        for total in p..=n {
            dp[total] += dp[total - p];
        }
    }
    dp[n]
}

/// Which side of the short-mass inequality the spec falls on. `H1` means the
/// vertices on cycles of length at most K^{1/3} account for at most a
/// (1 - 1/K) fraction; `H2` means the short cycles dominate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyClass {
    H1,
    H2,
}

/// Exact integer comparison: K * (short mass) <= (K - 1) * n.
pub fn classify(spec: &CycleSpec, profile: &ConstantsProfile) -> FamilyClass {
    let cutoff = profile.cube_root_big_k();
    let short_mass = spec.mass_up_to(cutoff) as u128;
    let k = profile.big_k as u128;
    if k * short_mass <= (k - 1) * spec.n as u128 {
        FamilyClass::H1
    } else {
        FamilyClass::H2
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("z = {z} is below the guaranteed threshold {threshold} for k = {k}")]
    BelowThreshold { z: u64, k: u64, threshold: u64 },
    #[error("no representation of z = {z} with parts in {{{k}, {}}} and both classes at least a third", k + 1)]
    NoBalancedRepresentation { z: u64, k: u64 },
}

/// Writes `z` as exactly floor(z/k) parts, each k or k+1: z = mk + r gives r
/// parts of k+1 followed by m - r parts of k.
pub fn sum_representation(z: u64, k: u64) -> Result<Vec<u64>, PartitionError> {
    if z < k * k {
        return Err(PartitionError::BelowThreshold { z, k, threshold: k * k });
    }
    let m = z / k;
    let r = z - m * k;
    debug_assert!(r < k && m >= k);
    let mut parts = vec![k + 1; r as usize];
    parts.extend(std::iter::repeat(k).take((m - r) as usize));
    Ok(parts)
}

/// Representation with parts in {k, k+1} where each part value is used for at
/// least a third of the parts. Found by exhaustive search over the pair
/// (count of k, count of k+1); among feasible pairs the most balanced wins,
/// ties toward fewer k+1 parts.
pub fn balanced_sum_representation(z: u64, k: u64) -> Result<Vec<u64>, PartitionError> {
    let mut best: Option<(u64, u64)> = None; // (a = #k, b = #k+1)
    let mut b = 0u64;
    while b * (k + 1) <= z {
        let rest = z - b * (k + 1);
        if rest % k == 0 {
            let a = rest / k;
            let t = a + b;
            if t > 0 {
                let third = t.div_ceil(3);
                if a >= third && b >= third {
                    let better = match best {
                        None => true,
                        Some((ba, bb)) => {
                            let d_new = a.abs_diff(b);
                            let d_old = ba.abs_diff(bb);
                            d_new < d_old || (d_new == d_old && b < bb)
                        }
                    };
                    if better {
                        best = Some((a, b));
                    }
                }
            }
        }
        b += 1;
    }
    let (a, b) = best.ok_or(PartitionError::NoBalancedRepresentation { z, k })?;
    let mut parts = vec![k; a as usize];
    parts.extend(std::iter::repeat(k + 1).take(b as usize));
    Ok(parts)
}

/// Replacement plan for one long cycle: |C| = gamma * u + beta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleReductionEntry {
    pub original_len: u64,
    pub gamma: u64,
    pub beta: u64,
}

/// The outcome of cutting every long cycle (length > K) into u-cycles plus
/// isolated vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LongCycleReduction {
    /// The replacement cycle length: smallest u with u * X_u >= n / (2 K^{1/3}).
    pub u: u64,
    /// One entry per long cycle, in ascending order of original length.
    pub entries: Vec<CycleReductionEntry>,
    /// The reduced spec H' on the same number of vertices.
    pub reduced: CycleSpec,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("spec classifies as H1; the reduction applies to H2 only")]
    NotH2,
    #[error("no index u satisfies u * X_u >= n / (2 K^(1/3)); spec cannot be valid H2")]
    NoReplacementLength,
}

/// Cuts the long cycles of an H2 spec. Exact integer comparisons throughout:
/// u X_u >= n / (2 K^{1/3}) is tested as (2 u X_u)^3 K >= n^3.
pub fn reduce_long_cycles(
    spec: &CycleSpec,
    profile: &ConstantsProfile,
) -> Result<LongCycleReduction, ReductionError> {
    if classify(spec, profile) == FamilyClass::H1 {
        return Err(ReductionError::NotH2);
    }
    let n = spec.n as u128;
    let mut u = None;
    for s in 1..=profile.cube_root_big_k() {
        let count = spec.count_of(s) as u128;
        let lhs = (2 * s as u128 * count).pow(3) * profile.big_k as u128;
        if lhs >= n.pow(3) {
            u = Some(s);
            break;
        }
    }
    let u = u.ok_or(ReductionError::NoReplacementLength)?;

    let mut entries = Vec::new();
    let mut reduced_lengths = Vec::new();
    for &len in &spec.lengths {
        if len > profile.big_k {
            let gamma = len / u;
            let beta = len - gamma * u;
            entries.push(CycleReductionEntry { original_len: len, gamma, beta });
            reduced_lengths.extend(std::iter::repeat(u).take(gamma as usize));
            reduced_lengths.extend(std::iter::repeat(1).take(beta as usize));
        } else {
            reduced_lengths.push(len);
        }
    }
    let reduced = CycleSpec::new(reduced_lengths);
    debug_assert_eq!(reduced.n, spec.n);
    Ok(LongCycleReduction { u, entries, reduced })
}

/// The sub-multisets of components of size at most K and at most K^{1/3}.
pub fn split_small_components(
    spec: &CycleSpec,
    profile: &ConstantsProfile,
) -> (CycleSpec, CycleSpec) {
    let small: Vec<u64> =
        spec.lengths.iter().copied().filter(|&l| l <= profile.big_k).collect();
    let cutoff = profile.cube_root_big_k();
    let smaller: Vec<u64> = spec.lengths.iter().copied().filter(|&l| l <= cutoff).collect();
    (CycleSpec::new(small), CycleSpec::new(smaller))
}
