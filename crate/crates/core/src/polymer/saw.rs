//! Self-avoiding walk enumeration.
//!
//! Depth-first search from the origin with pruning on occupied vertices. On
//! the lattice the occupied set is a hash set of packed coordinates; on the
//! tree the only occupied neighbour of the walk's tip is its predecessor, so
//! the test reduces to rejecting the cancelling letter. The search is sharded
//! by first step and the shard tallies are merged additively, so counts do
//! not depend on scheduling.
//!
//! Tree counts beyond the enumeration budget come from a transfer count over
//! the last letter (non-backtracking walks), see [`tree_transfer_counts`].

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Letter, NormKind, Vertex};
use crate::{check_budget, pow_u128};

/// How a [`SawCensus`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Enumeration,
    Transfer,
}

/// Upper bound on the number of SAWs of length `n` (non-backtracking walks).
pub fn saw_count_bound(graph: &Graph, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    let q = graph.coordination();
    (q as u128).saturating_mul(pow_u128(q - 1, n - 1))
}

/// Nodes visited by an enumeration up to length `n_max`.
pub fn saw_search_bound(graph: &Graph, n_max: usize) -> u128 {
    (0..=n_max).fold(0u128, |acc, n| acc.saturating_add(saw_count_bound(graph, n)))
}

/// Packs lattice coordinates (|x_i| <= n_max) into one `u64`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Packer {
    bits: u32,
    offset: i64,
}

impl Packer {
    pub(crate) fn new(d: usize, n_max: usize) -> Result<Self> {
        let span = 2 * n_max as u64 + 1;
        let bits = 64 - span.leading_zeros();
        if bits as usize * d > 64 {
            return Err(Error::param(
                "n_max",
                format!("lattice walks of length {n_max} in d = {d} do not fit the packed vertex key"),
            ));
        }
        Ok(Packer { bits, offset: n_max as i64 })
    }

    #[inline]
    pub(crate) fn pack(&self, xs: &[i32]) -> u64 {
        xs.iter()
            .fold(0u64, |acc, &x| (acc << self.bits) | (x as i64 + self.offset) as u64)
    }
}

/// Per-shard accumulator hooks for [`lattice_saws`].
pub(crate) struct LatticeVisit<'a> {
    /// `(coords, steps left)` → prune this branch.
    pub prune: &'a (dyn Fn(&[i32], usize) -> bool + Sync),
    /// `(length, coords, is_bridge)` for every walk of length `1..=n_max`.
    pub visit: &'a (dyn Fn(&mut FxHashMap<u64, u64>, usize, &[i32], bool) + Sync),
}

/// Enumerates lattice SAWs of length `1..=n_max` and returns the per-shard
/// tallies (shard = first letter), in letter order.
pub(crate) fn lattice_saws(d: usize, n_max: usize, hooks: &LatticeVisit<'_>) -> Result<Vec<FxHashMap<u64, u64>>> {
    let packer = Packer::new(d, n_max)?;
    let shards: Vec<usize> = (0..2 * d).collect();
    Ok(shards
        .into_par_iter()
        .map(|first| {
            let mut tally = FxHashMap::default();
            if n_max == 0 {
                return tally;
            }
            let mut xs = vec![0i32; d];
            let mut occupied = FxHashSet::default();
            occupied.insert(packer.pack(&xs));
            let axis = first % d;
            let delta = if first >= d { -1 } else { 1 };
            xs[axis] += delta;
            if (hooks.prune)(&xs, n_max - 1) {
                return tally;
            }
            occupied.insert(packer.pack(&xs));
            let first_coord = xs[0];
            let mut state = Dfs {
                d,
                n_max,
                packer,
                xs,
                occupied,
                hooks,
                tally: &mut tally,
            };
            state.recurse(1, first_coord, first_coord);
            tally
        })
        .collect())
}

struct Dfs<'a, 'h> {
    d: usize,
    n_max: usize,
    packer: Packer,
    xs: Vec<i32>,
    occupied: FxHashSet<u64>,
    hooks: &'a LatticeVisit<'h>,
    tally: &'a mut FxHashMap<u64, u64>,
}

impl Dfs<'_, '_> {
    /// `min_after0`/`max_first`: extremes of the first coordinate over `x_1..x_k`.
    fn recurse(&mut self, depth: usize, min_after0: i32, max_first: i32) {
        let bridge = min_after0 > 0 && self.xs[0] == max_first;
        (self.hooks.visit)(self.tally, depth, &self.xs, bridge);
        if depth == self.n_max {
            return;
        }
        for letter in 0..2 * self.d {
            let axis = letter % self.d;
            let delta = if letter >= self.d { -1 } else { 1 };
            self.xs[axis] += delta;
            let key = self.packer.pack(&self.xs);
            if !self.occupied.contains(&key) && !(self.hooks.prune)(&self.xs, self.n_max - depth - 1) {
                self.occupied.insert(key);
                let x0 = self.xs[0];
                self.recurse(depth + 1, min_after0.min(x0), max_first.max(x0));
                self.occupied.remove(&key);
            }
            self.xs[axis] -= delta;
        }
    }
}

/// Enumerates tree SAWs up to `n_max`, calling `visit(length, word)` for each.
/// Shards are first letters; returns per-shard accumulators in letter order.
pub(crate) fn tree_saws<A: Send>(
    d: usize,
    n_max: usize,
    prune: &(dyn Fn(&[Letter], usize) -> bool + Sync),
    init: &(dyn Fn() -> A + Sync),
    visit: &(dyn Fn(&mut A, usize, &[Letter]) + Sync),
) -> Vec<A> {
    fn recurse<A>(
        d: usize,
        n_max: usize,
        word: &mut Vec<Letter>,
        acc: &mut A,
        prune: &(dyn Fn(&[Letter], usize) -> bool + Sync),
        visit: &(dyn Fn(&mut A, usize, &[Letter]) + Sync),
    ) {
        let depth = word.len();
        visit(acc, depth, word);
        if depth == n_max {
            return;
        }
        let back = word.last().map(|l| l.inverse(d));
        for l in Letter::all(d) {
            // the predecessor is the only occupied neighbour of the tip
            if Some(l) == back {
                continue;
            }
            word.push(l);
            if !prune(word, n_max - depth - 1) {
                recurse(d, n_max, word, acc, prune, visit);
            }
            word.pop();
        }
    }

    let firsts: Vec<Letter> = Letter::all(d).collect();
    firsts
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            if n_max > 0 {
                let mut word = vec![first];
                if !prune(&word, n_max - 1) {
                    recurse(d, n_max, &mut word, &mut acc, prune, visit);
                }
            }
            acc
        })
        .collect()
}

/// Exact SAW counts on `T_{2d}` by length, via the last-letter transfer
/// recursion `c_{n+1}(τ) = Σ_{σ ≠ τ^{-1}} c_n(σ)`.
pub fn tree_transfer_counts(d: usize, n_max: usize) -> Vec<BigUint> {
    let q = 2 * d;
    let mut out = vec![BigUint::one()];
    if n_max == 0 {
        return out;
    }
    let mut by_last: Vec<BigUint> = vec![BigUint::one(); q];
    out.push(by_last.iter().sum());
    for _ in 2..=n_max {
        let total: BigUint = by_last.iter().sum();
        let next: Vec<BigUint> = (0..q).map(|t| &total - &by_last[(t + d) % q]).collect();
        by_last = next;
        out.push(by_last.iter().sum());
    }
    out
}

/// SAW counts from the origin by length and endpoint.
#[derive(Clone, Debug)]
pub struct SawCensus {
    graph: Graph,
    n_max: usize,
    method: CountMethod,
    /// Lattice only: sorted `(endpoint, count)` per length.
    endpoints: Vec<Vec<(Vertex, u64)>>,
    /// Counts per length keyed by graph depth of the endpoint.
    by_depth: Vec<Vec<(usize, BigUint)>>,
    /// Lattice only: bridges per length.
    bridges: Vec<u64>,
}

impl SawCensus {
    /// Enumerates all SAWs of length `<= n_max`. On the tree, falls back to
    /// the transfer count when enumeration would exceed `budget`.
    pub fn new(graph: Graph, n_max: usize, budget: u128) -> Result<Self> {
        let work = saw_search_bound(&graph, n_max);
        match graph.kind {
            GraphKind::Tree if work > budget => Ok(Self::tree_by_transfer(graph, n_max)),
            GraphKind::Tree => Ok(Self::tree_by_enumeration(graph, n_max)),
            GraphKind::Lattice => {
                check_budget("SAW enumeration", work, budget)?;
                Self::lattice_by_enumeration(graph, n_max)
            }
        }
    }

    /// Tree counts from the transfer recursion, whatever the budget.
    pub fn tree_by_transfer(graph: Graph, n_max: usize) -> Self {
        assert_eq!(graph.kind, GraphKind::Tree);
        let by_depth = tree_transfer_counts(graph.d, n_max)
            .into_iter()
            .enumerate()
            .map(|(n, c)| vec![(n, c)])
            .collect();
        SawCensus {
            graph,
            n_max,
            method: CountMethod::Transfer,
            endpoints: Vec::new(),
            by_depth,
            bridges: Vec::new(),
        }
    }

    /// Tree counts by explicit depth-first enumeration.
    pub fn tree_by_enumeration(graph: Graph, n_max: usize) -> Self {
        assert_eq!(graph.kind, GraphKind::Tree);
        let parts = tree_saws(
            graph.d,
            n_max,
            &|_, _| false,
            &|| vec![vec![0u64; n_max + 1]; n_max + 1],
            &|acc: &mut Vec<Vec<u64>>, n, word| acc[n][word.len()] += 1,
        );
        let mut merged = vec![vec![0u64; n_max + 1]; n_max + 1];
        merged[0][0] = 1;
        for part in parts {
            for (n, row) in part.into_iter().enumerate() {
                if n == 0 {
                    continue;
                }
                for (k, c) in row.into_iter().enumerate() {
                    merged[n][k] += c;
                }
            }
        }
        let by_depth = merged
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .enumerate()
                    .filter(|(_, c)| *c > 0)
                    .map(|(k, c)| (k, BigUint::from(c)))
                    .collect()
            })
            .collect();
        SawCensus {
            graph,
            n_max,
            method: CountMethod::Enumeration,
            endpoints: Vec::new(),
            by_depth,
            bridges: Vec::new(),
        }
    }

    fn lattice_by_enumeration(graph: Graph, n_max: usize) -> Result<Self> {
        let d = graph.d;
        let packer = Packer::new(d, n_max)?;
        // tally key: (length << shift) | packed; bridges under BRIDGE | length
        const BRIDGE: u64 = 1 << 63;
        let len_bits = 64 - (n_max as u64 + 1).leading_zeros();
        if packer.bits as usize * d + len_bits as usize > 63 {
            return Err(Error::param("n_max", "lattice census key does not fit in 64 bits"));
        }
        let shift = packer.bits as usize * d;
        let hooks = LatticeVisit {
            prune: &|_, _| false,
            visit: &move |tally, n, xs, bridge| {
                *tally.entry(((n as u64) << shift) | packer.pack(xs)).or_default() += 1;
                if bridge {
                    *tally.entry(BRIDGE | n as u64).or_default() += 1;
                }
            },
        };
        let parts = lattice_saws(d, n_max, &hooks)?;

        let mut endpoints: Vec<FxHashMap<u64, u64>> = vec![FxHashMap::default(); n_max + 1];
        let mut bridges = vec![0u64; n_max + 1];
        for part in parts {
            for (key, c) in part {
                if key & BRIDGE != 0 {
                    bridges[(key & !BRIDGE) as usize] += c;
                } else {
                    let n = (key >> shift) as usize;
                    let packed = key & ((1u64 << shift) - 1);
                    *endpoints[n].entry(packed).or_default() += c;
                }
            }
        }
        let unpack = |packed: u64| -> Vertex {
            let mask = (1u64 << packer.bits) - 1;
            let mut coords = vec![0i32; d];
            for i in (0..d).rev() {
                let shift_i = packer.bits as usize * (d - 1 - i);
                coords[i] = (((packed >> shift_i) & mask) as i64 - packer.offset) as i32;
            }
            Vertex::Lattice(coords.into_iter().collect())
        };
        let mut endpoint_lists: Vec<Vec<(Vertex, u64)>> = endpoints
            .into_iter()
            .map(|m| {
                let mut v: Vec<(Vertex, u64)> = m.into_iter().map(|(k, c)| (unpack(k), c)).collect();
                v.sort();
                v
            })
            .collect();
        endpoint_lists[0] = vec![(graph.origin(), 1)];
        let by_depth = endpoint_lists
            .iter()
            .map(|row| {
                let mut acc: Vec<(usize, BigUint)> = Vec::new();
                let mut dense: FxHashMap<usize, u64> = FxHashMap::default();
                for (v, c) in row {
                    *dense.entry(graph.depth(v)).or_default() += c;
                }
                acc.extend(dense.into_iter().map(|(k, c)| (k, BigUint::from(c))));
                acc.sort();
                acc
            })
            .collect();
        Ok(SawCensus {
            graph,
            n_max,
            method: CountMethod::Enumeration,
            endpoints: endpoint_lists,
            by_depth,
            bridges,
        })
    }

    pub fn graph(&self) -> Graph {
        self.graph
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn method(&self) -> CountMethod {
        self.method
    }

    /// `#SAW_n` as an exact integer.
    pub fn count(&self, n: usize) -> BigUint {
        self.by_depth[n].iter().map(|(_, c)| c).sum()
    }

    /// `#SAW_n`, if it fits in a `u64`.
    pub fn count_u64(&self, n: usize) -> u64 {
        self.count(n).to_u64().expect("count fits in u64")
    }

    /// Lattice endpoint counts for length `n`, sorted by vertex.
    pub fn endpoints(&self, n: usize) -> Option<&[(Vertex, u64)]> {
        self.endpoints.get(n).map(|v| v.as_slice())
    }

    /// Lattice bridge counts `b_n` (`b_0 = 0` by convention here).
    pub fn bridges(&self, n: usize) -> Option<u64> {
        self.bridges.get(n).copied()
    }

    /// `Z_{SAW_n}(α) = Σ_{x⃗ ∈ SAW_n} e^{α|x_n|}`.
    pub fn partition(&self, n: usize, alpha: f64, norm: NormKind) -> Result<f64> {
        self.graph.check_norm(norm)?;
        if n > self.n_max {
            return Err(Error::param("n", format!("census only reaches n = {}", self.n_max)));
        }
        match (self.graph.kind, norm) {
            (GraphKind::Tree, _) | (GraphKind::Lattice, NormKind::L1) => Ok(self.by_depth[n]
                .iter()
                .map(|(k, c)| c.to_f64().unwrap_or(f64::INFINITY) * (alpha * *k as f64).exp())
                .sum()),
            (GraphKind::Lattice, _) => {
                let mut total = 0.0;
                for (v, c) in &self.endpoints[n] {
                    total += *c as f64 * (alpha * self.graph.norm(v, norm)?).exp();
                }
                Ok(total)
            }
        }
    }
}

/// Counts of SAWs from the origin to `target`, for each length `0..=n_max`.
pub fn saw_counts_to(graph: Graph, target: &Vertex, n_max: usize, budget: u128) -> Result<Vec<u64>> {
    match (graph.kind, target) {
        (GraphKind::Lattice, Vertex::Lattice(t)) if t.len() == graph.d => {}
        (GraphKind::Tree, Vertex::Tree(_)) => {}
        _ => return Err(Error::VertexMismatch { kind: graph.kind, d: graph.d }),
    }
    check_budget("SAW enumeration", saw_search_bound(&graph, n_max), budget)?;
    let mut out = vec![0u64; n_max + 1];
    if *target == graph.origin() {
        out[0] = 1;
        return Ok(out);
    }
    match target {
        Vertex::Lattice(t) => {
            let t: Vec<i32> = t.to_vec();
            let t2 = t.clone();
            let hooks = LatticeVisit {
                prune: &move |xs, left| {
                    xs.iter().zip(&t).map(|(a, b)| (a - b).unsigned_abs() as usize).sum::<usize>() > left
                },
                visit: &move |tally, n, xs, _| {
                    if xs == t2.as_slice() {
                        *tally.entry(n as u64).or_default() += 1;
                    }
                },
            };
            for part in lattice_saws(graph.d, n_max, &hooks)? {
                for (n, c) in part {
                    out[n as usize] += c;
                }
            }
        }
        Vertex::Tree(tw) => {
            let tw: Vec<Letter> = tw.to_vec();
            let dist = move |w: &[Letter]| {
                let common = w.iter().zip(&tw).take_while(|(a, b)| a == b).count();
                w.len() + tw.len() - 2 * common
            };
            let parts = tree_saws(
                graph.d,
                n_max,
                &|w, left| dist(w) > left,
                &|| vec![0u64; n_max + 1],
                &|acc: &mut Vec<u64>, n, w| {
                    if dist(w) == 0 {
                        acc[n] += 1;
                    }
                },
            );
            for part in parts {
                for (n, c) in part.into_iter().enumerate() {
                    out[n] += c;
                }
            }
        }
    }
    Ok(out)
}

/// Counts of lattice SAWs ending on the plane `{x_1 = plane}`, per length.
pub fn saw_counts_to_plane(d: usize, plane: i32, n_max: usize, budget: u128) -> Result<Vec<u64>> {
    let graph = Graph::lattice(d)?;
    check_budget("SAW enumeration", saw_search_bound(&graph, n_max), budget)?;
    let mut out = vec![0u64; n_max + 1];
    if plane == 0 {
        out[0] = 1;
    }
    let hooks = LatticeVisit {
        prune: &move |xs, left| (xs[0] - plane).unsigned_abs() as usize > left,
        visit: &move |tally, n, xs, _| {
            if xs[0] == plane {
                *tally.entry(n as u64).or_default() += 1;
            }
        },
    };
    for part in lattice_saws(d, n_max, &hooks)? {
        for (n, c) in part {
            out[n as usize] += c;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_ENUMERATION_BUDGET as B;

    /// Independent recursive oracle: explicit vertex lists, linear membership scan.
    fn brute_lattice_counts(d: usize, n_max: usize) -> Vec<u64> {
        fn go(d: usize, n_max: usize, path: &mut Vec<Vec<i32>>, out: &mut Vec<u64>) {
            out[path.len() - 1] += 1;
            if path.len() - 1 == n_max {
                return;
            }
            for axis in 0..d {
                for delta in [1, -1] {
                    let mut next = path.last().unwrap().clone();
                    next[axis] += delta;
                    if !path.contains(&next) {
                        path.push(next);
                        go(d, n_max, path, out);
                        path.pop();
                    }
                }
            }
        }
        let mut out = vec![0; n_max + 1];
        go(d, n_max, &mut vec![vec![0; d]], &mut out);
        out
    }

    #[test]
    fn square_lattice_counts() {
        let g = Graph::lattice(2).unwrap();
        let c = SawCensus::new(g, 8, B).unwrap();
        let oracle = brute_lattice_counts(2, 8);
        for n in 0..=8 {
            assert_eq!(c.count_u64(n), oracle[n], "n = {n}");
        }
        assert_eq!(&oracle[1..5], &[4, 12, 36, 100]);
    }

    #[test]
    fn cubic_lattice_counts() {
        let g = Graph::lattice(3).unwrap();
        let c = SawCensus::new(g, 5, B).unwrap();
        let oracle = brute_lattice_counts(3, 5);
        for n in 0..=5 {
            assert_eq!(c.count_u64(n), oracle[n]);
        }
    }

    #[test]
    fn line_has_two_rays() {
        let g = Graph::lattice(1).unwrap();
        let c = SawCensus::new(g, 10, B).unwrap();
        for n in 1..=10 {
            assert_eq!(c.count_u64(n), 2);
            let z = c.partition(n, 0.7, NormKind::L1).unwrap();
            assert!((z - 2.0 * (0.7 * n as f64).exp()).abs() < 1e-9 * z);
        }
    }

    #[test]
    fn tree_enumeration_matches_transfer() {
        for d in 1..=3 {
            let g = Graph::tree(d).unwrap();
            let e = SawCensus::tree_by_enumeration(g, 7);
            let t = SawCensus::tree_by_transfer(g, 7);
            for n in 0..=7 {
                assert_eq!(e.count(n), t.count(n));
            }
        }
    }

    #[test]
    fn bridges_are_bounded_by_walks() {
        let g = Graph::lattice(2).unwrap();
        let c = SawCensus::new(g, 6, B).unwrap();
        // length-1 bridge: a1 only; length 2: a1 a1, a1 a2, a1 a2^-1
        assert_eq!(c.bridges(1), Some(1));
        assert_eq!(c.bridges(2), Some(3));
        for n in 1..=6 {
            assert!(c.bridges(n).unwrap() <= c.count_u64(n));
        }
        // supermultiplicative
        for n in 1..=3 {
            for m in 1..=3 {
                assert!(c.bridges(n + m).unwrap() >= c.bridges(n).unwrap() * c.bridges(m).unwrap());
            }
        }
    }

    #[test]
    fn counts_to_target() {
        let g = Graph::lattice(2).unwrap();
        let x = g.point(&[1, 0]).unwrap();
        let counts = saw_counts_to(g, &x, 5, B).unwrap();
        let census = SawCensus::new(g, 5, B).unwrap();
        for n in 0..=5 {
            let direct = census.endpoints(n).unwrap().iter().find(|(v, _)| *v == x).map(|(_, c)| *c).unwrap_or(0);
            assert_eq!(counts[n], direct);
        }
        assert_eq!(counts[1], 1);
        assert_eq!(counts[3], 2);
    }

    #[test]
    fn census_respects_budget() {
        let g = Graph::lattice(3).unwrap();
        assert!(matches!(SawCensus::new(g, 12, 1000), Err(Error::BudgetExceeded { .. })));
        // the tree falls back to the transfer count instead
        let t = Graph::tree(3).unwrap();
        let c = SawCensus::new(t, 30, 1000).unwrap();
        assert_eq!(c.method(), CountMethod::Transfer);
    }
}
