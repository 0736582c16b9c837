//! Paths from the root, their phase content, and the exact disorder average.
//!
//! The phase content of a path `e = x_0, x_1, ..., x_n` is the multiset of
//! oriented edges `(x_k, x_{k-1})` it traverses. Averaging over independent
//! uniform edge phases kills every cross term between paths with different
//! phase contents, so
//!
//! ```text
//! E‖e^{α|X|/2} U_ω^n e⊗τ_0‖² = S_n(α)
//!   = (2d)^{-n} Σ_{x,τ} e^{α|x|} Σ_{classes} |Σ_{paths in class, x_n = x, τ_n = τ} e^{iΣ_j α_{τ_j τ_{j-1}}}|²
//! ```
//!
//! [`build_class_table`] enumerates all `(2d)^n` letter sequences depth-first,
//! groups them by a canonical byte key of their phase content and accumulates
//! the class amplitudes per last letter `τ_n`. For coins with entries `±1/√(2d)`
//! the amplitudes are exact integers.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use smallvec::SmallVec;

use crate::coin::SkeletonMatrix;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Letter, NormKind, Vertex};
use crate::{check_budget, pow_u128};

/// Shards are letter prefixes; their number is at least this (or `(2d)^n`).
const SHARD_TARGET: u128 = 256;

/// A nearest-neighbour path of length `n` starting at the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    graph: Graph,
    letters: Vec<Letter>,
}

impl Path {
    pub fn new(graph: Graph, letters: Vec<Letter>) -> Result<Self> {
        for l in &letters {
            graph.letter(l.index())?;
        }
        Ok(Path { graph, letters })
    }

    /// Path through the given vertices; the first must be the origin and
    /// consecutive vertices must be neighbours.
    pub fn from_vertices(graph: Graph, vertices: &[Vertex]) -> Result<Self> {
        let mut it = vertices.iter();
        match it.next() {
            Some(v) if *v == graph.origin() => {}
            _ => return Err(Error::param("path", "must start at the origin")),
        }
        let mut letters = Vec::with_capacity(vertices.len().saturating_sub(1));
        let mut cur = graph.origin();
        for v in it {
            let l = graph
                .letters()
                .find(|&l| graph.step(&cur, l).as_ref() == Ok(v))
                .ok_or_else(|| Error::param("path", format!("{} is not a neighbour of {}", v.display(graph.d), cur.display(graph.d))))?;
            letters.push(l);
            cur = v.clone();
        }
        Ok(Path { graph, letters })
    }

    /// Path number `rank` in lexicographic order of letter sequences of length `n`.
    pub fn from_rank(graph: Graph, n: usize, mut rank: u64) -> Self {
        let q = graph.coordination() as u64;
        let mut letters = vec![Letter::new(0, graph.d).unwrap(); n];
        for slot in letters.iter_mut().rev() {
            *slot = Letter::new((rank % q) as usize, graph.d).unwrap();
            rank /= q;
        }
        Path { graph, letters }
    }

    pub fn graph(&self) -> Graph {
        self.graph
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `x_0 = e, x_1, ..., x_n`.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(self.letters.len() + 1);
        let mut v = self.graph.origin();
        out.push(v.clone());
        for &l in &self.letters {
            self.graph.step_in_place(&mut v, l);
            out.push(v.clone());
        }
        out
    }

    pub fn endpoint(&self) -> Vertex {
        let mut v = self.graph.origin();
        for &l in &self.letters {
            self.graph.step_in_place(&mut v, l);
        }
        v
    }

    /// No vertex (including the root) is visited twice.
    pub fn is_self_avoiding(&self) -> bool {
        let vs = self.vertices();
        let mut seen = rustc_hash::FxHashSet::default();
        vs.into_iter().all(|v| seen.insert(v))
    }

    /// `e^{iΣ_j α_{τ_j τ_{j-1}}}` for a balanced coin.
    pub fn coin_phase(&self, coin: &SkeletonMatrix, tau0: Letter) -> Result<Complex64> {
        let mut prev = tau0;
        let mut total = 0.0;
        for &l in &self.letters {
            total += coin.phase_of_entry(l, prev)?;
            prev = l;
        }
        Ok(Complex64::from_polar(1.0, total))
    }

    pub fn display(&self) -> String {
        self.letters
            .iter()
            .map(|l| l.label(self.graph.d))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// The oriented edge `(head, tail)` traversed from `tail` to `head`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedEdge {
    pub head: Vertex,
    pub tail: Vertex,
}

/// Canonical code of the oriented edge entered at `head` along `letter`.
///
/// Self-delimiting: lattice heads are `d` little-endian `i16`s, tree heads a
/// length byte followed by the word; the final byte is the letter.
fn push_edge_code(head: &Vertex, letter: Letter, out: &mut Vec<u8>) {
    match head {
        Vertex::Lattice(xs) => {
            for &x in xs {
                out.extend_from_slice(&(x as i16).to_le_bytes());
            }
        }
        Vertex::Tree(w) => {
            out.push(w.len() as u8);
            out.extend(w.iter().map(|l| l.index() as u8));
        }
    }
    out.push(letter.index() as u8);
}

fn check_path_length(graph: &Graph, n: usize) -> Result<()> {
    let limit = match graph.kind {
        GraphKind::Lattice => i16::MAX as usize,
        GraphKind::Tree => u8::MAX as usize,
    };
    if n > limit {
        return Err(Error::param("n", format!("paths longer than {limit} are not supported")));
    }
    Ok(())
}

/// Multiset of oriented edges with multiplicities, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseContent {
    edges: Vec<(OrientedEdge, u32)>,
    key: Vec<u8>,
}

impl PhaseContent {
    pub fn edges(&self) -> &[(OrientedEdge, u32)] {
        &self.edges
    }

    /// Canonical byte key; equal keys ⇔ equal multisets.
    pub fn key(&self) -> &[u8] {
        &self.key
    }

    /// Sum of multiplicities, the path length.
    pub fn total(&self) -> usize {
        self.edges.iter().map(|(_, m)| *m as usize).sum()
    }

    pub fn multiplicity(&self, head: &Vertex, tail: &Vertex) -> u32 {
        self.edges
            .iter()
            .find(|(e, _)| e.head == *head && e.tail == *tail)
            .map(|(_, m)| *m)
            .unwrap_or(0)
    }
}

/// `PC(x⃗_n)`: multiplicity of `(y, z)` is the number of `k` with `(x_k, x_{k-1}) = (y, z)`.
pub fn phase_content(path: &Path) -> PhaseContent {
    let vs = path.vertices();
    let mut coded: Vec<(Vec<u8>, OrientedEdge)> = path
        .letters
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let mut code = Vec::new();
            push_edge_code(&vs[k + 1], l, &mut code);
            (code, OrientedEdge { head: vs[k + 1].clone(), tail: vs[k].clone() })
        })
        .collect();
    coded.sort_by(|a, b| a.0.cmp(&b.0));
    let mut key = Vec::new();
    let mut edges: Vec<(OrientedEdge, u32)> = Vec::new();
    let mut last: Option<&[u8]> = None;
    for (code, e) in &coded {
        key.extend_from_slice(code);
        if last == Some(code.as_slice()) {
            edges.last_mut().unwrap().1 += 1;
        } else {
            edges.push((e.clone(), 1));
        }
        last = Some(code);
    }
    PhaseContent { edges, key }
}

/// Summed path amplitude of one class for one last letter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Amplitude {
    /// Exact sum of `±1` (real coins with entries `±1/√(2d)`).
    Signed(i64),
    Complex(Complex64),
}

impl Amplitude {
    pub fn norm_sqr(&self) -> f64 {
        match self {
            Amplitude::Signed(s) => (*s as f64) * (*s as f64),
            Amplitude::Complex(z) => z.norm_sqr(),
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Amplitude::Signed(s) => Complex64::new(*s as f64, 0.0),
            Amplitude::Complex(z) => *z,
        }
    }

    /// Exact zero for signed sums; `|A| < 1e-9 · cardinality` otherwise.
    pub fn is_zero(&self, cardinality: u64) -> bool {
        match self {
            Amplitude::Signed(s) => *s == 0,
            Amplitude::Complex(z) => z.norm() < 1e-9 * cardinality as f64,
        }
    }

    fn add(&mut self, other: &Amplitude) {
        match (self, other) {
            (Amplitude::Signed(a), Amplitude::Signed(b)) => *a += b,
            (Amplitude::Complex(a), Amplitude::Complex(b)) => *a += b,
            _ => unreachable!("amplitude kinds never mix within a table"),
        }
    }
}

/// How path amplitudes are accumulated.
#[derive(Clone, Debug)]
enum AmplitudeMode {
    /// Only class cardinalities.
    CountOnly,
    /// Row-major mask of `π` entries of a real balanced coin.
    Signed(Vec<bool>),
    /// Row-major phases `α_{τσ}`.
    Angles(Vec<f64>),
}

#[derive(Clone, Debug)]
struct ClassEntry {
    cardinality: u64,
    /// Lexicographic rank of the first member met in enumeration order.
    rank: u64,
    amps: SmallVec<[(Letter, Amplitude); 2]>,
}

/// Phase-content classes of all `(2d)^n` paths of length `n`.
#[derive(Clone, Debug)]
pub struct ClassTable {
    graph: Graph,
    n: usize,
    tau0: Letter,
    classes: FxHashMap<Box<[u8]>, ClassEntry>,
}

/// Read-only view of one class.
#[derive(Clone, Debug)]
pub struct ClassView<'a> {
    pub key: &'a [u8],
    pub cardinality: u64,
    /// Lexicographically smallest member.
    pub representative: Path,
    /// Per last letter `τ_n`; empty for count-only tables.
    pub amplitudes: &'a [(Letter, Amplitude)],
}

impl ClassView<'_> {
    pub fn endpoint(&self) -> Vertex {
        self.representative.endpoint()
    }

    pub fn content(&self) -> PhaseContent {
        phase_content(&self.representative)
    }

    /// Every amplitude vanishes (see [`Amplitude::is_zero`]).
    pub fn is_zero(&self) -> bool {
        !self.amplitudes.is_empty() && self.amplitudes.iter().all(|(_, a)| a.is_zero(self.cardinality))
    }

    pub fn amplitude(&self, tau: Letter) -> Option<Amplitude> {
        self.amplitudes.iter().find(|(l, _)| *l == tau).map(|(_, a)| *a)
    }
}

/// Counts of classes whose amplitude vanishes for every `(x_n, τ_n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroCensus {
    pub classes: u64,
    pub zero_classes: u64,
    pub paths_in_zero_classes: u64,
}

struct Enumerator<'a> {
    graph: Graph,
    n: usize,
    tau0: Letter,
    mode: &'a AmplitudeMode,
    verts: Vec<Vertex>,
    letters: Vec<Letter>,
    codes: Vec<Vec<u8>>,
    parity: Vec<u32>,
    angle: Vec<f64>,
    order: Vec<usize>,
    key: Vec<u8>,
    table: FxHashMap<Box<[u8]>, ClassEntry>,
    error: Option<Error>,
}

impl<'a> Enumerator<'a> {
    fn new(graph: Graph, n: usize, tau0: Letter, mode: &'a AmplitudeMode) -> Self {
        let mut verts = Vec::with_capacity(n + 1);
        verts.push(graph.origin());
        Enumerator {
            graph,
            n,
            tau0,
            mode,
            verts,
            letters: Vec::with_capacity(n),
            codes: vec![Vec::new(); n],
            parity: vec![0; n + 1],
            angle: vec![0.0; n + 1],
            order: (0..n).collect(),
            key: Vec::new(),
            table: FxHashMap::default(),
            error: None,
        }
    }

    fn push(&mut self, l: Letter) {
        let depth = self.letters.len();
        let q = self.graph.coordination();
        let prev = if depth == 0 { self.tau0 } else { self.letters[depth - 1] };
        let mut v = self.verts[depth].clone();
        self.graph.step_in_place(&mut v, l);
        let code = &mut self.codes[depth];
        code.clear();
        push_edge_code(&v, l, code);
        match self.mode {
            AmplitudeMode::CountOnly => {}
            AmplitudeMode::Signed(mask) => {
                self.parity[depth + 1] = self.parity[depth] + mask[l.index() * q + prev.index()] as u32;
            }
            AmplitudeMode::Angles(phases) => {
                self.angle[depth + 1] = self.angle[depth] + phases[l.index() * q + prev.index()];
            }
        }
        self.verts.push(v);
        self.letters.push(l);
    }

    fn pop(&mut self) {
        self.letters.pop();
        self.verts.pop();
    }

    fn rank(&self) -> u64 {
        let q = self.graph.coordination() as u64;
        self.letters.iter().fold(0u64, |r, l| r * q + l.index() as u64)
    }

    fn leaf(&mut self) {
        let n = self.n;
        let codes = &self.codes;
        self.order.sort_unstable_by(|&a, &b| codes[a].cmp(&codes[b]));
        self.key.clear();
        for &i in &self.order {
            self.key.extend_from_slice(&codes[i]);
        }
        let last = if n == 0 { self.tau0 } else { self.letters[n - 1] };
        let amp = match self.mode {
            AmplitudeMode::CountOnly => None,
            AmplitudeMode::Signed(_) => Some(Amplitude::Signed(if self.parity[n] % 2 == 0 { 1 } else { -1 })),
            AmplitudeMode::Angles(_) => Some(Amplitude::Complex(Complex64::from_polar(1.0, self.angle[n]))),
        };
        if let Some(entry) = self.table.get_mut(self.key.as_slice()) {
            entry.cardinality += 1;
            let first = Path::from_rank(self.graph, n, entry.rank).endpoint();
            if first != self.verts[n] {
                self.error.get_or_insert_with(|| {
                    Error::InvariantViolated(format!(
                        "paths with equal phase content end at {} and {}",
                        first.display(self.graph.d),
                        self.verts[n].display(self.graph.d)
                    ))
                });
            }
            if let Some(a) = amp {
                add_amp(&mut entry.amps, last, &a);
            }
        } else {
            let mut amps = SmallVec::new();
            if let Some(a) = amp {
                amps.push((last, a));
            }
            let rank = self.rank();
            self.table
                .insert(self.key.clone().into_boxed_slice(), ClassEntry { cardinality: 1, rank, amps });
        }
    }

    fn descend(&mut self) {
        if self.letters.len() == self.n {
            self.leaf();
            return;
        }
        for l in self.graph.letters() {
            self.push(l);
            self.descend();
            self.pop();
        }
    }
}

fn add_amp(amps: &mut SmallVec<[(Letter, Amplitude); 2]>, tau: Letter, a: &Amplitude) {
    match amps.iter_mut().find(|(l, _)| *l == tau) {
        Some((_, slot)) => slot.add(a),
        None => {
            amps.push((tau, *a));
            amps.sort_by_key(|(l, _)| *l);
        }
    }
}

fn enumerate(graph: Graph, n: usize, tau0: Letter, mode: AmplitudeMode, budget: u128) -> Result<ClassTable> {
    let q = graph.coordination();
    let tau0 = graph.letter(tau0.index())?;
    check_path_length(&graph, n)?;
    check_budget("path enumeration", pow_u128(q, n), budget)?;

    let mut prefix_len = 0;
    while prefix_len < n && pow_u128(q, prefix_len) < SHARD_TARGET {
        prefix_len += 1;
    }
    let shards = pow_u128(q, prefix_len) as u64;

    let results: Vec<Result<FxHashMap<Box<[u8]>, ClassEntry>>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut e = Enumerator::new(graph, n, tau0, &mode);
            for l in Path::from_rank(graph, prefix_len, shard).letters() {
                e.push(*l);
            }
            e.descend();
            match e.error {
                Some(err) => Err(err),
                None => Ok(e.table),
            }
        })
        .collect();

    let mut classes: FxHashMap<Box<[u8]>, ClassEntry> = FxHashMap::default();
    for part in results {
        for (key, entry) in part? {
            match classes.get_mut(&key) {
                Some(existing) => {
                    let a = Path::from_rank(graph, n, existing.rank).endpoint();
                    let b = Path::from_rank(graph, n, entry.rank).endpoint();
                    if a != b {
                        return Err(Error::InvariantViolated(format!(
                            "paths with equal phase content end at {} and {}",
                            a.display(graph.d),
                            b.display(graph.d)
                        )));
                    }
                    existing.cardinality += entry.cardinality;
                    existing.rank = existing.rank.min(entry.rank);
                    for (l, a) in &entry.amps {
                        add_amp(&mut existing.amps, *l, a);
                    }
                }
                None => {
                    classes.insert(key, entry);
                }
            }
        }
    }
    Ok(ClassTable { graph, n, tau0, classes })
}

/// All paths of length `n` grouped by phase content, with class amplitudes
/// for the coin `coin` and initial coin state `tau0`.
///
/// Fails with [`Error::InvariantViolated`] if two paths of one class end at
/// different vertices.
pub fn build_class_table(
    graph: Graph,
    n: usize,
    tau0: Letter,
    coin: &SkeletonMatrix,
    budget: u128,
) -> Result<ClassTable> {
    if coin.d() != graph.d {
        return Err(Error::DimensionMismatch { coin: coin.dim(), graph: graph.coordination() });
    }
    let mode = match coin.pi_phase_mask() {
        Some(mask) => AmplitudeMode::Signed(mask),
        None => AmplitudeMode::Angles(coin.phases()?),
    };
    enumerate(graph, n, tau0, mode, budget)
}

/// Class cardinalities only; no coin involved.
pub fn build_class_counts(graph: Graph, n: usize, budget: u128) -> Result<ClassTable> {
    let tau0 = graph.letter(0)?;
    enumerate(graph, n, tau0, AmplitudeMode::CountOnly, budget)
}

impl ClassTable {
    pub fn graph(&self) -> Graph {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau0(&self) -> Letter {
        self.tau0
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn total_paths(&self) -> u128 {
        self.classes.values().map(|e| e.cardinality as u128).sum()
    }

    /// Classes in canonical key order.
    pub fn classes(&self) -> Vec<ClassView<'_>> {
        let mut v: Vec<ClassView<'_>> = self
            .classes
            .iter()
            .map(|(k, e)| ClassView {
                key: k,
                cardinality: e.cardinality,
                representative: Path::from_rank(self.graph, self.n, e.rank),
                amplitudes: &e.amps,
            })
            .collect();
        v.sort_by(|a, b| a.key.cmp(b.key));
        v
    }

    /// The class of `path`, if the table has one for its length.
    pub fn class_of(&self, path: &Path) -> Option<ClassView<'_>> {
        if path.graph != self.graph || path.len() != self.n {
            return None;
        }
        let pc = phase_content(path);
        self.classes.get_key_value(pc.key()).map(|(k, e)| ClassView {
            key: k,
            cardinality: e.cardinality,
            representative: Path::from_rank(self.graph, self.n, e.rank),
            amplitudes: &e.amps,
        })
    }

    fn has_amplitudes(&self) -> Result<()> {
        if self.n > 0 && self.classes.values().all(|e| e.amps.is_empty()) {
            return Err(Error::param("table", "class table was built without a coin"));
        }
        Ok(())
    }

    /// `W(x) = Σ_{classes ending at x} Σ_τ |A_class(τ)|²`, sorted by vertex.
    pub fn endpoint_weights(&self) -> Result<Vec<(Vertex, f64)>> {
        self.has_amplitudes()?;
        let mut exact: FxHashMap<Vertex, i128> = FxHashMap::default();
        let mut float: Vec<(&[u8], Vertex, f64)> = Vec::new();
        for (key, e) in &self.classes {
            let x = Path::from_rank(self.graph, self.n, e.rank).endpoint();
            if self.n == 0 {
                *exact.entry(x).or_default() += 1;
                continue;
            }
            match e.amps[0].1 {
                Amplitude::Signed(_) => {
                    let w: i128 = e
                        .amps
                        .iter()
                        .map(|(_, a)| match a {
                            Amplitude::Signed(s) => (*s as i128) * (*s as i128),
                            Amplitude::Complex(_) => unreachable!(),
                        })
                        .sum();
                    *exact.entry(x).or_default() += w;
                }
                Amplitude::Complex(_) => {
                    float.push((key, x, e.amps.iter().map(|(_, a)| a.norm_sqr()).sum()));
                }
            }
        }
        let mut out: Vec<(Vertex, f64)> = exact.into_iter().map(|(x, w)| (x, w as f64)).collect();
        if !float.is_empty() {
            // fixed summation order
            float.sort_by(|a, b| a.0.cmp(b.0));
            let mut acc: FxHashMap<Vertex, f64> = FxHashMap::default();
            for (_, x, w) in float {
                *acc.entry(x).or_default() += w;
            }
            out.extend(acc);
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    /// `S_n(α)` for this table's `τ_0`.
    pub fn s_n(&self, alpha: f64, norm: NormKind) -> Result<f64> {
        self.s_n_within(alpha, norm, f64::INFINITY)
    }

    /// Contribution to `S_n(α)` from endpoints with `|x| <= radius`.
    pub fn s_n_within(&self, alpha: f64, norm: NormKind, radius: f64) -> Result<f64> {
        self.graph.check_norm(norm)?;
        let mut total = 0.0;
        for (x, w) in self.endpoint_weights()? {
            let r = self.graph.norm(&x, norm)?;
            if r <= radius {
                total += (alpha * r).exp() * w;
            }
        }
        Ok(total / pow_u128(self.graph.coordination(), self.n) as f64)
    }

    pub fn zero_census(&self) -> Result<ZeroCensus> {
        self.has_amplitudes()?;
        let mut c = ZeroCensus { classes: self.classes.len() as u64, zero_classes: 0, paths_in_zero_classes: 0 };
        for e in self.classes.values() {
            if !e.amps.is_empty() && e.amps.iter().all(|(_, a)| a.is_zero(e.cardinality)) {
                c.zero_classes += 1;
                c.paths_in_zero_classes += e.cardinality;
            }
        }
        Ok(c)
    }

    /// Paths alone in their class (`SP_n`), in lexicographic order.
    pub fn single_path_classes(&self) -> Vec<Path> {
        let mut ranks: Vec<u64> = self
            .classes
            .values()
            .filter(|e| e.cardinality == 1)
            .map(|e| e.rank)
            .collect();
        ranks.sort_unstable();
        ranks.into_iter().map(|r| Path::from_rank(self.graph, self.n, r)).collect()
    }

    /// `Σ_{x⃗ ∈ SP_n} e^{α|x_n|}`, summed in lexicographic order.
    pub fn single_path_partition(&self, alpha: f64, norm: NormKind) -> Result<f64> {
        self.graph.check_norm(norm)?;
        let mut total = 0.0;
        for p in self.single_path_classes() {
            total += (alpha * self.graph.norm(&p.endpoint(), norm)?).exp();
        }
        Ok(total)
    }

    /// Number of single-path classes, `|SP_n|`.
    pub fn single_path_count(&self) -> u64 {
        self.classes.values().filter(|e| e.cardinality == 1).count() as u64
    }
}

/// `S_n^{τ_0}(α)`.
#[allow(clippy::too_many_arguments)]
pub fn exact_s_n(
    graph: Graph,
    n: usize,
    tau0: Letter,
    coin: &SkeletonMatrix,
    alpha: f64,
    norm: NormKind,
    budget: u128,
) -> Result<f64> {
    build_class_table(graph, n, tau0, coin, budget)?.s_n(alpha, norm)
}

/// `(2d)^{-1} Σ_{τ_0} S_n^{τ_0}(α)`.
pub fn exact_s_n_tau_averaged(
    graph: Graph,
    n: usize,
    coin: &SkeletonMatrix,
    alpha: f64,
    norm: NormKind,
    budget: u128,
) -> Result<f64> {
    let mut total = 0.0;
    for tau0 in graph.letters() {
        total += exact_s_n(graph, n, tau0, coin, alpha, norm, budget)?;
    }
    Ok(total / graph.coordination() as f64)
}

/// `SP_n`: paths whose phase-content class has a single member.
pub fn single_path_classes(graph: Graph, n: usize, budget: u128) -> Result<Vec<Path>> {
    Ok(build_class_counts(graph, n, budget)?.single_path_classes())
}

/// Zero-amplitude class census for initial coin state `tau0`.
pub fn zero_class_census(
    graph: Graph,
    n: usize,
    tau0: Letter,
    coin: &SkeletonMatrix,
    budget: u128,
) -> Result<ZeroCensus> {
    build_class_table(graph, n, tau0, coin, budget)?.zero_census()
}

/// One class in machine-readable form.
#[derive(Clone, Debug, Serialize)]
pub struct ClassRecord {
    /// `(head, tail, multiplicity)` in canonical order.
    pub content: Vec<(String, String, u32)>,
    pub cardinality: u64,
    pub endpoint: String,
    pub representative: String,
    /// `(τ_n, re, im)`.
    pub amplitudes: Vec<(String, f64, f64)>,
}

impl ClassTable {
    /// All classes as records, in canonical key order.
    pub fn records(&self) -> Vec<ClassRecord> {
        let d = self.graph.d;
        self.classes()
            .into_iter()
            .map(|c| {
                let pc = c.content();
                ClassRecord {
                    content: pc
                        .edges()
                        .iter()
                        .map(|(e, m)| (e.head.display(d), e.tail.display(d), *m))
                        .collect(),
                    cardinality: c.cardinality,
                    endpoint: c.endpoint().display(d),
                    representative: c.representative.display(),
                    amplitudes: c
                        .amplitudes
                        .iter()
                        .map(|(l, a)| {
                            let z = a.to_complex();
                            (l.label(d), z.re, z.im)
                        })
                        .collect(),
                }
            })
            .collect()
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters.cmp(&other.letters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coin::{make_fourier_coin, make_hadamard_coin};
    use crate::DEFAULT_ENUMERATION_BUDGET as B;

    fn letter(i: usize, d: usize) -> Letter {
        Letter::new(i, d).unwrap()
    }

    #[test]
    fn single_step_content() {
        let g = Graph::tree(2).unwrap();
        let a1 = letter(0, 2);
        let p = Path::new(g, vec![a1]).unwrap();
        let pc = phase_content(&p);
        let x1 = g.word(&[a1]).unwrap();
        assert_eq!(pc.edges().len(), 1);
        assert_eq!(pc.multiplicity(&x1, &g.origin()), 1);
    }

    #[test]
    fn back_and_forth_edges_are_distinct() {
        let g = Graph::tree(2).unwrap();
        let a1 = letter(0, 2);
        let p = Path::new(g, vec![a1, a1.inverse(2)]).unwrap();
        let pc = phase_content(&p);
        let x1 = g.word(&[a1]).unwrap();
        assert_eq!(pc.edges().len(), 2);
        assert_eq!(pc.multiplicity(&x1, &g.origin()), 1);
        assert_eq!(pc.multiplicity(&g.origin(), &x1), 1);
        assert_eq!(pc.total(), 2);
    }

    #[test]
    fn n1_classes_are_singletons() {
        for kind in [GraphKind::Lattice, GraphKind::Tree] {
            for d in 1..4 {
                let g = Graph::new(kind, d).unwrap();
                let t = build_class_table(g, 1, letter(0, d), &make_fourier_coin(d).unwrap(), B).unwrap();
                assert_eq!(t.class_count(), 2 * d);
                assert!(t.classes().iter().all(|c| c.cardinality == 1));
                assert_eq!(t.zero_census().unwrap().zero_classes, 0);
                for a in [0.0, 0.4] {
                    let s = t.s_n(a, g.default_norm()).unwrap();
                    assert!((s - f64::exp(a)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn back_and_forth_is_single_path() {
        let g = Graph::lattice(2).unwrap();
        let a1 = letter(0, 2);
        let sp = single_path_classes(g, 2, B).unwrap();
        assert!(sp.contains(&Path::new(g, vec![a1, a1.inverse(2)]).unwrap()));
    }

    #[test]
    fn path_counts() {
        for kind in [GraphKind::Lattice, GraphKind::Tree] {
            let g = Graph::new(kind, 2).unwrap();
            for n in 0..=6 {
                let t = build_class_counts(g, n, B).unwrap();
                assert_eq!(t.total_paths(), 4u128.pow(n as u32));
            }
        }
    }

    #[test]
    fn budget_enforced() {
        let g = Graph::lattice(2).unwrap();
        let err = build_class_counts(g, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { required: 1_048_576, budget: 1000, .. }));
    }

    #[test]
    fn from_vertices_and_rank() {
        let g = Graph::lattice(2).unwrap();
        let vs = vec![
            g.origin(),
            g.point(&[1, 0]).unwrap(),
            g.point(&[1, 1]).unwrap(),
        ];
        let p = Path::from_vertices(g, &vs).unwrap();
        assert_eq!(p.letters(), &[letter(0, 2), letter(1, 2)]);
        assert_eq!(p.vertices(), vs);
        // rank of (a1, a2) = 0*4 + 1
        assert_eq!(Path::from_rank(g, 2, 1), p);
        let bad = vec![g.origin(), g.point(&[2, 0]).unwrap()];
        assert!(Path::from_vertices(g, &bad).is_err());
    }

    #[test]
    fn tau_average_of_one_step_is_e_alpha() {
        let g = Graph::tree(2).unwrap();
        let c = make_hadamard_coin(2).unwrap();
        let s = exact_s_n_tau_averaged(g, 1, &c, 0.3, NormKind::TreeDepth, B).unwrap();
        assert!((s - 0.3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn count_only_table_has_no_weights() {
        let g = Graph::lattice(2).unwrap();
        let t = build_class_counts(g, 3, B).unwrap();
        assert!(t.s_n(0.0, NormKind::L1).is_err());
        assert!(t.zero_census().is_err());
    }
}
