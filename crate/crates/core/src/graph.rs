//! The two underlying graphs: the cubic lattice `Z^d` and the homogeneous
//! tree `T_{2d}` of the free group on `d` generators.
//!
//! Both graphs share the ordered alphabet
//! `{a_1, ..., a_d, a_1^{-1}, ..., a_d^{-1}}`, stored as indices `0..2d`.
//! Index `j < d` is the generator `a_{j+1}`; index `j + d` is its inverse.
//! This ordering is used everywhere, including the row/column order of
//! coin matrices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest supported `d`; letters are stored in a byte.
pub const MAX_D: usize = 127;

/// A letter of the alphabet `A_{2d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(u8);

impl Letter {
    pub fn new(index: usize, d: usize) -> Result<Self> {
        if d == 0 || d > MAX_D || index >= 2 * d {
            return Err(Error::LetterOutOfRange { index, d });
        }
        Ok(Letter(index as u8))
    }

    /// Generator `a_{axis+1}` (`inverse = false`) or its inverse.
    pub fn generator(axis: usize, inverse: bool, d: usize) -> Result<Self> {
        if axis >= d {
            return Err(Error::LetterOutOfRange { index: axis, d });
        }
        Letter::new(if inverse { axis + d } else { axis }, d)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn inverse(self, d: usize) -> Letter {
        Letter(((self.0 as usize + d) % (2 * d)) as u8)
    }

    /// Coordinate axis moved along on the lattice.
    #[inline]
    pub fn axis(self, d: usize) -> usize {
        self.0 as usize % d
    }

    #[inline]
    pub fn is_inverse(self, d: usize) -> bool {
        self.0 as usize >= d
    }

    /// All `2d` letters in basis order.
    pub fn all(d: usize) -> impl Iterator<Item = Letter> + Clone {
        (0..2 * d).map(|i| Letter(i as u8))
    }

    /// Human-readable name, `a1` or `a1^-1`.
    pub fn label(self, d: usize) -> String {
        if self.is_inverse(d) {
            format!("a{}^-1", self.axis(d) + 1)
        } else {
            format!("a{}", self.axis(d) + 1)
        }
    }

    /// Inverse of [`Letter::label`].
    pub fn parse(label: &str, d: usize) -> Result<Self> {
        let bad = || Error::param("letter", format!("cannot parse `{label}` (expected a<k> or a<k>^-1)"));
        let rest = label.trim().strip_prefix('a').ok_or_else(bad)?;
        let (num, inverse) = match rest.strip_suffix("^-1") {
            Some(num) => (num, true),
            None => (rest, false),
        };
        let k: usize = num.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        Letter::generator(k - 1, inverse, d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Lattice,
    Tree,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Lattice => "lattice",
            GraphKind::Tree => "tree",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lattice" | "z" | "zd" => Ok(GraphKind::Lattice),
            "tree" | "t" => Ok(GraphKind::Tree),
            other => Err(Error::param("graph", format!("unknown graph kind `{other}`"))),
        }
    }
}

/// How `|x|` is measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    /// Distance to the root of the tree (reduced word length).
    TreeDepth,
    L1,
    Linf,
    /// General `l^p` norm on the lattice, `p >= 1`.
    Lp(f64),
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::TreeDepth => f.write_str("depth"),
            NormKind::L1 => f.write_str("l1"),
            NormKind::Linf => f.write_str("linf"),
            NormKind::Lp(p) => write!(f, "l{p}"),
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "depth" | "tree" | "treedepth" => Ok(NormKind::TreeDepth),
            "l1" => Ok(NormKind::L1),
            "linf" | "lmax" => Ok(NormKind::Linf),
            other => {
                let p = other
                    .strip_prefix('l')
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::param("norm", format!("unknown norm `{other}`")))?;
                if !(p >= 1.0 && p.is_finite()) {
                    return Err(Error::param("norm", format!("l^p needs 1 <= p < inf, got {p}")));
                }
                Ok(NormKind::Lp(p))
            }
        }
    }
}

/// A vertex of either graph.
///
/// Lattice vertices are coordinate vectors; tree vertices are reduced words.
/// Equality and hashing act on these canonical forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Lattice(SmallVec<[i32; 4]>),
    Tree(SmallVec<[Letter; 12]>),
}

impl Vertex {
    pub fn kind(&self) -> GraphKind {
        match self {
            Vertex::Lattice(_) => GraphKind::Lattice,
            Vertex::Tree(_) => GraphKind::Tree,
        }
    }

    /// Appends a self-delimiting canonical byte encoding.
    ///
    /// Lattice coordinates are written as fixed-width little-endian `i32`s, tree
    /// words as a `u16` length followed by the letter indices.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Vertex::Lattice(xs) => {
                for x in xs {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            Vertex::Tree(word) => {
                out.extend_from_slice(&(word.len() as u16).to_le_bytes());
                out.extend(word.iter().map(|l| l.0));
            }
        }
    }

    pub fn coordinates(&self) -> Option<&[i32]> {
        match self {
            Vertex::Lattice(xs) => Some(xs),
            Vertex::Tree(_) => None,
        }
    }

    pub fn word(&self) -> Option<&[Letter]> {
        match self {
            Vertex::Lattice(_) => None,
            Vertex::Tree(w) => Some(w),
        }
    }

    /// Compact text form: `(1,-2)` or `a1 a2^-1` (`e` for the root).
    pub fn display(&self, d: usize) -> String {
        match self {
            Vertex::Lattice(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                format!("({})", parts.join(","))
            }
            Vertex::Tree(w) if w.is_empty() => "e".to_owned(),
            Vertex::Tree(w) => w.iter().map(|l| l.label(d)).collect::<Vec<_>>().join(" "),
        }
    }
}

/// `Z^d` or `T_{2d}`; every vertex has exactly `2d` neighbours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    pub kind: GraphKind,
    pub d: usize,
}

impl Graph {
    pub fn new(kind: GraphKind, d: usize) -> Result<Self> {
        if d == 0 || d > MAX_D {
            return Err(Error::param("d", format!("need 1 <= d <= {MAX_D}, got {d}")));
        }
        Ok(Graph { kind, d })
    }

    pub fn lattice(d: usize) -> Result<Self> {
        Graph::new(GraphKind::Lattice, d)
    }

    pub fn tree(d: usize) -> Result<Self> {
        Graph::new(GraphKind::Tree, d)
    }

    #[inline]
    pub fn coordination(&self) -> usize {
        2 * self.d
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + Clone {
        Letter::all(self.d)
    }

    pub fn letter(&self, index: usize) -> Result<Letter> {
        Letter::new(index, self.d)
    }

    /// The root `e` (empty word) or the origin.
    pub fn origin(&self) -> Vertex {
        match self.kind {
            GraphKind::Lattice => Vertex::Lattice(SmallVec::from_elem(0, self.d)),
            GraphKind::Tree => Vertex::Tree(SmallVec::new()),
        }
    }

    /// Lattice vertex from coordinates.
    pub fn point(&self, coords: &[i32]) -> Result<Vertex> {
        if self.kind != GraphKind::Lattice || coords.len() != self.d {
            return Err(Error::VertexMismatch { kind: self.kind, d: self.d });
        }
        Ok(Vertex::Lattice(SmallVec::from_slice(coords)))
    }

    /// Tree vertex from a letter sequence, reduced on the way in.
    pub fn word(&self, letters: &[Letter]) -> Result<Vertex> {
        if self.kind != GraphKind::Tree {
            return Err(Error::VertexMismatch { kind: self.kind, d: self.d });
        }
        let mut v = self.origin();
        for &l in letters {
            self.check_letter(l)?;
            self.step_in_place(&mut v, l);
        }
        Ok(v)
    }

    /// Endpoint of the walk spelled by `letters`, starting at the origin.
    pub fn walk(&self, letters: &[Letter]) -> Result<Vertex> {
        let mut v = self.origin();
        for &l in letters {
            self.check_letter(l)?;
            self.step_in_place(&mut v, l);
        }
        Ok(v)
    }

    fn check_letter(&self, l: Letter) -> Result<()> {
        if l.index() >= 2 * self.d {
            return Err(Error::LetterOutOfRange { index: l.index(), d: self.d });
        }
        Ok(())
    }

    fn check_vertex(&self, v: &Vertex) -> Result<()> {
        let ok = match v {
            Vertex::Lattice(xs) => self.kind == GraphKind::Lattice && xs.len() == self.d,
            Vertex::Tree(w) => self.kind == GraphKind::Tree && w.iter().all(|l| l.index() < 2 * self.d),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::VertexMismatch { kind: self.kind, d: self.d })
        }
    }

    /// The neighbour of `v` reached along `letter`.
    pub fn step(&self, v: &Vertex, letter: Letter) -> Result<Vertex> {
        self.check_letter(letter)?;
        self.check_vertex(v)?;
        let mut next = v.clone();
        self.step_in_place(&mut next, letter);
        Ok(next)
    }

    /// Unchecked in-place step. On the tree the word is re-reduced by
    /// cancelling against the last letter.
    #[inline]
    pub fn step_in_place(&self, v: &mut Vertex, letter: Letter) {
        let d = self.d;
        match v {
            Vertex::Lattice(xs) => {
                let delta = if letter.is_inverse(d) { -1 } else { 1 };
                xs[letter.axis(d)] += delta;
            }
            Vertex::Tree(word) => {
                if word.last() == Some(&letter.inverse(d)) {
                    word.pop();
                } else {
                    word.push(letter);
                }
            }
        }
    }

    /// `|v|` in the requested norm.
    pub fn norm(&self, v: &Vertex, kind: NormKind) -> Result<f64> {
        self.check_vertex(v)?;
        match (v, kind) {
            (Vertex::Tree(w), NormKind::TreeDepth) => Ok(w.len() as f64),
            (Vertex::Lattice(xs), NormKind::L1) => Ok(xs.iter().map(|x| x.unsigned_abs() as f64).sum()),
            (Vertex::Lattice(xs), NormKind::Linf) => {
                Ok(xs.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64)
            }
            (Vertex::Lattice(xs), NormKind::Lp(p)) => {
                if !(p >= 1.0) {
                    return Err(Error::param("norm", format!("l^p needs p >= 1, got {p}")));
                }
                Ok(xs
                    .iter()
                    .map(|&x| (x.unsigned_abs() as f64).powf(p))
                    .sum::<f64>()
                    .powf(1.0 / p))
            }
            _ => Err(Error::NormMismatch { norm: kind, kind: self.kind }),
        }
    }

    /// Rejects norm kinds that make no sense on this graph.
    pub fn check_norm(&self, kind: NormKind) -> Result<()> {
        let ok = matches!(
            (self.kind, kind),
            (GraphKind::Tree, NormKind::TreeDepth)
                | (GraphKind::Lattice, NormKind::L1 | NormKind::Linf | NormKind::Lp(_))
        );
        if let NormKind::Lp(p) = kind {
            if !(p >= 1.0) {
                return Err(Error::param("norm", format!("l^p needs p >= 1, got {p}")));
            }
        }
        if ok {
            Ok(())
        } else {
            Err(Error::NormMismatch { norm: kind, kind: self.kind })
        }
    }

    /// Tree depth on the tree, `l^1` on the lattice.
    pub fn default_norm(&self) -> NormKind {
        match self.kind {
            GraphKind::Lattice => NormKind::L1,
            GraphKind::Tree => NormKind::TreeDepth,
        }
    }

    /// Graph distance (`l^1` on the lattice, tree metric on the tree).
    pub fn distance(&self, u: &Vertex, v: &Vertex) -> usize {
        match (u, v) {
            (Vertex::Lattice(a), Vertex::Lattice(b)) => a
                .iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y).unsigned_abs() as usize)
                .sum(),
            (Vertex::Tree(a), Vertex::Tree(b)) => {
                let common = a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count();
                a.len() + b.len() - 2 * common
            }
            _ => panic!("distance between vertices of different graphs"),
        }
    }

    /// Graph distance from the origin (integer norm used for path weights).
    #[inline]
    pub fn depth(&self, v: &Vertex) -> usize {
        match v {
            Vertex::Lattice(xs) => xs.iter().map(|x| x.unsigned_abs() as usize).sum(),
            Vertex::Tree(w) => w.len(),
        }
    }
}
