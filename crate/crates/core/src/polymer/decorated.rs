//! Decorated paths on `T_{2d}`.
//!
//! A tree SAW backbone of length `k` carries, at `j` of its `k+1` sites,
//! short SAW decorations that are walked out and straight back before the
//! walk moves on. Decorations leave the backbone through one of the `2d−2`
//! letters that are neither the incoming nor the outgoing backbone direction,
//! so each decorated path is alone in its phase-content class.

use num_bigint::BigUint;
use serde::Serialize;

use super::binomial;
use crate::error::{Error, Result};
use crate::graph::{Graph, Letter};
use crate::paths::Path;

/// The decorated-path threshold on `α_c` and its checks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecoratedBound {
    pub d: usize,
    /// Evaluation point `z = 1/(2d)`.
    pub z: f64,
    /// `ln((1 − z²(2d−1)) / ((1 − z²) z (2d−1)))` at `z = 1/(2d)`.
    pub alpha_threshold: f64,
    /// The same threshold written in terms of `1/(2d)` directly.
    pub alpha_threshold_closed: f64,
    /// `alpha_threshold · 2d²`, which tends to 1.
    pub asymptotic_check: f64,
    /// `z²(2d−1) < 1`.
    pub z_condition: bool,
    /// `z e^α (2d−1) < 1` at `α = alpha_threshold`.
    pub z_alpha_condition: bool,
}

pub fn decorated_tree_bound(d: usize) -> Result<DecoratedBound> {
    if d < 2 {
        return Err(Error::param("d", "decorated paths need d >= 2"));
    }
    let q = (2 * d) as f64;
    let z = 1.0 / q;
    let alpha_threshold = ((1.0 - z * z * (q - 1.0)) / ((1.0 - z * z) * z * (q - 1.0))).ln();
    let u = 1.0 / q;
    let alpha_threshold_closed = ((1.0 - u + u * u) / ((1.0 - u) * (1.0 - u * u))).ln();
    Ok(DecoratedBound {
        d,
        z,
        alpha_threshold,
        alpha_threshold_closed,
        asymptotic_check: alpha_threshold * 2.0 * (d * d) as f64,
        z_condition: z * z * (q - 1.0) < 1.0,
        z_alpha_condition: z * alpha_threshold.exp() * (q - 1.0) < 1.0,
    })
}

/// Number of decorated paths of length `n` on `T_{2d}`:
/// `Σ_{k+2ρ=n} Σ_j 2d(2d−1)^{k−1} (2(d−1))^j (2d−1)^{ρ−j} C(k+1,j) C(ρ−1,j−1)`.
pub fn decorated_path_census(d: usize, n: usize) -> BigUint {
    let q = BigUint::from(2 * d);
    let q1 = BigUint::from(2 * d - 1);
    let side = BigUint::from(2 * (d - 1));
    let mut total = BigUint::from(0u8);
    for rho in 1..=n / 2 {
        let k = n - 2 * rho;
        if k == 0 {
            continue;
        }
        let backbone = &q * q1.pow((k - 1) as u32);
        for j in 1..=(k + 1).min(rho) {
            total += &backbone
                * side.pow(j as u32)
                * q1.pow((rho - j) as u32)
                * binomial(k + 1, j)
                * binomial(rho - 1, j - 1);
        }
    }
    total
}

/// Every configuration counted by [`decorated_path_census`], rendered as an
/// explicit path, in generation order.
pub fn decorated_paths(d: usize, n: usize) -> Result<Vec<Path>> {
    if d < 2 {
        return Err(Error::param("d", "decorated paths need d >= 2"));
    }
    let graph = Graph::tree(d)?;
    let mut out = Vec::new();
    for rho in 1..=n / 2 {
        let k = n - 2 * rho;
        if k == 0 {
            continue;
        }
        for backbone in non_backtracking(d, None, k) {
            for j in 1..=(k + 1).min(rho) {
                for sites in combinations(k + 1, j) {
                    for parts in compositions(rho, j) {
                        render(d, &backbone, &sites, &parts, &mut Vec::new(), 0, &mut |letters| {
                            out.push(Path::new(graph, letters.to_vec()).expect("letters in range"));
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Expands decorations site by site; `chosen[i]` is the decoration at `sites[i]`.
fn render(
    d: usize,
    backbone: &[Letter],
    sites: &[usize],
    parts: &[usize],
    chosen: &mut Vec<Vec<Letter>>,
    idx: usize,
    emit: &mut dyn FnMut(&[Letter]),
) {
    if idx == sites.len() {
        let mut letters = Vec::with_capacity(backbone.len() + 2 * parts.iter().sum::<usize>());
        let mut next = 0;
        for i in 0..=backbone.len() {
            if next < sites.len() && sites[next] == i {
                let deco = &chosen[next];
                letters.extend_from_slice(deco);
                letters.extend(deco.iter().rev().map(|l| l.inverse(d)));
                next += 1;
            }
            if i < backbone.len() {
                letters.push(backbone[i]);
            }
        }
        emit(&letters);
        return;
    }
    let i = sites[idx];
    let k = backbone.len();
    let incoming = if i == 0 { backbone[0] } else { backbone[i - 1] };
    let outgoing = if i == k { backbone[k - 1] } else { backbone[i] };
    let excluded = [incoming.inverse(d), outgoing];
    for first in Letter::all(d).filter(|l| !excluded.contains(l)) {
        for deco in non_backtracking(d, Some(first), parts[idx]) {
            chosen.push(deco);
            render(d, backbone, sites, parts, chosen, idx + 1, emit);
            chosen.pop();
        }
    }
}

/// Reduced words of length `len`, optionally with a fixed first letter.
fn non_backtracking(d: usize, first: Option<Letter>, len: usize) -> Vec<Vec<Letter>> {
    let mut words: Vec<Vec<Letter>> = match first {
        Some(l) => vec![vec![l]],
        None => Letter::all(d).map(|l| vec![l]).collect(),
    };
    for _ in 1..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                let back = w.last().unwrap().inverse(d);
                Letter::all(d).filter(move |l| *l != back).map(move |l| {
                    let mut v = w.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    words
}

/// `j`-subsets of `0..m`, increasing.
fn combinations(m: usize, j: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, m: usize, j: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == j {
            out.push(cur.clone());
            return;
        }
        for s in start..m {
            cur.push(s);
            go(s + 1, m, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, m, j, &mut Vec::new(), &mut out);
    out
}

/// Ordered compositions of `total` into `parts` positive parts.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (1..=total.saturating_sub(parts - 1))
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}
