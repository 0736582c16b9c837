//! Sparse evolution under `U_ω(C) = D_ω U(C)` and Monte-Carlo disorder
//! averages of the exponential position moment.
//!
//! One step maps the coin vector `ψ(x, ·)` at each occupied site `x` to
//! `C ψ(x, ·)`, then moves component `τ` to the neighbour `xτ` and multiplies
//! it by the random phase of the oriented edge `(xτ, x)`:
//!
//! ```text
//! ψ'(xτ, τ) = e^{iω(xτ, x)} Σ_σ C_{τσ} ψ(x, σ)
//! ```
//!
//! No renormalisation is applied between steps.

use num_complex::Complex64;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use smallvec::SmallVec;

use crate::coin::SkeletonMatrix;
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Letter, NormKind, Vertex};

/// Default cap on basis states for tree evolutions.
pub const DEFAULT_NODE_BUDGET: u128 = 10_000_000;

type CoinVector = SmallVec<[Complex64; 8]>;

/// A finitely supported wave function on `l²(G) ⊗ C^{2d}`.
#[derive(Clone, Debug)]
pub struct WalkState {
    graph: Graph,
    sites: FxHashMap<Vertex, CoinVector>,
}

impl WalkState {
    /// `e ⊗ τ_0`.
    pub fn localized(graph: Graph, tau0: Letter) -> Result<Self> {
        let tau0 = graph.letter(tau0.index())?;
        let mut v: CoinVector = SmallVec::from_elem(Complex64::new(0.0, 0.0), graph.coordination());
        v[tau0.index()] = Complex64::new(1.0, 0.0);
        let mut sites = FxHashMap::default();
        sites.insert(graph.origin(), v);
        Ok(WalkState { graph, sites })
    }

    pub fn graph(&self) -> Graph {
        self.graph
    }

    pub fn amplitude(&self, x: &Vertex, tau: Letter) -> Complex64 {
        self.sites
            .get(x)
            .and_then(|v| v.get(tau.index()).copied())
            .unwrap_or_default()
    }

    /// Occupied sites (with possibly zero coin vectors).
    pub fn support_len(&self) -> usize {
        self.sites.len()
    }

    /// Stored basis states, `sites × 2d`.
    pub fn basis_states(&self) -> usize {
        self.sites.len() * self.graph.coordination()
    }

    pub fn sites(&self) -> impl Iterator<Item = (&Vertex, &[Complex64])> {
        self.sites.iter().map(|(x, v)| (x, v.as_slice()))
    }

    /// `‖ψ‖²`.
    pub fn norm_sqr(&self) -> f64 {
        self.sites
            .values()
            .flat_map(|v| v.iter())
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// Probability to find the walker at `x`.
    pub fn site_probability(&self, x: &Vertex) -> f64 {
        self.sites
            .get(x)
            .map(|v| v.iter().map(|a| a.norm_sqr()).sum())
            .unwrap_or(0.0)
    }

    /// Largest graph distance from the origin among sites with nonzero weight.
    pub fn max_depth(&self) -> usize {
        self.sites
            .iter()
            .filter(|(_, v)| v.iter().any(|a| a.norm_sqr() > 0.0))
            .map(|(x, _)| self.graph.depth(x))
            .max()
            .unwrap_or(0)
    }
}

/// A disorder realisation `ω`: one uniform phase per oriented edge.
///
/// Phases are never stored. The phase of edge `(y, x)`, with `y = xτ`, is a
/// keyed hash of the seed and the canonical encoding of `(y, τ)`, mapped to
/// `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DisorderRealization {
    seed: u64,
    zero: bool,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl DisorderRealization {
    pub fn new(seed: u64) -> Self {
        DisorderRealization { seed, zero: false }
    }

    /// `ω ≡ 0`, i.e. `D_ω = I`.
    pub fn zero() -> Self {
        DisorderRealization { seed: 0, zero: true }
    }

    /// Realisation number `index` of a Monte-Carlo run keyed by `master`.
    pub fn derived(master: u64, index: u64) -> Self {
        DisorderRealization::new(mix64(master ^ mix64(index.wrapping_add(GOLDEN))))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `ω(arrival, arrival·τ^{-1})` in `[0, 2π)`.
    #[inline]
    pub fn phase(&self, arrival: &Vertex, tau: Letter) -> f64 {
        if self.zero {
            return 0.0;
        }
        let mut h = mix64(self.seed ^ GOLDEN);
        let mut absorb = |w: u64| h = mix64(h ^ w).wrapping_add(GOLDEN);
        match arrival {
            Vertex::Lattice(xs) => {
                absorb(0x4c41_5454 ^ xs.len() as u64);
                for &x in xs {
                    absorb(x as i64 as u64);
                }
            }
            Vertex::Tree(word) => {
                absorb(0x5452_4545 ^ word.len() as u64);
                for chunk in word.chunks(8) {
                    let mut w = 0u64;
                    for (i, l) in chunk.iter().enumerate() {
                        w |= (l.index() as u64 + 1) << (8 * i);
                    }
                    absorb(w);
                }
            }
        }
        absorb(tau.index() as u64);
        let u = (mix64(h) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u * std::f64::consts::TAU
    }

    /// `e^{iω(arrival, arrival·τ^{-1})}`.
    #[inline]
    pub fn factor(&self, arrival: &Vertex, tau: Letter) -> Complex64 {
        if self.zero {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, self.phase(arrival, tau))
        }
    }
}

fn check_dimensions(graph: &Graph, coin: &SkeletonMatrix) -> Result<()> {
    if coin.d() != graph.d {
        return Err(Error::DimensionMismatch { coin: coin.dim(), graph: graph.coordination() });
    }
    Ok(())
}

/// One application of `U_ω(C)`.
pub fn apply_u(state: &WalkState, coin: &SkeletonMatrix, disorder: &DisorderRealization) -> Result<WalkState> {
    let g = state.graph;
    check_dimensions(&g, coin)?;
    let n = g.coordination();
    let zero = Complex64::new(0.0, 0.0);
    let entries = coin.entries();

    let mut next: FxHashMap<Vertex, CoinVector> =
        FxHashMap::with_capacity_and_hasher(state.sites.len() * 2, Default::default());
    for (x, psi) in &state.sites {
        if psi.iter().all(|a| *a == zero) {
            continue;
        }
        for tau in g.letters() {
            let row = &entries[tau.index() * n..(tau.index() + 1) * n];
            let mut amp = zero;
            for (c, a) in row.iter().zip(psi.iter()) {
                amp += c * a;
            }
            let mut y = x.clone();
            g.step_in_place(&mut y, tau);
            amp *= disorder.factor(&y, tau);
            let slot = next
                .entry(y)
                .or_insert_with(|| SmallVec::from_elem(zero, n));
            // (xτ, τ) is reached from x only, so no accumulation is needed
            slot[tau.index()] = amp;
        }
    }
    Ok(WalkState { graph: g, sites: next })
}

/// `U_ω(C)^steps ψ`.
pub fn evolve(
    state: &WalkState,
    coin: &SkeletonMatrix,
    disorder: &DisorderRealization,
    steps: usize,
) -> Result<WalkState> {
    let mut s = state.clone();
    for _ in 0..steps {
        s = apply_u(&s, coin, disorder)?;
    }
    Ok(s)
}

/// `Σ_{x,τ} e^{α|x|} |ψ(x, τ)|²`.
pub fn exponential_moment(state: &WalkState, alpha: f64, norm: NormKind) -> Result<f64> {
    let g = state.graph;
    g.check_norm(norm)?;
    let mut total = 0.0;
    for (x, psi) in &state.sites {
        let p: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if p == 0.0 {
            continue;
        }
        total += (alpha * g.norm(x, norm)?).exp() * p;
    }
    Ok(total)
}

/// Mean and standard error of a Monte-Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√M`.
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    fn from_samples(values: impl Iterator<Item = f64> + Clone, m: usize) -> Self {
        let mean = values.clone().sum::<f64>() / m as f64;
        let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
        let var = ss / (m - 1) as f64;
        McEstimate {
            mean,
            stderr: (var / m as f64).sqrt(),
            samples: m,
        }
    }
}

/// Parameters of a disorder-averaged run.
#[derive(Clone, Debug)]
pub struct McParams<'a> {
    pub graph: Graph,
    pub coin: &'a SkeletonMatrix,
    pub tau0: Letter,
    pub steps: usize,
    pub norm: NormKind,
    pub samples: usize,
    pub seed: u64,
    pub node_budget: u128,
}

/// Upper bound on basis states `U^n` can touch from one site.
pub fn support_bound(graph: &Graph, steps: usize) -> u128 {
    let q = graph.coordination() as u128;
    let mut sites: u128 = 0;
    match graph.kind {
        GraphKind::Tree => {
            // vertices at depth k ≡ steps (mod 2), k ≤ steps
            for k in (0..=steps).rev().step_by(2) {
                let shell = if k == 0 { 1 } else { q.saturating_mul((q - 1).saturating_pow(k as u32 - 1)) };
                sites = sites.saturating_add(shell);
            }
        }
        GraphKind::Lattice => {
            let side = 2 * steps as u128 + 1;
            sites = side.saturating_pow(graph.d as u32);
        }
    }
    sites.saturating_mul(q)
}

/// Monte-Carlo moments for every `(n, α)` with `1 <= n <= steps`.
///
/// Entry `[n][k]` estimates `E‖e^{α_k|X|/2} U_ω^n e⊗τ_0‖²`. Realisation `m` uses
/// the disorder [`DisorderRealization::derived`]`(seed, m)`, so results do not
/// depend on the number of worker threads.
pub fn mc_moment_table(params: &McParams<'_>, alphas: &[f64]) -> Result<Vec<Vec<McEstimate>>> {
    let g = params.graph;
    check_dimensions(&g, params.coin)?;
    g.check_norm(params.norm)?;
    if params.samples < 2 {
        return Err(Error::param("samples", "at least 2 samples are needed for a standard error"));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(Error::param("alpha", format!("must be finite and >= 0, got {a}")));
    }
    if g.kind == GraphKind::Tree {
        let need = support_bound(&g, params.steps);
        if need > params.node_budget {
            return Err(Error::BudgetExceeded {
                what: "tree evolution",
                required: need,
                budget: params.node_budget,
            });
        }
    }
    let start = WalkState::localized(g, params.tau0)?;
    let width = alphas.len();
    let steps = params.steps;

    // per realisation: moments[n-1][k]
    let per_sample: Vec<Result<Vec<f64>>> = (0..params.samples as u64)
        .into_par_iter()
        .map(|m| {
            let disorder = DisorderRealization::derived(params.seed, m);
            let mut state = start.clone();
            let mut row = Vec::with_capacity(steps * width);
            for _ in 0..steps {
                state = apply_u(&state, params.coin, &disorder)?;
                for &a in alphas {
                    row.push(exponential_moment(&state, a, params.norm)?);
                }
            }
            Ok(row)
        })
        .collect();
    let per_sample: Vec<Vec<f64>> = per_sample.into_iter().collect::<Result<_>>()?;

    let mut table = Vec::with_capacity(steps + 1);
    table.push(vec![
        McEstimate { mean: 1.0, stderr: 0.0, samples: params.samples };
        width
    ]);
    for n in 0..steps {
        let row = (0..width)
            .map(|k| {
                let idx = n * width + k;
                McEstimate::from_samples(per_sample.iter().map(move |r| r[idx]), params.samples)
            })
            .collect();
        table.push(row);
    }
    Ok(table)
}

/// `E‖e^{α|X|/2} U_ω^n e⊗τ_0‖²` estimated from `M` realisations.
pub fn mc_expectation(params: &McParams<'_>, alpha: f64) -> Result<McEstimate> {
    let table = mc_moment_table(params, &[alpha])?;
    Ok(table[params.steps][0])
}

/// Average over the `2d` initial coin states of independent runs. The
/// realisations for `τ_0` use master seed `seed + τ_0`.
pub fn mc_expectation_tau_averaged(params: &McParams<'_>, alpha: f64) -> Result<McEstimate> {
    let q = params.graph.coordination();
    let mut mean = 0.0;
    let mut var = 0.0;
    for tau0 in params.graph.letters() {
        let p = McParams {
            tau0,
            seed: params.seed.wrapping_add(tau0.index() as u64),
            ..params.clone()
        };
        let e = mc_expectation(&p, alpha)?;
        mean += e.mean;
        var += e.stderr * e.stderr;
    }
    Ok(McEstimate {
        mean: mean / q as f64,
        stderr: var.sqrt() / q as f64,
        samples: params.samples * q,
    })
}
