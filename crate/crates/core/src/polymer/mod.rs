//! Polymer lower bounds on `S_n(α)`.
//!
//! For a family `X ∈ {SAW, SP}` of paths from the origin, the partition
//! function `Z_{X_n}(α) = Σ_{x⃗ ∈ X_n} e^{α|x_n|}` bounds `S_n(α)` from below
//! up to a factor `(2d)^n`. Its free energy `Λ_X(α) = inf_n ln Z_{X_n}(α)/n`
//! decides divergence: the average blows up once `Λ_X(α) > ln 2d`, so the
//! root `α_c` of `Λ_X(α_c) = ln 2d` bounds the localisation length.
//!
//! Everything here works from exact counts. Finite truncations give one-sided
//! information, so Λ, μ and α_c are reported as brackets.

mod decorated;
mod saw;

use num_bigint::BigUint;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, NormKind, Vertex};
use crate::paths::build_class_counts;

pub use decorated::{decorated_path_census, decorated_paths, decorated_tree_bound, DecoratedBound};
pub use saw::{
    saw_count_bound, saw_counts_to, saw_counts_to_plane, saw_search_bound, tree_transfer_counts, CountMethod,
    SawCensus,
};

/// Which restricted path family a partition function sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTag {
    /// Self-avoiding walks (never revisit a vertex, including the origin).
    Saw,
    /// Single-path classes: paths sharing their phase content with no other.
    Sp,
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FamilyTag::Saw => "saw",
            FamilyTag::Sp => "sp",
        })
    }
}

impl std::str::FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "saw" => Ok(FamilyTag::Saw),
            "sp" => Ok(FamilyTag::Sp),
            other => Err(Error::param("family", format!("unknown family '{other}' (expected saw or sp)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PathFamily {
    pub tag: FamilyTag,
    pub graph: Graph,
}

impl PathFamily {
    pub fn saw(graph: Graph) -> Self {
        PathFamily { tag: FamilyTag::Saw, graph }
    }

    pub fn sp(graph: Graph) -> Self {
        PathFamily { tag: FamilyTag::Sp, graph }
    }
}

/// A truncated series or sequence limit, with its bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesEstimate {
    pub value: f64,
    pub n_max: usize,
    /// Magnitude of the last term (series) or last element (sequence).
    pub last_term: f64,
    /// The sequence of terms (or elements) was non-increasing over the
    /// second half of the truncation window.
    pub monotone: bool,
}

/// Non-increasing over the second half of `xs`.
pub(crate) fn tail_monotone(xs: &[f64]) -> bool {
    let start = xs.len() / 2;
    xs[start..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
}

enum Counts {
    Saw(SawCensus),
    /// `SP_n` endpoints with multiplicities, sorted, per length.
    Sp(Vec<Vec<(Vertex, u64)>>),
}

/// Exact counts for one family up to a fixed length.
pub struct FamilyCensus {
    family: PathFamily,
    n_max: usize,
    counts: Counts,
}

impl FamilyCensus {
    pub fn new(family: PathFamily, n_max: usize, budget: u128) -> Result<Self> {
        let counts = match family.tag {
            FamilyTag::Saw => Counts::Saw(SawCensus::new(family.graph, n_max, budget)?),
            FamilyTag::Sp => {
                let mut per_n = Vec::with_capacity(n_max + 1);
                for n in 0..=n_max {
                    let table = build_class_counts(family.graph, n, budget)?;
                    let mut acc: FxHashMap<Vertex, u64> = FxHashMap::default();
                    for p in table.single_path_classes() {
                        *acc.entry(p.endpoint()).or_default() += 1;
                    }
                    let mut v: Vec<(Vertex, u64)> = acc.into_iter().collect();
                    v.sort();
                    per_n.push(v);
                }
                Counts::Sp(per_n)
            }
        };
        Ok(FamilyCensus { family, n_max, counts })
    }

    pub fn family(&self) -> PathFamily {
        self.family
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn saw_census(&self) -> Option<&SawCensus> {
        match &self.counts {
            Counts::Saw(c) => Some(c),
            Counts::Sp(_) => None,
        }
    }

    /// `|X_n|`.
    pub fn count(&self, n: usize) -> BigUint {
        match &self.counts {
            Counts::Saw(c) => c.count(n),
            Counts::Sp(per_n) => per_n[n].iter().map(|(_, c)| BigUint::from(*c)).sum(),
        }
    }

    /// `Z_{X_n}(α)` for the given norm.
    pub fn partition(&self, n: usize, alpha: f64, norm: NormKind) -> Result<f64> {
        if n > self.n_max {
            return Err(Error::param("n", format!("census only reaches n = {}", self.n_max)));
        }
        match &self.counts {
            Counts::Saw(c) => c.partition(n, alpha, norm),
            Counts::Sp(per_n) => {
                let g = self.family.graph;
                g.check_norm(norm)?;
                let mut total = 0.0;
                for (v, c) in &per_n[n] {
                    total += *c as f64 * (alpha * g.norm(v, norm)?).exp();
                }
                Ok(total)
            }
        }
    }

    fn default_partition(&self, n: usize, alpha: f64) -> f64 {
        self.partition(n, alpha, self.family.graph.default_norm())
            .expect("default norm matches graph")
    }

    /// Certified bracket on `Λ_X(α)` from lengths `1..=n_max`.
    pub fn lambda_bounds(&self, alpha: f64) -> Result<LambdaBounds> {
        if !(alpha >= 0.0) {
            return Err(Error::param("alpha", format!("must be >= 0, got {alpha}")));
        }
        if self.n_max == 0 {
            return Err(Error::param("n_max", "need at least one step"));
        }
        let seq: Vec<f64> = (1..=self.n_max)
            .map(|n| self.default_partition(n, alpha).ln() / n as f64)
            .collect();
        let value = seq.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = SeriesEstimate {
            value,
            n_max: self.n_max,
            last_term: *seq.last().unwrap(),
            monotone: tail_monotone(&seq),
        };
        let g = self.family.graph;
        let lower = match g.kind {
            GraphKind::Lattice => (g.d as f64).ln() + alpha,
            GraphKind::Tree => ((2 * g.d - 1) as f64).ln() + alpha,
        };
        Ok(LambdaBounds { alpha, lower, upper })
    }

    /// Bracket on the connective constant `e^{Λ_X(0)}`.
    pub fn connective_estimate(&self) -> Result<(f64, f64)> {
        if self.n_max == 0 {
            return Err(Error::param("n_max", "need at least one step"));
        }
        let g = self.family.graph;
        let d = g.d as f64;
        let upper = (1..=self.n_max)
            .map(|n| self.default_partition(n, 0.0).powf(1.0 / n as f64))
            .fold(f64::INFINITY, f64::min);
        // SAW ⊆ SP, so a SAW lower bound serves both families
        let saw_lower = match (&self.counts, g.kind) {
            (Counts::Saw(c), GraphKind::Lattice) => (1..=self.n_max)
                .map(|n| (c.bridges(n).unwrap_or(0) as f64).powf(1.0 / n as f64))
                .fold(0.0, f64::max),
            (_, GraphKind::Tree) => (2 * g.d - 1) as f64,
            (Counts::Sp(_), GraphKind::Lattice) => {
                let c = SawCensus::new(g, self.n_max, crate::DEFAULT_ENUMERATION_BUDGET)?;
                (1..=self.n_max)
                    .map(|n| (c.bridges(n).unwrap_or(0) as f64).powf(1.0 / n as f64))
                    .fold(0.0, f64::max)
            }
        };
        Ok((d.max(saw_lower), upper))
    }

    /// Partial sums of `χ_α(z) = Σ_n z^n Z_{X_n}(α)` with a convergence
    /// diagnosis against the Λ bracket.
    pub fn susceptibility(&self, alpha: f64, z: f64) -> Result<Susceptibility> {
        if !(z >= 0.0) {
            return Err(Error::param("z", format!("must be >= 0, got {z}")));
        }
        let bounds = self.lambda_bounds(alpha)?;
        let terms: Vec<f64> = (0..=self.n_max)
            .map(|n| z.powi(n as i32) * self.default_partition(n, alpha))
            .collect();
        let value = terms.iter().sum();
        let geometric_floor = (0..=self.n_max)
            .map(|n| (z * bounds.lower.exp()).powi(n as i32))
            .sum();
        // z_c = e^{-Λ} lies in [e^{-Λ_upper}, e^{-Λ_lower}]
        let z_c_lower = (-bounds.upper.value).exp();
        let z_c_upper = (-bounds.lower).exp();
        let regime = if z < z_c_lower {
            Regime::Convergent
        } else if z >= z_c_upper {
            Regime::Divergent
        } else {
            Regime::Undetermined
        };
        Ok(Susceptibility {
            z,
            alpha,
            estimate: SeriesEstimate {
                value,
                n_max: self.n_max,
                last_term: *terms.last().unwrap(),
                monotone: tail_monotone(&terms),
            },
            geometric_floor,
            z_c_lower,
            z_c_upper,
            regime,
        })
    }

    /// Bracket on `α_c`, the root of `Λ_X(α) = ln 2d`.
    pub fn alpha_c_bracket(&self) -> Result<AlphaCBracket> {
        let g = self.family.graph;
        let target = (g.coordination() as f64).ln();
        let f = |a: f64| -> f64 {
            (1..=self.n_max)
                .map(|n| self.default_partition(n, a).ln() / n as f64)
                .fold(f64::INFINITY, f64::min)
                - target
        };
        let (mut lo, mut hi) = (0.0f64, target);
        if f(hi) < 0.0 {
            return Err(Error::RootFinding(format!("Λ upper bound stays below ln {} on [0, ln 2d]", g.coordination())));
        }
        if f(lo) >= 0.0 {
            hi = 0.0;
        }
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (upper, upper_source) = closed_form_alpha_upper(self.family)?;
        Ok(AlphaCBracket { lower: lo.min(hi), upper, upper_source })
    }
}

/// Best closed-form upper bound on `α_c` for a family.
pub fn closed_form_alpha_upper(family: PathFamily) -> Result<(f64, &'static str)> {
    let g = family.graph;
    Ok(match (g.kind, family.tag) {
        (GraphKind::Lattice, _) => (std::f64::consts::LN_2, "lattice-lift"),
        (GraphKind::Tree, FamilyTag::Saw) => (tree_saw_alpha_c(g.d), "tree-saw"),
        (GraphKind::Tree, FamilyTag::Sp) if g.d >= 2 => (decorated_tree_bound(g.d)?.alpha_threshold, "decorated-paths"),
        (GraphKind::Tree, FamilyTag::Sp) => (tree_saw_alpha_c(g.d), "tree-saw"),
    })
}

/// `ln(2d/(2d−1))`: exact `α_c` of the tree SAW family.
pub fn tree_saw_alpha_c(d: usize) -> f64 {
    let q = (2 * d) as f64;
    (q / (q - 1.0)).ln()
}

/// Closed form of `Z_{SAW_n}(α)` on `T_{2d}`.
pub fn tree_saw_partition(d: usize, n: usize, alpha: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let q = (2 * d) as f64;
    q / (q - 1.0) * ((q - 1.0) * alpha.exp()).powi(n as i32)
}

/// Closed form of `χ_α(z) = Σ_{n≥0} z^n Z_{SAW_n}(α)` on `T_{2d}`, valid for
/// `z(2d−1)e^α < 1`. The empty path contributes `Z_0 = 1`.
pub fn tree_saw_susceptibility(d: usize, alpha: f64, z: f64) -> f64 {
    let q = (2 * d) as f64;
    let r = z * (q - 1.0) * alpha.exp();
    1.0 + q / (q - 1.0) * r / (1.0 - r)
}

/// `2d / ((2d−1)(1 − z(2d−1)e^α))`: the geometric series of
/// [`tree_saw_partition`]'s `n >= 1` formula extended to `n = 0`. It exceeds
/// [`tree_saw_susceptibility`] by exactly `1/(2d−1)`.
pub fn tree_saw_susceptibility_geometric(d: usize, alpha: f64, z: f64) -> f64 {
    let q = (2 * d) as f64;
    q / ((q - 1.0) * (1.0 - z * (q - 1.0) * alpha.exp()))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LambdaBounds {
    pub alpha: f64,
    pub lower: f64,
    pub upper: SeriesEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `z < e^{-Λ_upper} <= z_c`: the series converges.
    Convergent,
    /// `z >= e^{-Λ_lower} >= z_c`: the series diverges.
    Divergent,
    Undetermined,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Susceptibility {
    pub z: f64,
    pub alpha: f64,
    pub estimate: SeriesEstimate,
    /// `Σ_{n<=n_max} (z e^{Λ_lower})^n`, a floor for the partial sums.
    pub geometric_floor: f64,
    pub z_c_lower: f64,
    pub z_c_upper: f64,
    pub regime: Regime,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AlphaCBracket {
    pub lower: f64,
    pub upper: f64,
    pub upper_source: &'static str,
}

/// `Z_{X_n}(α)`.
pub fn partition_function(family: PathFamily, n: usize, alpha: f64, norm: NormKind, budget: u128) -> Result<f64> {
    FamilyCensus::new(family, n, budget)?.partition(n, alpha, norm)
}

pub fn lambda_bounds(family: PathFamily, alpha: f64, n_max: usize, budget: u128) -> Result<LambdaBounds> {
    FamilyCensus::new(family, n_max, budget)?.lambda_bounds(alpha)
}

pub fn connective_estimate(family: PathFamily, n_max: usize, budget: u128) -> Result<(f64, f64)> {
    FamilyCensus::new(family, n_max, budget)?.connective_estimate()
}

pub fn susceptibility(family: PathFamily, alpha: f64, z: f64, n_max: usize, budget: u128) -> Result<Susceptibility> {
    FamilyCensus::new(family, n_max, budget)?.susceptibility(alpha, z)
}

pub fn alpha_c_bracket(family: PathFamily, n_max: usize, budget: u128) -> Result<AlphaCBracket> {
    FamilyCensus::new(family, n_max, budget)?.alpha_c_bracket()
}

/// `C(n, k)` exactly.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u8);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u8);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Both sides of the dimensional lifting inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftCheck {
    pub d: usize,
    pub n: usize,
    pub plane: i64,
    /// SAWs of length `n` in `Z^d` ending on `{x_1 = L}`.
    #[serde(serialize_with = "ser_big")]
    pub lhs: BigUint,
    /// `C(n, |L|) · #SAW_{n−|L|}(Z^{d−1})`.
    #[serde(serialize_with = "ser_big")]
    pub rhs: BigUint,
}

impl LiftCheck {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Counts SAWs ending on the plane `x_1 = L` against the lifted
/// lower-dimensional walks.
pub fn lattice_lift_check(d: usize, n: usize, plane: i64, budget: u128) -> Result<LiftCheck> {
    if d < 2 {
        return Err(Error::param("d", "lifting needs d >= 2"));
    }
    let l = plane.unsigned_abs() as usize;
    if l > n {
        return Err(Error::param("L", format!("|L| = {l} exceeds n = {n}")));
    }
    let lhs = saw_counts_to_plane(d, plane as i32, n, budget)?[n];
    let lower = SawCensus::new(Graph::lattice(d - 1)?, n - l, budget)?;
    let rhs = binomial(n, l) * lower.count(n - l);
    Ok(LiftCheck { d, n, plane, lhs: BigUint::from(lhs), rhs })
}

/// `ln(2d − μ(d−1))`: the `l^∞` upper bound on `α_c` given a value for the
/// connective constant one dimension down. `None` when `μ >= 2d`.
pub fn linf_alpha_c_bound(d: usize, mu_lower_dim: f64) -> Option<f64> {
    let arg = 2.0 * d as f64 - mu_lower_dim;
    (arg > 0.0).then(|| arg.ln())
}

/// `ln 2`: the lattice upper bound on `α_c` for the `l^1` norm, all `d`.
pub const LATTICE_ALPHA_C_UPPER: f64 = std::f64::consts::LN_2;

/// Lower bound `1/ln 2` on the lattice localisation length.
pub fn lattice_localisation_floor() -> f64 {
    1.0 / LATTICE_ALPHA_C_UPPER
}
