//! SAW two-point functions and the correlation length.
//!
//! `G_α(z, x) = Σ_n z^n Σ_{SAW_n ending at x} e^{α|x|}` and the plane
//! generating function `G_L(z) = Σ_n z^n #{SAW_n ending on x_1 = L}`. The
//! mass `m_d(z) = sup_L (−ln G_L(z))/L` is the inverse correlation length,
//! and `ξ_d(1/(2d)) = 1/m_d(1/(2d))` bounds the localisation length from
//! below.
//!
//! Every series here is truncated at `n_max`. Partial sums under-estimate
//! `G_L`, so the per-plane masses over-estimate `(−ln G_L)/L`: the mass
//! estimate is a diagnostic, not a certified bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind, Vertex};
use crate::polymer::{lattice_localisation_floor, saw_counts_to, saw_counts_to_plane, SawCensus, SeriesEstimate};

/// Dimension from which the correlation-length estimates are expected to
/// be meaningful; smaller `d` are computed but flagged.
pub const MASS_CAVEAT_BELOW_D: usize = 5;

fn series(z: f64, counts: &[u64], weight: f64) -> SeriesEstimate {
    let terms: Vec<f64> = counts
        .iter()
        .enumerate()
        .map(|(n, c)| z.powi(n as i32) * *c as f64 * weight)
        .collect();
    let nonzero: Vec<f64> = terms.iter().copied().filter(|t| *t > 0.0).collect();
    SeriesEstimate {
        value: terms.iter().sum(),
        n_max: counts.len() - 1,
        last_term: *terms.last().unwrap(),
        monotone: nonzero.is_empty() || crate::polymer::tail_monotone(&nonzero),
    }
}

fn check_z(z: f64, strictly_positive: bool) -> Result<()> {
    let ok = if strictly_positive { z > 0.0 } else { z >= 0.0 };
    if ok && z.is_finite() {
        Ok(())
    } else {
        let bound = if strictly_positive { "> 0" } else { ">= 0" };
        Err(Error::param("z", format!("must be {bound}, got {z}")))
    }
}

/// Partial sum of the two-point function `G_α(z, x)` up to length `n_max`.
pub fn two_point(graph: Graph, z: f64, x: &Vertex, alpha: f64, n_max: usize, budget: u128) -> Result<SeriesEstimate> {
    check_z(z, false)?;
    let counts = saw_counts_to(graph, x, n_max, budget)?;
    let weight = (alpha * graph.norm(x, graph.default_norm())?).exp();
    Ok(series(z, &counts, weight))
}

/// Partial sum of `G_L(z)` on `Z^d` up to length `n_max`.
pub fn plane_generating(d: usize, z: f64, plane: i32, n_max: usize, budget: u128) -> Result<SeriesEstimate> {
    check_z(z, false)?;
    if plane < 1 {
        return Err(Error::param("L", format!("must be >= 1, got {plane}")));
    }
    let counts = saw_counts_to_plane(d, plane, n_max, budget)?;
    Ok(series(z, &counts, 1.0))
}

/// One plane of a [`MassEstimate`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PlaneRow {
    pub l: usize,
    /// Truncated `G_L(z)`.
    pub g_l: f64,
    /// `(−ln G_L)/L`; infinite when no walk of length `<= n_max` reaches the plane.
    pub mass: f64,
    /// `e^{−m̂L} <= G_L <= χ_0² e^{−m̂L(1−slack)}`.
    pub sandwich: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MassEstimate {
    pub d: usize,
    pub z: f64,
    pub n_max: usize,
    pub rows: Vec<PlaneRow>,
    /// `sup_L` of the per-plane values.
    pub sup_estimate: f64,
    /// Truncated `χ_0(z)`.
    pub chi0: f64,
    pub slack: f64,
    /// Truncation biases every per-plane value upwards.
    pub bias: &'static str,
    pub certified: bool,
    /// Set for `d < 5`.
    pub low_dimension_caveat: bool,
}

/// Estimates `m_d(z)` from planes `1..=l_max` and walks up to `n_max`.
pub fn mass_estimate(d: usize, z: f64, l_max: usize, n_max: usize, budget: u128) -> Result<MassEstimate> {
    mass_estimate_with_slack(d, z, l_max, n_max, 0.0, budget)
}

pub fn mass_estimate_with_slack(
    d: usize,
    z: f64,
    l_max: usize,
    n_max: usize,
    slack: f64,
    budget: u128,
) -> Result<MassEstimate> {
    check_z(z, true)?;
    if l_max == 0 {
        return Err(Error::param("L_max", "must be >= 1"));
    }
    let graph = Graph::lattice(d)?;
    let census = SawCensus::new(graph, n_max, budget)?;
    let mut plane_counts = vec![vec![0u64; n_max + 1]; l_max + 1];
    let mut totals = vec![0u64; n_max + 1];
    for (n, total) in totals.iter_mut().enumerate() {
        for (v, c) in census.endpoints(n).expect("lattice census") {
            *total += c;
            let x1 = v.coordinates().expect("lattice vertex")[0];
            if x1 >= 1 && x1 as usize <= l_max {
                plane_counts[x1 as usize][n] += c;
            }
        }
    }
    let chi0 = series(z, &totals, 1.0).value;
    let mut rows: Vec<PlaneRow> = (1..=l_max)
        .map(|l| {
            let g_l = series(z, &plane_counts[l], 1.0).value;
            let mass = if g_l > 0.0 { -g_l.ln() / l as f64 } else { f64::INFINITY };
            PlaneRow { l, g_l, mass, sandwich: false }
        })
        .collect();
    let sup_estimate = rows.iter().map(|r| r.mass).fold(f64::NEG_INFINITY, f64::max);
    for r in &mut rows {
        let l = r.l as f64;
        let lower = (-sup_estimate * l).exp();
        let upper = chi0 * chi0 * (-sup_estimate * l * (1.0 - slack)).exp();
        r.sandwich = lower <= r.g_l * (1.0 + 1e-12) && r.g_l <= upper * (1.0 + 1e-12);
    }
    Ok(MassEstimate {
        d,
        z,
        n_max,
        rows,
        sup_estimate,
        chi0,
        slack,
        bias: "over-estimate",
        certified: false,
        low_dimension_caveat: d < MASS_CAVEAT_BELOW_D,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalisationBound {
    /// `1/m̂` at `z = 1/(2d)`.
    pub xi_hat: f64,
    pub l_bound: f64,
    /// `1/ln 2`, valid for every `d`.
    pub unconditional: f64,
    /// The larger of the two.
    pub best: f64,
    pub best_source: &'static str,
    pub mass: MassEstimate,
}

/// `𝓛 >= ξ_d(1/(2d))`, estimated, reported next to `1/ln 2`.
pub fn localisation_length_bound(d: usize, l_max: usize, n_max: usize, budget: u128) -> Result<LocalisationBound> {
    if d < 2 {
        return Err(Error::param("d", "must be >= 2"));
    }
    let mass = mass_estimate(d, 1.0 / (2 * d) as f64, l_max, n_max, budget)?;
    let xi_hat = 1.0 / mass.sup_estimate;
    let unconditional = lattice_localisation_floor();
    let (best, best_source) = if xi_hat > unconditional {
        (xi_hat, "correlation-length")
    } else {
        (unconditional, "lattice-lift")
    };
    Ok(LocalisationBound { xi_hat, l_bound: xi_hat, unconditional, best, best_source, mass })
}

/// `(z e^α)^{|x|}`, the tree two-point function.
pub fn tree_two_point(graph: Graph, z: f64, x: &Vertex, alpha: f64) -> Result<f64> {
    if graph.kind != GraphKind::Tree {
        return Err(Error::param("graph", "closed form holds on the tree only"));
    }
    Ok((z * alpha.exp()).powi(graph.depth(x) as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_ENUMERATION_BUDGET as B;

    #[test]
    fn origin_two_point_is_one() {
        let g = Graph::lattice(2).unwrap();
        let s = two_point(g, 0.3, &g.origin(), 0.5, 6, B).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn tree_two_point_exact_at_distance() {
        let g = Graph::tree(2).unwrap();
        let x = g.walk(&[g.letter(0).unwrap(), g.letter(1).unwrap(), g.letter(1).unwrap()]).unwrap();
        let s = two_point(g, 0.1, &x, 0.0, 3, B).unwrap();
        assert!((s.value - 1e-3).abs() < 1e-15);
        assert_eq!(tree_two_point(g, 0.1, &x, 0.0).unwrap(), 0.1f64.powi(3));
    }

    #[test]
    fn first_plane_single_step() {
        for d in 1..=3 {
            let s = plane_generating(d, 0.37, 1, 1, B).unwrap();
            assert!((s.value - 0.37).abs() < 1e-15);
        }
        assert_eq!(plane_generating(2, 0.0, 1, 5, B).unwrap().value, 0.0);
        assert!(plane_generating(2, 0.1, 0, 5, B).is_err());
    }

    #[test]
    fn mass_at_critical_random_walk_point() {
        let m = mass_estimate(2, 0.25, 4, 10, B).unwrap();
        assert!(m.sup_estimate.is_finite() && m.sup_estimate > 0.0);
        assert!(m.low_dimension_caveat);
        assert!(m.rows.iter().all(|r| r.sandwich));
        assert!(mass_estimate(2, 0.0, 4, 10, B).is_err());
    }

    #[test]
    fn localisation_reports_floor() {
        let b = localisation_length_bound(2, 3, 8, B).unwrap();
        assert!((b.unconditional - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert!(b.xi_hat > 0.0 && b.xi_hat.is_finite());
        assert!(b.best >= b.unconditional);
    }
}
