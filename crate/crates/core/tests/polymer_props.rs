use brqw::paths::build_class_counts;
use brqw::polymer::{
    binomial, decorated_path_census, decorated_paths, lattice_lift_check, tree_saw_partition, tree_transfer_counts,
    FamilyCensus, PathFamily, Regime, SawCensus,
};
use brqw::{Graph, NormKind};
use brqw::DEFAULT_ENUMERATION_BUDGET as B;
use num_bigint::BigUint;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn censuses(n_max: usize) -> Vec<FamilyCensus> {
    let mut out = Vec::new();
    for g in [Graph::lattice(2).unwrap(), Graph::tree(2).unwrap()] {
        for fam in [PathFamily::saw(g), PathFamily::sp(g)] {
            out.push(FamilyCensus::new(fam, n_max, B).unwrap());
        }
    }
    out
}

#[test]
fn subadditivity_and_log_convexity() {
    let mut violations = Vec::new();
    for c in censuses(8) {
        let norm = c.family().graph.default_norm();
        for alpha in [0.0, 0.5, 1.0] {
            for n in 1..=7 {
                for m in 1..=8 - n {
                    let lhs = c.partition(n + m, alpha, norm).unwrap();
                    let rhs = c.partition(n, alpha, norm).unwrap() * c.partition(m, alpha, norm).unwrap();
                    if lhs > rhs * (1.0 + 1e-12) {
                        violations.push(format!("{:?} n={n} m={m} α={alpha}", c.family()));
                    }
                }
            }
        }
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        for n in 1..=8 {
            let lz: Vec<f64> = grid.iter().map(|a| c.partition(n, *a, norm).unwrap().ln()).collect();
            for w in lz.windows(3) {
                if w[0] - 2.0 * w[1] + w[2] < -1e-9 {
                    violations.push(format!("{:?} convexity n={n}", c.family()));
                }
            }
        }
    }
    assert!(violations.is_empty(), "{violations:?}");
}

#[test]
fn free_energy_brackets() {
    for c in censuses(8) {
        let g = c.family().graph;
        for alpha in [0.0, 0.3, 1.0] {
            let b = c.lambda_bounds(alpha).unwrap();
            assert!(b.lower <= b.upper.value + 1e-12);
            assert!((g.d as f64).ln() <= b.upper.value + 1e-12);
            assert!(b.upper.value <= alpha + (2.0 * g.d as f64).ln() + 1e-12);
        }
    }
}

#[test]
fn tree_closed_form_is_exact() {
    for d in 2..=4 {
        let g = Graph::tree(d).unwrap();
        let c = SawCensus::new(g, 10, B).unwrap();
        for n in 0..=10 {
            for alpha in [0.0, 0.2, 0.7] {
                let z = c.partition(n, alpha, NormKind::TreeDepth).unwrap();
                let closed = if n == 0 { 1.0 } else { tree_saw_partition(d, n, alpha) };
                assert!(((z - closed) / closed).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn critical_point_directions() {
    for c in censuses(8) {
        for alpha in [0.0, 0.2] {
            let b = c.lambda_bounds(alpha).unwrap();
            let below = c.susceptibility(alpha, 0.9 * (-b.upper.value).exp()).unwrap();
            let above = c.susceptibility(alpha, (-b.lower).exp()).unwrap();
            assert_eq!(below.regime, Regime::Convergent);
            assert_eq!(above.regime, Regime::Divergent);
            assert!(below.estimate.value <= above.estimate.value);
            assert!(above.estimate.value >= above.geometric_floor - 1e-9);
            assert!(below.estimate.value >= below.geometric_floor - 1e-9);
        }
    }
}

#[test]
fn lattice_lift_holds() {
    for n in 0..=6usize {
        for l in -(n as i64)..=n as i64 {
            let c = lattice_lift_check(2, n, l, B).unwrap();
            assert!(c.holds(), "n={n} L={l}: {} < {}", c.lhs, c.rhs);
        }
    }
    for d in [2usize, 3] {
        let c = SawCensus::new(Graph::lattice(d).unwrap(), 6, B).unwrap();
        for n in 0..=6 {
            // alpha = 0 exactly in integers
            assert!(c.count(n) >= BigUint::from(d).pow(n as u32));
            let z = c.partition(n, 0.3, NormKind::L1).unwrap();
            assert!(z >= (d as f64 * 0.3f64.exp()).powi(n as i32) * (1.0 - 1e-12));
        }
    }
}

#[test]
fn decorated_paths_are_distinct_single_paths() {
    let g = Graph::tree(2).unwrap();
    for n in 3..=8 {
        let paths = decorated_paths(2, n).unwrap();
        assert_eq!(BigUint::from(paths.len()), decorated_path_census(2, n));
        let distinct: BTreeSet<_> = paths.iter().map(|p| p.letters().to_vec()).collect();
        assert_eq!(distinct.len(), paths.len());
        let table = build_class_counts(g, n, B).unwrap();
        let sp = table.single_path_classes();
        for p in &paths {
            assert!(sp.binary_search(p).is_ok(), "{}", p.display());
        }
        assert!(BigUint::from(sp.len()) >= decorated_path_census(2, n));
    }
}

#[test]
fn bridge_counts_give_connective_lower_bounds() {
    let (lo, hi) = FamilyCensus::new(PathFamily::saw(Graph::lattice(2).unwrap()), 10, B)
        .unwrap()
        .connective_estimate()
        .unwrap();
    // μ(Z²) ≈ 2.638
    assert!(lo <= 2.6385 && hi >= 2.6381, "[{lo}, {hi}]");
}

proptest! {
    #[test]
    fn transfer_counts_match_closed_form(d in 1usize..6, n in 1usize..40) {
        let c = &tree_transfer_counts(d, n)[n];
        let expected = BigUint::from(2 * d) * BigUint::from(2 * d - 1).pow(n as u32 - 1);
        prop_assert_eq!(c, &expected);
    }

    #[test]
    fn saw_subadditive_any_alpha(alpha in 0.0f64..2.0, n in 1usize..5, m in 1usize..5) {
        let c = SawCensus::new(Graph::lattice(2).unwrap(), 8, B).unwrap();
        let lhs = c.partition(n + m, alpha, NormKind::L1).unwrap();
        let rhs = c.partition(n, alpha, NormKind::L1).unwrap() * c.partition(m, alpha, NormKind::L1).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn binomial_symmetry(n in 0usize..60, k in 0usize..60) {
        prop_assume!(k <= n);
        prop_assert_eq!(binomial(n, k), binomial(n, n - k));
    }
}
