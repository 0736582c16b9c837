use brqw::correlation::{mass_estimate, plane_generating, tree_two_point, two_point};
use brqw::polymer::SawCensus;
use brqw::{Graph, Letter};
use brqw::DEFAULT_ENUMERATION_BUDGET as B;
use std::collections::HashSet;

/// Walks every letter sequence of length `n` on `Z^2` and returns the
/// endpoints of the self-avoiding ones.
fn brute_saw_endpoints(n: usize) -> Vec<(i32, i32)> {
    let moves = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let mut out = Vec::new();
    for code in 0..4usize.pow(n as u32) {
        let mut seen = HashSet::from([(0, 0)]);
        let (mut x, mut y) = (0, 0);
        let mut c = code;
        let mut ok = true;
        for _ in 0..n {
            let (dx, dy) = moves[c % 4];
            c /= 4;
            x += dx;
            y += dy;
            if !seen.insert((x, y)) {
                ok = false;
                break;
            }
        }
        if ok {
            out.push((x, y));
        }
    }
    out
}

#[test]
fn two_point_matches_brute_force() {
    let g = Graph::lattice(2).unwrap();
    let ends: Vec<Vec<(i32, i32)>> = (0..=8).map(brute_saw_endpoints).collect();
    for target in [(1, 0), (1, 1), (2, 0), (0, -3), (2, 2)] {
        for z in [0.1f64, 0.2, 0.25] {
            for n_max in [5usize, 8] {
                let mut oracle = 0.0;
                for (n, e) in ends.iter().enumerate().take(n_max + 1) {
                    let count = e.iter().filter(|p| **p == target).count();
                    oracle += z.powi(n as i32) * count as f64;
                }
                let x = g.point(&[target.0, target.1]).unwrap();
                let s = two_point(g, z, &x, 0.0, n_max, B).unwrap();
                assert!((s.value - oracle).abs() < 1e-14, "{target:?} z={z} n={n_max}: {} vs {oracle}", s.value);
            }
        }
    }
}

#[test]
fn plane_generating_matches_brute_force() {
    let ends: Vec<Vec<(i32, i32)>> = (0..=8).map(brute_saw_endpoints).collect();
    for plane in 1..=3 {
        for z in [0.2f64, 0.25] {
            let mut oracle = 0.0;
            for (n, e) in ends.iter().enumerate() {
                oracle += z.powi(n as i32) * e.iter().filter(|p| p.0 == plane).count() as f64;
            }
            let s = plane_generating(2, z, plane, 8, B).unwrap();
            assert!((s.value - oracle).abs() < 1e-14);
        }
    }
}

#[test]
fn tree_two_point_closed_form() {
    let g = Graph::tree(2).unwrap();
    let words = ["a1", "a2^-1 a1", "a1 a1 a2", "a2 a1^-1 a2 a2", "a1 a2 a1 a2 a1", "a2^-1 a2^-1 a1 a2 a1^-1 a1^-1"];
    for w in words {
        let letters: Vec<Letter> = w.split_whitespace().map(|l| Letter::parse(l, 2).unwrap()).collect();
        let x = g.walk(&letters).unwrap();
        for z in [0.05, 0.1] {
            for alpha in [0.0, 0.4] {
                let s = two_point(g, z, &x, alpha, 8, B).unwrap();
                let closed = tree_two_point(g, z, &x, alpha).unwrap();
                assert!((s.value - closed).abs() < 1e-12 * closed.max(1e-300) + 1e-300);
                // exact already at n = |x|
                let at = two_point(g, z, &x, alpha, letters.len(), B).unwrap();
                assert_eq!(at.value, s.value);
            }
        }
    }
}

#[test]
fn susceptibility_is_sum_of_two_point_functions() {
    let g = Graph::lattice(2).unwrap();
    let n_max = 6;
    let census = SawCensus::new(g, n_max, B).unwrap();
    for z in [0.1f64, 0.3] {
        let mut by_points = 0.0;
        for x in -6i32..=6 {
            for y in -6i32..=6 {
                if x.abs() + y.abs() <= 6 {
                    by_points += two_point(g, z, &g.point(&[x, y]).unwrap(), 0.0, n_max, B).unwrap().value;
                }
            }
        }
        let chi0: f64 = (0..=n_max).map(|n| z.powi(n as i32) * census.count_u64(n) as f64).sum();
        assert!((by_points - chi0).abs() < 1e-12 * chi0);
    }
    // term by term
    for n in 0..=n_max {
        let total: u64 = census.endpoints(n).unwrap().iter().map(|(_, c)| c).sum();
        assert_eq!(total, census.count_u64(n));
    }
}

#[test]
fn partial_sums_grow_with_truncation() {
    let g = Graph::lattice(2).unwrap();
    let x = g.point(&[1, 1]).unwrap();
    let values: Vec<f64> = (0..=8).map(|n| two_point(g, 0.2, &x, 0.0, n, B).unwrap().value).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
    let planes: Vec<f64> = (1..=8).map(|n| plane_generating(2, 0.2, 2, n, B).unwrap().value).collect();
    assert!(planes.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn mass_decreases_in_z() {
    let grid = [0.1, 0.15, 0.2, 0.25];
    let masses: Vec<f64> = grid.iter().map(|z| mass_estimate(2, *z, 4, 10, B).unwrap().sup_estimate).collect();
    assert!(masses.windows(2).all(|w| w[1] <= w[0]), "{masses:?}");
}

#[test]
fn tree_mass_is_constant_in_plane_distance() {
    let g = Graph::tree(3).unwrap();
    let a = Letter::parse("a1", 3).unwrap();
    for z in [0.05, 0.1] {
        let per_l: Vec<f64> = (1..=5)
            .map(|l| {
                let x = g.walk(&vec![a; l]).unwrap();
                -tree_two_point(g, z, &x, 0.2).unwrap().ln() / l as f64
            })
            .collect();
        for m in per_l {
            assert!((m + (z * 0.2f64.exp()).ln()).abs() < 1e-12);
        }
    }
}
