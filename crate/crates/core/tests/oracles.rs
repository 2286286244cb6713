//! Library results against exhaustive enumeration on small grids.

mod common;

use common::{brute_chain_recurrent, brute_edges, brute_max_separated, count_closed, orbit};
use nds_entropy::bowen::max_separated_count;
use nds_entropy::corpus::all_fixtures;
use nds_entropy::pseudograph::{build_transition_graph, count_periodic_pseudo_orbits};
use nds_entropy::recurrence::chain_recurrent_set;
use nds_entropy::systems::{fixed_point_count, lap_count};
use nds_entropy::{Error, Grid, MapSequence};
use num_bigint::BigUint;

fn count_paths(adj: &[Vec<Vec<usize>>], at: usize, depth: usize, n: usize) -> u64 {
    if depth + 1 == n {
        return 1;
    }
    adj[depth][at]
        .iter()
        .map(|&j| count_paths(adj, j, depth + 1, n))
        .sum()
}

#[test]
fn periodic_pseudo_orbits_match_closed_path_enumeration() {
    for fx in all_fixtures() {
        for size in [10, 20, 30] {
            let grid = Grid::new(size).unwrap();
            for factor in [0.75, 1.0, 1.5, 3.0] {
                let alpha = factor * grid.spacing();
                let Some(q) = fx.system.period() else {
                    assert!(matches!(
                        count_periodic_pseudo_orbits(&fx.system, 1, alpha, &grid),
                        Err(Error::Config(_))
                    ));
                    continue;
                };
                let adj = brute_edges(&fx.system, q, alpha, &grid);
                for n in (q..=6).step_by(q) {
                    let brute: u64 = (0..size).map(|s| count_closed(&adj, s, s, 0, n)).sum();
                    let got = count_periodic_pseudo_orbits(&fx.system, n, alpha, &grid).unwrap();
                    assert_eq!(
                        got,
                        BigUint::from(brute),
                        "{} N={size} α={factor}h n={n}",
                        fx.name
                    );
                }
            }
        }
    }
}

#[test]
fn transition_paths_match_pseudo_orbit_enumeration() {
    for fx in all_fixtures() {
        for size in [17, 50] {
            let grid = Grid::new(size).unwrap();
            for factor in [0.6, 1.0, 2.5] {
                let alpha = factor * grid.spacing();
                let adj = brute_edges(&fx.system, 5, alpha, &grid);
                let graphs: Vec<_> = (1..=5)
                    .map(|k| build_transition_graph(&fx.system, k, alpha, &grid).unwrap())
                    .collect();
                for (k, g) in graphs.iter().enumerate() {
                    for (i, want) in adj[k].iter().enumerate() {
                        let lib: Vec<usize> = g.targets(i).collect();
                        assert_eq!(
                            &lib,
                            want,
                            "{} N={size} step {} node {i}",
                            fx.name,
                            k + 1
                        );
                        for j in lib {
                            let y = fx.system.map(k + 1).unwrap().eval(grid.center(i));
                            assert!((y - grid.center(j)).abs() < alpha);
                        }
                    }
                }
                for n in 1..=6 {
                    let brute: u64 = (0..size).map(|s| count_paths(&adj, s, 0, n)).sum();
                    let mut cur = vec![1u64; size];
                    for g in graphs.iter().take(n - 1) {
                        let mut next = vec![0u64; size];
                        for (i, c) in cur.iter().enumerate() {
                            for j in g.targets(i) {
                                next[j] += c;
                            }
                        }
                        cur = next;
                    }
                    assert_eq!(cur.iter().sum::<u64>(), brute, "{} N={size} n={n}", fx.name);
                }
            }
        }
    }
}

#[test]
fn chain_recurrent_set_matches_return_search() {
    for fx in all_fixtures() {
        for size in [12, 30] {
            let grid = Grid::new(size).unwrap();
            for factor in [0.75, 1.5, 3.0] {
                let alpha = factor * grid.spacing();
                let got = chain_recurrent_set(&fx.system, alpha, &grid).unwrap();
                let brute = brute_chain_recurrent(&fx.system, alpha, &grid);
                assert_eq!(got, brute, "{} N={size} α={factor}h", fx.name);
            }
        }
    }
}

#[test]
fn max_separated_count_matches_subset_search() {
    for fx in all_fixtures() {
        for (size, eps_list) in [(12, vec![0.35, 0.45]), (18, vec![0.23, 0.3, 0.45])] {
            let grid = Grid::new(size).unwrap();
            for &eps in &eps_list {
                for n in 1..=6 {
                    let (got, witness) = max_separated_count(&fx.system, n, eps, &grid).unwrap();
                    assert_eq!(got, witness.len());
                    let brute = brute_max_separated(&fx.system, n, eps, &grid);
                    assert_eq!(got, brute, "{} N={size} ε={eps} n={n}", fx.name);
                }
            }
        }
    }
}

/// Sign changes of T^n(x) - x on a fine sample.
fn sampled_fixed_point_count(f: &MapSequence, n: usize, samples: usize) -> usize {
    let g = |x: f64| orbit(f, x, n + 1)[n] - x;
    let mut count = 0;
    let mut prev = g(0.0);
    if prev == 0.0 {
        count += 1;
    }
    for k in 1..=samples {
        let x = (k as f64 + 0.37) / (samples as f64 + 1.0);
        let v = g(x);
        if v == 0.0 || (prev != 0.0 && v.signum() != prev.signum()) {
            count += 1;
        }
        prev = v;
    }
    count
}

#[test]
fn tent_fixed_points_match_sampled_sign_changes() {
    let tent = nds_entropy::corpus::load_fixture("tent").unwrap().system;
    for n in 1..=8 {
        assert_eq!(fixed_point_count(&tent, n).unwrap(), 1 << n);
        assert_eq!(
            sampled_fixed_point_count(&tent, n, 1_000_000),
            1 << n,
            "n={n}"
        );
    }
    for n in 9..=16 {
        assert_eq!(fixed_point_count(&tent, n).unwrap(), 1 << n);
    }
}

/// Monotone pieces of x -> F_[1,n](x) counted from slope sign changes of sampled values.
fn sampled_laps(f: &MapSequence, n: usize, samples: usize) -> usize {
    let ys: Vec<f64> = (0..=samples)
        .map(|k| orbit(f, k as f64 / samples as f64, n + 1)[n])
        .collect();
    let mut laps = 1;
    let mut dir = 0i8;
    for w in ys.windows(2) {
        let d = (w[1] - w[0]).partial_cmp(&0.0).map_or(0, |o| o as i8);
        if d != 0 {
            if dir != 0 && d != dir {
                laps += 1;
            }
            dir = d;
        }
    }
    laps
}

#[test]
fn lap_counts_match_sampled_monotone_pieces() {
    for fx in all_fixtures() {
        for n in 1..=6 {
            let exact = lap_count(&fx.system, n).unwrap();
            assert_eq!(
                exact,
                sampled_laps(&fx.system, n, 1 << 16),
                "{} n={n}",
                fx.name
            );
        }
    }
}
