//! Exhaustive brute-force counterparts of the graph algorithms, written against the map
//! definitions directly rather than the library's graph structures.
#![allow(dead_code)]

use std::collections::VecDeque;

use nds_entropy::bowen::TIE_EPS;
use nds_entropy::{Grid, MapSequence};

/// Ties closer than this many grid units count as misses, matching the strict inequality.
pub const TIE_UNITS: f64 = 1e-9;

pub fn edge(f: &MapSequence, step: usize, alpha: f64, grid: &Grid, i: usize, j: usize) -> bool {
    let y = f.map(step).unwrap().eval(grid.center(i));
    let n = grid.size() as f64;
    (y * n - (j as f64 + 0.5)).abs() < alpha * n - TIE_UNITS
}

/// Successor lists per step, found by testing every ordered pair.
pub fn brute_edges(f: &MapSequence, steps: usize, alpha: f64, grid: &Grid) -> Vec<Vec<Vec<usize>>> {
    (1..=steps)
        .map(|k| {
            (0..grid.size())
                .map(|i| {
                    (0..grid.size())
                        .filter(|&j| edge(f, k, alpha, grid, i, j))
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn count_closed(
    adj: &[Vec<Vec<usize>>],
    start: usize,
    at: usize,
    depth: usize,
    n: usize,
) -> u64 {
    let q = adj.len();
    let succ = &adj[depth % q][at];
    if depth + 1 == n {
        return succ.contains(&start) as u64;
    }
    succ.iter()
        .map(|&j| count_closed(adj, start, j, depth + 1, n))
        .sum()
}

/// x is chain recurrent when some start phase admits a nonempty chain back to x.
pub fn brute_chain_recurrent(f: &MapSequence, alpha: f64, grid: &Grid) -> Vec<usize> {
    let size = grid.size();
    let (layers, wrap) = match f.period() {
        Some(q) => (q, true),
        None => (f.horizon().unwrap(), false),
    };
    let phases = if wrap { layers } else { layers + 1 };
    let adj = brute_edges(f, layers, alpha, grid);
    let next_phase = |m: usize| if wrap { (m + 1) % layers } else { m + 1 };
    (0..size)
        .filter(|&x| {
            (0..phases).any(|m0| {
                let mut seen = vec![false; size * phases];
                let mut queue = VecDeque::from([(x, m0)]);
                while let Some((v, m)) = queue.pop_front() {
                    if m >= layers {
                        continue;
                    }
                    let m2 = next_phase(m);
                    for &w in &adj[m][v] {
                        if w == x {
                            return true;
                        }
                        if !seen[m2 * size + w] {
                            seen[m2 * size + w] = true;
                            queue.push_back((w, m2));
                        }
                    }
                }
                false
            })
        })
        .collect()
}

pub fn orbit(f: &MapSequence, x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![x];
    for k in 1..n {
        out.push(f.map(k).unwrap().eval(out[k - 1]));
    }
    out
}

/// Size of the largest subset of grid centres that is pairwise (n, ε)-separated,
/// by checking every subset.
pub fn brute_max_separated(f: &MapSequence, n: usize, eps: f64, grid: &Grid) -> usize {
    let size = grid.size();
    assert!(size <= 20);
    let orbits: Vec<Vec<f64>> = (0..size).map(|i| orbit(f, grid.center(i), n)).collect();
    let sep: Vec<u32> = (0..size)
        .map(|i| {
            (0..size)
                .filter(|&j| {
                    let d = orbits[i]
                        .iter()
                        .zip(&orbits[j])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    d > eps + TIE_EPS
                })
                .fold(0u32, |m, j| m | (1 << j))
        })
        .collect();
    let mut best = 0;
    for mask in 1u32..(1 << size) {
        let ok = (0..size)
            .filter(|i| mask >> i & 1 == 1)
            .all(|i| mask & !sep[i] & !(1 << i) == 0);
        if ok {
            best = best.max(mask.count_ones() as usize);
        }
    }
    best
}
