//! Bowen-metric entropy: (n, ε)-separated and spanning sets on a grid of candidate points.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::growth::{fit_growth, EntropyEstimate, EstimateParams, GrowthSeries};
use crate::systems::MapSequence;

/// Distances within this of ε count as ties, i.e. not separated.
pub const TIE_EPS: f64 = 1e-12;

/// Candidate sets up to this size get an exact maximum separated set.
pub const EXACT_SEPARATED_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BowenParams {
    pub epsilon: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub grid_size: usize,
}

impl BowenParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0,1), got {}",
                self.epsilon
            )));
        }
        if self.n_min < 1 || self.n_max < self.n_min + 4 {
            return Err(Error::Config(format!(
                "window [{}, {}] needs n_min >= 1 and at least five lengths",
                self.n_min, self.n_max
            )));
        }
        Grid::new(self.grid_size)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_size)
    }

    fn record(&self) -> EstimateParams {
        EstimateParams {
            epsilon: Some(self.epsilon),
            alpha: None,
            grid_size: Some(self.grid_size),
            n_min: self.n_min,
            n_max: self.n_max,
        }
    }
}

/// d_n(x, y) = max_{0 <= j < n} |F_[1,j](x) - F_[1,j](y)|.
pub fn bowen_distance(f: &MapSequence, x: f64, y: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("the Bowen metric needs n >= 1".into()));
    }
    for p in [x, y] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("point {p} lies outside [0,1]")));
        }
    }
    f.check_window(1, n - 1)?;
    let (mut a, mut b) = (x, y);
    let mut d = (a - b).abs();
    for k in 1..n {
        let m = f.map(k)?;
        a = m.eval(a);
        b = m.eval(b);
        d = d.max((a - b).abs());
    }
    Ok(d)
}

/// Orbits of a fixed set of points, row-major with `len` coordinates per point.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    points: Vec<f64>,
    len: usize,
    data: Vec<f64>,
}

impl OrbitTable {
    /// Records x, F_[1,1](x), ..., F_[1,len-1](x) for every point.
    pub fn new(f: &MapSequence, points: &[f64], len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Domain("orbit length must be at least 1".into()));
        }
        f.check_window(1, len - 1)?;
        let maps: Vec<_> = (1..len).map(|k| f.map(k)).collect::<Result<_>>()?;
        let data: Vec<f64> = points
            .par_iter()
            .flat_map_iter(|&x| {
                let mut row = Vec::with_capacity(len);
                let mut y = x;
                row.push(y);
                for m in &maps {
                    y = m.eval(y);
                    row.push(y);
                }
                row
            })
            .collect();
        Ok(Self {
            points: points.to_vec(),
            len,
            data,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.len..(i + 1) * self.len]
    }

    /// d_n between points i and j using the first n coordinates.
    pub fn distance(&self, i: usize, j: usize, n: usize) -> f64 {
        let (a, b) = (&self.row(i)[..n], &self.row(j)[..n]);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.len {
            return Err(Error::Domain(format!(
                "n = {n} outside the recorded length {}",
                self.len
            )));
        }
        Ok(())
    }

    /// Separated set over the recorded points (which must be ascending).
    pub fn separated(&self, n: usize, eps: f64) -> Result<Vec<usize>> {
        self.check(n)?;
        if self.points.len() <= EXACT_SEPARATED_LIMIT {
            return Ok(self.exact_separated(n, eps));
        }
        let mut witness: Vec<usize> = Vec::new();
        for i in 0..self.points.len() {
            let xi = self.points[i];
            let mut ok = true;
            for &w in witness.iter().rev() {
                if xi - self.points[w] > eps + TIE_EPS {
                    break;
                }
                if self.distance(i, w, n) <= eps + TIE_EPS {
                    ok = false;
                    break;
                }
            }
            if ok {
                witness.push(i);
            }
        }
        Ok(witness)
    }

    /// Maximum independent set of the conflict graph by branch and bound.
    fn exact_separated(&self, n: usize, eps: f64) -> Vec<usize> {
        let m = self.points.len();
        let mut conflict = vec![0u32; m];
        for i in 0..m {
            for j in i + 1..m {
                if self.distance(i, j, n) <= eps + TIE_EPS {
                    conflict[i] |= 1 << j;
                    conflict[j] |= 1 << i;
                }
            }
        }
        fn search(cand: u32, chosen: u32, best: &mut u32, conflict: &[u32]) {
            if cand == 0 {
                // Include-first search order: the first optimum found is lexicographically smallest.
                if chosen.count_ones() > best.count_ones() {
                    *best = chosen;
                }
                return;
            }
            if chosen.count_ones() + cand.count_ones() <= best.count_ones() {
                return;
            }
            let v = cand.trailing_zeros();
            let bit = 1u32 << v;
            search(
                cand & !bit & !conflict[v as usize],
                chosen | bit,
                best,
                conflict,
            );
            search(cand & !bit, chosen, best, conflict);
        }
        let all = (1u32 << m) - 1;
        let mut best = 0u32;
        search(all, 0, &mut best, &conflict);
        (0..m).filter(|&i| best >> i & 1 == 1).collect()
    }

    /// Greedy set cover: repeatedly take the point covering the most uncovered points.
    pub fn spanning(&self, n: usize, eps: f64) -> Result<Vec<usize>> {
        self.check(n)?;
        let m = self.points.len();
        let neighbours: Vec<Vec<usize>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let xi = self.points[i];
                let lo = self.points.partition_point(|&p| p < xi - eps - TIE_EPS);
                let hi = self.points.partition_point(|&p| p <= xi + eps + TIE_EPS);
                (lo..hi)
                    .filter(|&j| self.distance(i, j, n) <= eps + TIE_EPS)
                    .collect()
            })
            .collect();
        let mut covered = vec![false; m];
        let mut heap: BinaryHeap<(usize, Reverse<usize>)> = neighbours
            .iter()
            .enumerate()
            .map(|(i, nb)| (nb.len(), Reverse(i)))
            .collect();
        let mut remaining = m;
        let mut witness = Vec::new();
        while remaining > 0 {
            let (stale, Reverse(i)) = heap.pop().expect("uncovered points remain coverable");
            let fresh = neighbours[i].iter().filter(|&&j| !covered[j]).count();
            if fresh < stale {
                heap.push((fresh, Reverse(i)));
                continue;
            }
            for &j in &neighbours[i] {
                if !covered[j] {
                    covered[j] = true;
                    remaining -= 1;
                }
            }
            witness.push(i);
        }
        witness.sort_unstable();
        // A maximal separated set is itself spanning; keep whichever is smaller.
        let sep = self.separated(n, eps)?;
        Ok(if sep.len() < witness.len() {
            sep
        } else {
            witness
        })
    }
}

fn check_spacing(grid: &Grid, eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    if grid.spacing() >= eps / 4.0 {
        return Err(Error::Config(format!(
            "grid spacing {} must be below epsilon/4 = {}",
            grid.spacing(),
            eps / 4.0
        )));
    }
    Ok(())
}

/// Largest (n, ε)-separated subset of grid centres found; a lower bound for s_n(F, ε).
pub fn max_separated_count(
    f: &MapSequence,
    n: usize,
    eps: f64,
    grid: &Grid,
) -> Result<(usize, Vec<f64>)> {
    check_spacing(grid, eps)?;
    let table = OrbitTable::new(f, &grid.centers(), n)?;
    let w = table.separated(n, eps)?;
    Ok((w.len(), w.into_iter().map(|i| table.points[i]).collect()))
}

/// Small (n, ε)-spanning subset of grid centres: every centre lies within d_n <= ε of it.
pub fn min_spanning_count(
    f: &MapSequence,
    n: usize,
    eps: f64,
    grid: &Grid,
) -> Result<(usize, Vec<f64>)> {
    check_spacing(grid, eps)?;
    let table = OrbitTable::new(f, &grid.centers(), n)?;
    let w = table.spanning(n, eps)?;
    Ok((w.len(), w.into_iter().map(|i| table.points[i]).collect()))
}

/// Growth rate of separated-set counts over the window, using all grid centres.
pub fn entropy_estimate(f: &MapSequence, params: &BowenParams) -> Result<EntropyEstimate> {
    params.validate()?;
    let grid = params.grid()?;
    entropy_estimate_on(f, params, &(0..grid.size()).collect::<Vec<_>>())
}

/// As [`entropy_estimate`], with candidate points restricted to the given grid indices.
pub fn entropy_estimate_on(
    f: &MapSequence,
    params: &BowenParams,
    nodes: &[usize],
) -> Result<EntropyEstimate> {
    params.validate()?;
    let grid = params.grid()?;
    check_spacing(&grid, params.epsilon)?;
    let mut nodes = nodes.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    if nodes.is_empty() || *nodes.last().unwrap() >= grid.size() {
        return Err(Error::Config(
            "candidate nodes must be nonempty grid indices".into(),
        ));
    }
    let points: Vec<f64> = nodes.iter().map(|&i| grid.center(i)).collect();
    let table = OrbitTable::new(f, &points, params.n_max)?;
    let counts: Vec<(usize, usize)> = (params.n_min..=params.n_max)
        .into_par_iter()
        .map(|n| table.separated(n, params.epsilon).map(|w| (n, w.len())))
        .collect::<Result<_>>()?;
    let series = GrowthSeries::from_counts(counts.into_iter().map(|(n, c)| (n, c as u64)))?;
    Ok(fit_growth(series, params.record()))
}
