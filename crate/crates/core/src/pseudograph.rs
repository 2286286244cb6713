//! α-transition graphs on the grid and the pseudo-orbit counts built on them.
//!
//! Edge i -> j at step k means |f_k(p_i) - p_j| < α, so every path is a grid α-pseudo-orbit.

use std::fmt::Write as _;
use std::ops::Range;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rand::Rng;
use rayon::prelude::*;

use crate::bowen::BowenParams;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::growth::{fit_growth, EntropyEstimate, EstimateParams, GrowthSeries};
use crate::recurrence::is_chain_transitive;
use crate::systems::{MapSequence, PiecewiseLinearMap};

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 100_000;

fn check_alpha(alpha: f64, grid: &Grid) -> Result<()> {
    if !(alpha.is_finite() && alpha > grid.spacing() / 2.0) {
        return Err(Error::Config(format!(
            "alpha = {alpha} must exceed half the grid spacing ({})",
            grid.spacing() / 2.0
        )));
    }
    Ok(())
}

/// One-step α-transition relation at time k; each adjacency list is a contiguous window.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionGraph {
    step: usize,
    alpha: f64,
    grid: Grid,
    windows: Vec<(u32, u32)>,
}

impl TransitionGraph {
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn targets(&self, i: usize) -> Range<usize> {
        let (lo, hi) = self.windows[i];
        lo as usize..hi as usize + 1
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.targets(i).len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.targets(i).contains(&j)
    }

    pub fn edge_count(&self) -> usize {
        (0..self.windows.len()).map(|i| self.out_degree(i)).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.windows.len()).flat_map(move |i| self.targets(i).map(move |j| (i, j)))
    }

    /// Text export: a `step alpha` header line, then one `src dst` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.step, self.alpha);
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}").unwrap();
        }
        out
    }
}

pub fn build_transition_graph(
    f: &MapSequence,
    k: usize,
    alpha: f64,
    grid: &Grid,
) -> Result<TransitionGraph> {
    check_alpha(alpha, grid)?;
    let map = f.map(k)?;
    let windows = (0..grid.size())
        .into_par_iter()
        .map(|i| {
            let y = map.eval(grid.center(i));
            // The nearest centre is always within spacing/2 < α; the fallback only absorbs round-off.
            let (lo, hi) = grid.open_window(y, alpha).unwrap_or_else(|| {
                let c = grid.nearest(y);
                (c, c)
            });
            (lo as u32, hi as u32)
        })
        .collect();
    Ok(TransitionGraph {
        step: k,
        alpha,
        grid: *grid,
        windows,
    })
}

/// Transition graphs for every distinct phase: q of them when periodic, the horizon when finite.
pub fn phase_graphs(f: &MapSequence, alpha: f64, grid: &Grid) -> Result<Vec<TransitionGraph>> {
    (1..=f.phase_count())
        .map(|k| build_transition_graph(f, k, alpha, grid))
        .collect()
}

/// A forward grid pseudo-orbit starting at time `start_step`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrbit {
    pub alpha: f64,
    pub start_step: usize,
    pub grid: Grid,
    pub nodes: Vec<usize>,
}

impl PseudoOrbit {
    pub fn centers(&self) -> Vec<f64> {
        self.nodes.iter().map(|&i| self.grid.center(i)).collect()
    }

    /// True when every consecutive pair satisfies |f_k(p_a) - p_b| < α.
    pub fn is_consistent(&self, f: &MapSequence) -> Result<bool> {
        if self.nodes.iter().any(|&i| i >= self.grid.size()) {
            return Ok(false);
        }
        for (k, w) in self.nodes.windows(2).enumerate() {
            let m = f.map(self.start_step + k)?;
            let y = m.eval(self.grid.center(w[0]));
            if (y - self.grid.center(w[1])).abs() >= self.alpha {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Draws a pseudo-orbit of `len` nodes by choosing a uniformly random α-successor each step.
pub fn random_pseudo_orbit<R: Rng>(
    f: &MapSequence,
    alpha: f64,
    grid: &Grid,
    len: usize,
    rng: &mut R,
) -> Result<PseudoOrbit> {
    check_alpha(alpha, grid)?;
    if len == 0 {
        return Err(Error::Config(
            "pseudo-orbit length must be at least 1".into(),
        ));
    }
    f.check_window(1, len - 1)?;
    let mut nodes = Vec::with_capacity(len);
    let mut i = rng.random_range(0..grid.size());
    nodes.push(i);
    for k in 1..len {
        let y = f.map(k)?.eval(grid.center(i));
        let (lo, hi) = grid.open_window(y, alpha).unwrap_or_else(|| {
            let c = grid.nearest(y);
            (c, c)
        });
        i = rng.random_range(lo..=hi);
        nodes.push(i);
    }
    Ok(PseudoOrbit {
        alpha,
        start_step: 1,
        grid: *grid,
        nodes,
    })
}

/// Phase-lifted graph on (node, phase) pairs. Periodic systems wrap phase q back to 0;
/// finite systems get phases 0..=horizon with no wrap.
#[derive(Debug, Clone)]
pub struct LiftedGraph {
    grid: Grid,
    layers: Vec<TransitionGraph>,
    wrap: bool,
}

impl LiftedGraph {
    pub fn new(f: &MapSequence, alpha: f64, grid: &Grid) -> Result<Self> {
        Ok(Self {
            grid: *grid,
            layers: phase_graphs(f, alpha, grid)?,
            wrap: f.is_periodic(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn phases(&self) -> usize {
        if self.wrap {
            self.layers.len()
        } else {
            self.layers.len() + 1
        }
    }

    pub fn node_count(&self) -> usize {
        self.phases() * self.grid.size()
    }

    pub fn index(&self, x: usize, phase: usize) -> usize {
        phase * self.grid.size() + x
    }

    pub fn split(&self, v: usize) -> (usize, usize) {
        (v % self.grid.size(), v / self.grid.size())
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, m) = self.split(v);
        let next = if m < self.layers.len() {
            let to = if self.wrap {
                (m + 1) % self.layers.len()
            } else {
                m + 1
            };
            Some((self.layers[m].targets(x), to * self.grid.size()))
        } else {
            None
        };
        next.into_iter()
            .flat_map(|(r, base)| r.map(move |j| base + j))
    }

    pub fn to_petgraph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.node_count(), 0);
        for _ in 0..self.node_count() {
            g.add_node(());
        }
        for v in 0..self.node_count() {
            for t in self.successors(v) {
                g.add_edge(NodeIndex::new(v), NodeIndex::new(t), ());
            }
        }
        g
    }

    /// Strongly connected components, sinks first.
    pub fn components(&self) -> Vec<Vec<usize>> {
        tarjan_scc(&self.to_petgraph())
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(NodeIndex::index).collect();
                c.sort_unstable();
                c
            })
            .collect()
    }

    /// True when the component carries a cycle (more than one node, or a self-loop).
    pub fn is_cyclic_component(&self, comp: &[usize]) -> bool {
        comp.len() > 1 || self.successors(comp[0]).any(|t| t == comp[0])
    }
}

/// The per-phase 0/1 matrices A_1, ..., A_q of a periodic system.
#[derive(Debug, Clone)]
pub struct PathCountMatrix {
    period: usize,
    matrices: Vec<TransitionGraph>,
}

impl PathCountMatrix {
    pub fn new(f: &MapSequence, alpha: f64, grid: &Grid) -> Result<Self> {
        let period = f.period().ok_or_else(|| {
            Error::Config("periodic pseudo-orbits need a periodic sequence".into())
        })?;
        Ok(Self {
            period,
            matrices: phase_graphs(f, alpha, grid)?,
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn matrices(&self) -> &[TransitionGraph] {
        &self.matrices
    }

    /// trace((A_1 ... A_q)^{n/q}) for each requested n, which must all be multiples of q.
    pub fn traces(&self, ns: &[usize]) -> Result<Vec<BigUint>> {
        for &n in ns {
            if n == 0 || n % self.period != 0 {
                return Err(Error::UnsupportedLength {
                    n,
                    period: self.period,
                });
            }
        }
        let n_max = ns.iter().copied().max().unwrap_or(0);
        let size = self.matrices[0].grid().size();
        let per_start: Vec<Vec<BigUint>> = (0..size)
            .into_par_iter()
            .map(|s| {
                let returns = closed_walks_u128(&self.matrices, s, n_max)
                    .map(|v| v.into_iter().map(BigUint::from).collect())
                    .unwrap_or_else(|| closed_walks_big(&self.matrices, s, n_max));
                ns.iter().map(|&n| returns[n].clone()).collect()
            })
            .collect();
        let mut totals = vec![BigUint::zero(); ns.len()];
        for row in per_start {
            for (t, c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        Ok(totals)
    }

    /// Spectral radius of the period product A_1 ... A_q.
    pub fn spectral_radius(&self) -> Result<SpectralRadius> {
        let lifted = LiftedGraph {
            grid: *self.matrices[0].grid(),
            layers: self.matrices.clone(),
            wrap: true,
        };
        let lifted_rho = lifted_spectral_radius(&lifted)?;
        Ok(SpectralRadius {
            rho: lifted_rho.rho.powi(self.period as i32),
            lifted_rho: lifted_rho.rho,
            iterations: lifted_rho.iterations,
        })
    }
}

/// Walks from `start` that sit back at `start` after each length 0..=n_max; None on overflow.
fn closed_walks_u128(layers: &[TransitionGraph], start: usize, n_max: usize) -> Option<Vec<u128>> {
    let size = layers[0].grid().size();
    let mut cur = vec![0u128; size];
    let mut next = vec![0u128; size];
    cur[start] = 1;
    let (mut lo, mut hi) = (start, start);
    let mut out = vec![0u128; n_max + 1];
    out[0] = 1;
    for k in 0..n_max {
        let g = &layers[k % layers.len()];
        let (mut nlo, mut nhi) = (usize::MAX, 0);
        for (i, &c) in cur.iter().enumerate().take(hi + 1).skip(lo) {
            if c == 0 {
                continue;
            }
            let t = g.targets(i);
            nlo = nlo.min(t.start);
            nhi = nhi.max(t.end - 1);
            for j in t {
                next[j] = next[j].checked_add(c)?;
            }
        }
        cur[lo..=hi].iter_mut().for_each(|c| *c = 0);
        std::mem::swap(&mut cur, &mut next);
        lo = nlo;
        hi = nhi;
        out[k + 1] = cur[start];
    }
    Some(out)
}

fn closed_walks_big(layers: &[TransitionGraph], start: usize, n_max: usize) -> Vec<BigUint> {
    let size = layers[0].grid().size();
    let mut cur = vec![BigUint::zero(); size];
    cur[start] = BigUint::one();
    let mut out = vec![BigUint::one()];
    for k in 0..n_max {
        let g = &layers[k % layers.len()];
        let mut next = vec![BigUint::zero(); size];
        for (i, c) in cur.iter().enumerate() {
            if !c.is_zero() {
                for j in g.targets(i) {
                    next[j] += c;
                }
            }
        }
        cur = next;
        out.push(cur[start].clone());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRadius {
    /// Spectral radius of the period product.
    pub rho: f64,
    /// Spectral radius of the lifted graph; rho = lifted_rho^q.
    pub lifted_rho: f64,
    pub iterations: usize,
}

struct LiftedRho {
    rho: f64,
    iterations: usize,
}

/// Maximum over cyclic components of the Perron root, by power iteration on (L_C + I)
/// with Collatz-Wielandt bracketing.
fn lifted_spectral_radius(lifted: &LiftedGraph) -> Result<LiftedRho> {
    let comps = lifted.components();
    let mut comp_of = vec![usize::MAX; lifted.node_count()];
    for (c, nodes) in comps.iter().enumerate() {
        for &v in nodes {
            comp_of[v] = c;
        }
    }
    let mut best = 0.0f64;
    let mut iterations = 0usize;
    for (c, nodes) in comps.iter().enumerate() {
        if !lifted.is_cyclic_component(nodes) {
            continue;
        }
        let local: std::collections::HashMap<usize, usize> =
            nodes.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let adj: Vec<Vec<usize>> = nodes
            .iter()
            .map(|&v| {
                lifted
                    .successors(v)
                    .filter(|t| comp_of[*t] == c)
                    .map(|t| local[&t])
                    .collect()
            })
            .collect();
        // Row sums bound the root from above; skip components that cannot beat the best.
        let max_deg = adj.iter().map(Vec::len).max().unwrap_or(0) as f64;
        if max_deg <= best {
            continue;
        }
        let mut v = vec![1.0f64; nodes.len()];
        let mut w = vec![0.0f64; nodes.len()];
        let mut converged = None;
        for it in 1..=POWER_MAX_ITER {
            w.copy_from_slice(&v);
            for (u, targets) in adj.iter().enumerate() {
                for &t in targets {
                    w[t] += v[u];
                }
            }
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (a, b) in w.iter().zip(&v) {
                let r = a / b;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            if hi - lo <= POWER_TOL * hi {
                converged = Some(((lo + hi) / 2.0 - 1.0, it));
                break;
            }
            let scale = w.iter().copied().fold(0.0, f64::max);
            for (a, b) in v.iter_mut().zip(&w) {
                *a = b / scale;
            }
        }
        let (rho, it) = converged.ok_or(Error::NoConvergence {
            iterations: POWER_MAX_ITER,
        })?;
        iterations = iterations.max(it);
        best = best.max(rho);
    }
    Ok(LiftedRho {
        rho: best,
        iterations,
    })
}

fn check_pseudo_params(eps: f64, alpha: f64, grid: &Grid) -> Result<()> {
    check_alpha(alpha, grid)?;
    if !(eps >= 2.0 * grid.spacing()) {
        return Err(Error::Config(format!(
            "epsilon = {eps} must be at least twice the grid spacing ({})",
            2.0 * grid.spacing()
        )));
    }
    Ok(())
}

/// Coarse block of a grid centre for a partition of width ε shifted by `offset`.
fn block_index(p: f64, eps: f64, offset: f64) -> usize {
    if offset == 0.0 {
        (p / eps).floor() as usize
    } else if p < offset {
        0
    } else {
        ((p - offset) / eps).floor() as usize + 1
    }
}

/// Number of coarse paths with 1..=n_max blocks for one partition offset; entry n-1 holds length n.
fn coarse_path_counts(
    graphs: &[TransitionGraph],
    periodic: bool,
    grid: &Grid,
    eps: f64,
    offset: f64,
    n_max: usize,
) -> Vec<BigUint> {
    let raw: Vec<usize> = (0..grid.size())
        .map(|i| block_index(grid.center(i), eps, offset))
        .collect();
    let mut rank = vec![0usize; grid.size()];
    let mut blocks = 0usize;
    for i in 0..grid.size() {
        if i > 0 && raw[i] != raw[i - 1] {
            blocks += 1;
        }
        rank[i] = blocks;
    }
    let blocks = blocks + 1;
    let coarse: Vec<Vec<Vec<usize>>> = graphs
        .iter()
        .map(|g| {
            let mut hit = vec![vec![false; blocks]; blocks];
            for i in 0..grid.size() {
                let t = g.targets(i);
                hit[rank[i]][rank[t.start]..=rank[t.end - 1]].fill(true);
            }
            hit.into_iter()
                .map(|row| {
                    row.into_iter()
                        .enumerate()
                        .filter(|(_, h)| *h)
                        .map(|(b, _)| b)
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut cur = vec![BigUint::one(); blocks];
    let mut out = Vec::with_capacity(n_max);
    out.push(BigUint::from(blocks));
    for k in 1..n_max {
        let idx = if periodic {
            (k - 1) % graphs.len()
        } else {
            k - 1
        };
        let mut next = vec![BigUint::zero(); blocks];
        for (a, targets) in coarse[idx].iter().enumerate() {
            for &b in targets {
                next[b] += &cur[a];
            }
        }
        cur = next;
        out.push(cur.iter().sum());
    }
    out
}

/// Partition offsets, as fractions of ε, whose coarse counts are minimised over.
pub const COARSE_OFFSETS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];

/// c_n for n = 1..=n_max: coarse path counts of the ε-blocked transition graph, minimised over
/// partition offsets (each offset alone is a valid class count).
pub fn pseudo_orbit_class_counts(
    f: &MapSequence,
    n_max: usize,
    eps: f64,
    alpha: f64,
    grid: &Grid,
) -> Result<Vec<BigUint>> {
    check_pseudo_params(eps, alpha, grid)?;
    if n_max == 0 {
        return Err(Error::Domain("path length must be at least 1".into()));
    }
    f.check_window(1, n_max - 1)?;
    let steps = if f.is_periodic() {
        f.phase_count()
    } else {
        (n_max - 1).max(1)
    };
    let graphs: Vec<TransitionGraph> = (1..=steps)
        .map(|k| build_transition_graph(f, k, alpha, grid))
        .collect::<Result<_>>()?;
    let per_offset: Vec<Vec<BigUint>> = COARSE_OFFSETS
        .par_iter()
        .map(|&o| coarse_path_counts(&graphs, f.is_periodic(), grid, eps, o * eps, n_max))
        .collect();
    Ok((0..n_max)
        .map(|k| per_offset.iter().map(|c| &c[k]).min().unwrap().clone())
        .collect())
}

pub fn count_pseudo_orbit_classes(
    f: &MapSequence,
    n: usize,
    eps: f64,
    alpha: f64,
    grid: &Grid,
) -> Result<BigUint> {
    Ok(pseudo_orbit_class_counts(f, n, eps, alpha, grid)?
        .pop()
        .unwrap())
}

/// Growth rate of c_n over the window.
pub fn pseudo_entropy(
    f: &MapSequence,
    params: &BowenParams,
    alpha: f64,
) -> Result<EntropyEstimate> {
    params.validate()?;
    let grid = params.grid()?;
    let counts = pseudo_orbit_class_counts(f, params.n_max, params.epsilon, alpha, &grid)?;
    let series = GrowthSeries::from_counts(
        (params.n_min..=params.n_max).map(|n| (n, counts[n - 1].clone())),
    )?;
    Ok(fit_growth(
        series,
        EstimateParams {
            epsilon: Some(params.epsilon),
            alpha: Some(alpha),
            grid_size: Some(params.grid_size),
            n_min: params.n_min,
            n_max: params.n_max,
        },
    ))
}

/// p_n = trace((A_1 ... A_q)^{n/q}).
pub fn count_periodic_pseudo_orbits(
    f: &MapSequence,
    n: usize,
    alpha: f64,
    grid: &Grid,
) -> Result<BigUint> {
    check_alpha(alpha, grid)?;
    let m = PathCountMatrix::new(f, alpha, grid)?;
    Ok(m.traces(&[n])?.pop().unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicEntropy {
    /// ln ρ(A_1 ... A_q) / q, in nats.
    pub value: f64,
    pub spectral: SpectralRadius,
    /// Regression of ln p_n over the multiples of q in the window.
    pub trace_fit: EntropyEstimate,
    pub transitive: bool,
    pub warnings: Vec<String>,
}

impl PeriodicEntropy {
    pub fn trace_gap(&self) -> f64 {
        (self.value - self.trace_fit.value).abs()
    }
}

pub fn periodic_pseudo_entropy(
    f: &MapSequence,
    alpha: f64,
    grid: &Grid,
    n_min: usize,
    n_max: usize,
) -> Result<PeriodicEntropy> {
    check_alpha(alpha, grid)?;
    let m = PathCountMatrix::new(f, alpha, grid)?;
    let q = m.period();
    let ns: Vec<usize> = (n_min.max(1)..=n_max).filter(|n| n % q == 0).collect();
    if ns.len() < 2 {
        return Err(Error::Config(format!(
            "window [{n_min}, {n_max}] holds fewer than two multiples of the period {q}"
        )));
    }
    let traces = m.traces(&ns)?;
    let mut series = GrowthSeries::new();
    for (&n, t) in ns.iter().zip(traces) {
        if !t.is_zero() {
            series.push(n, t)?;
        }
    }
    let params = EstimateParams {
        epsilon: None,
        alpha: Some(alpha),
        grid_size: Some(grid.size()),
        n_min,
        n_max,
    };
    let trace_fit = fit_growth(series, params);
    let spectral = m.spectral_radius()?;
    let value = if spectral.lifted_rho > 0.0 {
        spectral.lifted_rho.ln().max(0.0)
    } else {
        0.0
    };
    let transitive = is_chain_transitive(f, alpha, grid)?;
    let mut warnings = Vec::new();
    if !transitive {
        warnings.push(format!(
            "system is not chain transitive at alpha = {alpha}; H_p = h is not guaranteed"
        ));
    }
    Ok(PeriodicEntropy {
        value,
        spectral,
        trace_fit,
        transitive,
        warnings,
    })
}

/// A point whose exact orbit ε-traces a pseudo-orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowWitness {
    /// Exact rational tracing point.
    pub point: BigRational,
    /// Max deviation of the exact orbit of `point` from the pseudo-orbit's centres.
    pub deviation: f64,
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// A piecewise-linear map with its breakpoints and values read as exact rationals.
struct ExactMap {
    bps: Vec<BigRational>,
    vals: Vec<BigRational>,
}

impl ExactMap {
    fn new(m: &PiecewiseLinearMap) -> Self {
        Self {
            bps: m.breakpoints().iter().map(|&x| rational(x)).collect(),
            vals: m.values().iter().map(|&x| rational(x)).collect(),
        }
    }

    fn eval(&self, x: &BigRational) -> BigRational {
        let j = self.bps[1..]
            .partition_point(|b| b < x)
            .min(self.bps.len() - 2);
        let (b0, b1, v0, v1) = (
            &self.bps[j],
            &self.bps[j + 1],
            &self.vals[j],
            &self.vals[j + 1],
        );
        v0 + (x - b0) * (v1 - v0) / (b1 - b0)
    }

    /// Closed preimage of the closed interval [a, b], as sorted disjoint closed intervals.
    fn preimage(&self, a: &BigRational, b: &BigRational) -> Vec<(BigRational, BigRational)> {
        let mut pieces = Vec::new();
        for j in 0..self.bps.len() - 1 {
            let (b0, b1, v0, v1) = (
                &self.bps[j],
                &self.bps[j + 1],
                &self.vals[j],
                &self.vals[j + 1],
            );
            if v0 == v1 {
                if a <= v0 && v0 <= b {
                    pieces.push((b0.clone(), b1.clone()));
                }
                continue;
            }
            let lo = a.max(v0.min(v1));
            let hi = b.min(v0.max(v1));
            if lo > hi {
                continue;
            }
            let x = |y: &BigRational| b0 + (y - v0) * (b1 - b0) / (v1 - v0);
            let (x_lo, x_hi) = (x(lo), x(hi));
            pieces.push(if x_lo <= x_hi {
                (x_lo, x_hi)
            } else {
                (x_hi, x_lo)
            });
        }
        merge_closed(pieces)
    }
}

fn merge_closed(mut items: Vec<(BigRational, BigRational)>) -> Vec<(BigRational, BigRational)> {
    items.sort_by(|x, y| x.0.cmp(&y.0));
    let mut out: Vec<(BigRational, BigRational)> = Vec::with_capacity(items.len());
    for (a, b) in items {
        match out.last_mut() {
            Some(last) if a <= last.1 => {
                if b > last.1 {
                    last.1 = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

/// Exact tracing search: pulls closed tubes of radius slightly below ε back through the maps
/// in rational arithmetic, so the answer does not depend on floating-point resolution even
/// when the tracing set is far narrower than an f64 ulp.
pub fn shadowing_witness(
    f: &MapSequence,
    pseudo: &PseudoOrbit,
    eps: f64,
) -> Result<Option<ShadowWitness>> {
    if pseudo.nodes.is_empty() || !(eps > 0.0) {
        return Ok(None);
    }
    let len = pseudo.nodes.len();
    f.check_window(pseudo.start_step, len - 1)?;
    let centers: Vec<BigRational> = pseudo.centers().into_iter().map(rational).collect();
    let maps: Vec<ExactMap> = (0..len - 1)
        .map(|k| Ok(ExactMap::new(f.map(pseudo.start_step + k)?)))
        .collect::<Result<_>>()?;
    let radius =
        rational(eps) * (BigRational::one() - BigRational::new(1.into(), (1u64 << 40).into()));
    let (zero, one) = (BigRational::zero(), BigRational::one());
    let tube = |c: &BigRational| {
        (
            (c - &radius).max(zero.clone()),
            (c + &radius).min(one.clone()),
        )
    };
    let mut set = vec![tube(&centers[len - 1])];
    for k in (0..len - 1).rev() {
        let (lo, hi) = tube(&centers[k]);
        let mut pulled = Vec::new();
        for (a, b) in &set {
            for (c, d) in maps[k].preimage(a, b) {
                let (c, d) = (c.max(lo.clone()), d.min(hi.clone()));
                if c <= d {
                    pulled.push((c, d));
                }
            }
        }
        set = merge_closed(pulled);
        if set.is_empty() {
            return Ok(None);
        }
    }
    let c0 = &centers[0];
    let point = set
        .iter()
        .map(|(a, b)| {
            if a <= c0 && c0 <= b {
                c0.clone()
            } else if c0 < a {
                a.clone()
            } else {
                b.clone()
            }
        })
        .min_by(|x, y| (x - c0).abs().cmp(&(y - c0).abs()))
        .expect("nonempty set");
    let mut x = point.clone();
    let mut worst = (&x - c0).abs();
    for (k, c) in centers.iter().enumerate().skip(1) {
        x = maps[k - 1].eval(&x);
        worst = worst.max((&x - c).abs());
    }
    let deviation = worst.to_f64().unwrap_or(f64::INFINITY);
    debug_assert!(worst < rational(eps));
    Ok(Some(ShadowWitness { point, deviation }))
}

/// Tracing point rounded to f64. For expanding maps the f64 orbit of the rounded point can
/// drift from the exact one; use [`shadowing_witness`] for the exact point.
pub fn shadowing_trace(f: &MapSequence, pseudo: &PseudoOrbit, eps: f64) -> Result<Option<f64>> {
    Ok(shadowing_witness(f, pseudo, eps)?.map(|w| w.point.to_f64().unwrap_or(f64::NAN)))
}

/// Max deviation of the f64 orbit of y from the pseudo-orbit's centres.
pub fn tracing_deviation(f: &MapSequence, pseudo: &PseudoOrbit, y: f64) -> Result<f64> {
    let centers = pseudo.centers();
    f.check_window(pseudo.start_step, centers.len().saturating_sub(1))?;
    let mut x = y;
    let mut worst = (x - centers[0]).abs();
    for (k, c) in centers.iter().enumerate().skip(1) {
        x = f.map(pseudo.start_step + k - 1)?.eval(x);
        worst = worst.max((x - c).abs());
    }
    Ok(worst)
}
