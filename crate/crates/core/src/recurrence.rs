//! Chain recurrence and mixing read off the phase-lifted α-transition graph.

use std::collections::HashSet;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::pseudograph::LiftedGraph;
use crate::systems::MapSequence;

/// Step budget per start node is this multiple of the grid size.
pub const MIXING_BUDGET_FACTOR: usize = 50;

/// Projected chain reachability: for each node x, the nodes y reachable from (x, m) by a
/// nonempty lifted path for some start phase m.
#[derive(Debug, Clone)]
pub struct ChainReach {
    reach: Vec<FixedBitSet>,
}

impl ChainReach {
    pub fn new(f: &MapSequence, alpha: f64, grid: &Grid) -> Result<Self> {
        let lifted = LiftedGraph::new(f, alpha, grid)?;
        Ok(Self::from_lifted(&lifted))
    }

    pub fn from_lifted(lifted: &LiftedGraph) -> Self {
        let size = lifted.grid().size();
        let comps = lifted.components();
        let mut comp_of = vec![0usize; lifted.node_count()];
        for (c, nodes) in comps.iter().enumerate() {
            for &v in nodes {
                comp_of[v] = c;
            }
        }
        // Components arrive sinks first, so successors are complete before they are read.
        let mut strict: Vec<FixedBitSet> = Vec::with_capacity(comps.len());
        let mut closed: Vec<FixedBitSet> = Vec::with_capacity(comps.len());
        for (c, nodes) in comps.iter().enumerate() {
            let mut r = FixedBitSet::with_capacity(size);
            let mut proj = FixedBitSet::with_capacity(size);
            for &v in nodes {
                proj.insert(lifted.split(v).0);
                for t in lifted.successors(v) {
                    let d = comp_of[t];
                    if d != c {
                        r.union_with(&closed[d]);
                    }
                }
            }
            if lifted.is_cyclic_component(nodes) {
                r.union_with(&proj);
            }
            let mut star = r.clone();
            star.union_with(&proj);
            strict.push(r);
            closed.push(star);
        }
        let mut reach = vec![FixedBitSet::with_capacity(size); size];
        for v in 0..lifted.node_count() {
            let (x, _) = lifted.split(v);
            reach[x].union_with(&strict[comp_of[v]]);
        }
        Self { reach }
    }

    pub fn reaches(&self, x: usize, y: usize) -> bool {
        self.reach[x].contains(y)
    }

    pub fn chain_recurrent(&self) -> Vec<usize> {
        (0..self.reach.len())
            .filter(|&x| self.reach[x].contains(x))
            .collect()
    }

    pub fn transitive(&self) -> bool {
        let size = self.reach.len();
        self.reach.iter().all(|r| r.count_ones(..) == size)
    }

    /// Chain classes: chain-recurrent nodes grouped by mutual reachability.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let cr = self.chain_recurrent();
        let mut assigned = vec![false; self.reach.len()];
        let mut out = Vec::new();
        for &x in &cr {
            if assigned[x] {
                continue;
            }
            let class: Vec<usize> = cr
                .iter()
                .copied()
                .filter(|&y| y == x || (self.reaches(x, y) && self.reaches(y, x)))
                .collect();
            for &y in &class {
                assigned[y] = true;
            }
            out.push(class);
        }
        out
    }
}

/// Nodes x with a nonempty α-chain from x back to x, started at any phase.
pub fn chain_recurrent_set(f: &MapSequence, alpha: f64, grid: &Grid) -> Result<Vec<usize>> {
    Ok(ChainReach::new(f, alpha, grid)?.chain_recurrent())
}

/// True when every node reaches every node (itself included) by a nonempty α-chain.
pub fn is_chain_transitive(f: &MapSequence, alpha: f64, grid: &Grid) -> Result<bool> {
    Ok(ChainReach::new(f, alpha, grid)?.transitive())
}

/// Compact text form of a sorted node list, e.g. `0-4,7,9-12`.
pub fn encode_ranges(nodes: &[usize]) -> String {
    let mut out = String::new();
    let mut k = 0;
    while k < nodes.len() {
        let start = nodes[k];
        let mut end = start;
        while k + 1 < nodes.len() && nodes[k + 1] == end + 1 {
            k += 1;
            end += 1;
        }
        if !out.is_empty() {
            out.push(',');
        }
        if start == end {
            write!(out, "{start}").unwrap();
        } else {
            write!(out, "{start}-{end}").unwrap();
        }
        k += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecurrenceReport {
    pub alpha: f64,
    pub grid_size: usize,
    #[serde(serialize_with = "ser_ranges")]
    pub chain_recurrent_nodes: Vec<usize>,
    pub chain_recurrent_count: usize,
    pub scc_count: usize,
    pub transitive: bool,
    pub mixing_time: Option<usize>,
}

fn ser_ranges<S: serde::Serializer>(nodes: &[usize], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&encode_ranges(nodes))
}

impl RecurrenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

/// Chain-recurrent set, chain classes and transitivity; the mixing time is attached when
/// `mixing` = (ε, δ) is given and the system saturates.
pub fn recurrence_report(
    f: &MapSequence,
    alpha: f64,
    grid: &Grid,
    mixing: Option<(f64, f64)>,
) -> Result<RecurrenceReport> {
    let reach = ChainReach::new(f, alpha, grid)?;
    let cr = reach.chain_recurrent();
    let mixing_time = match mixing {
        Some((eps, delta)) => {
            match chain_mixing_time(f, eps, delta, grid, default_confirm_horizon(f)) {
                Ok(m) => Some(m.value),
                Err(Error::NotChainMixing { .. }) => None,
                Err(e) => return Err(e),
            }
        }
        None => None,
    };
    Ok(RecurrenceReport {
        alpha,
        grid_size: grid.size(),
        chain_recurrent_count: cr.len(),
        chain_recurrent_nodes: cr,
        scc_count: reach.classes().len(),
        transitive: reach.transitive(),
        mixing_time,
    })
}

/// Nodes x for which some start phase m and some r in [1, horizon] give
/// F_[m+1,r](U) ∩ U ≠ ∅ with U the open α-ball about the centre of x.
pub fn nonwandering_nodes(
    f: &MapSequence,
    alpha: f64,
    grid: &Grid,
    horizon: usize,
) -> Result<Vec<usize>> {
    let q = f
        .period()
        .ok_or_else(|| Error::Config("non-wandering analysis needs a periodic sequence".into()))?;
    if !(alpha > 0.0) {
        return Err(Error::Config(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if horizon < q {
        return Err(Error::Config(format!(
            "horizon {horizon} must be at least the period {q}"
        )));
    }
    let keep: Vec<bool> = (0..grid.size())
        .into_par_iter()
        .map(|x| {
            let p = grid.center(x);
            let (lo, hi) = ((p - alpha).max(0.0), (p + alpha).min(1.0));
            (0..q).any(|m| {
                let (mut a, mut b) = (lo, hi);
                for r in 1..=horizon {
                    let map = &f.maps()[(m + r - 1) % q];
                    (a, b) = map.image_of_interval(a, b);
                    if a < p + alpha && b > p - alpha {
                        return true;
                    }
                }
                false
            })
        })
        .collect();
    Ok((0..grid.size()).filter(|&x| keep[x]).collect())
}

/// Nodes within `tol` of the orbit points F_[1,k](x) for k in [horizon - tail, horizon],
/// always including the nearest node of each.
pub fn omega_limit_nodes(
    f: &MapSequence,
    x: f64,
    horizon: usize,
    tail: usize,
    tol: f64,
    grid: &Grid,
) -> Result<Vec<usize>> {
    if tail >= horizon {
        return Err(Error::Config(format!(
            "tail {tail} must be below the horizon {horizon}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [0,1]")));
    }
    f.check_window(1, horizon)?;
    let mut hit = FixedBitSet::with_capacity(grid.size());
    let mut y = x;
    for k in 1..=horizon {
        y = f.map(k)?.eval(y);
        if k >= horizon - tail {
            hit.insert(grid.nearest(y));
            if let Some((lo, hi)) = grid.closed_window(y, tol) {
                hit.insert_range(lo..hi + 1);
            }
        }
    }
    Ok(hit.ones().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingTimeResult {
    pub value: usize,
    pub per_point_max_witness: usize,
    pub confirm_horizon: usize,
}

/// 2q + 10 for periodic systems; 10 for finite ones.
pub fn default_confirm_horizon(f: &MapSequence) -> usize {
    2 * f.period().unwrap_or(0) + 10
}

/// Reachable-set iteration behind the chain mixing time, shared by every start node.
struct MixingStepper {
    size: usize,
    radius: usize,
    /// image[k][j]: cell of f_{k+1}(p_j).
    image: Vec<Vec<u32>>,
    periodic: bool,
}

impl MixingStepper {
    fn new(f: &MapSequence, eps: f64, grid: &Grid) -> Result<Self> {
        let image = (1..=f.phase_count())
            .map(|k| {
                let m = f.map(k)?;
                Ok((0..grid.size())
                    .map(|j| grid.nearest(m.eval(grid.center(j))) as u32)
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            size: grid.size(),
            radius: grid.index_radius(eps),
            image,
            periodic: f.is_periodic(),
        })
    }

    /// Map index used at step k >= 1, or None past a finite horizon.
    fn layer(&self, k: usize) -> Option<usize> {
        if self.periodic {
            Some((k - 1) % self.image.len())
        } else {
            (k <= self.image.len()).then(|| k - 1)
        }
    }

    fn step(&self, set: &[bool], layer: usize, out: &mut [bool], prefix: &mut [u32]) {
        let mut marks = vec![false; self.size];
        for (j, &on) in set.iter().enumerate() {
            if on {
                marks[self.image[layer][j] as usize] = true;
            }
        }
        prefix[0] = 0;
        for i in 0..self.size {
            prefix[i + 1] = prefix[i] + marks[i] as u32;
        }
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.radius);
            let hi = (i + self.radius + 1).min(self.size);
            *o = prefix[hi] > prefix[lo];
        }
    }

    /// Smallest K >= 1 with a saturated set at every step of [K, K + confirm].
    fn mixing_time(
        &self,
        x: usize,
        delta_radius: usize,
        confirm: usize,
    ) -> std::result::Result<usize, usize> {
        let budget = MIXING_BUDGET_FACTOR * self.size;
        let mut set = vec![false; self.size];
        let lo = x.saturating_sub(delta_radius);
        let hi = (x + delta_radius + 1).min(self.size);
        set[lo..hi].iter_mut().for_each(|s| *s = true);
        let mut next = vec![false; self.size];
        let mut prefix = vec![0u32; self.size + 1];
        let mut seen: HashSet<(usize, Vec<u64>)> = HashSet::new();
        let mut run_start: Option<usize> = None;
        for k in 1..=budget {
            let Some(layer) = self.layer(k) else {
                return Err(k - 1);
            };
            self.step(&set, layer, &mut next, &mut prefix);
            std::mem::swap(&mut set, &mut next);
            if set.iter().all(|&s| s) {
                let start = *run_start.get_or_insert(k);
                if k - start >= confirm {
                    return Ok(start);
                }
            } else {
                run_start = None;
                if self.periodic {
                    // A repeated unsaturated state means the future cycles without confirming.
                    let key = (k % self.image.len(), pack(&set));
                    if !seen.insert(key) {
                        return Err(k);
                    }
                }
            }
        }
        Err(budget)
    }
}

fn pack(set: &[bool]) -> Vec<u64> {
    set.chunks(64)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u64, |w, (b, &on)| w | ((on as u64) << b))
        })
        .collect()
}

/// Chain mixing time m_ε(δ, F): the largest over start nodes of the first step from which the
/// ε-fattened reachable set of the δ-ball stays saturated for `confirm_horizon` further steps.
pub fn chain_mixing_time(
    f: &MapSequence,
    eps: f64,
    delta: f64,
    grid: &Grid,
    confirm_horizon: usize,
) -> Result<MixingTimeResult> {
    if !(eps > 0.0 && delta > 0.0) {
        return Err(Error::Config(format!(
            "epsilon ({eps}) and delta ({delta}) must be positive"
        )));
    }
    if !(eps > grid.spacing()) {
        return Err(Error::Config(format!(
            "epsilon = {eps} must exceed the grid spacing {}",
            grid.spacing()
        )));
    }
    let stepper = MixingStepper::new(f, eps, grid)?;
    let delta_radius = grid.index_radius(delta);
    let results: Vec<std::result::Result<usize, usize>> = (0..grid.size())
        .into_par_iter()
        .map(|x| stepper.mixing_time(x, delta_radius, confirm_horizon))
        .collect();
    let mut best = (0usize, 0usize);
    for (x, r) in results.into_iter().enumerate() {
        match r {
            Ok(m) if m > best.0 => best = (m, x),
            Ok(_) => {}
            Err(steps) => return Err(Error::NotChainMixing { node: x, steps }),
        }
    }
    Ok(MixingTimeResult {
        value: best.0,
        per_point_max_witness: best.1,
        confirm_horizon,
    })
}

/// Topological-mixing check at scale δ: iterates exact interval images of every closed δ-ball
/// until they cover all grid centres. Returns the largest cover time; stagnation or the step
/// budget raises NotChainMixing.
pub fn topological_mixing_gate(f: &MapSequence, delta: f64, grid: &Grid) -> Result<usize> {
    let budget = MIXING_BUDGET_FACTOR * grid.size();
    let (first, last) = (grid.center(0), grid.center(grid.size() - 1));
    let mut worst = 0usize;
    for x in 0..grid.size() {
        let p = grid.center(x);
        let (mut a, mut b) = ((p - delta).max(0.0), (p + delta).min(1.0));
        let mut seen: HashSet<(usize, u64, u64)> = HashSet::new();
        let mut covered = None;
        let mut steps = 0;
        for k in 1..=budget {
            let map = match f.map(k) {
                Ok(m) => m,
                Err(Error::Horizon { .. }) => break,
                Err(e) => return Err(e),
            };
            steps = k;
            (a, b) = map.image_of_interval(a, b);
            if a <= first && b >= last {
                covered = Some(k);
                break;
            }
            if f.is_periodic() && !seen.insert((k % f.phase_count(), a.to_bits(), b.to_bits())) {
                return Err(Error::NotChainMixing { node: x, steps: k });
            }
        }
        match covered {
            Some(k) => worst = worst.max(k),
            None => return Err(Error::NotChainMixing { node: x, steps }),
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::PiecewiseLinearMap;

    fn tent() -> MapSequence {
        MapSequence::autonomous(PiecewiseLinearMap::tent())
    }
    fn identity() -> MapSequence {
        MapSequence::autonomous(PiecewiseLinearMap::identity())
    }

    #[test]
    fn ranges_encode() {
        assert_eq!(encode_ranges(&[0, 1, 2, 5, 7, 8]), "0-2,5,7-8");
        assert_eq!(encode_ranges(&[]), "");
        assert_eq!(encode_ranges(&[4]), "4");
    }

    #[test]
    fn identity_is_chain_recurrent_and_transitive() {
        let g = Grid::new(40).unwrap();
        let a = 1.5 * g.spacing();
        assert_eq!(chain_recurrent_set(&identity(), a, &g).unwrap().len(), 40);
        assert!(is_chain_transitive(&identity(), a, &g).unwrap());
    }

    #[test]
    fn tent_is_transitive() {
        let g = Grid::new(500).unwrap();
        assert!(is_chain_transitive(&tent(), g.spacing(), &g).unwrap());
        assert_eq!(
            chain_recurrent_set(&tent(), g.spacing(), &g).unwrap().len(),
            500
        );
    }

    #[test]
    fn identity_mixing_examples() {
        let g = Grid::new(1000).unwrap();
        let m = chain_mixing_time(&identity(), 0.1, 0.1, &g, 12).unwrap();
        assert_eq!(m.value, 9);
        let m = chain_mixing_time(&identity(), 1.5, 0.1, &g, 12).unwrap();
        assert_eq!(m.value, 1);
    }

    #[test]
    fn reflection_never_mixes_topologically() {
        let g = Grid::new(100).unwrap();
        let f = MapSequence::autonomous(PiecewiseLinearMap::reflection());
        assert!(matches!(
            topological_mixing_gate(&f, 0.05, &g),
            Err(Error::NotChainMixing { .. })
        ));
        assert!(matches!(
            topological_mixing_gate(&identity(), 0.05, &g),
            Err(Error::NotChainMixing { .. })
        ));
        assert!(topological_mixing_gate(&tent(), 0.05, &g).is_ok());
    }

    #[test]
    fn omega_of_constant_orbit() {
        let g = Grid::new(100).unwrap();
        assert_eq!(
            omega_limit_nodes(&identity(), 0.3, 10, 3, 1e-6, &g).unwrap(),
            vec![30]
        );
        let half = MapSequence::autonomous(
            PiecewiseLinearMap::new(vec![0.0, 1.0], vec![0.0, 0.5]).unwrap(),
        );
        assert_eq!(
            omega_limit_nodes(&half, 1.0, 80, 5, 1e-6, &g).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn nonwandering_identity_is_everything() {
        let g = Grid::new(50).unwrap();
        assert_eq!(
            nonwandering_nodes(&identity(), g.spacing(), &g, 1)
                .unwrap()
                .len(),
            50
        );
    }
}
