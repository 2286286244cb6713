//! Piecewise-linear self-maps of the unit interval and non-autonomous sequences of them.
//!
//! Compositions are built exactly by pulling breakpoints back through each factor, so on
//! dyadic fixtures every breakpoint and value of `F_[i,n]` is representable in binary64.

use crate::error::{Error, Result};

/// Round-off absorbed when evaluating or snapping breakpoints together.
pub const SNAP_TOL: f64 = 1e-12;

/// A continuous piecewise-linear map of [0,1] given by its graph at the breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearMap {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearMap {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidMap(
                "at least two breakpoints are required".into(),
            ));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidMap(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidMap(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        if *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidMap(format!(
                "last breakpoint must be 1, got {}",
                breakpoints.last().unwrap()
            )));
        }
        if let Some(w) = breakpoints.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMap(format!(
                "breakpoints must be strictly increasing (index {} to {})",
                w,
                w + 1
            )));
        }
        if let Some(k) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidMap(format!(
                "value {} at index {} lies outside [0,1]",
                values[k], k
            )));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn identity() -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
            values: vec![0.0, 1.0],
        }
    }

    /// x -> 1 - x
    pub fn reflection() -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
            values: vec![1.0, 0.0],
        }
    }

    /// T(x) = 1 - |1 - 2x|
    pub fn tent() -> Self {
        Self {
            breakpoints: vec![0.0, 0.5, 1.0],
            values: vec![0.0, 1.0, 0.0],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn piece_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(b, v)| (v[1] - v[0]) / (b[1] - b[0]))
    }

    pub fn lipschitz(&self) -> f64 {
        self.slopes().map(f64::abs).fold(0.0, f64::max)
    }

    /// Index of the piece containing x (the right-closed convention of the last piece).
    fn piece_of(&self, x: f64) -> usize {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        k.clamp(1, self.breakpoints.len() - 1) - 1
    }

    /// Evaluates without the domain check; x is clamped into [0,1] first.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let k = self.piece_of(x);
        let (b0, b1) = (self.breakpoints[k], self.breakpoints[k + 1]);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let y = if x == b0 {
            v0
        } else if x == b1 {
            v1
        } else {
            v0 + (v1 - v0) * ((x - b0) / (b1 - b0))
        };
        y.clamp(0.0, 1.0)
    }

    /// Image of the closed interval [lo, hi].
    pub fn image_of_interval(&self, lo: f64, hi: f64) -> (f64, f64) {
        let a = self.eval(lo);
        let b = self.eval(hi);
        let (mut min, mut max) = (a.min(b), a.max(b));
        let start = self.breakpoints.partition_point(|&x| x <= lo);
        for k in start..self.breakpoints.len() {
            if self.breakpoints[k] >= hi {
                break;
            }
            min = min.min(self.values[k]);
            max = max.max(self.values[k]);
        }
        (min, max)
    }

    /// Preimage of the open interval (lo, hi) as a sorted union of disjoint open intervals.
    pub fn preimage_of_open_interval(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        for k in 0..self.piece_count() {
            let (b0, b1) = (self.breakpoints[k], self.breakpoints[k + 1]);
            let (v0, v1) = (self.values[k], self.values[k + 1]);
            let piece = if v0 == v1 {
                if lo < v0 && v0 < hi {
                    Some((b0, b1))
                } else {
                    None
                }
            } else {
                let t = |y: f64| b0 + (y - v0) * (b1 - b0) / (v1 - v0);
                let (ta, tb) = (t(lo), t(hi));
                let (a, b) = (ta.min(tb).max(b0), ta.max(tb).min(b1));
                (a < b).then_some((a, b))
            };
            if let Some((a, b)) = piece {
                push_union(&mut out, a, b);
            }
        }
        out
    }
}

/// Appends (a,b) to a sorted union, merging with the last interval when they touch.
pub(crate) fn push_union(out: &mut Vec<(f64, f64)>, a: f64, b: f64) {
    if let Some(last) = out.last_mut() {
        if a <= last.1 {
            last.1 = last.1.max(b);
            return;
        }
    }
    out.push((a, b));
}

/// Evaluates `m` at `x`, rejecting points outside [0,1].
pub fn eval_map(m: &PiecewiseLinearMap, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [0,1]")));
    }
    Ok(m.eval(x))
}

/// A non-autonomous system F = {f_i}, indexed from 1.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSequence {
    Periodic {
        maps: Vec<PiecewiseLinearMap>,
    },
    Finite {
        maps: Vec<PiecewiseLinearMap>,
        horizon: usize,
    },
}

impl MapSequence {
    pub fn periodic(maps: Vec<PiecewiseLinearMap>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidMap(
                "a periodic sequence needs at least one map".into(),
            ));
        }
        Ok(Self::Periodic { maps })
    }

    pub fn finite(maps: Vec<PiecewiseLinearMap>, horizon: usize) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidMap(
                "a finite sequence needs at least one map".into(),
            ));
        }
        if horizon == 0 || horizon > maps.len() {
            return Err(Error::InvalidMap(format!(
                "horizon {horizon} must lie in [1, {}]",
                maps.len()
            )));
        }
        Ok(Self::Finite { maps, horizon })
    }

    pub fn autonomous(map: PiecewiseLinearMap) -> Self {
        Self::Periodic { maps: vec![map] }
    }

    pub fn maps(&self) -> &[PiecewiseLinearMap] {
        match self {
            Self::Periodic { maps } | Self::Finite { maps, .. } => maps,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Self::Periodic { .. })
    }

    /// The period q of a periodic sequence.
    pub fn period(&self) -> Option<usize> {
        match self {
            Self::Periodic { maps } => Some(maps.len()),
            Self::Finite { .. } => None,
        }
    }

    pub fn horizon(&self) -> Option<usize> {
        match self {
            Self::Periodic { .. } => None,
            Self::Finite { horizon, .. } => Some(*horizon),
        }
    }

    /// Number of distinct time phases: q when periodic, the horizon when finite.
    pub fn phase_count(&self) -> usize {
        match self {
            Self::Periodic { maps } => maps.len(),
            Self::Finite { horizon, .. } => *horizon,
        }
    }

    /// f_i for i >= 1.
    pub fn map(&self, i: usize) -> Result<&PiecewiseLinearMap> {
        if i == 0 {
            return Err(Error::Domain("map indices start at 1".into()));
        }
        match self {
            Self::Periodic { maps } => Ok(&maps[(i - 1) % maps.len()]),
            Self::Finite { maps, horizon } => {
                if i > *horizon {
                    Err(Error::Horizon {
                        index: i,
                        horizon: *horizon,
                    })
                } else {
                    Ok(&maps[i - 1])
                }
            }
        }
    }

    /// Checks that f_i, ..., f_{i+n-1} all exist.
    pub fn check_window(&self, i: usize, n: usize) -> Result<()> {
        if i == 0 {
            return Err(Error::Domain("map indices start at 1".into()));
        }
        if let Self::Finite { horizon, .. } = self {
            if n > 0 && i + n - 1 > *horizon {
                return Err(Error::Horizon {
                    index: i + n - 1,
                    horizon: *horizon,
                });
            }
        }
        Ok(())
    }
}

/// A trajectory x, f_i(x), f_{i+1}(f_i(x)), ...
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSegment {
    pub start_index: usize,
    pub points: Vec<f64>,
}

/// F_[i,n](x) = f_{i+n-1} o ... o f_i (x), with F_[i,0] = id.
pub fn compose_orbit(f: &MapSequence, i: usize, n: usize, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [0,1]")));
    }
    f.check_window(i, n)?;
    let mut y = x;
    for k in i..i + n {
        y = f.map(k)?.eval(y);
    }
    Ok(y)
}

/// The points x, F_[i,1](x), ..., F_[i,n](x).
pub fn orbit_segment(f: &MapSequence, i: usize, n: usize, x: f64) -> Result<OrbitSegment> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} lies outside [0,1]")));
    }
    f.check_window(i, n)?;
    let mut points = Vec::with_capacity(n + 1);
    let mut y = x;
    points.push(y);
    for k in i..i + n {
        y = f.map(k)?.eval(y);
        points.push(y);
    }
    Ok(OrbitSegment {
        start_index: i,
        points,
    })
}

/// Largest absolute slope over every map of the sequence.
pub fn lipschitz_constant(f: &MapSequence) -> f64 {
    f.maps()
        .iter()
        .map(PiecewiseLinearMap::lipschitz)
        .fold(0.0, f64::max)
}

/// `outer o inner`, built by pulling `outer`'s breakpoints back through each piece of `inner`.
pub fn compose_pair(outer: &PiecewiseLinearMap, inner: &PiecewiseLinearMap) -> PiecewiseLinearMap {
    let (ib, iv) = (&inner.breakpoints, &inner.values);
    let ob = &outer.breakpoints;
    let mut bps = Vec::with_capacity(ib.len() * 2);
    let mut vals = Vec::with_capacity(ib.len() * 2);
    for k in 0..inner.piece_count() {
        let (b0, b1, v0, v1) = (ib[k], ib[k + 1], iv[k], iv[k + 1]);
        push_point(&mut bps, &mut vals, b0, outer.eval(v0));
        if v0 != v1 {
            let (lo, hi) = (v0.min(v1), v0.max(v1));
            let first = ob.partition_point(|&c| c <= lo);
            let last = ob.partition_point(|&c| c < hi);
            let crossings = &ob[first..last];
            let emit = |c: f64, out_bps: &mut Vec<f64>, out_vals: &mut Vec<f64>| {
                let x = b0 + (c - v0) * ((b1 - b0) / (v1 - v0));
                if x > b0 && x < b1 {
                    push_point(out_bps, out_vals, x, outer.eval(c));
                }
            };
            if v1 > v0 {
                crossings.iter().for_each(|&c| emit(c, &mut bps, &mut vals));
            } else {
                crossings
                    .iter()
                    .rev()
                    .for_each(|&c| emit(c, &mut bps, &mut vals));
            }
        }
    }
    push_point(&mut bps, &mut vals, 1.0, outer.eval(iv[iv.len() - 1]));
    PiecewiseLinearMap {
        breakpoints: bps,
        values: vals,
    }
}

fn push_point(bps: &mut Vec<f64>, vals: &mut Vec<f64>, x: f64, y: f64) {
    if let Some(&last) = bps.last() {
        if x - last <= SNAP_TOL {
            if x == 1.0 {
                // Keep the domain endpoint exact.
                *bps.last_mut().unwrap() = 1.0;
                *vals.last_mut().unwrap() = y;
            }
            return;
        }
    }
    bps.push(x);
    vals.push(y);
}

/// The composition F_[i,n] as a single piecewise-linear map.
pub fn composition(f: &MapSequence, i: usize, n: usize) -> Result<PiecewiseLinearMap> {
    f.check_window(i, n)?;
    let mut acc = PiecewiseLinearMap::identity();
    for k in i..i + n {
        acc = compose_pair(f.map(k)?, &acc);
    }
    Ok(acc)
}

/// Number of maximal monotone pieces of `m`; flat pieces join either neighbour.
pub fn laps_of(m: &PiecewiseLinearMap) -> usize {
    let mut laps = 1;
    let mut dir = 0i8;
    for w in m.values.windows(2) {
        let d = if w[1] > w[0] {
            1
        } else if w[1] < w[0] {
            -1
        } else {
            0
        };
        if d != 0 {
            if dir != 0 && d != dir {
                laps += 1;
            }
            dir = d;
        }
    }
    laps
}

/// Lap number of F_[1,n].
pub fn lap_count(f: &MapSequence, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Domain("lap_count needs n >= 1".into()));
    }
    Ok(laps_of(&composition(f, 1, n)?))
}

/// Solutions of m(x) = x, solved exactly on each linear piece.
pub fn fixed_points_of(m: &PiecewiseLinearMap, n: usize) -> Result<Vec<f64>> {
    let mut roots: Vec<f64> = Vec::new();
    let mut push = |x: f64| {
        if roots.last().is_none_or(|&r| x - r > SNAP_TOL) {
            roots.push(x);
        }
    };
    for k in 0..m.piece_count() {
        let (a, b) = (m.breakpoints[k], m.breakpoints[k + 1]);
        let (da, db) = (m.values[k] - a, m.values[k + 1] - b);
        if da.abs() <= SNAP_TOL && db.abs() <= SNAP_TOL {
            return Err(Error::NonIsolatedFixedPoints { n, lo: a, hi: b });
        }
        if da.abs() <= SNAP_TOL {
            push(a);
        } else if db.abs() > SNAP_TOL && (da < 0.0) != (db < 0.0) {
            push(a + da * (b - a) / (da - db));
        }
        if k + 1 == m.piece_count() && db.abs() <= SNAP_TOL {
            push(b);
        }
    }
    Ok(roots)
}

/// Fix(F^n) for the k = 1 reading: solutions of F_[1,n](x) = x.
pub fn fixed_points(f: &MapSequence, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("fixed points need n >= 1".into()));
    }
    fixed_points_of(&composition(f, 1, n)?, n)
}

pub fn fixed_point_count(f: &MapSequence, n: usize) -> Result<usize> {
    Ok(fixed_points(f, n)?.len())
}
