//! Closed-form mixing-time bounds, box dimension, the mixing-time entropy lower bound and
//! fixed-point growth entropy.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::growth::{fit_growth, linear_fit, EntropyEstimate, EstimateParams, GrowthSeries};
use crate::recurrence::{
    chain_mixing_time, default_confirm_horizon, is_chain_transitive, topological_mixing_gate,
};
use crate::systems::{fixed_point_count, MapSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    MixingTimeLB,
    EntropyLB,
    FixGrowth,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundInputs {
    pub c: Option<f64>,
    pub diameter: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub d_prime: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub value: f64,
    pub inputs: BoundInputs,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

/// Lower bound on the chain mixing time of a c-Lipschitz system on a space of diameter D:
/// log_c((D(c-1) + 2ε) / (2δ(c-1) + 2ε)) for c > 1, and (D - 2δ)/(2ε) for c = 1.
pub fn mixing_time_lower_bound(c: f64, diameter: f64, delta: f64, eps: f64) -> Result<f64> {
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::Domain(format!(
            "Lipschitz constant c = {c} must be at least 1"
        )));
    }
    if !(diameter > 0.0 && delta > 0.0 && eps > 0.0) {
        return Err(Error::Domain(
            "diameter, delta and epsilon must be positive".into(),
        ));
    }
    if eps > delta || 2.0 * delta > diameter {
        return Err(Error::Domain(format!(
            "need epsilon <= delta <= D/2, got epsilon = {eps}, delta = {delta}, D = {diameter}"
        )));
    }
    if c == 1.0 {
        Ok((diameter - 2.0 * delta) / (2.0 * eps))
    } else {
        let ratio = (diameter * (c - 1.0) + 2.0 * eps) / (2.0 * delta * (c - 1.0) + 2.0 * eps);
        Ok(ratio.ln() / c.ln())
    }
}

pub fn mixing_time_bound_report(
    c: f64,
    diameter: f64,
    delta: f64,
    eps: f64,
) -> Result<BoundReport> {
    Ok(BoundReport {
        kind: BoundKind::MixingTimeLB,
        value: mixing_time_lower_bound(c, diameter, delta, eps)?,
        inputs: BoundInputs {
            c: Some(c),
            diameter: Some(diameter),
            delta: Some(delta),
            epsilon: Some(eps),
            d_prime: None,
        },
    })
}

/// Slope of ln(box count) against ln(1/s); boxes are [ks, (k+1)s).
pub fn box_dimension(points: &[f64], scales: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain(
            "box dimension needs at least one point".into(),
        ));
    }
    if scales.len() < 2 || scales.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(Error::Domain(
            "box dimension needs at least two scales in (0,1)".into(),
        ));
    }
    let mut xs = Vec::with_capacity(scales.len());
    let mut ys = Vec::with_capacity(scales.len());
    for &s in scales {
        let boxes: HashSet<i64> = points.iter().map(|&p| (p / s).floor() as i64).collect();
        xs.push((1.0 / s).ln());
        ys.push((boxes.len() as f64).ln());
    }
    Ok(linear_fit(&xs, &ys).map_or(0.0, |fit| fit.slope.max(0.0)))
}

/// Dyadic scales from at most 64 grid cells down to two. Coarser scales would see the
/// extra edge box of every interval and bias the slope low.
pub fn grid_box_scales(grid: &Grid) -> Vec<f64> {
    let mut s = 0.25;
    while s > 64.0 * grid.spacing() {
        s /= 2.0;
    }
    let mut out = Vec::new();
    while s >= 2.0 * grid.spacing() {
        out.push(s);
        s /= 2.0;
    }
    if out.len() < 2 {
        out = vec![0.5, 0.25];
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub delta: f64,
    pub mixing_time: usize,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyLowerBound {
    pub value: f64,
    pub d_prime: f64,
    pub epsilon: f64,
    pub rows: Vec<DeltaRow>,
    pub warnings: Vec<String>,
}

impl EntropyLowerBound {
    pub fn report(&self) -> BoundReport {
        BoundReport {
            kind: BoundKind::EntropyLB,
            value: self.value,
            inputs: BoundInputs {
                epsilon: Some(self.epsilon),
                d_prime: Some(self.d_prime),
                ..Default::default()
            },
        }
    }
}

/// d' · max over δ of ln(1/δ) / m_ε(δ, F), with d' the box dimension of the grid support.
/// Each δ must first pass the topological-mixing gate; δ <= ε is skipped with a warning.
pub fn entropy_lower_bound(
    f: &MapSequence,
    deltas: &[f64],
    eps: f64,
    grid: &Grid,
) -> Result<EntropyLowerBound> {
    if deltas.is_empty() {
        return Err(Error::Config("delta list must be nonempty".into()));
    }
    let mut warnings = Vec::new();
    if !is_chain_transitive(f, grid.spacing(), grid)? {
        warnings.push(format!(
            "system is not chain transitive at alpha = {}",
            grid.spacing()
        ));
    }
    let d_prime = box_dimension(&grid.centers(), &grid_box_scales(grid))?;
    let confirm = default_confirm_horizon(f);
    let mut rows = Vec::new();
    for &delta in deltas {
        if !(delta > eps) {
            warnings.push(format!(
                "delta = {delta} skipped: the mixing time needs epsilon < delta"
            ));
            continue;
        }
        if !(delta < 1.0) {
            warnings.push(format!(
                "delta = {delta} skipped: ln(1/delta) is not positive"
            ));
            continue;
        }
        topological_mixing_gate(f, delta, grid)?;
        let m = chain_mixing_time(f, eps, delta, grid, confirm)?;
        rows.push(DeltaRow {
            delta,
            mixing_time: m.value,
            quotient: (1.0 / delta).ln() / m.value as f64,
        });
    }
    if rows.is_empty() {
        return Err(Error::Config(format!(
            "no delta in the list exceeds epsilon = {eps}"
        )));
    }
    let best = rows.iter().map(|r| r.quotient).fold(0.0, f64::max);
    Ok(EntropyLowerBound {
        value: d_prime * best,
        d_prime,
        epsilon: eps,
        rows,
        warnings,
    })
}

/// Regression of ln N(Fix(F^n)) against n over the given multiples of the period.
pub fn fix_growth_entropy(f: &MapSequence, ns: &[usize]) -> Result<EntropyEstimate> {
    let q = f
        .period()
        .ok_or_else(|| Error::Config("fixed-point growth needs a periodic sequence".into()))?;
    if ns.len() < 2 {
        return Err(Error::Config(
            "fixed-point growth needs at least two lengths".into(),
        ));
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let mut series = GrowthSeries::new();
    for &n in &ns {
        if n == 0 || n % q != 0 {
            return Err(Error::UnsupportedLength { n, period: q });
        }
        let c = fixed_point_count(f, n)?;
        if c > 0 {
            series.push(n, c as u64)?;
        }
    }
    let params = EstimateParams {
        epsilon: None,
        alpha: None,
        grid_size: None,
        n_min: ns[0],
        n_max: *ns.last().unwrap(),
    };
    Ok(fit_growth(series, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::PiecewiseLinearMap;

    #[test]
    fn mixing_bound_examples() {
        assert_eq!(mixing_time_lower_bound(1.0, 1.0, 0.1, 0.1).unwrap(), 4.0);
        let v = mixing_time_lower_bound(2.0, 1.0, 0.05, 0.02).unwrap();
        assert!((v - (1.04f64 / 0.14).log2()).abs() < 1e-12);
        assert!((v - 2.893).abs() < 1e-3);
        assert_eq!(mixing_time_lower_bound(1.0, 1.0, 0.5, 0.1).unwrap(), 0.0);
        assert!(mixing_time_lower_bound(0.5, 1.0, 0.1, 0.05).is_err());
        assert!(mixing_time_lower_bound(2.0, 1.0, 0.05, 0.1).is_err());
    }

    #[test]
    fn box_dimension_examples() {
        let dense: Vec<f64> = (0..100_000).map(|i| (i as f64 + 0.5) / 100_000.0).collect();
        let scales: Vec<f64> = (2..10).map(|k| 0.5f64.powi(k)).collect();
        assert!((box_dimension(&dense, &scales).unwrap() - 1.0).abs() < 0.05);
        assert_eq!(box_dimension(&[0.3], &scales).unwrap(), 0.0);
        assert!(box_dimension(&[], &scales).is_err());
        assert!(box_dimension(&dense, &[0.1]).is_err());
    }

    #[test]
    fn cantor_dimension() {
        let mut pts = vec![0.0f64];
        let mut width = 1.0;
        for _ in 0..8 {
            width /= 3.0;
            pts = pts.iter().flat_map(|&a| [a, a + 2.0 * width]).collect();
        }
        let mids: Vec<f64> = pts.iter().map(|a| a + width / 2.0).collect();
        let scales: Vec<f64> = (1..=7).map(|k| 3f64.powi(-k)).collect();
        let d = box_dimension(&mids, &scales).unwrap();
        assert!((d - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{d}");
    }

    #[test]
    fn tent_fix_growth() {
        let f = MapSequence::autonomous(PiecewiseLinearMap::tent());
        let est = fix_growth_entropy(&f, &(1..=16).collect::<Vec<_>>()).unwrap();
        assert!((est.value - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn reflection_fix_growth_is_non_isolated() {
        let f = MapSequence::autonomous(PiecewiseLinearMap::reflection());
        assert!(matches!(
            fix_growth_entropy(&f, &[1, 2, 3]),
            Err(Error::NonIsolatedFixedPoints { .. })
        ));
    }
}
