//! Growth series and the exponential-rate regression shared by every entropy estimator.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Natural log of a big integer, accurate to f64 precision.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEntry {
    pub n: usize,
    pub count: BigUint,
}

impl GrowthEntry {
    pub fn log_count(&self) -> f64 {
        ln_big(&self.count)
    }
}

/// The sequence n -> count(n) for n strictly increasing, counts >= 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GrowthSeries {
    entries: Vec<GrowthEntry>,
}

impl GrowthSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, n: usize, count: impl Into<BigUint>) -> Result<()> {
        let count = count.into();
        if count.is_zero() {
            return Err(Error::Domain(format!(
                "count at n = {n} must be at least 1"
            )));
        }
        if self.entries.last().is_some_and(|e| e.n >= n) {
            return Err(Error::Domain(format!(
                "n = {n} does not increase the series"
            )));
        }
        self.entries.push(GrowthEntry { n, count });
        Ok(())
    }

    pub fn from_counts<I, C>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, C)>,
        C: Into<BigUint>,
    {
        let mut s = Self::new();
        for (n, c) in items {
            s.push(n, c)?;
        }
        Ok(s)
    }

    pub fn entries(&self) -> &[GrowthEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count,log_count\n");
        for e in &self.entries {
            writeln!(out, "{},{},{}", e.n, e.count, e.log_count()).unwrap();
        }
        out
    }
}

/// Least-squares line through (x, y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Residual standard error sqrt(SSR / (m - 2)); zero when m <= 2.
    pub residual_se: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let m = xs.len();
    if m < 2 || m != ys.len() {
        return None;
    }
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (residual_se, slope_stderr) = if m > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        let s = (ssr / (mf - 2.0)).sqrt();
        (s, s / sxx.sqrt())
    } else {
        (0.0, 0.0)
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_stderr,
        residual_se,
    })
}

/// Parameters recorded with every estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateParams {
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub grid_size: Option<usize>,
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    /// Growth rate in nats, floored at zero.
    pub value: f64,
    pub slope_stderr: f64,
    pub series: GrowthSeries,
    pub params: EstimateParams,
    /// First n kept by the regression after transient suppression.
    pub fit_start: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    value_nats: f64,
    value_bits: f64,
    stderr: f64,
    epsilon: Option<f64>,
    alpha: Option<f64>,
    n_min: usize,
    n_max: usize,
    grid_size: Option<usize>,
    fit_start: usize,
    counts: Vec<&'a str>,
}

impl EntropyEstimate {
    pub fn value_bits(&self) -> f64 {
        self.value / std::f64::consts::LN_2
    }

    /// Single-line JSON summary.
    pub fn summary_json(&self) -> String {
        let counts: Vec<String> = self
            .series
            .entries
            .iter()
            .map(|e| e.count.to_string())
            .collect();
        let s = Summary {
            value_nats: self.value,
            value_bits: self.value_bits(),
            stderr: self.slope_stderr,
            epsilon: self.params.epsilon,
            alpha: self.params.alpha,
            n_min: self.params.n_min,
            n_max: self.params.n_max,
            grid_size: self.params.grid_size,
            fit_start: self.fit_start,
            counts: counts.iter().map(String::as_str).collect(),
        };
        serde_json::to_string(&s).expect("summary serialises")
    }
}

/// Fits log count against n. With at least five points, the smallest n is dropped when it
/// misses the line fitted to the remaining points by more than three of that line's
/// residual standard errors.
pub fn fit_growth(series: GrowthSeries, params: EstimateParams) -> EntropyEstimate {
    let entries = series.entries();
    let first_n = entries.first().map_or(params.n_min, |e| e.n);
    let all_equal = entries.windows(2).all(|w| w[0].count == w[1].count);
    if entries.len() < 2 || all_equal {
        return EntropyEstimate {
            value: 0.0,
            slope_stderr: 0.0,
            series,
            params,
            fit_start: first_n,
        };
    }
    let xs: Vec<f64> = entries.iter().map(|e| e.n as f64).collect();
    let ys: Vec<f64> = entries.iter().map(GrowthEntry::log_count).collect();
    let mut fit = linear_fit(&xs, &ys).expect("distinct n values");
    let mut fit_start = first_n;
    if xs.len() >= 5 {
        let rest = linear_fit(&xs[1..], &ys[1..]).expect("distinct n values");
        let r0 = ys[0] - rest.intercept - rest.slope * xs[0];
        if r0.abs() > 3.0 * rest.residual_se + 1e-9 {
            fit = rest;
            fit_start = entries[1].n;
        }
    }
    EntropyEstimate {
        value: fit.slope.max(0.0),
        slope_stderr: fit.slope_stderr,
        series,
        params,
        fit_start,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> EstimateParams {
        EstimateParams {
            epsilon: Some(0.1),
            alpha: None,
            grid_size: Some(10),
            n_min: 1,
            n_max: 6,
        }
    }

    #[test]
    fn exact_exponential_recovers_rate() {
        let s = GrowthSeries::from_counts((1..=8).map(|n| (n, 3u64 << n))).unwrap();
        let est = fit_growth(s, params());
        assert!((est.value - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(est.slope_stderr < 1e-12);
        assert!((est.value_bits() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_counts_give_zero() {
        let s = GrowthSeries::from_counts((1..=6).map(|n| (n, 5u32))).unwrap();
        let est = fit_growth(s, params());
        assert_eq!(est.value, 0.0);
        assert_eq!(est.slope_stderr, 0.0);
    }

    #[test]
    fn decreasing_counts_floor_at_zero() {
        let s = GrowthSeries::from_counts((1..=6).map(|n| (n, 100u32 - n as u32))).unwrap();
        assert_eq!(fit_growth(s, params()).value, 0.0);
    }

    #[test]
    fn transient_first_point_is_dropped() {
        let mut counts: Vec<(usize, u64)> = (1..=8).map(|n| (n, 1u64 << (n + 3))).collect();
        counts[0].1 = 1;
        let est = fit_growth(GrowthSeries::from_counts(counts).unwrap(), params());
        assert_eq!(est.fit_start, 2);
        assert!((est.value - std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn series_rejects_bad_entries() {
        let mut s = GrowthSeries::new();
        s.push(2, 3u32).unwrap();
        assert!(s.push(2, 3u32).is_err());
        assert!(s.push(3, 0u32).is_err());
    }

    #[test]
    fn ln_big_handles_huge_values() {
        let x = BigUint::from(1u8) << 5000u32;
        assert!((ln_big(&x) - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert_eq!(ln_big(&BigUint::from(1u8)), 0.0);
    }

    #[test]
    fn csv_and_json_shapes() {
        let s = GrowthSeries::from_counts([(1, 2u32), (2, 4u32)]).unwrap();
        assert_eq!(s.to_csv().lines().next(), Some("n,count,log_count"));
        let est = fit_growth(s, params());
        let v: serde_json::Value = serde_json::from_str(&est.summary_json()).unwrap();
        for key in [
            "value_nats",
            "value_bits",
            "stderr",
            "epsilon",
            "n_min",
            "n_max",
            "grid_size",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
