//! Coherent forecasts from the exact h-step predictive law.

use serde::{Deserialize, Serialize};

use crate::distributions::geo_truncation_point;
use crate::error::{invalid, Result};
use crate::estimation::{FitResult, Method, ModelKind};
use crate::model::{fit_model, CountModel};
use crate::operator::GeoInarModel;
use crate::process::{CountSeries, StepKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointRule {
    #[default]
    Median,
    Mode,
}

impl std::str::FromStr for PointRule {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "median" => Ok(PointRule::Median),
            "mode" => Ok(PointRule::Mode),
            other => Err(invalid(format!("unknown point rule '{other}'"))),
        }
    }
}

/// Truncated predictive pmf: `pmf[j]` for `j = 0..pmf.len()`, with the
/// omitted upper tail below `tail`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictivePmf {
    pub pmf: Vec<f64>,
    pub tail: f64,
}

impl PredictivePmf {
    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.pmf
            .iter()
            .enumerate()
            .map(|(j, p)| (j as f64 - m).powi(2) * p)
            .sum()
    }

    /// Smallest `j` with `F(j) >= q`; the last support point if none.
    pub fn quantile_at_least(&self, q: f64) -> u64 {
        let mut cum = 0.0;
        for (j, p) in self.pmf.iter().enumerate() {
            cum += p;
            if cum >= q {
                return j as u64;
            }
        }
        self.pmf.len().saturating_sub(1) as u64
    }

    /// Smallest `j` with `F(j) > q`.
    fn quantile_above(&self, q: f64) -> u64 {
        let mut cum = 0.0;
        for (j, p) in self.pmf.iter().enumerate() {
            cum += p;
            if cum > q {
                return j as u64;
            }
        }
        self.pmf.len().saturating_sub(1) as u64
    }

    pub fn median(&self) -> u64 {
        self.quantile_at_least(0.5)
    }

    /// Smallest index of the largest probability.
    pub fn mode(&self) -> u64 {
        let mut best = 0;
        for (j, &p) in self.pmf.iter().enumerate() {
            if p > self.pmf[best] {
                best = j;
            }
        }
        best as u64
    }

    pub fn point(&self, rule: PointRule) -> u64 {
        match rule {
            PointRule::Median => self.median(),
            PointRule::Mode => self.mode(),
        }
    }

    /// Equal-tail interval `[lo, hi]`: `lo` is the smallest `j` with
    /// `F(j) > (1 - level)/2`, `hi` the smallest with `F(j) >= (1 + level)/2`.
    pub fn interval(&self, level: f64) -> (u64, u64) {
        let a = 0.5 * (1.0 - level);
        let hi = self.quantile_at_least(1.0 - a);
        let lo = self.quantile_above(a).min(hi);
        (lo, hi)
    }
}

/// Evaluates `row(jmax)` with a growing `jmax` until the cumulative mass
/// reaches `1 - tail`, then trims the row there.
fn grow<F: Fn(u64) -> Vec<f64>>(row: F, start: u64, tail: f64) -> PredictivePmf {
    let mut jmax = start.max(8);
    loop {
        let r = row(jmax);
        let mut cum = 0.0;
        for (j, p) in r.iter().enumerate() {
            cum += p;
            if cum >= 1.0 - tail {
                return PredictivePmf {
                    pmf: r[..=j].to_vec(),
                    tail,
                };
            }
        }
        if jmax > 1 << 20 {
            return PredictivePmf { pmf: r, tail };
        }
        jmax *= 2;
    }
}

fn check_tail(tail: f64) -> Result<()> {
    if !(tail > 0.0 && tail < 1.0) {
        return Err(invalid(format!("tail bound {tail} must lie in (0, 1)")));
    }
    Ok(())
}

/// `p^(h)_{x_last, j}` for `j = 0, 1, ...` until the cumulative mass reaches
/// `1 - tail`.
pub fn forecast_distribution(
    model: &GeoInarModel,
    x_last: u64,
    h: u32,
    tail: f64,
) -> Result<PredictivePmf> {
    if h == 0 {
        return Err(invalid("forecast horizon must be >= 1"));
    }
    check_tail(tail)?;
    let kernel = StepKernel::new(model, h);
    let start = kernel.mean(x_last).ceil() as u64 + geo_truncation_point(model.mu(), tail);
    Ok(grow(
        |jmax| kernel.ln_row(x_last, jmax).into_iter().map(f64::exp).collect(),
        start,
        tail,
    ))
}

/// One-step predictive law of any [`CountModel`].
pub fn one_step_distribution(
    model: &dyn CountModel,
    x_last: u64,
    tail: f64,
) -> Result<PredictivePmf> {
    check_tail(tail)?;
    let m = model.conditional_mean(x_last);
    let sd = model.conditional_variance(x_last).sqrt();
    let start = (m + 10.0 * sd).ceil() as u64 + 8;
    Ok(grow(|jmax| model.transition_row(x_last, jmax), start, tail))
}

pub const FORECAST_TAIL: f64 = 1e-12;

pub fn point_forecast(model: &GeoInarModel, x_last: u64, h: u32, rule: PointRule) -> Result<u64> {
    Ok(forecast_distribution(model, x_last, h, FORECAST_TAIL)?.point(rule))
}

pub fn forecast_interval(model: &GeoInarModel, x_last: u64, h: u32, level: f64) -> Result<(u64, u64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("level {level} must lie in (0, 1)")));
    }
    Ok(forecast_distribution(model, x_last, h, FORECAST_TAIL)?.interval(level))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub h: u32,
    pub x_last: u64,
    pub pmf: Vec<f64>,
    pub tail_bound: f64,
    pub point: u64,
    pub rule: PointRule,
    pub interval: (u64, u64),
    pub level: f64,
}

/// Full forecast record. The interval is widened, if necessary, so that it
/// contains the point forecast.
pub fn forecast(
    model: &GeoInarModel,
    x_last: u64,
    h: u32,
    rule: PointRule,
    level: f64,
    tail: f64,
) -> Result<ForecastResult> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("level {level} must lie in (0, 1)")));
    }
    let pmf = forecast_distribution(model, x_last, h, tail)?;
    let point = pmf.point(rule);
    let (lo, hi) = pmf.interval(level);
    Ok(ForecastResult {
        h,
        x_last,
        point,
        rule,
        interval: (lo.min(point), hi.max(point)),
        level,
        tail_bound: tail,
        pmf: pmf.pmf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastStep {
    /// Zero-based index of the forecast observation.
    pub t: usize,
    pub previous: u64,
    pub observed: u64,
    pub predicted: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Backtest {
    pub pmad: f64,
    /// Percentage of exact hits.
    pub ptp: f64,
    pub steps: Vec<ForecastStep>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit: Option<FitResult>,
}

/// `(PMAD, PTP)` of integer forecasts against observations.
pub fn forecast_accuracy(observed: &[u64], predicted: &[u64]) -> Result<(f64, f64)> {
    if observed.is_empty() || observed.len() != predicted.len() {
        return Err(invalid("accuracy needs equally long, non-empty sequences"));
    }
    let m = observed.len() as f64;
    let pmad = observed
        .iter()
        .zip(predicted)
        .map(|(&o, &p)| (o as f64 - p as f64).abs())
        .sum::<f64>()
        / m;
    let hits = observed.iter().zip(predicted).filter(|(o, p)| o == p).count();
    Ok((pmad, 100.0 * hits as f64 / m))
}

/// Rolling one-step forecasts of `x_{n_train}, ..., x_{n-1}` (zero-based)
/// under a fixed model.
pub fn backtest_with_model(
    model: &dyn CountModel,
    series: &CountSeries,
    n_train: usize,
    rule: PointRule,
) -> Result<Backtest> {
    let xs = series.values();
    if n_train < 1 || n_train >= xs.len() {
        return Err(invalid(format!(
            "training length {n_train} leaves an empty test window (n = {})",
            xs.len()
        )));
    }
    let steps = (n_train..xs.len())
        .map(|t| {
            Ok(ForecastStep {
                t,
                previous: xs[t - 1],
                observed: xs[t],
                predicted: one_step_distribution(model, xs[t - 1], FORECAST_TAIL)?.point(rule),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let obs: Vec<u64> = steps.iter().map(|s| s.observed).collect();
    let pred: Vec<u64> = steps.iter().map(|s| s.predicted).collect();
    let (pmad, ptp) = forecast_accuracy(&obs, &pred)?;
    Ok(Backtest {
        pmad,
        ptp,
        steps,
        fit: None,
    })
}

/// Fits on the first `n_train` observations once, then forecasts the rest.
pub fn backtest(
    series: &CountSeries,
    n_train: usize,
    kind: ModelKind,
    method: Method,
    rule: PointRule,
) -> Result<Backtest> {
    if n_train <= 2 || n_train >= series.len() {
        return Err(invalid(format!(
            "training length must satisfy 2 < n_train < n (got {n_train}, n = {})",
            series.len()
        )));
    }
    let (fit, model) = fit_model(kind, method, &series.head(n_train)?)?;
    let mut bt = backtest_with_model(model.as_ref(), series, n_train, rule)?;
    bt.fit = Some(fit);
    Ok(bt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{geo_pmf, GeoParams};
    use crate::process::{conditional_mean, conditional_variance};

    fn fitted() -> GeoInarModel {
        GeoInarModel::new(1.4239, 0.3137).unwrap()
    }

    #[test]
    fn row_zero_is_innovation_law() {
        let m = GeoInarModel::new(4.0, 0.5).unwrap();
        let p = forecast_distribution(&m, 0, 1, 1e-12).unwrap();
        let g = GeoParams::new(2.0).unwrap();
        for (j, v) in p.pmf.iter().enumerate() {
            assert!((v - geo_pmf(g, j as u64)).abs() < 1e-14);
        }
        assert!(p.pmf.iter().sum::<f64>() >= 1.0 - 1e-12);
    }

    #[test]
    fn moments_match_closed_forms() {
        let m = GeoInarModel::new(3.0, 0.6).unwrap();
        for h in 1..=5 {
            for x in [0u64, 2, 7, 20] {
                let p = forecast_distribution(&m, x, h, 1e-14).unwrap();
                assert!((p.mean() - conditional_mean(&m, x, h)).abs() < 1e-6);
                assert!((p.variance() - conditional_variance(&m, x, h)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn long_horizon_is_stationary() {
        let m = fitted();
        let p = forecast_distribution(&m, 7, 30, 1e-14).unwrap();
        let g = GeoParams::new(1.4239).unwrap();
        for (j, v) in p.pmf.iter().enumerate() {
            assert!((v - geo_pmf(g, j as u64)).abs() < 1e-6);
        }
        assert_eq!(point_forecast(&m, 7, 30, PointRule::Median).unwrap(), 1);
    }

    #[test]
    fn mode_of_small_innovation() {
        let m = GeoInarModel::new(1.0, 0.3).unwrap();
        assert_eq!(point_forecast(&m, 0, 1, PointRule::Mode).unwrap(), 0);
    }

    #[test]
    fn median_minimises_absolute_loss() {
        let m = GeoInarModel::new(5.0, 0.6).unwrap();
        for x in [0u64, 3, 12] {
            let p = forecast_distribution(&m, x, 2, 1e-14).unwrap();
            let loss = |c: u64| -> f64 {
                p.pmf
                    .iter()
                    .enumerate()
                    .map(|(j, q)| (j as f64 - c as f64).abs() * q)
                    .sum()
            };
            let best = (0..p.pmf.len() as u64)
                .min_by(|a, b| loss(*a).total_cmp(&loss(*b)))
                .unwrap();
            assert!((loss(best) - loss(p.median())).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_brackets_median() {
        let m = GeoInarModel::new(5.0, 0.6).unwrap();
        for x in [0u64, 5, 15] {
            let med = point_forecast(&m, x, 1, PointRule::Median).unwrap();
            let (lo, hi) = forecast_interval(&m, x, 1, 0.9).unwrap();
            assert!(lo <= med && med <= hi);
            let (lo, hi) = forecast_interval(&m, x, 1, 1e-9).unwrap();
            assert!(lo == med && hi == med);
        }
        assert!(forecast_interval(&m, 1, 1, 1.0).is_err());
    }

    #[test]
    fn perfect_forecasts() {
        let (pmad, ptp) = forecast_accuracy(&[2, 2, 2], &[2, 2, 2]).unwrap();
        assert_eq!((pmad, ptp), (0.0, 100.0));
        let (pmad, ptp) = forecast_accuracy(&[1, 3, 0, 2], &[1, 1, 1, 1]).unwrap();
        assert_eq!((pmad, ptp), (1.0, 25.0));
    }

    #[test]
    fn backtest_needs_test_window() {
        let s = CountSeries::new(vec![1, 2, 0, 3, 1]).unwrap();
        assert!(backtest(&s, 5, ModelKind::Geoinar, Method::Cls, PointRule::Median).is_err());
        let bt = backtest_with_model(&fitted(), &s, 3, PointRule::Median).unwrap();
        assert_eq!(bt.steps.len(), 2);
    }
}
