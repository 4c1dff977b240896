//! Goodness-of-fit tools: dispersion test, mixed moments, AIC, PIT histogram,
//! residuals, jump chart and Ljung-Box.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, invalid, Error, Result};
use crate::model::CountModel;
use crate::numeric::{autocorrelation, mean, normal_sf, sample_variance};
use crate::operator::GeoInarModel;
use crate::process::CountSeries;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionTest {
    /// `S^2 / mean`.
    pub index: f64,
    pub statistic: f64,
    pub p_value: f64,
    /// Dependence parameter plugged into the null variance.
    pub alpha: f64,
}

/// One-sided test of equidispersion against overdispersion.
///
/// The statistic is `sqrt(n/2 (1 - a^2)/(1 + a^2)) (I_d - 1)` and is referred
/// to the standard normal. With `alpha_plugin = None`, `a` is the lag-1
/// sample autocorrelation.
pub fn dispersion_test(series: &CountSeries, alpha_plugin: Option<f64>) -> Result<DispersionTest> {
    if series.len() < 3 {
        return Err(invalid("dispersion test needs at least 3 observations"));
    }
    let index = dispersion_index(series.values())?;
    let alpha = alpha_plugin.unwrap_or_else(|| autocorrelation(&series.as_f64(), 1));
    Ok(dispersion_test_from_stats(series.len(), index, alpha))
}

/// `S^2 / mean` from exact integer sums, so the value does not depend on the
/// order of the observations.
pub fn dispersion_index(xs: &[u64]) -> Result<f64> {
    let n = xs.len() as u128;
    let s1: u128 = xs.iter().map(|&x| x as u128).sum();
    let s2: u128 = xs.iter().map(|&x| (x as u128) * (x as u128)).sum();
    if s1 == 0 {
        return Err(Error::DegenerateData("series mean is zero".into()));
    }
    // S^2 / mean = (n s2 - s1^2) / ((n - 1) s1)
    let num = (n * s2 - s1 * s1) as f64;
    Ok(num / ((n - 1) as f64 * s1 as f64))
}

/// The same test from summary statistics alone.
pub fn dispersion_test_from_stats(n: usize, index: f64, alpha: f64) -> DispersionTest {
    let a2 = alpha * alpha;
    let statistic = (n as f64 / 2.0 * (1.0 - a2) / (1.0 + a2)).sqrt() * (index - 1.0);
    DispersionTest {
        index,
        statistic,
        p_value: normal_sf(statistic),
        alpha,
    }
}

/// Sample average of `x_t * x_{t+s_1} * ... * x_{t+s_r}` over every `t`
/// for which all factors exist.
pub fn empirical_mixed_moment(series: &CountSeries, lags: &[usize]) -> Result<f64> {
    let n = series.len();
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if max_lag >= n {
        return Err(domain(format!("lag {max_lag} is not below the series length {n}")));
    }
    let xs = series.as_f64();
    let count = n - max_lag;
    let total: f64 = (0..count)
        .map(|t| lags.iter().fold(xs[t], |acc, &s| acc * xs[t + s]))
        .sum();
    Ok(total / count as f64)
}

/// Stationary `mu(k) = E(X_t X_{t+k})`, or `mu(k, l)` when `l` is given,
/// for an INAR(1)-type model with the stated marginal moments and lag-one
/// autocorrelation `alpha`.
pub fn mixed_moment_from(
    mean: f64,
    variance: f64,
    third_central: f64,
    alpha: f64,
    k: u32,
    l: Option<u32>,
) -> Result<f64> {
    let pw = |e: u32| alpha.powi(e as i32);
    match l {
        None => Ok(variance * pw(k) + mean * mean),
        Some(l) if l < k => Err(domain(format!("mixed moment needs k <= l, got ({k}, {l})"))),
        Some(l) => Ok((third_central - variance) * pw(l + k)
            + (1.0 + mean) * variance * pw(l)
            + mean * variance * (pw(l - k) + pw(k))
            + mean.powi(3)),
    }
}

/// `mu(k)` or `mu(k, l)` under the fitted Geo-INAR model, using the geometric
/// central moments `sigma^2 = mu(1+mu)` and `mu_3 = mu(1+mu)(1+2mu)`.
pub fn theoretical_mixed_moment(model: &GeoInarModel, k: u32, l: Option<u32>) -> Result<f64> {
    let mu = model.mu();
    let var = mu * (1.0 + mu);
    mixed_moment_from(mu, var, var * (1.0 + 2.0 * mu), model.alpha(), k, l)
}

/// `-2 loglik + 2 k`.
pub fn aic(loglik: f64, n_params: usize) -> f64 {
    -2.0 * loglik + 2.0 * n_params as f64
}

/// Conditional CDF values `(F(x_t - 1 | x_{t-1}), F(x_t | x_{t-1}))` for `t >= 2`.
fn conditional_cdf_pairs(model: &dyn CountModel, xs: &[u64]) -> Vec<(f64, f64)> {
    xs.windows(2)
        .map(|w| {
            let row = model.transition_row(w[0], w[1]);
            let upper: f64 = row.iter().sum::<f64>().min(1.0);
            let lower = (upper - row[w[1] as usize]).max(0.0);
            (lower, upper)
        })
        .collect()
}

/// Non-randomised PIT histogram: bin `j` holds `F_bar(j/J) - F_bar((j-1)/J)`
/// where `F_bar` averages the per-observation PIT distribution functions.
pub fn pit_histogram(model: &dyn CountModel, series: &CountSeries, nbins: usize) -> Result<Vec<f64>> {
    if nbins == 0 {
        return Err(invalid("PIT histogram needs at least one bin"));
    }
    if series.len() < 2 {
        return Err(invalid("PIT histogram needs at least 2 observations"));
    }
    let pairs = conditional_cdf_pairs(model, series.values());
    let f_bar = |u: f64| -> f64 {
        pairs
            .iter()
            .map(|&(lo, hi)| {
                if u <= lo {
                    0.0
                } else if u >= hi {
                    1.0
                } else {
                    (u - lo) / (hi - lo)
                }
            })
            .sum::<f64>()
            / pairs.len() as f64
    };
    let edges: Vec<f64> = (0..=nbins).map(|j| f_bar(j as f64 / nbins as f64)).collect();
    let mut bins: Vec<f64> = edges.windows(2).map(|e| (e[1] - e[0]).max(0.0)).collect();
    let total: f64 = bins.iter().sum();
    bins.iter_mut().for_each(|b| *b /= total);
    Ok(bins)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualAnalysis {
    /// `R_t = x_t - E(X_t | x_{t-1})`, `t = 2..n`.
    pub residuals: Vec<f64>,
    /// `R_t / sqrt(Var(X_t | x_{t-1}))`.
    pub pearson_residuals: Vec<f64>,
    /// Sample autocorrelations of `R_t` at lags `1..=max_lag`.
    pub residual_acf: Vec<f64>,
    pub pearson_variance: f64,
}

pub fn residual_analysis(
    model: &dyn CountModel,
    series: &CountSeries,
    max_lag: usize,
) -> Result<ResidualAnalysis> {
    if series.len() < 3 {
        return Err(invalid("residual analysis needs at least 3 observations"));
    }
    let (residuals, pearson_residuals): (Vec<f64>, Vec<f64>) = series
        .values()
        .windows(2)
        .map(|w| {
            let r = w[1] as f64 - model.conditional_mean(w[0]);
            (r, r / model.conditional_variance(w[0]).sqrt())
        })
        .unzip();
    let residual_acf = (1..=max_lag)
        .map(|k| autocorrelation(&residuals, k))
        .collect();
    Ok(ResidualAnalysis {
        pearson_variance: sample_variance(&pearson_residuals),
        residuals,
        pearson_residuals,
        residual_acf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpChart {
    /// `J_t = x_t - x_{t-1}`.
    pub jumps: Vec<i64>,
    /// `sqrt(Var(J_t)) = sqrt(2 Var(X) (1 - rho(1)))`.
    pub sigma_j: f64,
    pub lower_limit: f64,
    pub upper_limit: f64,
    pub fraction_within: f64,
}

pub fn jump_chart(model: &dyn CountModel, series: &CountSeries) -> Result<JumpChart> {
    if series.len() < 2 {
        return Err(invalid("jump chart needs at least 2 observations"));
    }
    let jumps: Vec<i64> = series
        .values()
        .windows(2)
        .map(|w| w[1] as i64 - w[0] as i64)
        .collect();
    let sigma_j = (2.0 * model.marginal_variance() * (1.0 - model.acf1())).sqrt();
    let limit = 3.0 * sigma_j;
    let within = jumps.iter().filter(|&&j| (j as f64).abs() <= limit).count();
    Ok(JumpChart {
        fraction_within: within as f64 / jumps.len() as f64,
        jumps,
        sigma_j,
        lower_limit: -limit,
        upper_limit: limit,
    })
}

/// Ljung-Box p-values for `m = 1..=max_lag`, each against chi-square with `m`
/// degrees of freedom.
pub fn ljung_box(residuals: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = residuals.len();
    if max_lag == 0 || 4 * max_lag >= n {
        return Err(domain(format!(
            "Ljung-Box max_lag {max_lag} must be positive and below n/4 (n = {n})"
        )));
    }
    let nf = n as f64;
    let mut q = 0.0;
    Ok((1..=max_lag)
        .map(|k| {
            let r = autocorrelation(residuals, k);
            q += r * r / (nf - k as f64);
            let stat = nf * (nf + 2.0) * q;
            ChiSquared::new(k as f64).unwrap().sf(stat).clamp(0.0, 1.0)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub quantity: String,
    pub empirical: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theoretical: Option<f64>,
}

/// Empirical summaries next to their model-implied values.
pub fn moment_table(model: &dyn CountModel, series: &CountSeries) -> Result<Vec<MomentRow>> {
    if series.len() < 4 {
        return Err(invalid("moment table needs at least 4 observations"));
    }
    let xs = series.as_f64();
    let n = xs.len() as f64;
    let m = mean(&xs);
    let s2 = sample_variance(&xs);
    let central = |r: i32| xs.iter().map(|x| (x - m).powi(r)).sum::<f64>() / n;
    let m2 = central(2);
    let skew = central(3) / m2.powf(1.5);
    let kurt = central(4) / (m2 * m2) - 3.0;
    let p0 = series.values().iter().filter(|&&x| x == 0).count() as f64 / n;

    let summary = model.stationary_summary();
    let (mu, alpha) = model.params();
    let var = model.marginal_variance();
    let third = summary.map(|s| s.skewness * s.variance.powf(1.5));
    let mixed = |k: u32, l: Option<u32>| -> Option<f64> {
        match l {
            None => mixed_moment_from(mu, var, 0.0, alpha, k, None).ok(),
            Some(_) => third.and_then(|t| mixed_moment_from(mu, var, t, alpha, k, l).ok()),
        }
    };

    let row = |q: &str, e: f64, t: Option<f64>| MomentRow {
        quantity: q.to_string(),
        empirical: e,
        theoretical: t,
    };
    Ok(vec![
        row("kappa1", m, Some(mu)),
        row("kappa2", s2, Some(var)),
        row("skew", skew, summary.map(|s| s.skewness)),
        row("kurt", kurt, summary.map(|s| s.excess_kurtosis)),
        row("I_d", s2 / m, Some(var / mu)),
        row("p0", p0, summary.map(|s| s.p0)),
        row("mu(1)", empirical_mixed_moment(series, &[1])?, mixed(1, None)),
        row("mu(2)", empirical_mixed_moment(series, &[2])?, mixed(2, None)),
        row("mu(1,1)", empirical_mixed_moment(series, &[1, 1])?, mixed(1, Some(1))),
        row("mu(1,2)", empirical_mixed_moment(series, &[1, 2])?, mixed(1, Some(2))),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub pearson_variance: f64,
    pub residual_acf: Vec<f64>,
    pub ljung_box_pvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub dispersion: DispersionTest,
    pub moment_table: Vec<MomentRow>,
    pub pit_bins: Vec<f64>,
    pub residual_stats: ResidualStats,
    pub jump_chart: JumpChart,
}

#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsOptions {
    pub bins: usize,
    pub max_lag: usize,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            bins: 10,
            max_lag: 10,
        }
    }
}

/// Every diagnostic for one fitted model. The residual lag count is reduced
/// on short series so that the Ljung-Box requirement `max_lag < n/4` holds.
pub fn diagnose(
    model: &dyn CountModel,
    series: &CountSeries,
    opts: DiagnosticsOptions,
) -> Result<DiagnosticsReport> {
    let resid = residual_analysis(model, series, opts.max_lag)?;
    let lags = opts
        .max_lag
        .min(resid.residuals.len().saturating_sub(1) / 4)
        .max(1);
    // Raw residuals are conditionally heteroscedastic, which inflates the
    // test's size; the Pearson residuals have unit conditional variance.
    let ljung = ljung_box(&resid.pearson_residuals, lags).unwrap_or_default();
    Ok(DiagnosticsReport {
        dispersion: dispersion_test(series, None)?,
        moment_table: moment_table(model, series)?,
        pit_bins: pit_histogram(model, series, opts.bins)?,
        residual_stats: ResidualStats {
            pearson_variance: resid.pearson_variance,
            residual_acf: resid.residual_acf,
            ljung_box_pvalues: ljung,
        },
        jump_chart: jump_chart(model, series)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{simulate, stationary_summary, transition_row, InitialState};
    use crate::distributions::{geo_pmf, GeoParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fitted() -> GeoInarModel {
        GeoInarModel::new(1.4239, 0.3137).unwrap()
    }

    #[test]
    fn dispersion_fixture() {
        let t = dispersion_test_from_stats(84, 2.3494, 0.2347);
        assert!(t.p_value < 1e-15, "{}", t.p_value);
        assert_eq!(dispersion_test_from_stats(84, 1.0, 0.2347).p_value, 0.5);
        assert_eq!(dispersion_test_from_stats(5, 1.0, 0.9).p_value, 0.5);
    }

    #[test]
    fn dispersion_is_reversal_invariant() {
        let s = CountSeries::new(vec![0, 3, 1, 4, 1, 5, 9, 2, 6]).unwrap();
        let mut r = s.values().to_vec();
        r.reverse();
        let r = CountSeries::new(r).unwrap();
        assert_eq!(
            dispersion_test(&s, Some(0.3)).unwrap().index,
            dispersion_test(&r, Some(0.3)).unwrap().index
        );
        assert!(dispersion_test(&CountSeries::new(vec![0, 0, 0]).unwrap(), None).is_err());
    }

    #[test]
    fn table_three_moments() {
        let m = fitted();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-3;
        assert!(close(theoretical_mixed_moment(&m, 1, None).unwrap(), 3.1102));
        assert!(close(theoretical_mixed_moment(&m, 2, None).unwrap(), 2.3671));
        assert!(close(theoretical_mixed_moment(&m, 1, Some(1)).unwrap(), 12.9346));
        assert!(close(theoretical_mixed_moment(&m, 1, Some(2)).unwrap(), 7.0969));
        let s = stationary_summary(&m);
        let m0 = theoretical_mixed_moment(&m, 0, None).unwrap();
        assert!((m0 - (s.variance + s.mean * s.mean)).abs() < 1e-12);
        assert!(theoretical_mixed_moment(&m, 2, Some(1)).is_err());
    }

    #[test]
    fn mixed_moment_matches_kernel() {
        let m = GeoInarModel::new(2.0, 0.4).unwrap();
        let k = 120u64;
        let g = GeoParams::new(2.0).unwrap();
        let mut total = 0.0;
        for i in 0..=k {
            let row = transition_row(&m, i, 1, k);
            for (j, p) in row.iter().enumerate() {
                total += (i * j as u64) as f64 * geo_pmf(g, i) * p;
            }
        }
        assert!((total - theoretical_mixed_moment(&m, 1, None).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn empirical_moments() {
        let s = CountSeries::new(vec![2, 2, 2, 2]).unwrap();
        assert_eq!(empirical_mixed_moment(&s, &[1]).unwrap(), 4.0);
        assert_eq!(empirical_mixed_moment(&s, &[1, 2]).unwrap(), 8.0);
        assert!(empirical_mixed_moment(&s, &[4]).is_err());
    }

    #[test]
    fn aic_values() {
        assert!((aic(-131.05, 2) - 266.10).abs() < 1e-9);
        assert_eq!(aic(0.0, 1), 2.0);
        assert!(aic(-10.0, 2) < aic(-11.0, 2));
    }

    #[test]
    fn sigma_j_fixture() {
        let s = CountSeries::new(vec![1, 1, 1, 1]).unwrap();
        let j = jump_chart(&fitted(), &s).unwrap();
        assert!((j.sigma_j - 2.1766).abs() < 5e-4);
        assert!(j.jumps.iter().all(|&x| x == 0));
        assert_eq!(j.fraction_within, 1.0);
    }

    #[test]
    fn pit_single_bin_and_normalisation() {
        let m = GeoInarModel::new(2.0, 0.4).unwrap();
        let s = simulate(&m, 200, &mut ChaCha8Rng::seed_from_u64(4), InitialState::Stationary).unwrap();
        assert_eq!(pit_histogram(&m, &s, 1).unwrap(), vec![1.0]);
        let bins = pit_histogram(&m, &s, 10).unwrap();
        assert!((bins.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(bins.iter().all(|&b| b >= 0.0));
    }

    #[test]
    fn residuals_under_true_model() {
        let m = GeoInarModel::new(3.0, 0.5).unwrap();
        let n = 10_000;
        let s = simulate(&m, n, &mut ChaCha8Rng::seed_from_u64(21), InitialState::Stationary).unwrap();
        let r = residual_analysis(&m, &s, 5).unwrap();
        let sd = sample_variance(&r.residuals).sqrt();
        assert!(mean(&r.residuals).abs() < 3.0 * sd / (n as f64).sqrt());
        assert!((r.pearson_variance - 1.0).abs() < 0.05, "{}", r.pearson_variance);
        assert!(r.residual_acf[0].abs() < 3.0 / (n as f64).sqrt());
        let j = jump_chart(&m, &s).unwrap();
        assert!(j.fraction_within >= 0.97);
    }

    #[test]
    fn ljung_box_detects_trend() {
        let xs: Vec<f64> = (0..200).map(|t| t as f64).collect();
        let p = ljung_box(&xs, 3).unwrap();
        assert!(p[0] < 1e-10);
        assert!(ljung_box(&xs, 50).is_err());
    }

    #[test]
    fn report_sections() {
        let m = fitted();
        let s = simulate(&m, 84, &mut ChaCha8Rng::seed_from_u64(2), InitialState::Stationary).unwrap();
        let rep = diagnose(&m, &s, DiagnosticsOptions::default()).unwrap();
        assert_eq!(rep.moment_table.len(), 10);
        assert_eq!(rep.pit_bins.len(), 10);
        assert!(rep.residual_stats.ljung_box_pvalues.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!((0.0..=1.0).contains(&rep.dispersion.p_value));
    }
}
