//! Conditional least squares, Yule-Walker and maximum likelihood fits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::{autocorrelation, inverse_2x2, normal_quantile};
use crate::operator::GeoInarModel;
use crate::optimize::{nelder_mead, numeric_hessian, NelderMeadOptions};
use crate::process::{CountSeries, StepKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Geoinar,
    Pinar,
    Inarch,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::Geoinar => "Geo-INAR",
            ModelKind::Pinar => "PINAR",
            ModelKind::Inarch => "INARCH",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Cls,
    Yw,
    Ml,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Cls => "CLS",
            Method::Yw => "YW",
            Method::Ml => "ML",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cls" => Ok(Method::Cls),
            "yw" => Ok(Method::Yw),
            "ml" => Ok(Method::Ml),
            other => Err(invalid(format!("unknown estimation method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Point estimates, standard errors and Wald intervals for `(mu, alpha)`.
///
/// For INARCH fits `mu_hat` is the marginal mean `beta / (1 - alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelKind,
    pub method: Method,
    pub mu_hat: f64,
    pub alpha_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub se_mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub se_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_mu: Option<Interval>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ci_alpha: Option<Interval>,
    pub level: f64,
    /// Log-likelihood at the estimates; absent when they lie outside the
    /// parameter space.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub loglik: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub aic: Option<f64>,
    pub n: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl FitResult {
    /// The fitted Geo-INAR model, if the estimates are admissible.
    pub fn geoinar(&self) -> Result<GeoInarModel> {
        GeoInarModel::new(self.mu_hat, self.alpha_hat)
    }

    /// Recomputes the intervals at another confidence level.
    pub fn with_level(mut self, level: f64) -> Self {
        self.level = level;
        self.ci_mu = self.se_mu.map(|se| confidence_interval(self.mu_hat, se, level));
        self.ci_alpha = self
            .se_alpha
            .map(|se| confidence_interval(self.alpha_hat, se, level));
        self
    }
}

pub const DEFAULT_LEVEL: f64 = 0.95;

#[allow(clippy::too_many_arguments)]
pub(crate) fn assemble(
    model: ModelKind,
    method: Method,
    mu_hat: f64,
    alpha_hat: f64,
    se: Option<(f64, f64)>,
    loglik: Option<f64>,
    n: usize,
    warnings: Vec<String>,
) -> FitResult {
    FitResult {
        model,
        method,
        mu_hat,
        alpha_hat,
        se_mu: se.map(|s| s.0),
        se_alpha: se.map(|s| s.1),
        ci_mu: None,
        ci_alpha: None,
        level: DEFAULT_LEVEL,
        loglik,
        aic: loglik.map(|l| crate::diagnostics::aic(l, 2)),
        n,
        warnings,
    }
    .with_level(DEFAULT_LEVEL)
}

/// Wald interval `estimate +- z se`, with the lower end floored at zero.
pub fn confidence_interval(estimate: f64, se: f64, level: f64) -> Interval {
    let z = normal_quantile(0.5 * (1.0 + level));
    Interval {
        lower: (estimate - z * se).max(0.0),
        upper: estimate + z * se,
    }
}

fn check_len(series: &CountSeries, min: usize) -> Result<()> {
    if series.len() < min {
        return Err(invalid(format!(
            "series has {} observations, at least {min} required",
            series.len()
        )));
    }
    Ok(())
}

/// Closed-form minimiser of `Q_n = sum (x_t - alpha x_{t-1} - (1 - alpha) mu)^2`,
/// returned as `(mu, alpha)`.
pub fn cls_estimates(xs: &[u64]) -> Result<(f64, f64)> {
    if xs.len() < 3 {
        return Err(invalid("CLS needs at least 3 observations"));
    }
    let m = (xs.len() - 1) as f64;
    let (mut s_cur, mut s_prev, mut s_cross, mut s_prev2) = (0.0, 0.0, 0.0, 0.0);
    for w in xs.windows(2) {
        let (p, c) = (w[0] as f64, w[1] as f64);
        s_cur += c;
        s_prev += p;
        s_cross += c * p;
        s_prev2 += p * p;
    }
    let denom = s_prev2 - s_prev * s_prev / m;
    if denom.abs() <= 1e-12 * s_prev2.max(1.0) {
        return Err(Error::DegenerateData(
            "lagged values have zero variance; CLS is undefined".into(),
        ));
    }
    let alpha = (s_cross - s_cur * s_prev / m) / denom;
    if alpha == 1.0 {
        return Err(Error::DegenerateData("CLS slope equals one".into()));
    }
    let mu = (s_cur - alpha * s_prev) / (m * (1.0 - alpha));
    Ok((mu, alpha))
}

/// Moment estimates `(mean, lag-1 autocorrelation)`.
pub fn yw_estimates(xs: &[u64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(invalid("Yule-Walker needs at least 2 observations"));
    }
    let v: Vec<f64> = xs.iter().map(|&x| x as f64).collect();
    if v.iter().all(|&x| x == v[0]) {
        return Err(Error::DegenerateData(
            "series has zero sample variance".into(),
        ));
    }
    Ok((crate::numeric::mean(&v), autocorrelation(&v, 1)))
}

fn admissibility_warnings(mu: f64, alpha: f64) -> Vec<String> {
    let mut w = Vec::new();
    if !(mu > 0.0) {
        w.push(format!("mu estimate {mu:.6} is not positive"));
    }
    if !(alpha > 0.0 && alpha < GeoInarModel::alpha_upper(mu.max(0.0))) {
        w.push(format!(
            "alpha estimate {alpha:.6} lies outside (0, mu/(1+mu))"
        ));
    }
    w
}

/// Standard errors from the CLS asymptotic covariance at `(mu, alpha)`,
/// when that matrix is a valid covariance there.
fn cls_standard_errors(mu: f64, alpha: f64, n: usize) -> Option<(f64, f64)> {
    if !(mu > 0.0 && alpha > 0.0 && alpha < 1.0) {
        return None;
    }
    let s = cls_covariance_raw(mu, alpha);
    let (v1, v2) = (s[0][0] / n as f64, s[1][1] / n as f64);
    (v1 >= 0.0 && v2 >= 0.0 && v1.is_finite() && v2.is_finite()).then(|| (v1.sqrt(), v2.sqrt()))
}

fn moment_fit(series: &CountSeries, method: Method, mu: f64, alpha: f64) -> FitResult {
    let mut warnings = admissibility_warnings(mu, alpha);
    let se = cls_standard_errors(mu, alpha, series.len());
    if se.is_none() {
        warnings.push("standard errors unavailable at these estimates".into());
    }
    let loglik = GeoInarModel::new(mu, alpha)
        .ok()
        .map(|m| log_likelihood(&m, series));
    assemble(ModelKind::Geoinar, method, mu, alpha, se, loglik, series.len(), warnings)
}

pub fn fit_cls(series: &CountSeries) -> Result<FitResult> {
    check_len(series, 3)?;
    let (mu, alpha) = cls_estimates(series.values())?;
    Ok(moment_fit(series, Method::Cls, mu, alpha))
}

/// Yule-Walker fit; standard errors reuse the CLS covariance, to which the
/// estimator is asymptotically equivalent.
pub fn fit_yw(series: &CountSeries) -> Result<FitResult> {
    check_len(series, 2)?;
    let (mu, alpha) = yw_estimates(series.values())?;
    Ok(moment_fit(series, Method::Yw, mu, alpha))
}

/// Transition counts grouped by the previous state.
#[derive(Debug, Clone)]
pub(crate) struct TransitionCounts {
    pub first: u64,
    /// `prev -> (largest next value, [(next, count)])`.
    pub rows: BTreeMap<u64, (u64, Vec<(u64, u32)>)>,
}

impl TransitionCounts {
    pub(crate) fn new(xs: &[u64]) -> Self {
        let mut tmp: BTreeMap<u64, BTreeMap<u64, u32>> = BTreeMap::new();
        for w in xs.windows(2) {
            *tmp.entry(w[0]).or_default().entry(w[1]).or_insert(0) += 1;
        }
        let rows = tmp
            .into_iter()
            .map(|(i, m)| {
                let jmax = *m.keys().next_back().unwrap();
                (i, (jmax, m.into_iter().collect()))
            })
            .collect();
        Self {
            first: xs.first().copied().unwrap_or(0),
            rows,
        }
    }

    /// `sum_t ln p(x_t | x_{t-1})` given a row generator `ln_row(i, jmax)`.
    pub(crate) fn sum_rows<F: Fn(u64, u64) -> Vec<f64>>(&self, ln_row: F) -> f64 {
        self.rows
            .iter()
            .map(|(&i, (jmax, cells))| {
                let row = ln_row(i, *jmax);
                cells
                    .iter()
                    .map(|&(j, c)| c as f64 * row[j as usize])
                    .sum::<f64>()
            })
            .sum()
    }
}

fn geo_first_term(mu: f64, x1: u64) -> f64 {
    x1 as f64 * mu.ln() - (x1 as f64 + 1.0) * mu.ln_1p()
}

fn log_likelihood_counts(model: &GeoInarModel, counts: &TransitionCounts) -> f64 {
    let kernel = StepKernel::new(model, 1);
    geo_first_term(model.mu(), counts.first) + counts.sum_rows(|i, jmax| kernel.ln_row(i, jmax))
}

/// `ln Geo(mu)(x_1) + sum_{t>=2} ln p_{x_{t-1}, x_t}`.
pub fn log_likelihood(model: &GeoInarModel, series: &CountSeries) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    log_likelihood_counts(model, &TransitionCounts::new(series.values()))
}

#[derive(Debug, Clone, Copy)]
pub struct MlOptions {
    /// Starting `(mu, alpha)`; CLS estimates pulled into the interior when absent.
    pub init: Option<(f64, f64)>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MlOptions {
    fn default() -> Self {
        Self {
            init: None,
            tol: 1e-10,
            max_iter: 2000,
        }
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Working coordinates beyond this magnitude are treated as infeasible, which
/// keeps the simplex bounded when the optimum sits on the boundary.
const WORK_BOUND: f64 = 30.0;

/// Maximises a two-parameter log-likelihood over unconstrained working
/// coordinates. Returns the natural parameters, the maximum and the number of
/// simplex iterations.
pub(crate) fn maximize<L, T>(
    loglik: L,
    to_natural: T,
    start: [f64; 2],
    opts: &MlOptions,
) -> Result<((f64, f64), f64)>
where
    L: Fn(f64, f64) -> f64,
    T: Fn(&[f64]) -> (f64, f64),
{
    let objective = |w: &[f64]| {
        if w.iter().any(|v| v.abs() > WORK_BOUND) {
            return f64::INFINITY;
        }
        let (a, b) = to_natural(w);
        -loglik(a, b)
    };
    let nm = NelderMeadOptions {
        ftol: opts.tol,
        xtol: 1e-6,
        max_iter: opts.max_iter,
        initial_step: 0.25,
    };
    let convert = |e: Error| match e {
        Error::Optimization {
            iterations,
            best_point,
            best_value,
        } => {
            let (a, b) = to_natural(&best_point);
            Error::Optimization {
                iterations,
                best_point: vec![a, b],
                best_value: -best_value,
            }
        }
        other => other,
    };
    let first = nelder_mead(objective, &start, nm).map_err(convert)?;
    // A restart from the optimum guards against a collapsed simplex.
    let restart = NelderMeadOptions {
        initial_step: 0.05,
        ..nm
    };
    let second = nelder_mead(objective, &first.point, restart).map_err(convert)?;
    let best = if second.value <= first.value { second } else { first };
    Ok((to_natural(&best.point), -best.value))
}

/// Standard errors from the inverse observed information of `loglik` at `theta`.
pub(crate) fn observed_information_se<L>(loglik: L, theta: (f64, f64)) -> Option<(f64, f64)>
where
    L: Fn(f64, f64) -> f64,
{
    let neg = |x: &[f64]| -loglik(x[0], x[1]);
    let h = numeric_hessian(neg, &[theta.0, theta.1], 1e-4);
    if h.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    let inv = inverse_2x2([[h[0][0], h[0][1]], [h[1][0], h[1][1]]])?;
    (h[0][0] > 0.0 && inv[0][0] > 0.0 && inv[1][1] > 0.0)
        .then(|| (inv[0][0].sqrt(), inv[1][1].sqrt()))
}

fn geo_to_natural(w: &[f64]) -> (f64, f64) {
    let mu = w[0].exp();
    (mu, GeoInarModel::alpha_upper(mu) * sigmoid(w[1]))
}

fn geo_loglik_fn(counts: &TransitionCounts) -> impl Fn(f64, f64) -> f64 + '_ {
    move |mu, alpha| match GeoInarModel::new(mu, alpha) {
        Ok(m) => log_likelihood_counts(&m, counts),
        Err(_) => f64::NAN,
    }
}

/// Default ML starting point: CLS (else YW) estimates with `mu` kept positive
/// and `alpha` pulled into `[0.05, 0.95]` of its admissible range.
fn default_start(xs: &[u64]) -> Result<(f64, f64)> {
    let (mu, alpha) = cls_estimates(xs).or_else(|_| yw_estimates(xs))?;
    let mu = if mu > 0.0 && mu.is_finite() {
        mu
    } else {
        xs.iter().sum::<u64>() as f64 / xs.len() as f64
    };
    if !(mu > 0.0) {
        return Err(Error::DegenerateData("series has zero mean".into()));
    }
    let upper = GeoInarModel::alpha_upper(mu);
    let ratio = (alpha / upper).clamp(0.05, 0.95);
    Ok((mu, ratio * upper))
}

/// ML point estimate and maximised log-likelihood, without standard errors.
pub fn ml_estimates(series: &CountSeries, opts: &MlOptions) -> Result<(GeoInarModel, f64)> {
    check_len(series, 3)?;
    let xs = series.values();
    let (mu0, alpha0) = match opts.init {
        Some(p) => p,
        None => default_start(xs)?,
    };
    let model0 = GeoInarModel::new(mu0, alpha0)?;
    let counts = TransitionCounts::new(xs);
    let start = [
        model0.mu().ln(),
        logit(model0.alpha() / GeoInarModel::alpha_upper(model0.mu())),
    ];
    let ((mu, alpha), ll) = maximize(geo_loglik_fn(&counts), geo_to_natural, start, opts)?;
    Ok((GeoInarModel::new(mu, alpha)?, ll))
}

pub fn fit_ml(series: &CountSeries, opts: &MlOptions) -> Result<FitResult> {
    let (model, ll) = ml_estimates(series, opts)?;
    let mut warnings = Vec::new();
    let ratio = model.alpha() / GeoInarModel::alpha_upper(model.mu());
    if !(1e-6..=1.0 - 1e-6).contains(&ratio) {
        warnings.push("alpha estimate is at the boundary of the parameter space".into());
    }
    let se = ml_standard_errors(series, &model);
    if se.is_none() {
        warnings.push("observed information is not positive definite; standard errors omitted".into());
    }
    Ok(assemble(
        ModelKind::Geoinar,
        Method::Ml,
        model.mu(),
        model.alpha(),
        se,
        Some(ll),
        series.len(),
        warnings,
    ))
}

/// Negative Hessian of the log-likelihood in `(mu, alpha)`, by Richardson-refined
/// central differences.
pub fn ml_observed_information(series: &CountSeries, model: &GeoInarModel) -> [[f64; 2]; 2] {
    let counts = TransitionCounts::new(series.values());
    let ll = geo_loglik_fn(&counts);
    let neg = |x: &[f64]| -ll(x[0], x[1]);
    let h = numeric_hessian(neg, &[model.mu(), model.alpha()], 1e-4);
    [[h[0][0], h[0][1]], [h[1][0], h[1][1]]]
}

fn ml_standard_errors(series: &CountSeries, model: &GeoInarModel) -> Option<(f64, f64)> {
    let counts = TransitionCounts::new(series.values());
    observed_information_se(geo_loglik_fn(&counts), (model.mu(), model.alpha()))
}

fn cls_covariance_raw(mu: f64, alpha: f64) -> [[f64; 2]; 2] {
    let var_g = (1.0 + 2.0 * mu) * (1.0 - alpha) * alpha;
    let mu_eps = (1.0 - alpha) * mu;
    let var_eps = mu_eps * (1.0 + mu_eps);
    let s11 = mu * (1.0 + mu) * (1.0 + alpha) / (1.0 - alpha);
    let s12 = (1.0 + 2.0 * mu) * alpha;
    let s22 = ((1.0 + 3.0 * mu) * var_g + var_eps) / (mu * (1.0 + mu));
    [[s11, s12], [s12, s22]]
}

/// Asymptotic covariance of `sqrt(n) (theta_cls - theta)`, ordered `(mu, alpha)`.
pub fn cls_asymptotic_covariance(model: &GeoInarModel) -> [[f64; 2]; 2] {
    cls_covariance_raw(model.mu(), model.alpha())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{simulate, transition_pmf, InitialState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sim(mu: f64, alpha: f64, n: usize, seed: u64) -> CountSeries {
        let m = GeoInarModel::new(mu, alpha).unwrap();
        simulate(&m, n, &mut ChaCha8Rng::seed_from_u64(seed), InitialState::Stationary).unwrap()
    }

    #[test]
    fn covariance_entries() {
        let s = cls_asymptotic_covariance(&GeoInarModel::new(5.0, 0.5).unwrap());
        assert!((s[0][0] - 90.0).abs() < 1e-12);
        assert!((s[0][1] - 5.5).abs() < 1e-12);
        assert!((s[1][1] - 52.75 / 30.0).abs() < 1e-12);
        assert_eq!(s[0][1], s[1][0]);
    }

    #[test]
    fn intervals() {
        let ci = confidence_interval(1.4239, 0.2784, 0.95);
        assert!((ci.lower - 0.8782).abs() < 5e-5 && (ci.upper - 1.9696).abs() < 5e-5);
        let ci = confidence_interval(0.3137, 0.1178, 0.95);
        assert!((ci.lower - 0.0828).abs() < 5e-5 && (ci.upper - 0.5446).abs() < 5e-5);
        let ci = confidence_interval(2.0, 0.0, 0.95);
        assert_eq!((ci.lower, ci.upper), (2.0, 2.0));
        assert_eq!(confidence_interval(0.1, 0.2, 0.95).lower, 0.0);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s = CountSeries::new(vec![3, 3, 3, 3]).unwrap();
        assert!(matches!(fit_cls(&s), Err(Error::DegenerateData(_))));
        assert!(matches!(fit_yw(&s), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn yw_two_points() {
        let f = fit_yw(&CountSeries::new(vec![0, 1]).unwrap()).unwrap();
        assert_eq!(f.mu_hat, 0.5);
        assert_eq!(f.alpha_hat, -0.5);
        assert!(!f.warnings.is_empty());
    }

    #[test]
    fn single_observation_likelihood() {
        let m = GeoInarModel::new(1.0, 0.3).unwrap();
        let ll = log_likelihood(&m, &CountSeries::new(vec![0]).unwrap());
        assert!((ll - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn likelihood_matches_term_by_term() {
        let s = sim(2.0, 0.4, 300, 11);
        let m = GeoInarModel::new(2.3, 0.35).unwrap();
        let xs = s.values();
        let mut direct = xs[0] as f64 * 2.3f64.ln() - (xs[0] as f64 + 1.0) * 3.3f64.ln();
        for w in xs.windows(2) {
            direct += transition_pmf(&m, w[0], w[1]).ln();
        }
        assert!((log_likelihood(&m, &s) - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn cls_recovers_parameters() {
        let s = sim(5.0, 0.5, 100_000, 3);
        let f = fit_cls(&s).unwrap();
        assert!((f.alpha_hat - 0.5).abs() < 0.02, "{f:?}");
        assert!((f.mu_hat - 5.0).abs() < 0.15, "{f:?}");
        assert!(f.se_mu.unwrap() > 0.0 && f.ci_alpha.unwrap().contains(f.alpha_hat));
    }

    #[test]
    fn cls_equals_numeric_minimiser() {
        let s = sim(3.0, 0.4, 200, 5);
        let xs: Vec<f64> = s.as_f64();
        let q = |t: &[f64]| -> f64 {
            xs.windows(2)
                .map(|w| (w[1] - t[1] * w[0] - (1.0 - t[1]) * t[0]).powi(2))
                .sum()
        };
        // coarse grid, then simplex refinement
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for a in 0..50 {
            for m in 0..50 {
                let t = [1.0 + 0.1 * m as f64, 0.02 * a as f64];
                let v = q(&t);
                if v < best.0 {
                    best = (v, t);
                }
            }
        }
        let opts = NelderMeadOptions {
            ftol: 1e-15,
            xtol: 1e-10,
            max_iter: 10_000,
            initial_step: 0.05,
        };
        let num = nelder_mead(q, &best.1, opts).unwrap();
        let (mu, alpha) = cls_estimates(s.values()).unwrap();
        assert!((num.point[0] - mu).abs() < 1e-6, "{} vs {mu}", num.point[0]);
        assert!((num.point[1] - alpha).abs() < 1e-6);
    }

    #[test]
    fn ml_is_a_local_maximum_and_dominates_cls() {
        let s = sim(5.0, 0.5, 500, 8);
        let f = fit_ml(&s, &MlOptions::default()).unwrap();
        let m = f.geoinar().unwrap();
        let ll = f.loglik.unwrap();
        assert!((ll - log_likelihood(&m, &s)).abs() < 1e-9);
        for (dm, da) in [(1e-3, 0.0), (-1e-3, 0.0), (0.0, 1e-3), (0.0, -1e-3)] {
            let p = GeoInarModel::new(m.mu() + dm, m.alpha() + da).unwrap();
            assert!(log_likelihood(&p, &s) < ll);
        }
        let cls = fit_cls(&s).unwrap();
        assert!(ll >= cls.loglik.unwrap());
        assert!(f.alpha_hat < f.mu_hat / (1.0 + f.mu_hat));
        let info = ml_observed_information(&s, &m);
        assert!(((info[0][1] - info[1][0]) / info[0][1]).abs() < 1e-6);
        assert!(f.se_alpha.unwrap() > 0.0);
    }

    #[test]
    fn yw_close_to_cls() {
        let s = sim(5.0, 0.3, 10_000, 9);
        let a = fit_cls(&s).unwrap().alpha_hat;
        let b = fit_yw(&s).unwrap().alpha_hat;
        assert!((a - b).abs() < 0.01);
    }

    #[test]
    fn json_round_trip() {
        let s = sim(2.0, 0.3, 200, 1);
        let f = fit_cls(&s).unwrap();
        let j = serde_json::to_string(&f).unwrap();
        assert!(j.contains("\"method\":\"CLS\""));
        let back: FitResult = serde_json::from_str(&j).unwrap();
        assert_eq!(back, f);
    }
}
